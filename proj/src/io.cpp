#include "frr/io.hpp"

#include "frr/error.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace frr {

std::size_t CsvTable::column(std::string_view name, std::string_view source) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ValidationError(std::string(source) + ": missing required column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text, std::string_view source) {
  CsvTable t;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false, any = false;
  int line = 1, row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = row.size() == 1 && row[0].empty();
    if (!blank) {
      if (t.header.empty()) {
        t.header = std::move(row);
      } else {
        t.rows.push_back(std::move(row));
        t.lines.push_back(row_line);
      }
    }
    row.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (!any) {
      row_line = line;
      any = true;
    }
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n') {
      end_row();
      ++line;
    } else if (ch != '\r') {
      field += ch;
      field_started = true;
    }
  }
  if (quoted) throw ValidationError(std::string(source) + ": unterminated quoted field starting near line " +
                                    std::to_string(row_line));
  if (any) end_row();
  if (t.header.empty()) throw ValidationError(std::string(source) + ": empty file (header row required)");
  for (auto& h : t.header) {
    const auto b = h.find_first_not_of(" \t");
    const auto e = h.find_last_not_of(" \t");
    h = b == std::string::npos ? std::string() : h.substr(b, e - b + 1);
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.rows[r].size() != t.header.size())
      throw ValidationError(std::string(source) + ": line " + std::to_string(t.lines[r]) + ": expected " +
                            std::to_string(t.header.size()) + " fields, found " + std::to_string(t.rows[r].size()));
  return t;
}

double parse_double(std::string_view text, std::string_view context) {
  std::string s(text);
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) throw ValidationError(std::string(context) + ": empty numeric field");
  s = s.substr(b, e - b + 1);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ValidationError(std::string(context) + ": '" + s + "' is not a finite number");
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

LabeledDataset parse_dataset(std::string_view data_csv, std::string_view response_csv, std::string_view data_source,
                             std::string_view response_source) {
  const CsvTable data = parse_csv(data_csv, data_source);
  const std::size_t c_subj = data.column("subject_id", data_source);
  const std::size_t c_pred = data.column("predictor_id", data_source);
  const std::size_t c_grid = data.column("grid_point", data_source);
  const std::size_t c_val = data.column("value", data_source);
  if (data.rows.empty()) throw ValidationError(std::string(data_source) + ": no data rows");

  LabeledDataset out;
  std::unordered_map<std::string, int> subj, pred;
  std::map<double, int> grid;
  struct Obs {
    int s, p;
    double t, v;
  };
  std::vector<Obs> obs;
  obs.reserve(data.rows.size());
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const auto& row = data.rows[r];
    const std::string ctx = std::string(data_source) + ": line " + std::to_string(data.lines[r]);
    if (row[c_subj].empty()) throw ValidationError(ctx + ": empty subject_id");
    if (row[c_pred].empty()) throw ValidationError(ctx + ": empty predictor_id");
    auto [si, s_new] = subj.try_emplace(row[c_subj], static_cast<int>(out.subject_ids.size()));
    if (s_new) out.subject_ids.push_back(row[c_subj]);
    auto [pi, p_new] = pred.try_emplace(row[c_pred], static_cast<int>(out.predictor_ids.size()));
    if (p_new) out.predictor_ids.push_back(row[c_pred]);
    const double t = parse_double(row[c_grid], ctx + ", column 'grid_point'");
    const double v = parse_double(row[c_val], ctx + ", column 'value'");
    grid.emplace(t, 0);
    obs.push_back({si->second, pi->second, t, v});
  }
  int idx = 0;
  for (auto& [t, i] : grid) {
    i = idx++;
    out.data.grid.push_back(t);
  }

  const auto n = static_cast<Eigen::Index>(out.subject_ids.size());
  const auto m = static_cast<Eigen::Index>(grid.size());
  const std::size_t p = out.predictor_ids.size();
  out.data.curves.assign(p, Matrix::Constant(n, m, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t r = 0; r < obs.size(); ++r) {
    const Obs& o = obs[r];
    double& cell = out.data.curves[static_cast<std::size_t>(o.p)](o.s, grid.at(o.t));
    if (!std::isnan(cell))
      throw ValidationError(std::string(data_source) + ": line " + std::to_string(data.lines[r]) +
                            ": duplicate observation for subject '" + out.subject_ids[static_cast<std::size_t>(o.s)] +
                            "', predictor '" + out.predictor_ids[static_cast<std::size_t>(o.p)] + "'");
    cell = o.v;
  }
  for (std::size_t j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index l = 0; l < m; ++l)
        if (std::isnan(out.data.curves[j](i, l)))
          throw ValidationError(std::string(data_source) + ": subject '" + out.subject_ids[static_cast<std::size_t>(i)] +
                                "', predictor '" + out.predictor_ids[j] + "' has no value at grid_point " +
                                format_double(out.data.grid[static_cast<std::size_t>(l)]));

  const CsvTable resp = parse_csv(response_csv, response_source);
  const std::size_t r_subj = resp.column("subject_id", response_source);
  const std::size_t r_y = resp.column("y", response_source);
  out.data.response = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < resp.rows.size(); ++r) {
    const std::string ctx = std::string(response_source) + ": line " + std::to_string(resp.lines[r]);
    const auto it = subj.find(resp.rows[r][r_subj]);
    if (it == subj.end()) throw ValidationError(ctx + ": subject '" + resp.rows[r][r_subj] + "' has no functional data");
    double& y = out.data.response[it->second];
    if (!std::isnan(y)) throw ValidationError(ctx + ": duplicate response for subject '" + resp.rows[r][r_subj] + "'");
    y = parse_double(resp.rows[r][r_y], ctx + ", column 'y'");
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::isnan(out.data.response[i]))
      throw ValidationError(std::string(response_source) + ": missing response for subject '" +
                            out.subject_ids[static_cast<std::size_t>(i)] + "'");
  out.data.validate();
  return out;
}

LabeledDataset load_dataset(const std::string& data_path, const std::string& response_path) {
  return parse_dataset(read_text_file(data_path), read_text_file(response_path), data_path, response_path);
}

Matrix parse_functional(std::string_view csv, const std::vector<std::string>& predictor_ids,
                        const std::vector<double>& grid, std::string_view source) {
  const CsvTable t = parse_csv(csv, source);
  const std::size_t c_pred = t.column("predictor_id", source);
  const std::size_t c_grid = t.column("grid_point", source);
  const std::size_t c_val = t.column("value", source);
  std::map<double, Eigen::Index> gidx;
  for (std::size_t l = 0; l < grid.size(); ++l) gidx.emplace(grid[l], static_cast<Eigen::Index>(l));

  const auto p = static_cast<Eigen::Index>(predictor_ids.size());
  const auto m = static_cast<Eigen::Index>(grid.size());
  Matrix x = Matrix::Constant(p, m, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(predictor_ids.size(), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = std::string(source) + ": line " + std::to_string(t.lines[r]);
    const auto it = std::find(predictor_ids.begin(), predictor_ids.end(), row[c_pred]);
    if (it == predictor_ids.end()) throw ValidationError(ctx + ": unknown predictor_id '" + row[c_pred] + "'");
    const double s = parse_double(row[c_grid], ctx + ", column 'grid_point'");
    const auto g = gidx.find(s);
    if (g == gidx.end())
      throw ValidationError(ctx + ": grid_point " + format_double(s) + " is not on the data grid");
    const auto j = static_cast<std::size_t>(it - predictor_ids.begin());
    seen[j] = true;
    double& cell = x(static_cast<Eigen::Index>(j), g->second);
    if (!std::isnan(cell)) throw ValidationError(ctx + ": duplicate value");
    cell = parse_double(row[c_val], ctx + ", column 'value'");
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!seen[static_cast<std::size_t>(j)]) {
      x.row(j).setZero();
      continue;
    }
    for (Eigen::Index l = 0; l < m; ++l)
      if (std::isnan(x(j, l)))
        throw ValidationError(std::string(source) + ": grid mismatch: predictor '" +
                              predictor_ids[static_cast<std::size_t>(j)] + "' has no value at grid_point " +
                              format_double(grid[static_cast<std::size_t>(l)]));
  }
  return x;
}

DatasetCsv format_dataset(const LabeledDataset& ds) {
  std::ostringstream d, r;
  d << "subject_id,predictor_id,grid_point,value\n";
  const FunctionalDataset& data = ds.data;
  for (int i = 0; i < data.num_subjects(); ++i)
    for (int j = 0; j < data.num_predictors(); ++j)
      for (int l = 0; l < data.num_grid(); ++l)
        d << ds.subject_ids[static_cast<std::size_t>(i)] << ',' << ds.predictor_ids[static_cast<std::size_t>(j)] << ','
          << format_double(data.grid[static_cast<std::size_t>(l)]) << ','
          << format_double(data.curves[static_cast<std::size_t>(j)](i, l)) << '\n';
  r << "subject_id,y\n";
  for (int i = 0; i < data.num_subjects(); ++i)
    r << ds.subject_ids[static_cast<std::size_t>(i)] << ',' << format_double(data.response[i]) << '\n';
  return {d.str(), r.str()};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace frr
