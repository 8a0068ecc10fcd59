#include "frr/report.hpp"

#include "frr/config.hpp"
#include "frr/error.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace frr {

using nlohmann::json;

namespace {

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& v) {
  return v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

const StudyReport* find_cell(const std::vector<StudyReport>& cells, int n, double sigma2, double rho) {
  for (const auto& c : cells)
    if (c.config.n == n && c.config.sigma2 == sigma2 && c.config.rho == rho) return &c;
  return nullptr;
}

}  // namespace

std::array<double, 3> pooled_log10_cn(const std::vector<StudyReport>& cells) {
  std::array<std::vector<double>, 3> pooled;
  for (const auto& cell : cells)
    for (const auto& r : cell.records)
      if (r.ok)
        for (std::size_t e = 0; e < 3; ++e) pooled[e].push_back(r.log10_cn[e]);
  return {median(pooled[0]), median(pooled[1]), median(pooled[2])};
}

std::string render_report_json(const StudyPlan& plan, const std::vector<StudyReport>& cells) {
  json j;
  j["config"] = json::parse(study_config_to_json(plan));
  j["cells"] = json::array();
  int failed = 0;
  for (const auto& c : cells) {
    json cell;
    cell["n"] = c.config.n;
    cell["rho"] = c.config.rho;
    cell["sigma2"] = c.config.sigma2;
    cell["replications"] = c.config.replications;
    cell["succeeded"] = c.succeeded;
    cell["failed"] = c.failed;
    for (EstimatorKind k : kEstimators) {
      const EstimatorSummary& s = c.estimators[index_of(k)];
      cell["estimators"][std::string(to_string(k))] = {{"imse_mean", number(s.imse_mean)},
                                                       {"imse_sd", number(s.imse_sd)},
                                                       {"log10_cn_median", number(s.log10_cn_median)}};
    }
    cell["partition"] = {{"tpr_mean", number(c.tpr_mean)}, {"fpr_mean", number(c.fpr_mean)}};
    failed += c.failed;
    j["cells"].push_back(cell);
  }
  const auto pooled = pooled_log10_cn(cells);
  for (EstimatorKind k : kEstimators)
    j["pooled"]["log10_cn_median"][std::string(to_string(k))] = number(pooled[index_of(k)]);
  j["failed_replications"] = failed;
  return j.dump(2) + "\n";
}

std::string render_replications_csv(const std::vector<StudyReport>& cells) {
  std::ostringstream out;
  out << "n,rho,sigma2,replication,seed,ok";
  for (const char* metric : {"imse", "log10_cn", "lambda"})
    for (EstimatorKind k : kEstimators) out << ',' << metric << '_' << to_string(k);
  out << ",tpr,fpr,selected,partition_iterations,partition_converged,error\n";
  for (const auto& c : cells)
    for (const auto& r : c.records) {
      out << c.config.n << ',' << format_double(c.config.rho) << ',' << format_double(c.config.sigma2) << ','
          << r.index << ',' << r.seed << ',' << (r.ok ? 1 : 0);
      for (const auto* arr : {&r.imse, &r.log10_cn, &r.lambda})
        for (double v : *arr) out << ',' << format_double(v);
      out << ',' << format_double(r.tpr) << ',' << format_double(r.fpr) << ',' << r.selected << ','
          << r.partition_iterations << ',' << (r.partition_converged ? 1 : 0) << ',' << csv_quote(r.error) << '\n';
    }
  return out.str();
}

std::vector<StudyReport> reports_from_replications_csv(std::string_view csv, const StudyPlan& plan) {
  const CsvTable t = parse_csv(csv, "replications.csv");
  std::map<std::tuple<int, double, double>, std::vector<ReplicationRecord>> grouped;
  const auto col = [&](const char* name) { return t.column(name, "replications.csv"); };
  const std::size_t cn = col("n"), crho = col("rho"), cs2 = col("sigma2"), crep = col("replication"),
                    cseed = col("seed"), cok = col("ok"), ctpr = col("tpr"), cfpr = col("fpr"),
                    csel = col("selected"), cit = col("partition_iterations"), cconv = col("partition_converged"),
                    cerr = col("error");
  for (const auto& row : t.rows) {
    ReplicationRecord r;
    r.index = std::stoi(row[crep]);
    r.seed = std::stoull(row[cseed]);
    r.ok = row[cok] == "1";
    for (EstimatorKind k : kEstimators) {
      const std::string suffix(to_string(k));
      const auto read = [&](const std::string& name) {
        const std::string& f = row[t.column(name + "_" + suffix, "replications.csv")];
        return f == "nan" || f == "-nan" ? std::numeric_limits<double>::quiet_NaN() : std::strtod(f.c_str(), nullptr);
      };
      r.imse[index_of(k)] = read("imse");
      r.log10_cn[index_of(k)] = read("log10_cn");
      r.lambda[index_of(k)] = read("lambda");
    }
    r.tpr = std::strtod(row[ctpr].c_str(), nullptr);
    r.fpr = std::strtod(row[cfpr].c_str(), nullptr);
    r.selected = std::stoi(row[csel]);
    r.partition_iterations = std::stoi(row[cit]);
    r.partition_converged = row[cconv] == "1";
    r.error = row[cerr];
    grouped[{std::stoi(row[cn]), parse_double(row[crho], "rho"), parse_double(row[cs2], "sigma2")}].push_back(r);
  }
  std::vector<StudyReport> out;
  for (const SimulationConfig& c : plan.cells()) {
    auto it = grouped.find({c.n, c.rho, c.sigma2});
    out.push_back(aggregate(c, it == grouped.end() ? std::vector<ReplicationRecord>{} : it->second));
  }
  return out;
}

std::string render_imse_table(const std::vector<StudyReport>& cells) {
  std::vector<double> ns, s2s, rhos;
  for (const auto& c : cells) {
    ns.push_back(c.config.n);
    s2s.push_back(c.config.sigma2);
    rhos.push_back(c.config.rho);
  }
  ns = unique_sorted(ns);
  s2s = unique_sorted(s2s);
  rhos = unique_sorted(rhos);
  std::ostringstream out;
  out << "n,model";
  for (double s2 : s2s)
    for (double rho : rhos) out << ",sigma2_" << label(s2) << "_rho_" << label(rho);
  out << '\n';
  for (double n : ns)
    for (EstimatorKind k : kEstimators) {
      out << static_cast<int>(n) << ',' << to_string(k);
      for (double s2 : s2s)
        for (double rho : rhos) {
          const StudyReport* c = find_cell(cells, static_cast<int>(n), s2, rho);
          out << ',' << (c ? format_double(c->estimators[index_of(k)].imse_mean) : std::string());
        }
      out << '\n';
    }
  return out.str();
}

std::string render_partition_table(const std::vector<StudyReport>& cells) {
  std::vector<double> ns, s2s, rhos;
  for (const auto& c : cells) {
    ns.push_back(c.config.n);
    s2s.push_back(c.config.sigma2);
    rhos.push_back(c.config.rho);
  }
  ns = unique_sorted(ns);
  s2s = unique_sorted(s2s);
  rhos = unique_sorted(rhos);
  std::ostringstream out;
  out << "n,sigma2";
  for (double rho : rhos) out << ",tpr_rho_" << label(rho) << ",fpr_rho_" << label(rho);
  out << '\n';
  for (double n : ns)
    for (double s2 : s2s) {
      out << static_cast<int>(n) << ',' << format_double(s2);
      for (double rho : rhos) {
        const StudyReport* c = find_cell(cells, static_cast<int>(n), s2, rho);
        out << ',' << (c ? format_double(c->tpr_mean) : std::string()) << ','
            << (c ? format_double(c->fpr_mean) : std::string());
      }
      out << '\n';
    }
  return out.str();
}

std::string render_cn_table(const std::vector<StudyReport>& cells) {
  const auto pooled = pooled_log10_cn(cells);
  std::ostringstream out;
  out << "model,log10_cn_median\n";
  for (EstimatorKind k : kEstimators) out << to_string(k) << ',' << format_double(pooled[index_of(k)]) << '\n';
  return out.str();
}

std::string render_coefficients_csv(const LabeledDataset& ds, const FitOutcome& fit) {
  std::ostringstream out;
  out << "estimator,predictor_id,grid_point,beta_hat\n";
  for (const auto& e : fit.estimators)
    for (int j = 0; j < ds.data.num_predictors(); ++j)
      for (int l = 0; l < ds.data.num_grid(); ++l)
        out << to_string(e.kind) << ',' << csv_quote(ds.predictor_ids[static_cast<std::size_t>(j)]) << ','
            << format_double(ds.data.grid[static_cast<std::size_t>(l)]) << ','
            << format_double(e.fit.beta_hat_grid(j, l)) << '\n';
  return out.str();
}

std::string render_gcv_trace_csv(const FitOutcome& fit) {
  std::ostringstream out;
  out << "estimator,lambda,log10_lambda,gcv,edf,chosen\n";
  for (const auto& e : fit.estimators)
    for (std::size_t i = 0; i < e.trace.grid.size(); ++i)
      out << to_string(e.kind) << ',' << format_double(e.trace.grid[i]) << ','
          << format_double(std::log10(e.trace.grid[i])) << ',' << format_double(e.trace.scores[i]) << ','
          << format_double(e.trace.edf[i]) << ',' << (static_cast<int>(i) == e.trace.chosen_index ? 1 : 0) << '\n';
  return out.str();
}

std::string render_fit_json(const LabeledDataset& ds, const FitOutcome& fit) {
  json j;
  j["n"] = ds.data.num_subjects();
  j["p"] = ds.data.num_predictors();
  j["grid_points"] = ds.data.num_grid();
  j["predictors"] = ds.predictor_ids;
  if (fit.partition) {
    const PartitionResult& p = *fit.partition;
    json rel = json::array(), nui = json::array();
    for (int r : p.relevant) rel.push_back(ds.predictor_ids[static_cast<std::size_t>(r)]);
    for (int r : p.nuisance) nui.push_back(ds.predictor_ids[static_cast<std::size_t>(r)]);
    j["partition"] = {{"relevant", rel},         {"nuisance", nui},          {"weights", p.weights},
                      {"iterations", p.iterations}, {"converged", p.converged}};
  }
  for (const auto& e : fit.estimators) {
    json est;
    est["lambda1"] = e.fit.lambda1 ? number(*e.fit.lambda1) : json(nullptr);
    est["lambda2"] = e.fit.lambda2 ? number(*e.fit.lambda2) : json(nullptr);
    est["lambda3"] = e.fit.lambda3 ? number(*e.fit.lambda3) : json(nullptr);
    est["edf"] = number(e.fit.edf);
    est["residual_ss"] = number(e.fit.residual_ss);
    est["sigma2_hat"] = number(e.sigma2);
    est["intercept"] = number(e.system.y_mean);
    est["log10_condition"] = number(e.fit.log10_condition);
    json infl;
    for (std::size_t k = 0; k < e.influence.size(); ++k) infl[ds.predictor_ids[k]] = number(e.influence[k]);
    est["influence"] = infl;
    j["estimators"][std::string(to_string(e.kind))] = est;
  }
  return j.dump(2) + "\n";
}

std::string render_inference_json(const InferenceResult& res) {
  json j{{"psi_hat", number(res.psi_hat)}, {"variance_hat", number(res.variance_hat)},
         {"sigma2_hat", number(res.sigma2_hat)}, {"edf", number(res.edf)},
         {"n", res.n},                       {"level", res.level},
         {"ci_lo", number(res.ci_lo)},       {"ci_hi", number(res.ci_hi)}};
  return j.dump(2) + "\n";
}

namespace {

json parse_report(std::string_view report_json) {
  try {
    json j = json::parse(report_json.begin(), report_json.end());
    if (!j.contains("cells") || !j["cells"].is_array()) throw ValidationError("report: missing 'cells' array");
    return j;
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
}

std::string cell_prefix(const json& cell) {
  return std::to_string(cell.at("n").get<int>()) + ',' + format_double(cell.at("rho").get<double>()) + ',' +
         format_double(cell.at("sigma2").get<double>()) + ',';
}

}  // namespace

std::string render_tidy_metrics(std::string_view report_json) {
  const json j = parse_report(report_json);
  std::ostringstream out;
  out << "n,rho,sigma2,estimator,metric,value\n";
  for (const auto& cell : j["cells"])
    for (EstimatorKind k : kEstimators) {
      const json& e = cell.at("estimators").at(std::string(to_string(k)));
      for (const char* metric : {"imse_mean", "imse_sd", "log10_cn_median"})
        out << cell_prefix(cell) << to_string(k) << ',' << metric << ',' << format_double(number_from(e.at(metric)))
            << '\n';
    }
  return out.str();
}

std::string render_tidy_partition(std::string_view report_json) {
  const json j = parse_report(report_json);
  std::ostringstream out;
  out << "n,rho,sigma2,estimator,metric,value\n";
  for (const auto& cell : j["cells"])
    for (const char* metric : {"tpr_mean", "fpr_mean"})
      out << cell_prefix(cell) << "FRFM," << metric << ',' << format_double(number_from(cell.at("partition").at(metric)))
          << '\n';
  return out.str();
}

std::string render_tidy_gcv(std::string_view gcv_trace_csv) {
  const CsvTable t = parse_csv(gcv_trace_csv, "gcv_trace.csv");
  const std::size_t ce = t.column("estimator", "gcv_trace.csv");
  const std::size_t cl = t.column("lambda", "gcv_trace.csv");
  const std::size_t cg = t.column("gcv", "gcv_trace.csv");
  std::ostringstream out;
  out << "estimator,log10_lambda,gcv\n";
  for (const auto& row : t.rows)
    out << row[ce] << ',' << format_double(std::log10(parse_double(row[cl], "gcv_trace.csv: lambda"))) << ','
        << row[cg] << '\n';
  return out.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256: digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace frr
