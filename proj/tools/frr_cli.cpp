// frr: command-line front end over the libfrr C interface.

#include "frr/frr.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Failure : std::runtime_error {
  Failure(frr_status status, const std::string& what) : std::runtime_error(what), status(status) {}
  frr_status status;
};

void check(frr_status s) {
  if (s != FRR_OK) throw Failure(s, frr_last_error());
}

struct StringDeleter {
  void operator()(char* p) const { frr_string_free(p); }
};
using CString = std::unique_ptr<char, StringDeleter>;

std::string take(char* p) {
  CString owned(p);
  return p ? std::string(p) : std::string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure(FRR_ERR_IO, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses a config file for flag overrides. The file has already been
/// validated by the library, so its messages carry line numbers of the file.
ordered_json config_object(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return ordered_json::object();
  return ordered_json::parse(text);
}

class Output {
 public:
  explicit Output(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Failure(FRR_ERR_IO, "cannot create output directory '" + dir_ + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& text) {
    const fs::path path = fs::path(dir_) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw Failure(FRR_ERR_IO, "cannot write '" + path.string() + "'");
    char* hex = nullptr;
    check(frr_sha256_hex(text.data(), text.size(), &hex));
    artifacts_.push_back({{"file", name}, {"bytes", text.size()}, {"sha256", take(hex)}});
  }

  void manifest(ordered_json m) {
    m["out_dir"] = dir_;
    m["artifacts"] = artifacts_;
    const std::string text = m.dump(2) + "\n";
    const fs::path path = fs::path(dir_) / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) throw Failure(FRR_ERR_IO, "cannot write '" + path.string() + "'");
  }

 private:
  std::string dir_;
  ordered_json artifacts_ = ordered_json::array();
};

struct DatasetHandle {
  frr_dataset* ptr = nullptr;
  DatasetHandle(const std::string& data, const std::string& response) {
    check(frr_dataset_load(data.c_str(), response.c_str(), &ptr));
  }
  ~DatasetHandle() { frr_dataset_free(ptr); }
  DatasetHandle(const DatasetHandle&) = delete;
  DatasetHandle& operator=(const DatasetHandle&) = delete;
};

struct SimulateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications, threads;
};

int cmd_simulate(const SimulateArgs& a) {
  const std::string text = a.config.empty() ? std::string() : read_file(a.config);
  char* checked = nullptr;
  check(frr_resolve_study_config(text.c_str(), &checked));
  take(checked);
  ordered_json cfg = config_object(text);
  if (a.seed) cfg["seed"] = *a.seed;
  if (a.replications) cfg["replications"] = *a.replications;
  const std::string merged = cfg.empty() ? text : cfg.dump(2);

  frr_study* raw = nullptr;
  check(frr_study_run(merged.c_str(), a.threads.value_or(0), &raw));
  std::unique_ptr<frr_study, decltype(&frr_study_free)> study(raw, frr_study_free);

  Output out(a.out);
  const std::pair<const char*, frr_study_artifact> files[] = {
      {"report.json", FRR_STUDY_REPORT_JSON},
      {"replications.csv", FRR_STUDY_REPLICATIONS_CSV},
      {"imse_table.csv", FRR_STUDY_IMSE_TABLE_CSV},
      {"partition_table.csv", FRR_STUDY_PARTITION_TABLE_CSV},
      {"cn_table.csv", FRR_STUDY_CN_TABLE_CSV},
  };
  for (const auto& [name, kind] : files) {
    char* s = nullptr;
    check(frr_study_render(study.get(), kind, &s));
    out.write(name, take(s));
  }
  int succeeded = 0, failed = 0;
  check(frr_study_counts(study.get(), &succeeded, &failed));
  char* resolved = nullptr;
  check(frr_study_render(study.get(), FRR_STUDY_RESOLVED_CONFIG_JSON, &resolved));
  const ordered_json echo = ordered_json::parse(take(resolved));

  ordered_json m;
  m["command"] = "simulate";
  m["config_path"] = a.config.empty() ? ordered_json(nullptr) : ordered_json(a.config);
  m["config"] = echo;
  m["seed"] = echo.at("seed");
  m["replications_succeeded"] = succeeded;
  m["replications_failed"] = failed;
  out.manifest(std::move(m));
  if (failed > 0) {
    std::cerr << "frr: " << failed << " replication(s) failed; see replications.csv\n";
    return 1;
  }
  return 0;
}

struct FitArgs {
  std::string data, response, config, out;
  std::vector<std::string> estimators;
};

int cmd_fit(const FitArgs& a) {
  const std::string text = a.config.empty() ? std::string() : read_file(a.config);
  DatasetHandle ds(a.data, a.response);
  char* checked = nullptr;
  check(frr_resolve_fit_config(ds.ptr, text.c_str(), &checked));
  take(checked);
  ordered_json cfg = config_object(text);
  if (!a.estimators.empty()) cfg["estimators"] = a.estimators;
  const std::string merged = cfg.empty() ? text : cfg.dump(2);

  char* resolved = nullptr;
  check(frr_resolve_fit_config(ds.ptr, merged.c_str(), &resolved));
  const ordered_json echo = ordered_json::parse(take(resolved));

  frr_analysis* raw = nullptr;
  check(frr_analysis_run(ds.ptr, merged.c_str(), &raw));
  std::unique_ptr<frr_analysis, decltype(&frr_analysis_free)> fit(raw, frr_analysis_free);

  Output out(a.out);
  const std::pair<const char*, frr_fit_artifact> files[] = {
      {"coefficients.csv", FRR_FIT_COEFFICIENTS_CSV},
      {"gcv_trace.csv", FRR_FIT_GCV_TRACE_CSV},
      {"fit.json", FRR_FIT_JSON},
  };
  for (const auto& [name, kind] : files) {
    char* s = nullptr;
    check(frr_analysis_render(fit.get(), kind, &s));
    out.write(name, take(s));
  }
  ordered_json m;
  m["command"] = "fit";
  m["config_path"] = a.config.empty() ? ordered_json(nullptr) : ordered_json(a.config);
  m["config"] = echo;
  m["seed"] = nullptr;
  m["inputs"] = {{"data", a.data}, {"response", a.response}};
  out.manifest(std::move(m));
  return 0;
}

struct InferArgs {
  std::string data, response, x, config, out;
  std::optional<double> level;
};

int cmd_infer(const InferArgs& a) {
  const std::string text = a.config.empty() ? std::string() : read_file(a.config);
  DatasetHandle ds(a.data, a.response);
  char* checked = nullptr;
  check(frr_resolve_fit_config(ds.ptr, text.c_str(), &checked));
  take(checked);
  ordered_json cfg = config_object(text);
  if (a.level) cfg["inference"]["level"] = *a.level;
  const std::string merged = cfg.empty() ? text : cfg.dump(2);

  char* resolved = nullptr;
  check(frr_resolve_fit_config(ds.ptr, merged.c_str(), &resolved));
  const ordered_json echo = ordered_json::parse(take(resolved));

  char* result = nullptr;
  check(frr_infer(ds.ptr, merged.c_str(), a.x.c_str(), &result));
  Output out(a.out);
  out.write("inference.json", take(result));

  ordered_json m;
  m["command"] = "infer";
  m["config_path"] = a.config.empty() ? ordered_json(nullptr) : ordered_json(a.config);
  m["config"] = echo;
  m["seed"] = nullptr;
  m["inputs"] = {{"data", a.data}, {"response", a.response}, {"x", a.x}};
  out.manifest(std::move(m));
  return 0;
}

struct PlotArgs {
  std::vector<std::string> inputs;
  std::string out;
};

int cmd_plotdata(const PlotArgs& a) {
  std::string report, gcv;
  for (const auto& path : a.inputs) {
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".json")
      report = path;
    else if (ext == ".csv")
      gcv = path;
    else
      throw Failure(FRR_ERR_VALIDATION, "plotdata: '" + path + "' is neither a report (.json) nor a GCV trace (.csv)");
  }
  if (report.empty() && gcv.empty()) throw Failure(FRR_ERR_VALIDATION, "plotdata: no input files");

  Output out(a.out);
  if (!report.empty()) {
    const std::string text = read_file(report);
    char* s = nullptr;
    check(frr_plotdata_metrics(text.c_str(), &s));
    out.write("plot_metrics.csv", take(s));
    check(frr_plotdata_partition(text.c_str(), &s));
    out.write("plot_partition.csv", take(s));
  }
  if (!gcv.empty()) {
    const std::string text = read_file(gcv);
    char* s = nullptr;
    check(frr_plotdata_gcv(text.c_str(), &s));
    out.write("plot_gcv.csv", take(s));
  }
  ordered_json m;
  m["command"] = "plotdata";
  m["config_path"] = nullptr;
  m["config"] = nullptr;
  m["seed"] = nullptr;
  m["inputs"] = a.inputs;
  out.manifest(std::move(m));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partition-based functional ridge regression"};
  app.set_version_flag("--version", std::string(frr_version()));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo study");
  simulate->add_option("--config", sim.config, "Study configuration (JSON)")->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--replications", sim.replications, "Replications per cell")->check(CLI::PositiveNumber);
  simulate->add_option("--threads", sim.threads, "Worker threads (default: FRR_THREADS or hardware)")
      ->check(CLI::PositiveNumber);

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Fit estimators to a functional dataset");
  fitc->add_option("data", fit.data, "Long-format data CSV")->required();
  fitc->add_option("response", fit.response, "Response CSV")->required();
  fitc->add_option("--config", fit.config, "Fit configuration (JSON)")->check(CLI::ExistingFile);
  fitc->add_option("--out", fit.out, "Output directory")->required();
  fitc->add_option("--estimators", fit.estimators, "Comma-separated list of FRE,FRFM,FRSM")->delimiter(',');

  InferArgs inf;
  auto* infer = app.add_subcommand("infer", "Confidence interval for a linear functional");
  infer->add_option("data", inf.data, "Long-format data CSV")->required();
  infer->add_option("response", inf.response, "Response CSV")->required();
  infer->add_option("x", inf.x, "Functional CSV (predictor_id,grid_point,value)")->required();
  infer->add_option("--config", inf.config, "Fit configuration (JSON)")->check(CLI::ExistingFile);
  infer->add_option("--out", inf.out, "Output directory")->required();
  infer->add_option("--level", inf.level, "Confidence level (default 0.95)");

  PlotArgs plot;
  auto* plotdata = app.add_subcommand("plotdata", "Tidy CSVs for plotting");
  plotdata->add_option("inputs", plot.inputs, "report.json and/or gcv_trace.csv")->required();
  plotdata->add_option("--out", plot.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*fitc) return cmd_fit(fit);
    if (*infer) return cmd_infer(inf);
    if (*plotdata) return cmd_plotdata(plot);
  } catch (const Failure& e) {
    std::cerr << "frr: error: " << e.what() << '\n';
    return e.status == FRR_ERR_VALIDATION || e.status == FRR_ERR_IO ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "frr: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
