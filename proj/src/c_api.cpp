#include "frr/frr.h"

#include "frr/basis.hpp"
#include "frr/config.hpp"
#include "frr/error.hpp"
#include "frr/inference.hpp"
#include "frr/io.hpp"
#include "frr/report.hpp"
#include "frr/simulation.hpp"
#include "frr/workflow.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <thread>

struct frr_study {
  frr::StudyPlan plan;
  std::vector<frr::StudyReport> cells;
};

struct frr_dataset {
  frr::LabeledDataset ds;
};

struct frr_analysis {
  frr::LabeledDataset ds;
  frr::FitOutcome outcome;
};

namespace {

thread_local std::string last_error;

template <class F>
frr_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return FRR_OK;
  } catch (const frr::Error& e) {
    last_error = e.what();
    return static_cast<frr_status>(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return FRR_ERR_INTERNAL;
}

char* copy_out(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class T>
void require(T* p, const char* what) {
  if (!p) throw frr::ValidationError(std::string(what) + " must not be null");
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return frr::threads_from_env(hw == 0 ? 1 : static_cast<int>(hw));
}

std::string_view text_or_empty(const char* s) { return s ? std::string_view(s) : std::string_view(); }

}  // namespace

extern "C" {

const char* frr_version(void) { return "0.1.0"; }

const char* frr_last_error(void) { return last_error.c_str(); }

void frr_string_free(char* s) { std::free(s); }

frr_status frr_eval_basis(double s, double lo, double hi, int order, int interior_knots, double* out,
                          size_t out_len) {
  return guarded([&] {
    require(out, "out");
    const frr::BasisSpec spec{lo, hi, order, interior_knots};
    spec.validate();
    if (out_len != static_cast<size_t>(spec.dim()))
      throw frr::ValidationError("out_len must equal order + interior_knots");
    const frr::Vector v = frr::eval_basis(s, frr::make_knots(spec));
    std::copy(v.data(), v.data() + v.size(), out);
  });
}

frr_status frr_normal_quantile(double prob, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = frr::normal_quantile(prob);
  });
}

frr_status frr_default_study_config(char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    *out_json = copy_out(frr::study_config_to_json(frr::StudyPlan{}));
  });
}

frr_status frr_resolve_study_config(const char* config_json, char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    *out_json = copy_out(frr::study_config_to_json(frr::parse_study_config(text_or_empty(config_json))));
  });
}

frr_status frr_study_run(const char* config_json, int threads, frr_study** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    auto study = std::make_unique<frr_study>();
    study->plan = frr::parse_study_config(text_or_empty(config_json));
    study->cells = frr::run_plan(study->plan, resolve_threads(threads));
    *out = study.release();
  });
}

frr_status frr_study_counts(const frr_study* study, int* succeeded, int* failed) {
  return guarded([&] {
    require(study, "study");
    int ok = 0, bad = 0;
    for (const auto& c : study->cells) {
      ok += c.succeeded;
      bad += c.failed;
    }
    if (succeeded) *succeeded = ok;
    if (failed) *failed = bad;
  });
}

frr_status frr_study_render(const frr_study* study, frr_study_artifact artifact, char** out) {
  return guarded([&] {
    require(study, "study");
    require(out, "out");
    switch (artifact) {
      case FRR_STUDY_REPORT_JSON: *out = copy_out(frr::render_report_json(study->plan, study->cells)); return;
      case FRR_STUDY_REPLICATIONS_CSV: *out = copy_out(frr::render_replications_csv(study->cells)); return;
      case FRR_STUDY_IMSE_TABLE_CSV: *out = copy_out(frr::render_imse_table(study->cells)); return;
      case FRR_STUDY_PARTITION_TABLE_CSV: *out = copy_out(frr::render_partition_table(study->cells)); return;
      case FRR_STUDY_CN_TABLE_CSV: *out = copy_out(frr::render_cn_table(study->cells)); return;
      case FRR_STUDY_RESOLVED_CONFIG_JSON: *out = copy_out(frr::study_config_to_json(study->plan)); return;
    }
    throw frr::ValidationError("unknown study artifact");
  });
}

void frr_study_free(frr_study* study) { delete study; }

frr_status frr_dataset_load(const char* data_path, const char* response_path, frr_dataset** out) {
  return guarded([&] {
    require(data_path, "data_path");
    require(response_path, "response_path");
    require(out, "out");
    *out = nullptr;
    *out = new frr_dataset{frr::load_dataset(data_path, response_path)};
  });
}

frr_status frr_dataset_shape(const frr_dataset* ds, int* subjects, int* predictors, int* grid_points) {
  return guarded([&] {
    require(ds, "dataset");
    if (subjects) *subjects = ds->ds.data.num_subjects();
    if (predictors) *predictors = ds->ds.data.num_predictors();
    if (grid_points) *grid_points = ds->ds.data.num_grid();
  });
}

void frr_dataset_free(frr_dataset* ds) { delete ds; }

frr_status frr_resolve_fit_config(const frr_dataset* ds, const char* config_json, char** out_json) {
  return guarded([&] {
    require(ds, "dataset");
    require(out_json, "out_json");
    const frr::FitConfig config = frr::parse_fit_config(text_or_empty(config_json), ds->ds.predictor_ids);
    *out_json = copy_out(frr::fit_config_to_json(config, ds->ds.predictor_ids));
  });
}

frr_status frr_analysis_run(const frr_dataset* ds, const char* config_json, frr_analysis** out) {
  return guarded([&] {
    require(ds, "dataset");
    require(out, "out");
    *out = nullptr;
    const frr::FitConfig config = frr::parse_fit_config(text_or_empty(config_json), ds->ds.predictor_ids);
    *out = new frr_analysis{ds->ds, frr::run_fit(ds->ds.data, config)};
  });
}

frr_status frr_analysis_render(const frr_analysis* fit, frr_fit_artifact artifact, char** out) {
  return guarded([&] {
    require(fit, "analysis");
    require(out, "out");
    switch (artifact) {
      case FRR_FIT_COEFFICIENTS_CSV: *out = copy_out(frr::render_coefficients_csv(fit->ds, fit->outcome)); return;
      case FRR_FIT_GCV_TRACE_CSV: *out = copy_out(frr::render_gcv_trace_csv(fit->outcome)); return;
      case FRR_FIT_JSON: *out = copy_out(frr::render_fit_json(fit->ds, fit->outcome)); return;
    }
    throw frr::ValidationError("unknown fit artifact");
  });
}

void frr_analysis_free(frr_analysis* fit) { delete fit; }

frr_status frr_infer(const frr_dataset* ds, const char* config_json, const char* x_path, char** out_json) {
  return guarded([&] {
    require(ds, "dataset");
    require(x_path, "x_path");
    require(out_json, "out_json");
    const frr::FitConfig config = frr::parse_fit_config(text_or_empty(config_json), ds->ds.predictor_ids);
    const frr::Matrix x =
        frr::parse_functional(frr::read_text_file(x_path), ds->ds.predictor_ids, ds->ds.data.grid, x_path);
    *out_json = copy_out(frr::render_inference_json(frr::run_inference(ds->ds.data, config, x)));
  });
}

frr_status frr_plotdata_metrics(const char* report_json, char** out_csv) {
  return guarded([&] {
    require(report_json, "report_json");
    require(out_csv, "out_csv");
    *out_csv = copy_out(frr::render_tidy_metrics(report_json));
  });
}

frr_status frr_plotdata_partition(const char* report_json, char** out_csv) {
  return guarded([&] {
    require(report_json, "report_json");
    require(out_csv, "out_csv");
    *out_csv = copy_out(frr::render_tidy_partition(report_json));
  });
}

frr_status frr_plotdata_gcv(const char* gcv_trace_csv, char** out_csv) {
  return guarded([&] {
    require(gcv_trace_csv, "gcv_trace_csv");
    require(out_csv, "out_csv");
    *out_csv = copy_out(frr::render_tidy_gcv(gcv_trace_csv));
  });
}

frr_status frr_sha256_hex(const char* bytes, size_t len, char** out_hex) {
  return guarded([&] {
    if (!bytes && len != 0) throw frr::ValidationError("bytes must not be null");
    require(out_hex, "out_hex");
    *out_hex = copy_out(frr::sha256_hex(std::string_view(bytes ? bytes : "", len)));
  });
}

}  // extern "C"
