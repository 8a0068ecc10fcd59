#include "frr/config.hpp"

#include "frr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace frr {

using nlohmann::json;

std::string_view to_string(Quadrature rule) {
  return rule == Quadrature::Trapezoid ? "trapezoid" : "left_rectangle";
}

namespace {

/// Wraps the parsed document with its source text so semantic errors can be
/// anchored to a line.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {
    try {
      doc_ = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      throw ValidationError(std::string("config: ") + e.what());
    }
    if (!doc_.is_object()) throw ValidationError("config: line 1: top level must be a JSON object");
  }

  const json& doc() const { return doc_; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ValidationError("config: line " + std::to_string(line_of(key)) + ": '" + key + "': " + msg);
  }

  void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(where, "expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
      if (!ok.count(k)) fail(k, "unknown key" + (where.empty() ? std::string() : " in '" + where + "'"));
  }

  template <class T>
  void get(const json& obj, const char* key, T& out) const {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    try {
      if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) fail(key, "expected an integer");
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
          fail(key, "expected a nonnegative integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) fail(key, "expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(key, "expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(key, "expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      fail(key, e.what());
    }
  }

  template <class T>
  std::vector<T> list(const json& obj, const char* key, const std::vector<T>& fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    std::vector<T> out;
    if (v.is_array()) {
      for (const auto& e : v) {
        if (!e.is_number()) fail(key, "expected numbers");
        out.push_back(e.get<T>());
      }
    } else if (v.is_number()) {
      out.push_back(v.get<T>());
    } else {
      fail(key, "expected a number or an array of numbers");
    }
    if (out.empty()) fail(key, "must not be empty");
    return out;
  }

 private:
  int line_of(const std::string& key) const {
    const std::string needle = "\"" + key + "\"";
    const auto pos = text_.find(needle);
    if (pos == std::string_view::npos) return 1;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  std::string_view text_;
  json doc_;
};

void read_basis(const Reader& r, const json& obj, const char* key, BasisSpec& spec) {
  if (!obj.contains(key)) return;
  const json& b = obj.at(key);
  r.allow_keys(b, key, {"order", "interior_knots", "domain_lo", "domain_hi"});
  r.get(b, "order", spec.order);
  r.get(b, "interior_knots", spec.interior_knots);
  r.get(b, "domain_lo", spec.domain_lo);
  r.get(b, "domain_hi", spec.domain_hi);
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    r.fail(key, e.what());
  }
}

void read_knots(const Reader& r, const json& obj, const char* key, KnotLayout& k) {
  if (!obj.contains(key)) return;
  const json& b = obj.at(key);
  r.allow_keys(b, key, {"order", "interior_knots"});
  r.get(b, "order", k.order);
  r.get(b, "interior_knots", k.interior_knots);
}

void read_grid(const Reader& r, const json& obj, LambdaGrid& g) {
  if (!obj.contains("lambda_grid")) return;
  const json& v = obj.at("lambda_grid");
  r.allow_keys(v, "lambda_grid", {"lo", "hi", "count"});
  r.get(v, "lo", g.lo);
  r.get(v, "hi", g.hi);
  r.get(v, "count", g.count);
  try {
    g.validate();
  } catch (const ValidationError& e) {
    r.fail("lambda_grid", e.what());
  }
}

void read_partition(const Reader& r, const json& obj, PartitionOptions& p) {
  if (!obj.contains("partition")) return;
  const json& v = obj.at("partition");
  r.allow_keys(v, "partition", {"epsilon", "tolerance", "max_iter", "threshold"});
  r.get(v, "epsilon", p.epsilon);
  r.get(v, "tolerance", p.tolerance);
  r.get(v, "max_iter", p.max_iter);
  r.get(v, "threshold", p.threshold);
  try {
    p.validate();
  } catch (const ValidationError& e) {
    r.fail("partition", e.what());
  }
}

void read_quadrature(const Reader& r, const json& obj, Quadrature& q) {
  std::string name;
  r.get(obj, "quadrature", name);
  if (name.empty()) return;
  if (name == "trapezoid")
    q = Quadrature::Trapezoid;
  else if (name == "left_rectangle" || name == "riemann")
    q = Quadrature::LeftRectangle;
  else
    r.fail("quadrature", "expected \"trapezoid\" or \"left_rectangle\"");
}

json basis_json(const BasisSpec& b) {
  return json{{"order", b.order}, {"interior_knots", b.interior_knots}, {"domain_lo", b.domain_lo},
              {"domain_hi", b.domain_hi}};
}

}  // namespace

StudyPlan parse_study_config(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return StudyPlan{};
  const Reader r(text);
  const json& d = r.doc();
  r.allow_keys(d, "",
               {"study", "p", "p1", "grid_points", "replications", "seed", "ratio_c", "quadrature", "lambda_grid",
                "partition", "bases", "n", "rho", "sigma2"});
  StudyPlan plan;
  SimulationConfig& c = plan.base;
  r.get(d, "p", c.p);
  r.get(d, "p1", c.p1);
  r.get(d, "grid_points", c.grid_points);
  r.get(d, "replications", c.replications);
  r.get(d, "seed", c.seed);
  r.get(d, "ratio_c", c.ratio_c);
  read_quadrature(r, d, c.rule);
  read_grid(r, d, c.lambda_grid);
  read_partition(r, d, c.partition);
  if (d.contains("bases")) {
    const json& b = d.at("bases");
    r.allow_keys(b, "bases", {"generation", "fre", "frfm_relevant", "frfm_nuisance", "frsm", "partition"});
    read_basis(r, b, "generation", c.bases.generation);
    read_basis(r, b, "fre", c.bases.fre);
    read_basis(r, b, "frfm_relevant", c.bases.frfm_relevant);
    read_basis(r, b, "frfm_nuisance", c.bases.frfm_nuisance);
    read_basis(r, b, "frsm", c.bases.frsm);
    read_basis(r, b, "partition", c.bases.partition);
  }
  // factors may sit under "study" or at the top level
  const json* factors = &d;
  if (d.contains("study")) {
    factors = &d.at("study");
    r.allow_keys(*factors, "study", {"n", "rho", "sigma2"});
  }
  plan.n_values = r.list<int>(*factors, "n", plan.n_values);
  plan.sigma2_values = r.list<double>(*factors, "sigma2", plan.sigma2_values);
  plan.rho_values = r.list<double>(*factors, "rho", plan.rho_values);
  try {
    (void)plan.cells();
  } catch (const ValidationError& e) {
    r.fail(d.contains("study") ? "study" : "p", e.what());
  }
  return plan;
}

std::string study_config_to_json(const StudyPlan& plan) {
  const SimulationConfig& c = plan.base;
  json j;
  j["study"] = {{"n", plan.n_values}, {"sigma2", plan.sigma2_values}, {"rho", plan.rho_values}};
  j["p"] = c.p;
  j["p1"] = c.p1;
  j["grid_points"] = c.grid_points;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["ratio_c"] = c.ratio_c;
  j["quadrature"] = std::string(to_string(c.rule));
  j["lambda_grid"] = {{"lo", c.lambda_grid.lo}, {"hi", c.lambda_grid.hi}, {"count", c.lambda_grid.count}};
  j["partition"] = {{"epsilon", c.partition.epsilon},
                    {"tolerance", c.partition.tolerance},
                    {"max_iter", c.partition.max_iter},
                    {"threshold", c.partition.threshold}};
  j["bases"] = {{"generation", basis_json(c.bases.generation)}, {"fre", basis_json(c.bases.fre)},
                {"frfm_relevant", basis_json(c.bases.frfm_relevant)},
                {"frfm_nuisance", basis_json(c.bases.frfm_nuisance)}, {"frsm", basis_json(c.bases.frsm)},
                {"partition", basis_json(c.bases.partition)}};
  return j.dump(2);
}

FitConfig parse_fit_config(std::string_view text, const std::vector<std::string>& predictor_ids) {
  FitConfig cfg;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return cfg;
  const Reader r(text);
  const json& d = r.doc();
  r.allow_keys(d, "",
               {"estimators", "ratio_c", "center_covariates", "bases", "lambda_grid", "partition", "relevant",
                "inference", "quadrature"});
  if (d.contains("estimators")) {
    const json& e = d.at("estimators");
    if (!e.is_array() || e.empty()) r.fail("estimators", "expected a non-empty array of estimator names");
    cfg.estimators.clear();
    for (const auto& name : e) {
      if (!name.is_string()) r.fail("estimators", "expected estimator names");
      try {
        cfg.estimators.push_back(parse_estimator(name.get<std::string>()));
      } catch (const ValidationError& ex) {
        r.fail("estimators", ex.what());
      }
    }
  }
  r.get(d, "ratio_c", cfg.ratio_c);
  r.get(d, "center_covariates", cfg.center_covariates);
  read_quadrature(r, d, cfg.rule);
  read_grid(r, d, cfg.lambda_grid);
  read_partition(r, d, cfg.partition);
  if (d.contains("bases")) {
    const json& b = d.at("bases");
    r.allow_keys(b, "bases", {"fre", "relevant", "nuisance", "frsm"});
    read_knots(r, b, "fre", cfg.fre_basis);
    read_knots(r, b, "relevant", cfg.relevant_basis);
    read_knots(r, b, "nuisance", cfg.nuisance_basis);
    read_knots(r, b, "frsm", cfg.frsm_basis);
  }
  if (d.contains("relevant")) {
    const json& rel = d.at("relevant");
    if (!rel.is_array() || rel.empty()) r.fail("relevant", "expected a non-empty array of predictor ids");
    std::vector<int> idx;
    for (const auto& v : rel) {
      const std::string id = v.is_string() ? v.get<std::string>() : v.dump();
      const auto it = std::find(predictor_ids.begin(), predictor_ids.end(), id);
      if (it == predictor_ids.end()) r.fail("relevant", "unknown predictor id '" + id + "'");
      idx.push_back(static_cast<int>(it - predictor_ids.begin()));
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    cfg.relevant = idx;
  }
  if (d.contains("inference")) {
    const json& inf = d.at("inference");
    r.allow_keys(inf, "inference", {"estimator", "level", "lambda", "mode"});
    std::string name;
    r.get(inf, "estimator", name);
    if (!name.empty()) {
      try {
        cfg.inference_estimator = parse_estimator(name);
      } catch (const ValidationError& ex) {
        r.fail("estimator", ex.what());
      }
    }
    r.get(inf, "level", cfg.level);
    if (inf.contains("lambda")) {
      double lambda = 0.0;
      r.get(inf, "lambda", lambda);
      cfg.fixed_lambda = lambda;
    }
    std::string mode;
    r.get(inf, "mode", mode);
    if (mode == "relevant")
      cfg.inference_mode = InferenceMode::RelevantBlock;
    else if (!mode.empty() && mode != "full")
      r.fail("mode", "expected \"full\" or \"relevant\"");
  }
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return cfg;
}

std::string fit_config_to_json(const FitConfig& cfg, const std::vector<std::string>& predictor_ids) {
  const auto knots = [](const KnotLayout& k) { return json{{"order", k.order}, {"interior_knots", k.interior_knots}}; };
  json j;
  j["estimators"] = json::array();
  for (EstimatorKind k : cfg.estimators) j["estimators"].push_back(std::string(to_string(k)));
  j["ratio_c"] = cfg.ratio_c;
  j["center_covariates"] = cfg.center_covariates;
  j["quadrature"] = std::string(to_string(cfg.rule));
  j["bases"] = {{"fre", knots(cfg.fre_basis)},
                {"relevant", knots(cfg.relevant_basis)},
                {"nuisance", knots(cfg.nuisance_basis)},
                {"frsm", knots(cfg.frsm_basis)}};
  j["lambda_grid"] = {{"lo", cfg.lambda_grid.lo}, {"hi", cfg.lambda_grid.hi}, {"count", cfg.lambda_grid.count}};
  j["partition"] = {{"epsilon", cfg.partition.epsilon},
                    {"tolerance", cfg.partition.tolerance},
                    {"max_iter", cfg.partition.max_iter},
                    {"threshold", cfg.partition.threshold}};
  if (cfg.relevant) {
    j["relevant"] = json::array();
    for (int i : *cfg.relevant) j["relevant"].push_back(predictor_ids.at(static_cast<std::size_t>(i)));
  }
  json inf{{"estimator", std::string(to_string(cfg.inference_estimator))},
           {"level", cfg.level},
           {"mode", cfg.inference_mode == InferenceMode::RelevantBlock ? "relevant" : "full"}};
  if (cfg.fixed_lambda) inf["lambda"] = *cfg.fixed_lambda;
  j["inference"] = inf;
  return j.dump(2);
}

}  // namespace frr
