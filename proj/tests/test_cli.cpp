#include "frr/config.hpp"
#include "frr/io.hpp"
#include "frr/report.hpp"
#include "frr/simulation.hpp"
#include "frr/workflow.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace frr;

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("frr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
           std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  Outcome frr(const std::string& args) const {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(FRR_CLI_PATH) + " " + args + " >/dev/null 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = read_text_file(err.string());
    return r;
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const { write_text_file(path(name), text); }
  std::string read(const std::string& name) const { return read_text_file(path(name)); }

  fs::path dir;
};

const char* kSmallStudy = R"({"study": {"n": [30], "sigma2": [1], "rho": [0.5, 0.8]}, "replications": 2})";

std::size_t data_rows(const std::string& csv) { return parse_csv(csv, "csv").rows.size(); }

LabeledDataset simulated_labeled(int n, int p, std::uint64_t seed) {
  SimulationConfig c;
  c.n = n;
  c.p = p;
  c.p1 = std::min(3, p);
  c.grid_points = 40;
  c.seed = seed;
  LabeledDataset ds;
  ds.data = generate_dataset(c, 0).data;
  for (int i = 0; i < n; ++i) ds.subject_ids.push_back("subj" + std::to_string(i));
  for (int j = 0; j < p; ++j) ds.predictor_ids.push_back("z" + std::to_string(j));
  return ds;
}

}  // namespace

TEST_F(Cli, SimulateIsDeterministicAndManifestChecksumsMatch) {
  write("study.json", kSmallStudy);
  ASSERT_EQ(frr("simulate --config " + path("study.json") + " --out " + path("a") + " --replications 1 --seed 7").code, 0);
  ASSERT_EQ(frr("simulate --config " + path("study.json") + " --out " + path("b") + " --replications 1 --seed 7 --threads 3").code, 0);
  EXPECT_EQ(read("a/replications.csv"), read("b/replications.csv"));
  EXPECT_EQ(read("a/report.json"), read("b/report.json"));
  EXPECT_EQ(data_rows(read("a/replications.csv")), 2u);

  const auto m = nlohmann::json::parse(read("a/manifest.json"));
  EXPECT_EQ(m.at("command"), "simulate");
  EXPECT_EQ(m.at("seed").get<std::uint64_t>(), 7u);
  EXPECT_EQ(m.at("config").at("replications").get<int>(), 1);
  std::set<std::string> files;
  for (const auto& a : m.at("artifacts")) {
    const std::string name = a.at("file");
    const std::string text = read("a/" + name);
    files.insert(name);
    EXPECT_EQ(a.at("sha256").get<std::string>(), sha256_hex(text)) << name;
    EXPECT_EQ(a.at("bytes").get<std::size_t>(), text.size());
  }
  EXPECT_EQ(files, (std::set<std::string>{"report.json", "replications.csv", "imse_table.csv", "partition_table.csv",
                                          "cn_table.csv"}));
}

TEST_F(Cli, SimulateRejectsBadConfigWithLine) {
  write("bad.json", "{\n  \"p\": 10,\n  \"replicatons\": 4\n}\n");
  const Outcome r = frr("simulate --config " + path("bad.json") + " --out " + path("o") + " --seed 3");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("replicatons"), std::string::npos);
  write("syntax.json", "{\n  \"p\": 10,\n");
  EXPECT_EQ(frr("simulate --config " + path("syntax.json") + " --out " + path("o")).code, 2);
}

TEST_F(Cli, FitMissingColumnIsNamed) {
  write("d.csv", "subject_id,predictor_id,value\na,z,1\n");
  write("y.csv", "subject_id,y\na,1\n");
  const Outcome r = frr("fit " + path("d.csv") + " " + path("y.csv") + " --out " + path("o"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("grid_point"), std::string::npos) << r.err;
  EXPECT_EQ(frr("fit " + path("nope.csv") + " " + path("y.csv") + " --out " + path("o")).code, 2);
}

TEST_F(Cli, ExportedDatasetRefitsToTheInProcessResult) {
  const LabeledDataset ds = simulated_labeled(50, 5, 13);
  const DatasetCsv csv = format_dataset(ds);
  write("d.csv", csv.data);
  write("y.csv", csv.response);
  const std::string cfg_text = R"({"relevant": ["z0", "z1", "z2"], "lambda_grid": {"count": 15}})";
  write("fit.json", cfg_text);
  ASSERT_EQ(frr("fit " + path("d.csv") + " " + path("y.csv") + " --config " + path("fit.json") + " --out " + path("o")).code, 0);

  const FitOutcome ref = run_fit(ds.data, parse_fit_config(cfg_text, ds.predictor_ids));
  const CsvTable t = parse_csv(read("o/coefficients.csv"), "coefficients");
  const auto ce = t.column("estimator", "c"), cp = t.column("predictor_id", "c"), cg = t.column("grid_point", "c"),
             cb = t.column("beta_hat", "c");
  ASSERT_EQ(t.rows.size(), 3u * 5u * 40u);
  std::map<std::string, const EstimatorOutcome*> by_name;
  for (const auto& e : ref.estimators) by_name[std::string(to_string(e.kind))] = &e;
  for (const auto& row : t.rows) {
    const EstimatorOutcome& e = *by_name.at(row[ce]);
    const int j = std::stoi(row[cp].substr(1));
    const auto l = static_cast<Eigen::Index>(
        std::find(ds.data.grid.begin(), ds.data.grid.end(), parse_double(row[cg], "g")) - ds.data.grid.begin());
    ASSERT_LT(l, 40);
    const double want = e.fit.beta_hat_grid(j, l);
    EXPECT_NEAR(parse_double(row[cb], "b"), want, 1e-10 * std::max(1.0, std::abs(want)));
  }
  const auto m = nlohmann::json::parse(read("o/manifest.json"));
  EXPECT_EQ(m.at("command"), "fit");
  EXPECT_EQ(m.at("config").at("relevant"), nlohmann::json({"z0", "z1", "z2"}));
}

TEST_F(Cli, WeatherShapedFrfmRunReportsInfluence) {
  // 35 stations, temperature and precipitation curves for four neighbours each
  const int n = 35, m = 73;
  std::ostringstream data, resp;
  data << "subject_id,predictor_id,grid_point,value\n";
  resp << "subject_id,y\n";
  std::mt19937_64 rng(91);
  std::normal_distribution<double> nd;
  const char* kinds[] = {"temp", "prec"};
  for (int i = 0; i < n; ++i) {
    const double lat = nd(rng), wet = nd(rng);
    double y = 0.0;
    for (int k = 0; k < 2; ++k)
      for (int st = 0; st < 4; ++st) {
        double harm[4][2];
        for (auto& h : harm) h[0] = nd(rng), h[1] = nd(rng);
        const double offset = nd(rng);
        for (int l = 0; l < m; ++l) {
          const double day = 365.0 * l / (m - 1);
          const double phase = 2 * M_PI * day / 365.0;
          double local = 0.0;
          for (int h = 0; h < 4; ++h) local += (harm[h][0] * std::cos((h + 1) * phase) + harm[h][1] * std::sin((h + 1) * phase)) / (h + 1);
          const double v = k == 0 ? -10 * std::cos(phase) - 5 * lat + local + 0.5 * st + offset
                                  : 2 + wet * std::sin(phase) + 0.2 * (local + offset);
          data << "st" << i << "," << kinds[k] << st << "," << format_double(day) << "," << format_double(v) << "\n";
          if (k == 0 && st == 0) y += v / m;
        }
      }
    resp << "st" << i << "," << format_double(y + 0.1 * nd(rng)) << "\n";
  }
  write("d.csv", data.str());
  write("y.csv", resp.str());
  const Outcome r = frr("fit " + path("d.csv") + " " + path("y.csv") + " --estimators FRFM --out " + path("o"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read("o/fit.json"));
  EXPECT_EQ(j.at("n").get<int>(), 35);
  EXPECT_EQ(j.at("predictors").size(), 8u);
  const auto& infl = j.at("estimators").at("FRFM").at("influence");
  ASSERT_EQ(infl.size(), 8u);
  for (const auto& [id, v] : infl.items()) {
    ASSERT_TRUE(v.is_number()) << id;
    EXPECT_GE(v.get<double>(), 0.0);
  }
  EXPECT_FALSE(j.at("partition").at("relevant").empty());
  EXPECT_EQ(data_rows(read("o/gcv_trace.csv")), 50u);
}

TEST_F(Cli, InferZeroFunctional) {
  const DatasetCsv csv = format_dataset(simulated_labeled(40, 4, 17));
  write("d.csv", csv.data);
  write("y.csv", csv.response);
  write("x.csv", "predictor_id,grid_point,value\n");
  ASSERT_EQ(frr("infer " + path("d.csv") + " " + path("y.csv") + " " + path("x.csv") + " --out " + path("o")).code, 0);
  const auto j = nlohmann::json::parse(read("o/inference.json"));
  EXPECT_EQ(j.at("psi_hat").get<double>(), 0.0);
  EXPECT_EQ(j.at("variance_hat").get<double>(), 0.0);
  EXPECT_EQ(j.at("ci_lo").get<double>(), 0.0);
  EXPECT_EQ(j.at("ci_hi").get<double>(), 0.0);
  EXPECT_EQ(j.at("level").get<double>(), 0.95);

  write("xoff.csv", "predictor_id,grid_point,value\nz0,0.123,1\n");
  EXPECT_EQ(frr("infer " + path("d.csv") + " " + path("y.csv") + " " + path("xoff.csv") + " --out " + path("p")).code, 2);
  EXPECT_EQ(frr("infer " + path("d.csv") + " " + path("y.csv") + " " + path("x.csv") + " --level 1.5 --out " + path("q")).code, 2);
}

TEST_F(Cli, PlotdataRowCounts) {
  write("study.json", kSmallStudy);
  ASSERT_EQ(frr("simulate --config " + path("study.json") + " --out " + path("s")).code, 0);
  const DatasetCsv csv = format_dataset(simulated_labeled(40, 4, 19));
  write("d.csv", csv.data);
  write("y.csv", csv.response);
  ASSERT_EQ(frr("fit " + path("d.csv") + " " + path("y.csv") + " --out " + path("f")).code, 0);
  ASSERT_EQ(frr("plotdata " + path("s/report.json") + " " + path("f/gcv_trace.csv") + " --out " + path("p")).code, 0);
  EXPECT_EQ(data_rows(read("p/plot_metrics.csv")), 3u * 2u * 3u);
  EXPECT_EQ(data_rows(read("p/plot_partition.csv")), 2u * 2u);
  EXPECT_EQ(data_rows(read("p/plot_gcv.csv")), 3u * 50u);
  EXPECT_EQ(frr("plotdata " + path("s/report.txt") + " --out " + path("p")).code, 2);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_NE(frr("").code, 0);
  EXPECT_NE(frr("simulate").code, 0);
  EXPECT_NE(frr("frobnicate --out x").code, 0);
}
