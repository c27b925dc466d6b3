#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "helpers.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using testutil::run_command;

namespace {
const std::string kCli = PCME_CLI_PATH;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pcme_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name,
                      const std::string& content) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << content;
  return p;
}
}  // namespace

TEST_CASE("figures writes one CSV per lambda and reports row counts") {
  const fs::path dir = fresh_dir("figures");
  const auto res = run_command(kCli + " figures --alpha 3 --a 1 --lambda 0 --lambda 2" +
                               " --lambda 5 --kmax 35 --out-dir " + dir.string());
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("(36 rows)") != std::string::npos);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    ++files;
    const auto table = testutil::parse_csv(testutil::read_file(entry.path().string()));
    REQUIRE(table.header.size() == 4);
    CHECK(table.header[0] == "k");
    CHECK(table.header[3] == "shifted_zero_dc");
    REQUIRE(table.rows.size() == 36);
  }
  CHECK(files == 3);

  const auto lam0 =
      testutil::parse_csv(testutil::read_file((dir / "figure_alpha3_a1_lambda0.csv").string()));
  CHECK(lam0.rows[3][1] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("figures rejects bad parameters with exit 2") {
  const fs::path dir = fresh_dir("figures_bad");
  const auto bad_alpha = run_command(kCli + " figures --alpha -1 --a 1 --lambda 0" +
                                     " --kmax 3 --out-dir " + dir.string());
  CHECK(bad_alpha.exit_code == 2);
  CHECK(bad_alpha.output.find("alpha must be > 0") != std::string::npos);

  const auto bad_kmax = run_command(kCli + " figures --alpha 3 --a 1 --lambda 0" +
                                    " --kmax -2 --out-dir " + dir.string());
  CHECK(bad_kmax.exit_code == 2);
  CHECK(bad_kmax.output.find("kmax") != std::string::npos);
}

TEST_CASE("conjugacy forward emits the estimator as compact JSON") {
  const fs::path dir = fresh_dir("conjugacy_fwd");
  const fs::path cfg = write_config(
      dir, "fwd.json",
      R"({"version":1,"mode":"forward","prior":{"shape":[1],"rate":[3]}})");
  const auto res = run_command(kCli + " conjugacy --input " + cfg.string());
  CHECK(res.exit_code == 0);
  CHECK(res.output == "{\"H\":[[0.25]],\"c\":[0.25]}\n");
}

TEST_CASE("conjugacy check mode: realizable and rejected inputs") {
  const fs::path dir = fresh_dir("conjugacy_check");
  const fs::path ok = write_config(
      dir, "ok.json", R"({"version":1,"mode":"check","H":[[0.25]],"c":[0.25]})");
  const auto res_ok = run_command(kCli + " conjugacy --input " + ok.string());
  CHECK(res_ok.exit_code == 0);
  const json report = json::parse(res_ok.output);
  CHECK(report["realizable"] == true);
  CHECK(report["induced_prior"]["shape"][0] == Catch::Approx(1.0));
  CHECK(report["induced_prior"]["rate"][0] == Catch::Approx(3.0));

  const fs::path dark = write_config(
      dir, "dark.json",
      R"({"version":1,"mode":"check","A":[[1]],"lambda":[1],"C":[[0.25]],"b":[0.25]})");
  const auto res_dark = run_command(kCli + " conjugacy --input " + dark.string());
  CHECK(res_dark.exit_code == 0);
  const json dark_report = json::parse(res_dark.output);
  CHECK(dark_report["realizable"] == false);
  CHECK(dark_report["failures"][0] == "dark_current_nonzero");
}

TEST_CASE("conjugacy config errors exit 2 with annotated messages") {
  const fs::path dir = fresh_dir("conjugacy_bad");
  const fs::path malformed = write_config(dir, "broken.json", "{ not json");
  const auto res = run_command(kCli + " conjugacy --input " + malformed.string());
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("config error") != std::string::npos);

  const fs::path unknown = write_config(
      dir, "unknown.json",
      R"({"version":1,"mode":"forward","prior":{"shape":[1],"rate":[3]},"extra":1})");
  const auto res_unknown = run_command(kCli + " conjugacy --input " + unknown.string());
  CHECK(res_unknown.exit_code == 2);
  CHECK(res_unknown.output.find("unknown field 'extra'") != std::string::npos);

  const fs::path old_version =
      write_config(dir, "v2.json", R"({"version":2,"mode":"forward"})");
  const auto res_version = run_command(kCli + " conjugacy --input " + old_version.string());
  CHECK(res_version.exit_code == 2);
}

TEST_CASE("stability subcommand: poisson holds with exit 0") {
  const fs::path dir = fresh_dir("stability");
  const fs::path cfg = write_config(dir, "poisson.json", R"({
    "version": 1, "model": "poisson",
    "prior": {"type": "gamma", "shape": [1], "rate": [3]},
    "target": {"type": "gamma", "shape": [1], "rate": [3]},
    "seed": 7, "samples": 20000})");
  const auto res = run_command(kCli + " stability --config " + cfg.string());
  CHECK(res.exit_code == 0);
  const json report = json::parse(res.output);
  CHECK(report["model"] == "poisson");
  CHECK(report["holds"] == true);
  CHECK(report["lhs_sup_on_grid"].get<double>() <= 1e-12);

  const fs::path mixture = write_config(dir, "mixture.json", R"({
    "version": 1, "model": "poisson",
    "prior": {"type": "discrete", "atoms": [[0.5], [2.1]], "weights": [0.5, 0.5]},
    "target": "moment-matched",
    "seed": 7, "samples": 100000})");
  const auto res_mix = run_command(kCli + " stability --config " + mixture.string() +
                                   " --out " + (dir / "report.json").string());
  CHECK(res_mix.exit_code == 0);
  const json mix_report = json::parse(testutil::read_file((dir / "report.json").string()));
  CHECK(mix_report["holds"] == true);
  CHECK(mix_report["epsilon_hat"].get<double>() > 0.0);
}

TEST_CASE("stability subcommand: gaussian model") {
  const fs::path dir = fresh_dir("stability_gauss");
  const fs::path cfg = write_config(dir, "gauss.json", R"({
    "version": 1, "model": "gaussian", "a_matrix": [[1]],
    "prior": {"type": "gaussian", "mu": [0], "k_matrix": [[1]]},
    "seed": 3, "samples": 20000})");
  const auto res = run_command(kCli + " stability --config " + cfg.string());
  CHECK(res.exit_code == 0);
  const json report = json::parse(res.output);
  CHECK(report["model"] == "gaussian");
  CHECK(report["input_bound"]["kind"] == "pointwise");
  CHECK(report["output_bound"]["kind"] == "uniform");
  CHECK(report["holds"] == true);

  const fs::path two_point = write_config(dir, "two_point.json", R"({
    "version": 1, "model": "gaussian", "a_matrix": [[1]],
    "prior": {"type": "discrete", "atoms": [[-1], [1]], "weights": [0.5, 0.5]},
    "seed": 3, "samples": 50000})");
  const auto res_tp = run_command(kCli + " stability --config " + two_point.string());
  CHECK(res_tp.exit_code == 0);

  const fs::path bad = write_config(dir, "bad.json", R"({
    "version": 1, "model": "gaussian", "a_matrix": [[1]],
    "prior": {"type": "gaussian", "mu": [0], "k_matrix": [[1]]},
    "samples": 10})");
  const auto res_bad = run_command(kCli + " stability --config " + bad.string());
  CHECK(res_bad.exit_code == 2);
}

TEST_CASE("oracle subcommand exit codes and output") {
  const auto ok = run_command(kCli + " oracle --suite trg --trials 50 --seed 1");
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("PASS") != std::string::npos);

  const auto all = run_command(kCli + " oracle --suite all --trials 20 --seed 1");
  CHECK(all.exit_code == 0);
  CHECK(all.output.find("trg") != std::string::npos);
  CHECK(all.output.find("cov") != std::string::npos);
  CHECK(all.output.find("laplace-residual") != std::string::npos);

  CHECK(run_command(kCli + " oracle --suite bogus --trials 5").exit_code == 2);
  CHECK(run_command(kCli + " oracle --suite all --trials 0").exit_code == 2);
  CHECK(run_command(kCli + " nonsense").exit_code == 2);
}

TEST_CASE("byte-identical outputs for identical flags") {
  const fs::path dir_a = fresh_dir("det_a");
  const fs::path dir_b = fresh_dir("det_b");
  const std::string flags = " figures --alpha 3 --a 1 --lambda 2 --kmax 20 --out-dir ";
  REQUIRE(run_command(kCli + flags + dir_a.string()).exit_code == 0);
  REQUIRE(run_command(kCli + flags + dir_b.string()).exit_code == 0);
  CHECK(testutil::read_file((dir_a / "figure_alpha3_a1_lambda2.csv").string()) ==
        testutil::read_file((dir_b / "figure_alpha3_a1_lambda2.csv").string()));

  const fs::path cfg = write_config(dir_a, "mix.json", R"({
    "version": 1, "model": "poisson",
    "prior": {"type": "discrete", "atoms": [[0.5], [2.1]], "weights": [0.5, 0.5]},
    "target": "moment-matched", "seed": 9, "samples": 50000, "workers": 4})");
  const auto run1 = run_command(kCli + " stability --config " + cfg.string());
  const auto run2 = run_command(kCli + " stability --config " + cfg.string());
  CHECK(run1.exit_code == 0);
  CHECK(run1.output == run2.output);

  const auto o1 = run_command(kCli + " oracle --suite all --trials 10 --seed 4");
  const auto o2 = run_command(kCli + " oracle --suite all --trials 10 --seed 4");
  CHECK(o1.output == o2.output);
}
