// pcme command-line interface: figures, conjugacy, stability, oracle.
//
// Exit codes: 0 success (bound holds / suites pass), 1 a checked bound or
// suite failed, 2 usage or configuration error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pcme/conjugacy.hpp"
#include "pcme/dark_current.hpp"
#include "pcme/gaussian.hpp"
#include "pcme/json_io.hpp"
#include "pcme/oracle.hpp"
#include "pcme/stability.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void reject_unknown_keys(const json& j, const std::string& path,
                         const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw ConfigError(path + ": unknown field '" + item.key() + "'");
}

void require_version_1(const json& j, const std::string& path) {
  if (!j.contains("version")) throw ConfigError(path + ": missing 'version'");
  if (!j["version"].is_number_integer() || j["version"].get<int>() != 1)
    throw ConfigError(path + ".version: expected 1");
}

json load_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file + ": " + e.what());
  }
}

pcme::Vec parse_vec(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
  pcme::Vec v;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
    v.push_back(j[i].get<double>());
  }
  return v;
}

pcme::Matrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected an array of rows");
  std::vector<pcme::Vec> rows;
  for (std::size_t i = 0; i < j.size(); ++i)
    rows.push_back(parse_vec(j[i], path + "[" + std::to_string(i) + "]"));
  pcme::Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw ConfigError(path + ": ragged rows");
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k];
  }
  return m;
}

pcme::GammaProductPrior parse_gamma_prior(const json& j, const std::string& path) {
  const pcme::Vec shape = parse_vec(j.at("shape"), path + ".shape");
  const pcme::Vec rate = parse_vec(j.at("rate"), path + ".rate");
  if (shape.size() != rate.size() || shape.empty())
    throw ConfigError(path + ": shape and rate must be nonempty and equal length");
  std::vector<pcme::GammaParams> coords;
  for (std::size_t i = 0; i < shape.size(); ++i) coords.emplace_back(shape[i], rate[i]);
  return pcme::GammaProductPrior(std::move(coords));
}

std::string format_flag_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path.string() + ": cannot open for writing");
  out << content;
}

// ---- figures ----

int cmd_figures(double alpha, double a, const std::vector<double>& lambdas, int kmax,
                const std::string& out_dir) {
  if (!(alpha > 0.0)) {
    std::cerr << "error: alpha must be > 0\n";
    return 2;
  }
  if (!(a > 0.0)) {
    std::cerr << "error: a must be > 0\n";
    return 2;
  }
  if (lambdas.empty()) {
    std::cerr << "error: lambda must be given at least once\n";
    return 2;
  }
  for (double lam : lambdas)
    if (lam < 0.0) {
      std::cerr << "error: lambda must be >= 0\n";
      return 2;
    }
  if (kmax < 0) {
    std::cerr << "error: kmax must be >= 0\n";
    return 2;
  }
  fs::create_directories(out_dir);
  for (double lam : lambdas) {
    const pcme::ScalarDcModel model(alpha, a, lam);
    const auto rows = pcme::figure_data(model, kmax);
    std::ostringstream csv;
    pcme::write_figure_csv(csv, rows);
    const fs::path path = fs::path(out_dir) /
                          ("figure_alpha" + format_flag_double(alpha) + "_a" +
                           format_flag_double(a) + "_lambda" +
                           format_flag_double(lam) + ".csv");
    write_text_file(path, csv.str());
    std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
  }
  return 0;
}

// ---- conjugacy ----

int cmd_conjugacy(const std::string& input_file) {
  const json j = load_json_file(input_file);
  require_version_1(j, input_file);
  if (!j.contains("mode")) throw ConfigError(input_file + ": missing 'mode'");
  const std::string mode = j.at("mode").get<std::string>();

  if (mode == "forward") {
    reject_unknown_keys(j, input_file, {"version", "mode", "prior"});
    if (!j.contains("prior")) throw ConfigError(input_file + ": missing 'prior'");
    reject_unknown_keys(j["prior"], input_file + ".prior", {"shape", "rate"});
    const pcme::GammaProductPrior prior =
        parse_gamma_prior(j["prior"], input_file + ".prior");
    const pcme::LinearEstimator est = pcme::estimator_of_prior(prior);
    json h = json::array();
    for (std::size_t i = 0; i < est.dim(); ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < est.dim(); ++k) row.push_back(est.h_matrix(i, k));
      h.push_back(row);
    }
    std::cout << json{{"H", h}, {"c", est.offset}}.dump() << "\n";
    return 0;
  }

  if (mode == "check") {
    reject_unknown_keys(j, input_file,
                        {"version", "mode", "H", "c", "A", "lambda", "C", "b"});
    pcme::RealizabilityReport report;
    if (j.contains("H")) {
      const pcme::Matrix h = parse_matrix(j.at("H"), input_file + ".H");
      const pcme::Vec c = parse_vec(j.at("c"), input_file + ".c");
      // (H, c) realizability is the A = I, lambda = 0 corollary instance.
      const pcme::PoissonChannel identity_channel(pcme::Matrix::identity(h.rows()),
                                                  pcme::Vec(h.rows(), 0.0));
      report = pcme::corollary_check(identity_channel, h, c);
    } else {
      const pcme::Matrix a = parse_matrix(j.at("A"), input_file + ".A");
      const pcme::Vec lambda = parse_vec(j.at("lambda"), input_file + ".lambda");
      const pcme::Matrix c_matrix = parse_matrix(j.at("C"), input_file + ".C");
      const pcme::Vec b = parse_vec(j.at("b"), input_file + ".b");
      report = pcme::corollary_check(pcme::PoissonChannel(a, lambda), c_matrix, b);
    }
    std::cout << pcme::to_json(report).dump(2) << "\n";
    return 0;
  }
  throw ConfigError(input_file + ".mode: expected 'forward' or 'check'");
}

// ---- stability ----

pcme::PriorLike parse_poisson_prior(const json& j, const std::string& path) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "gamma") {
    reject_unknown_keys(j, path, {"type", "shape", "rate"});
    return parse_gamma_prior(j, path);
  }
  if (type == "discrete") {
    reject_unknown_keys(j, path, {"type", "atoms", "weights"});
    std::vector<pcme::Vec> atoms;
    for (std::size_t i = 0; i < j.at("atoms").size(); ++i)
      atoms.push_back(parse_vec(j["atoms"][i], path + ".atoms[" + std::to_string(i) + "]"));
    return pcme::DiscretePrior(std::move(atoms),
                               parse_vec(j.at("weights"), path + ".weights"));
  }
  throw ConfigError(path + ".type: expected 'gamma' or 'discrete'");
}

int cmd_stability(const std::string& config_file, const std::string& out_file,
                  std::optional<std::uint64_t> seed_override,
                  std::optional<int> workers_override) {
  const json j = load_json_file(config_file);
  require_version_1(j, config_file);
  reject_unknown_keys(j, config_file,
                      {"version", "model", "prior", "target", "a_matrix", "seed",
                       "samples", "workers", "grid_per_axis"});
  const std::string model_kind = j.at("model").get<std::string>();
  const std::uint64_t seed =
      seed_override.value_or(j.value("seed", std::uint64_t{1}));
  const std::int64_t samples = j.value("samples", std::int64_t{1000000});
  const int workers = workers_override.value_or(j.value("workers", 1));
  const int per_axis = j.value("grid_per_axis", 5);
  const pcme::MonteCarloConfig mc(seed, samples, workers);

  json report_json;
  bool holds = false;

  if (model_kind == "poisson") {
    if (!j.contains("prior")) throw ConfigError(config_file + ": missing 'prior'");
    const pcme::PriorLike prior =
        parse_poisson_prior(j["prior"], config_file + ".prior");
    pcme::GammaProductPrior target = [&]() {
      if (!j.contains("target") || (j["target"].is_string() &&
                                    j["target"].get<std::string>() == "moment-matched"))
        return pcme::moment_matched_gamma(prior);
      if (j["target"].is_object()) {
        reject_unknown_keys(j["target"], config_file + ".target",
                            {"type", "shape", "rate"});
        return parse_gamma_prior(j["target"], config_file + ".target");
      }
      throw ConfigError(config_file + ".target: expected 'moment-matched' or a gamma prior");
    }();
    const pcme::CharGrid grid = pcme::default_char_grid(pcme::prior_dim(prior), per_axis);
    const pcme::StabilityReport report =
        pcme::check_theorem2(prior, target, grid, mc);
    report_json = pcme::to_json(report);
    holds = report.holds;
  } else if (model_kind == "gaussian") {
    if (!j.contains("a_matrix"))
      throw ConfigError(config_file + ": gaussian model requires 'a_matrix'");
    const pcme::Matrix a = parse_matrix(j["a_matrix"], config_file + ".a_matrix");
    if (!j.contains("prior")) throw ConfigError(config_file + ": missing 'prior'");
    const json& pj = j["prior"];
    const std::string type = pj.at("type").get<std::string>();
    std::optional<pcme::GaussianModel> model;
    pcme::GaussianPrior prior = pcme::ExactGaussian{};
    if (type == "gaussian") {
      reject_unknown_keys(pj, config_file + ".prior", {"type", "mu", "k_matrix"});
      model.emplace(parse_vec(pj.at("mu"), config_file + ".prior.mu"),
                    parse_matrix(pj.at("k_matrix"), config_file + ".prior.k_matrix"), a);
    } else if (type == "discrete") {
      reject_unknown_keys(pj, config_file + ".prior", {"type", "atoms", "weights"});
      std::vector<pcme::Vec> atoms;
      for (std::size_t i = 0; i < pj.at("atoms").size(); ++i)
        atoms.push_back(parse_vec(pj["atoms"][i],
                                  config_file + ".prior.atoms[" + std::to_string(i) + "]"));
      pcme::PointMixture mixture(std::move(atoms),
                                 parse_vec(pj.at("weights"), config_file + ".prior.weights"));
      model.emplace(pcme::moment_matched_gaussian(mixture, a));
      prior = std::move(mixture);
    } else {
      throw ConfigError(config_file + ".prior.type: expected 'gaussian' or 'discrete'");
    }
    const pcme::CharGrid grid = pcme::default_char_grid(model->output_dim(), per_axis);
    const pcme::GaussianStabilityReport report =
        pcme::check_theorem4(*model, prior, grid, mc);
    report_json = pcme::to_json(report);
    holds = report.holds;
  } else {
    throw ConfigError(config_file + ".model: expected 'poisson' or 'gaussian'");
  }

  const std::string text = report_json.dump(2) + "\n";
  if (out_file.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_file, text);
  }
  return holds ? 0 : 1;
}

// ---- oracle ----

int cmd_oracle(const std::string& suite, int trials, std::uint64_t seed) {
  if (suite != "trg" && suite != "cov" && suite != "laplace-residual" && suite != "all") {
    std::cerr << "error: unknown suite '" << suite << "'\n";
    return 2;
  }
  if (trials < 1) {
    std::cerr << "error: trials must be >= 1\n";
    return 2;
  }
  const auto results = pcme::run_oracle_suites(suite, trials, seed);
  bool all_pass = true;
  for (const pcme::OracleResult& r : results) {
    std::printf("%-16s trials=%-5d max discrepancy %.6e (tol %.0e) %s\n",
                r.suite.c_str(), r.trials, r.max_discrepancy, r.tolerance,
                r.pass ? "PASS" : "FAIL");
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional-mean estimation in vector Poisson noise"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> global_seed;
  std::optional<int> global_workers;
  std::string out_dir = ".";
  app.add_option("--seed", global_seed, "Seed override for seeded subcommands");
  app.add_option("--workers", global_workers, "Worker-thread override");
  app.add_option("--out-dir", out_dir, "Output directory for generated files");

  auto* figures = app.add_subcommand("figures", "Dark-current estimator tables as CSV");
  double alpha = 3.0, a = 1.0;
  std::vector<double> lambdas;
  int kmax = 35;
  figures->add_option("--alpha", alpha, "Exponential prior rate");
  figures->add_option("--a", a, "Scalar intensity");
  figures->add_option("--lambda", lambdas, "Dark current value (repeatable)");
  figures->add_option("--kmax", kmax, "Largest count k");

  auto* conjugacy = app.add_subcommand("conjugacy", "Prior <-> estimator maps and checks");
  std::string conjugacy_input;
  conjugacy->add_option("--input", conjugacy_input, "JSON input file")->required();

  auto* stability = app.add_subcommand("stability", "Theorem-2/Theorem-4 bound reports");
  std::string stability_config, stability_out;
  stability->add_option("--config", stability_config, "JSON config file")->required();
  stability->add_option("--out", stability_out, "Report file (default: stdout)");

  auto* oracle = app.add_subcommand("oracle", "Distribution-free oracle suites");
  std::string suite = "all";
  int trials = 200;
  std::uint64_t oracle_seed = 1;
  oracle->add_option("--suite", suite, "trg | cov | laplace-residual | all");
  oracle->add_option("--trials", trials, "Number of randomized trials");
  oracle->add_option("--seed", oracle_seed, "Suite RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (figures->parsed()) return cmd_figures(alpha, a, lambdas, kmax, out_dir);
    if (conjugacy->parsed()) return cmd_conjugacy(conjugacy_input);
    if (stability->parsed())
      return cmd_stability(stability_config, stability_out, global_seed, global_workers);
    if (oracle->parsed())
      return cmd_oracle(suite, trials, global_seed.value_or(oracle_seed));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
