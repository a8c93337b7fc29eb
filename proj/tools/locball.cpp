#include "locball/experiments/artifacts.hpp"
#include "locball/experiments/config.hpp"
#include "locball/experiments/runner.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

using locball::experiments::ExperimentConfig;

using Override = std::function<void(ExperimentConfig&)>;

struct Command {
  CLI::App* app = nullptr;
  std::string experiment;
  std::vector<Override> overrides;
  std::string config_file;
  std::vector<std::string> tolerances;
  std::string out_file;
};

template <class T>
constexpr bool is_vector = false;
template <class T>
constexpr bool is_vector<std::vector<T>> = true;

template <class T>
void bind_option(Command& cmd, const std::string& flag, T ExperimentConfig::*member, const std::string& help) {
  auto holder = std::make_shared<T>();
  CLI::Option* opt = cmd.app->add_option(flag, *holder, help);
  if constexpr (is_vector<T>) opt->delimiter(',');
  cmd.overrides.push_back([=](ExperimentConfig& c) {
    if (opt->count() > 0) c.*member = *holder;
  });
}

void common_options(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_file, "Base configuration (.json or sectioned key=value)");
  bind_option(cmd, "--seed", &ExperimentConfig::seed, "Master seed");
  bind_option(cmd, "--out-dir", &ExperimentConfig::output_dir, "Directory for the CSV and JSON artifacts");
  cmd.app->add_option("--tol", cmd.tolerances, "Tolerance override name=value (repeatable)");
}

void family_options(Command& cmd) {
  bind_option(cmd, "--family", &ExperimentConfig::family, "gaussian, uniform_cube, uniform_ball, uniform_simplex, product_laplace");
  bind_option(cmd, "--dim", &ExperimentConfig::dimension, "Dimension n");
  bind_option(cmd, "--transform", &ExperimentConfig::transform, "none, symmetrize or reduce");
  bind_option(cmd, "--c0", &ExperimentConfig::c0_constant, "Working value of C0 in the reduction");
}

void path_options(Command& cmd) {
  bind_option(cmd, "--T", &ExperimentConfig::horizon, "Horizon");
  bind_option(cmd, "--dt", &ExperimentConfig::dt, "Euler-Maruyama step");
  bind_option(cmd, "--paths", &ExperimentConfig::paths, "Number of paths M");
  bind_option(cmd, "--backend", &ExperimentConfig::backend, "auto, closed_form, quadrature or sampling");
  bind_option(cmd, "--budget", &ExperimentConfig::budget, "Importance-sampling pool size per path");
  bind_option(cmd, "--record-every", &ExperimentConfig::record_every, "Record moments every this many steps");
}

void apply_tolerances(const Command& cmd, ExperimentConfig& c) {
  for (const auto& item : cmd.tolerances) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw locball::Error("cli", "--tol expects name=value, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    double value = 0.0;
    try {
      value = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw locball::Error("cli", "--tol " + name + ": cannot parse '" + item.substr(eq + 1) + "'");
    }
    c.tolerances.set(name, value);
  }
}

int execute(const Command& cmd) {
  using namespace locball::experiments;
  ExperimentConfig c;
  if (!cmd.config_file.empty()) c = ExperimentConfig::load(cmd.config_file);
  if (!cmd.experiment.empty()) c.experiment = cmd.experiment;
  for (const auto& o : cmd.overrides) o(c);
  apply_tolerances(cmd, c);

  const auto start = std::chrono::steady_clock::now();
  const RunResult result = run(c);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto files = write_artifacts(c, result.output, seconds);

  if (!cmd.out_file.empty()) {
    std::ofstream out(cmd.out_file, std::ios::binary);
    if (!out) throw locball::Error("cli", "cannot write " + cmd.out_file);
    if (result.reduction) out << reduction_report_json(*result.reduction).dump(2) << '\n';
    else write_path_csv(out, result.paths);
  }

  for (const auto& v : result.output.verdicts) {
    std::cout << (v.passed ? "[PASS] " : "[FAIL] ") << v.name;
    if (!v.detail.empty()) std::cout << ": " << v.detail;
    std::cout << '\n';
  }
  std::cout << "wrote " << files.csv.string() << " and " << files.json.string() << '\n';
  return result.output.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic localization and small-ball probability experiments"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& experiment, const std::string& help) -> Command& {
    auto cmd = std::make_unique<Command>();
    cmd->app = app.add_subcommand(name, help);
    cmd->experiment = experiment;
    common_options(*cmd);
    commands.push_back(std::move(cmd));
    return *commands.back();
  };

  {
    auto& cmd = add("reduce", "reduce", "Symmetrize, condition to a ball and whiten a family");
    family_options(cmd);
    cmd.app->add_option("--out", cmd.out_file, "Write the flat reduction report here");
  }
  {
    auto& cmd = add("localize", "localize", "Run a stochastic localization path ensemble");
    family_options(cmd);
    path_options(cmd);
    cmd.app->add_option("--out", cmd.out_file, "Write the per-state path CSV here");
  }
  {
    auto& cmd = add("smallball", "smallball", "Estimate P(|X|^2 <= eps n) over an epsilon grid");
    family_options(cmd);
    bind_option(cmd, "--epsilons", &ExperimentConfig::epsilons, "Epsilon grid in (0, 1)");
    bind_option(cmd, "--samples", &ExperimentConfig::samples, "Monte-Carlo sample count N");
  }
  {
    auto& cmd = add("bounds", "bounds", "Evaluate the closed-form small-ball bounds");
    bind_option(cmd, "--dim", &ExperimentConfig::dimension, "Dimension of the identity spectrum");
    bind_option(cmd, "--spectrum", &ExperimentConfig::spectrum, "Covariance eigenvalues");
    bind_option(cmd, "--epsilons", &ExperimentConfig::epsilons, "Epsilon grid in (0, 1)");
    bind_option(cmd, "--b", &ExperimentConfig::b, "Subgaussian constant b");
    bind_option(cmd, "--c", &ExperimentConfig::c_universal, "Universal constant in the exponents");
    bind_option(cmd, "--psi-sq", &ExperimentConfig::psi_sq, "Squared KLS constant (0: log n)");
  }
  {
    auto& cmd = add("verify", "", "Check one lemma numerically");
    auto name = std::make_shared<std::string>();
    cmd.app->add_option("name", *name, "martingale, covbound, borell, subgaussian, shrinkage, guan or subspace")
        ->required()
        ->check(CLI::IsMember({"martingale", "covbound", "borell", "subgaussian", "shrinkage", "guan", "subspace"}));
    cmd.overrides.insert(cmd.overrides.begin(), [name](ExperimentConfig& c) { c.experiment = "verify." + *name; });
    family_options(cmd);
    path_options(cmd);
    bind_option(cmd, "--region-budget", &ExperimentConfig::region_budget, "Importance-sampling points for tilted set measures");
    bind_option(cmd, "--samples", &ExperimentConfig::samples, "Monte-Carlo sample count");
    bind_option(cmd, "--times", &ExperimentConfig::times, "Times at which martingale means are compared");
    bind_option(cmd, "--t-values", &ExperimentConfig::t_values, "Tilt strengths for the subgaussian check");
    bind_option(cmd, "--exponents", &ExperimentConfig::exponents, "Moment exponents for the Borell check");
    bind_option(cmd, "--directions", &ExperimentConfig::directions, "Random directions for the Borell check");
    bind_option(cmd, "--p-max", &ExperimentConfig::p_max, "Largest even moment in the subgaussian check");
    bind_option(cmd, "--lambda", &ExperimentConfig::lambda, "lambda > 1 in the shrinkage event");
    bind_option(cmd, "--radius", &ExperimentConfig::radius, "Ball radius for the shrinkage set (0: sqrt n)");
    bind_option(cmd, "--spectrum", &ExperimentConfig::spectrum, "Spectrum for the subspace check");
  }
  {
    auto& cmd = add("certificate", "certificate", "Replay the small-ball certificate on a bounded family");
    family_options(cmd);
    bind_option(cmd, "--c1", &ExperimentConfig::c1, "Stopping time c1 in (0, 1]");
    bind_option(cmd, "--lambda", &ExperimentConfig::lambda, "lambda > 1");
    bind_option(cmd, "--epsilons", &ExperimentConfig::epsilons, "Epsilon grid in (0, 1)");
    bind_option(cmd, "--dt", &ExperimentConfig::dt, "Euler-Maruyama step");
    bind_option(cmd, "--paths", &ExperimentConfig::paths, "Number of paths");
    bind_option(cmd, "--budget", &ExperimentConfig::budget, "Importance-sampling pool size per path");
    bind_option(cmd, "--region-budget", &ExperimentConfig::region_budget, "Importance-sampling points for mu_t(S_eps)");
    bind_option(cmd, "--samples", &ExperimentConfig::samples, "Monte-Carlo samples for mu(S_eps)");
    bind_option(cmd, "--c", &ExperimentConfig::c_universal, "Constant in the projected bound");
  }
  {
    auto& cmd = add("slicing", "slicing", "Isotropic constant and ball-slice volumes of a convex body");
    bind_option(cmd, "--body", &ExperimentConfig::body, "cube, ball or simplex");
    bind_option(cmd, "--dim", &ExperimentConfig::dimension, "Dimension n");
    bind_option(cmd, "--epsilons", &ExperimentConfig::slice_epsilons, "Epsilon grid (any positive values)");
    bind_option(cmd, "--samples", &ExperimentConfig::samples, "Monte-Carlo sample count");
    bind_option(cmd, "--c-ref", &ExperimentConfig::c_reference, "C'' of the reference curve");
  }
  {
    auto& cmd = add("replicate-all", "replicate-all", "Run the acceptance criteria");
    bind_option(cmd, "--criteria", &ExperimentConfig::criteria, "Subset of criteria 1..11");
  }
  {
    auto& cmd = add("run", "", "Run the experiment named in a configuration file");
    cmd.app->get_option("--config")->required();
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& cmd : commands) {
    if (!cmd->app->parsed()) continue;
    try {
      return execute(*cmd);
    } catch (const locball::Error& e) {
      std::cerr << "error [" << e.module() << "]: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
  }
  return 2;
}
