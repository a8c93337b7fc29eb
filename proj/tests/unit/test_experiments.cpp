#include <doctest.h>

#include "locball/experiments/acceptance.hpp"
#include "locball/experiments/artifacts.hpp"
#include "locball/experiments/config.hpp"
#include "locball/experiments/runner.hpp"

#include <cmath>
#include <sstream>

using namespace locball;
using namespace locball::experiments;

TEST_SUITE("experiments") {
  TEST_CASE("tolerance table") {
    Tolerances t;
    CHECK(t["borell_ratio_max"] == 3.0);
    CHECK(t["martingale_z"] == 4.0);
    t.set("borell_ratio_max", 5.0);
    CHECK(t["borell_ratio_max"] == 5.0);
    CHECK_THROWS_AS(t.set("nope", 1.0), Error);
    CHECK_THROWS_AS(t["nope"], Error);
    for (const auto& [name, entry] : t.table()) CHECK_FALSE(entry.description.empty());
  }

  TEST_CASE("INI and JSON configs round-trip") {
    const auto c = ExperimentConfig::from_ini(
        "[experiment]\nname = verify.borell\nseed = 18446744073709551557\n"
        "[family]\nkind = product_laplace\ndimension = 5\n"
        "[parameters]\nexponents = 3, 4.5\nsamples = 1000\n"
        "[tolerances]\nborell_ratio_max = 4.6\n");
    CHECK(c.experiment == "verify.borell");
    CHECK(c.seed == 18446744073709551557ULL);
    CHECK(c.dimension == 5);
    CHECK(c.exponents == std::vector<double>{3.0, 4.5});
    CHECK(c.tolerances["borell_ratio_max"] == 4.6);
    CHECK(c.artifact_stem() == "verify-borell-18446744073709551557");

    const auto back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
  }

  TEST_CASE("config validation lists every problem") {
    ExperimentConfig c;
    c.experiment = "nothing";
    c.dimension = 0;
    c.epsilons = {0.5, 1.0};
    c.lambda = 1.0;
    const auto problems = c.problems();
    CHECK(problems.size() == 4);
    try {
      c.validate();
      FAIL("validate accepted a bad config");
    } catch (const Error& e) {
      CHECK(e.module() == "cli");
      const std::string what = e.what();
      CHECK(what.find("replicate-all") != std::string::npos);
      CHECK(what.find("parameters.lambda") != std::string::npos);
    }
    CHECK_THROWS_AS(ExperimentConfig::from_ini("[parameters]\ncolour = red\n"), Error);
    CHECK_THROWS_AS(ExperimentConfig::from_ini("[parameters]\nsamples = many\n"), Error);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"family", {{"dimension", 2.5}}}}), Error);
  }

  TEST_CASE("CSV formatting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::nan("")) == "");
    const double third = 1.0 / 3.0;
    CHECK(std::stod(format_number(third)) == third);

    std::ostringstream os;
    write_csv(os, {{"gaussian", 2, 0.1, "P(x, y)", "probability", 0.5, 0.4, 0.6},
                   {"cube", 3, std::nan(""), "L_K", "length", 0.25}});
    CHECK(os.str() ==
          "family,n,epsilon,quantity,unit,estimate,ci_low,ci_high\r\n"
          "gaussian,2,0.1,\"P(x, y)\",probability,0.5,0.4,0.6\r\n"
          "cube,3,,L_K,length,0.25,,\r\n");
  }

  TEST_CASE("git blob hash") {
    // git hash-object of "hello\n"
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  }

  TEST_CASE("named seeds") {
    CHECK(named_seed(1, "a") == named_seed(1, "a"));
    CHECK(named_seed(1, "a") != named_seed(1, "b"));
    CHECK(named_seed(1, "a") != named_seed(2, "a"));
  }

  TEST_CASE("bounds experiment") {
    ExperimentConfig c;
    c.experiment = "bounds";
    c.spectrum = {1, 1, 1, 4, 1};
    c.epsilons = {0.01};
    const auto out = run_experiment(c);
    CHECK(out.passed());
    bool found = false;
    for (const auto& row : out.rows) {
      if (row.quantity == "projected paouris bound") {
        CHECK(std::abs(row.estimate - std::pow(0.1, 0.16)) < 1e-12);
        found = true;
      }
    }
    CHECK(found);
  }

  TEST_CASE("acceptance criteria are numbered 1 to 11") {
    CHECK(AcceptanceSuite::catalog().size() == 11);
    AcceptanceSuite suite(1);
    CHECK_THROWS_AS(suite.run(12), Error);
    const auto r = suite.run(9);
    CHECK(r.passed());
    CHECK(r.line().rfind("[PASS] C09", 0) == 0);
  }

  TEST_CASE("backend resolution") {
    ExperimentConfig c;
    c.family = "uniform_ball";
    c.dimension = 3;
    CHECK(resolve_backend(c, build_family(c)) == Backend::sampling);
    c.backend = "quadrature";
    CHECK_THROWS_AS(resolve_backend(c, build_family(c)), Error);
    c.family = "product_laplace";
    CHECK(resolve_backend(c, build_family(c)) == Backend::quadrature);
    c.transform = "symmetrize";
    c.backend = "auto";
    CHECK(resolve_backend(c, build_family(c)) == Backend::sampling);
  }
}
