#include <doctest.h>

#include <cmath>
#include <vector>

#include "zmd/optics.hpp"
#include "zmd/theory.hpp"

using namespace zmd;

namespace {

struct WarnCapture {
  std::vector<std::string> messages;
  WarnCapture() {
    optics::set_warn_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarnCapture() { optics::set_warn_handler(nullptr); }
};

theory::SdeConfig base_config() {
  theory::SdeConfig cfg;
  cfg.beta = [](double) { return 1.0; };
  cfg.steps = 1000;
  cfg.paths = 2000;
  cfg.dim = 3;
  cfg.seed = 1;
  return cfg;
}

}  // namespace

TEST_CASE("zero rate freezes every path") {
  theory::SdeConfig cfg = base_config();
  cfg.beta = [](double) { return 0.0; };
  cfg.paths = 200;
  auto y0 = [](Rng&, std::vector<double>& y) { y = {1.0, -2.0, 0.5}; };
  auto moments = theory::simulate_forward_paths(y0, cfg);
  REQUIRE(moments.size() == cfg.record_times.size());
  for (const auto& m : moments) {
    CHECK(m.mean[0] == doctest::Approx(1.0));
    CHECK(m.mean[1] == doctest::Approx(-2.0));
    CHECK(m.mean[2] == doctest::Approx(0.5));
    for (double v : m.variance) CHECK(v == doctest::Approx(0.0));
  }
}

TEST_CASE("constant rate matches the Ornstein-Uhlenbeck closed forms") {
  const double b = 2.0;
  theory::SdeConfig cfg = base_config();
  cfg.beta = [b](double) { return b; };
  cfg.paths = 20000;
  cfg.dim = 2;
  cfg.record_times = {0.5, 1.0};
  const double c = 1.5;
  auto y0 = [c](Rng&, std::vector<double>& y) { y.assign(2, c); };
  auto moments = theory::simulate_forward_paths(y0, cfg);
  for (const auto& m : moments) {
    double expected_mean = c * std::exp(-b * m.t / 2.0);
    double expected_var = 1.0 - std::exp(-b * m.t);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(m.mean[i] - expected_mean) < 3.0 * m.mean_se + 0.01);
      double var_se = expected_var * std::sqrt(2.0 / cfg.paths);
      CHECK(std::abs(m.variance[i] - expected_var) < 3.0 * var_se + 0.01);
    }
  }
}

TEST_CASE("simulation is deterministic under the seed") {
  theory::SdeConfig cfg = base_config();
  cfg.paths = 300;
  auto y0 = [](Rng& rng, std::vector<double>& y) {
    for (double& v : y) v = rng.normal();
  };
  auto a = theory::simulate_forward_paths(y0, cfg);
  auto b = theory::simulate_forward_paths(y0, cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean == b[i].mean);
    CHECK(a[i].variance == b[i].variance);
  }
  cfg.seed = 2;
  auto c = theory::simulate_forward_paths(y0, cfg);
  CHECK(a[0].mean != c[0].mean);
}

TEST_CASE("a coarse grid against a stiff rate triggers a warning") {
  WarnCapture warns;
  theory::SdeConfig cfg = base_config();
  cfg.beta = [](double) { return 10.0; };
  cfg.steps = 10;  // beta * dt = 1 > 0.5
  cfg.paths = 100;
  auto y0 = [](Rng&, std::vector<double>& y) { y.assign(y.size(), 0.0); };
  theory::simulate_forward_paths(y0, cfg);
  CHECK(!warns.messages.empty());
}

TEST_CASE("mean propagation check passes for a well-resolved rate") {
  theory::SdeConfig cfg = base_config();
  cfg.beta = [](double t) { return 0.5 + 2.0 * t; };
  cfg.paths = 10000;
  theory::CheckResult r = theory::check_lemma_mean(cfg, {1.0, -2.0, 0.5});
  CHECK(r.passed);
  CHECK(r.measured < r.threshold);

  // the zero-mean start degenerates to an absolute bound
  theory::CheckResult z = theory::check_lemma_mean(cfg, {0.0, 0.0, 0.0});
  CHECK(z.passed);
}

TEST_CASE("centering the start is the same as shifting the process") {
  theory::SdeConfig cfg = base_config();
  cfg.beta = [](double) { return 2.0; };
  cfg.paths = 10000;
  theory::CheckResult r = theory::check_centered_process(cfg, {1.0, -1.0, 2.0});
  CHECK(r.passed);
}

TEST_CASE("moment identity holds for arbitrary datasets") {
  Rng rng(17);
  std::vector<std::vector<double>> data;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> row(6);
    for (double& v : row) v = 3.0 * rng.normal() + 1.0;
    data.push_back(row);
  }
  theory::CheckResult r = theory::check_moment_identity(data);
  CHECK(r.passed);
  CHECK(r.measured <= 1e-10);

  SUBCASE("a single point is its own mean") {
    std::vector<std::vector<double>> one = {{1.0, 2.0, 3.0}};
    CHECK(theory::check_moment_identity(one).passed);
  }
  SUBCASE("an already centered dataset") {
    std::vector<std::vector<double>> sym = {{1.0, -2.0}, {-1.0, 2.0}};
    CHECK(theory::check_moment_identity(sym).passed);
  }
}

TEST_CASE("config validation") {
  theory::SdeConfig cfg = base_config();
  cfg.steps = 5;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = base_config();
  cfg.paths = 10;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = base_config();
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("the full battery passes and serializes") {
  theory::Report report = theory::run_all_checks(123, 2000);
  CHECK(report.all_passed());
  CHECK(report.checks.size() == 7);
  std::string json = report.to_json();
  CHECK(json.find("lemma_mean") != std::string::npos);
  CHECK(json.find("moment_identity") != std::string::npos);
}
