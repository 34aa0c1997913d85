#include "zmd/theory.hpp"

#include <cmath>
#include <json.hpp>

#include "zmd/optics.hpp"
#include "zmd/parallel.hpp"

namespace zmd::theory {

namespace {

double integral_beta(const std::function<double(double)>& beta, double t, int n = 4096) {
  // composite trapezoid on [0, t]
  if (t <= 0) return 0;
  double h = t / n, acc = 0.5 * (beta(0.0) + beta(t));
  for (int i = 1; i < n; ++i) acc += beta(i * h);
  return acc * h;
}

struct PathRecords {
  // [time][path * dim + d]
  std::vector<std::vector<double>> values;
};

PathRecords simulate(const std::function<void(Rng&, std::vector<double>&)>& y0_sampler,
                     const SdeConfig& cfg) {
  cfg.validate();
  double dt = 1.0 / cfg.steps;
  for (int s = 0; s <= cfg.steps; ++s) {
    if (cfg.beta(s * dt) * dt > 0.5) {
      optics::warn("simulate_forward_paths: beta*dt > 0.5, step too coarse for stiff rate");
      break;
    }
  }
  std::vector<int> record_steps;
  for (double t : cfg.record_times)
    record_steps.push_back(static_cast<int>(std::lround(t * cfg.steps)));

  PathRecords rec;
  rec.values.assign(cfg.record_times.size(),
                    std::vector<double>(static_cast<size_t>(cfg.paths) * cfg.dim, 0.0));

  parallel_for(static_cast<size_t>(cfg.paths), [&](size_t p) {
    Rng rng(cfg.seed, p);
    std::vector<double> y(cfg.dim);
    y0_sampler(rng, y);
    for (size_t r = 0; r < record_steps.size(); ++r)
      if (record_steps[r] == 0)
        for (int d = 0; d < cfg.dim; ++d) rec.values[r][p * cfg.dim + d] = y[d];
    for (int s = 1; s <= cfg.steps; ++s) {
      double t = (s - 1) * dt;
      double b = cfg.beta(t);
      double diff = std::sqrt(b * dt);
      for (int d = 0; d < cfg.dim; ++d)
        y[d] += -0.5 * b * y[d] * dt + diff * rng.normal();
      for (size_t r = 0; r < record_steps.size(); ++r)
        if (record_steps[r] == s)
          for (int d = 0; d < cfg.dim; ++d) rec.values[r][p * cfg.dim + d] = y[d];
    }
  });
  return rec;
}

Moments moments_of(const std::vector<double>& vals, int paths, int dim, double t) {
  Moments m;
  m.t = t;
  m.mean.assign(dim, 0.0);
  m.variance.assign(dim, 0.0);
  for (int p = 0; p < paths; ++p)
    for (int d = 0; d < dim; ++d) m.mean[d] += vals[static_cast<size_t>(p) * dim + d];
  for (double& v : m.mean) v /= paths;
  for (int p = 0; p < paths; ++p)
    for (int d = 0; d < dim; ++d) {
      double dv = vals[static_cast<size_t>(p) * dim + d] - m.mean[d];
      m.variance[d] += dv * dv;
    }
  for (double& v : m.variance) v /= (paths - 1);
  double avg_var = 0;
  for (double v : m.variance) avg_var += v;
  avg_var /= dim;
  m.mean_se = std::sqrt(avg_var / paths);
  return m;
}

}  // namespace

std::vector<Moments> simulate_forward_paths(
    const std::function<void(Rng&, std::vector<double>&)>& y0_sampler,
    const SdeConfig& cfg) {
  PathRecords rec = simulate(y0_sampler, cfg);
  std::vector<Moments> out;
  for (size_t r = 0; r < cfg.record_times.size(); ++r)
    out.push_back(moments_of(rec.values[r], cfg.paths, cfg.dim, cfg.record_times[r]));
  return out;
}

CheckResult check_lemma_mean(const SdeConfig& cfg, const std::vector<double>& mu0,
                             double tolerance) {
  if (static_cast<int>(mu0.size()) != cfg.dim)
    throw InvalidInput("check_lemma_mean: mu0 dimension mismatch");
  auto sampler = [&mu0](Rng&, std::vector<double>& y) {
    y.assign(mu0.begin(), mu0.end());
  };
  auto moments = simulate_forward_paths(sampler, cfg);

  double mu0_norm = 0;
  for (double v : mu0) mu0_norm += v * v;
  mu0_norm = std::sqrt(mu0_norm);

  CheckResult res;
  res.name = "lemma_mean";
  res.passed = true;
  double worst = 0;
  for (const auto& m : moments) {
    double sqrt_gamma = std::exp(-0.5 * integral_beta(cfg.beta, m.t));
    double err = 0;
    for (int d = 0; d < cfg.dim; ++d) {
      double dv = m.mean[d] - sqrt_gamma * mu0[d];
      err += dv * dv;
    }
    err = std::sqrt(err);
    if (mu0_norm > 0) {
      double rel = err / mu0_norm;
      worst = std::max(worst, rel);
      if (rel > tolerance) res.passed = false;
    } else {
      // degenerate zero-mean start: absolute error within 3 SE
      double limit = 3.0 * m.mean_se * std::sqrt(static_cast<double>(cfg.dim));
      worst = std::max(worst, err);
      if (err > limit) res.passed = false;
      res.threshold = limit;
    }
  }
  res.measured = worst;
  if (mu0_norm > 0) res.threshold = tolerance;
  res.detail = "max error over record times vs sqrt(gamma)*mu0";
  return res;
}

CheckResult check_centered_process(const SdeConfig& cfg, const std::vector<double>& mu0,
                                   double y0_std) {
  if (static_cast<int>(mu0.size()) != cfg.dim)
    throw InvalidInput("check_centered_process: mu0 dimension mismatch");
  auto sampler_raw = [&](Rng& rng, std::vector<double>& y) {
    for (int d = 0; d < cfg.dim; ++d) y[d] = mu0[d] + y0_std * rng.normal();
  };
  auto sampler_centered = [&](Rng& rng, std::vector<double>& y) {
    for (int d = 0; d < cfg.dim; ++d) y[d] = y0_std * rng.normal();
  };
  SdeConfig cfg_b = cfg;
  cfg_b.seed = splitmix64(cfg.seed ^ 0xC0FFEE);

  auto ma = simulate_forward_paths(sampler_raw, cfg);
  auto mb = simulate_forward_paths(sampler_centered, cfg_b);

  CheckResult res;
  res.name = "centered_process";
  res.passed = true;
  double worst_sigma = 0;
  for (size_t r = 0; r < ma.size(); ++r) {
    double sqrt_gamma = std::exp(-0.5 * integral_beta(cfg.beta, ma[r].t));
    double se = std::sqrt(ma[r].mean_se * ma[r].mean_se + mb[r].mean_se * mb[r].mean_se);
    for (int d = 0; d < cfg.dim; ++d) {
      // subtract mu_t = sqrt(gamma) mu0 from the raw process mean
      double centered_mean = ma[r].mean[d] - sqrt_gamma * mu0[d];
      double diff = std::abs(centered_mean - mb[r].mean[d]);
      worst_sigma = std::max(worst_sigma, diff / se);
      if (diff > 3.0 * se) res.passed = false;
    }
    // covariance trace agreement
    double tra = 0, trb = 0;
    for (int d = 0; d < cfg.dim; ++d) {
      tra += ma[r].variance[d];
      trb += mb[r].variance[d];
    }
    // variance of a variance estimate ~ 2 sigma^4 / n per coordinate
    double se_tr = 0;
    for (int d = 0; d < cfg.dim; ++d)
      se_tr += 2.0 * ma[r].variance[d] * ma[r].variance[d] / cfg.paths +
               2.0 * mb[r].variance[d] * mb[r].variance[d] / cfg.paths;
    se_tr = std::sqrt(se_tr);
    double diff_tr = std::abs(tra - trb);
    worst_sigma = std::max(worst_sigma, diff_tr / se_tr);
    if (diff_tr > 3.0 * se_tr) res.passed = false;
  }
  res.measured = worst_sigma;
  res.threshold = 3.0;
  res.detail = "worst |difference| in units of SE over means and covariance traces";
  return res;
}

CheckResult check_moment_identity(const std::vector<std::vector<double>>& dataset) {
  CheckResult res;
  res.name = "moment_identity";
  res.threshold = 1e-10;
  if (dataset.empty()) {
    res.passed = false;
    res.detail = "empty dataset";
    return res;
  }
  size_t dim = dataset[0].size();
  std::vector<double> mu0(dim, 0.0);
  for (const auto& y : dataset)
    for (size_t d = 0; d < dim; ++d) mu0[d] += y[d];
  for (double& v : mu0) v /= dataset.size();

  double lhs = 0, rhs = 0, mu_norm2 = 0;
  for (double v : mu0) mu_norm2 += v * v;
  for (const auto& y : dataset) {
    double c = 0, raw = 0;
    for (size_t d = 0; d < dim; ++d) {
      c += (y[d] - mu0[d]) * (y[d] - mu0[d]);
      raw += y[d] * y[d];
    }
    lhs += c;
    rhs += raw;
  }
  lhs /= dataset.size();
  rhs = rhs / dataset.size() - mu_norm2;
  double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  res.measured = std::abs(lhs - rhs) / scale;
  res.passed = res.measured < res.threshold;
  res.detail = "relative gap between centered and raw second-moment forms";
  return res;
}

std::string Report::to_json() const {
  nlohmann::json j;
  j["all_passed"] = all_passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"measured", c.measured},
                           {"threshold", c.threshold},
                           {"detail", c.detail}});
  }
  return j.dump(2);
}

Report run_all_checks(uint64_t seed, int paths) {
  Report report;
  std::vector<double> mu0 = {1.0, -2.0, 0.5, 3.0};
  for (double b : {0.5, 2.0, 10.0}) {
    SdeConfig cfg;
    cfg.beta = [b](double) { return b; };
    cfg.paths = paths;
    cfg.steps = 1000;
    cfg.dim = 4;
    cfg.seed = splitmix64(seed ^ static_cast<uint64_t>(b * 1000));
    CheckResult lemma = check_lemma_mean(cfg, mu0);
    lemma.name += "_b" + std::to_string(b).substr(0, 4);
    report.checks.push_back(lemma);
    CheckResult centered = check_centered_process(cfg, mu0);
    centered.name += "_b" + std::to_string(b).substr(0, 4);
    report.checks.push_back(centered);
  }
  Rng rng(seed);
  std::vector<std::vector<double>> dataset(200, std::vector<double>(8));
  for (auto& y : dataset)
    for (double& v : y) v = 3.0 + 2.0 * rng.normal();
  report.checks.push_back(check_moment_identity(dataset));
  return report;
}

}  // namespace zmd::theory
