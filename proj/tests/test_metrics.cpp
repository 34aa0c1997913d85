#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "zmd/metrics.hpp"
#include "zmd/optics.hpp"
#include "zmd/rng.hpp"

using namespace zmd;

namespace {

struct WarnCapture {
  std::vector<std::string> messages;
  WarnCapture() {
    optics::set_warn_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarnCapture() { optics::set_warn_handler(nullptr); }
};

// ---- reference implementation: direct 2-D convolution, no separability ----

std::vector<std::vector<double>> ref_window() {
  std::vector<std::vector<double>> w(11, std::vector<double>(11));
  double sum = 0;
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) {
      double dx = x - 5.0, dy = y - 5.0;
      w[y][x] = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
      sum += w[y][x];
    }
  for (auto& row : w)
    for (double& v : row) v /= sum;
  return w;
}

struct RefParts {
  double l = 0, cs = 0;
};

RefParts ref_ssim_parts(const RealImage& a, const RealImage& b, double range) {
  auto w = ref_window();
  double c1 = (0.01 * range) * (0.01 * range);
  double c2 = (0.03 * range) * (0.03 * range);
  RefParts out;
  int count = 0;
  for (int oy = 0; oy + 11 <= a.height; ++oy)
    for (int ox = 0; ox + 11 <= a.width; ++ox) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 11; ++x) {
          double va = a.at(ox + x, oy + y), vb = b.at(ox + x, oy + y);
          ma += w[y][x] * va;
          mb += w[y][x] * vb;
          saa += w[y][x] * va * va;
          sbb += w[y][x] * vb * vb;
          sab += w[y][x] * va * vb;
        }
      double var_a = saa - ma * ma, var_b = sbb - mb * mb, cov = sab - ma * mb;
      out.l += (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      out.cs += (2 * cov + c2) / (var_a + var_b + c2);
      ++count;
    }
  out.l /= count;
  out.cs /= count;
  return out;
}

RealImage ref_downsample(const RealImage& img) {
  RealImage out(img.width / 2, img.height / 2, img.pitch * 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.at(x, y) = (img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y) +
                      img.at(2 * x, 2 * y + 1) + img.at(2 * x + 1, 2 * y + 1)) /
                     4.0;
  return out;
}

double ref_ms_ssim(RealImage a, RealImage b, int levels) {
  static const double weights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  double lo = a.data[0], hi = a.data[0];
  for (double v : a.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : b.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double range = hi - lo > 0 ? hi - lo : 1.0;
  double wsum = 0;
  for (int l = 0; l < levels; ++l) wsum += weights[l];
  double score = 1.0;
  for (int l = 0; l < levels; ++l) {
    RefParts p = ref_ssim_parts(a, b, range);
    double term = (l == levels - 1) ? p.l * p.cs : p.cs;
    double w = weights[l] / wsum;
    score *= std::copysign(std::pow(std::abs(term), w), term);
    if (l + 1 < levels) {
      a = ref_downsample(a);
      b = ref_downsample(b);
    }
  }
  return score;
}

RealImage random_image(int w, int h, Rng& rng, double scale = 1.0) {
  RealImage img(w, h, 1e-6);
  for (double& v : img.data) v = 0.5 + scale * rng.normal();
  return img;
}

}  // namespace

TEST_CASE("gauge-removed mean absolute error") {
  RealImage a(8, 8, 1e-6, 0.5), b(8, 8, 1e-6, 3.5);
  CHECK(metrics::mae(a, a) == 0.0);
  // constant offsets are gauge and do not count
  CHECK(metrics::mae(a, b) == doctest::Approx(0.0));

  RealImage ramp(8, 8, 1e-6), flat(8, 8, 1e-6, 0.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) ramp.at(x, y) = x / 7.0;
  double expected = 0;
  for (int x = 0; x < 8; ++x) expected += std::abs(x / 7.0 - 0.5);
  expected /= 8.0;
  CHECK(metrics::mae(ramp, flat) == doctest::Approx(expected));

  RealImage other(4, 4, 1e-6);
  CHECK_THROWS_AS(metrics::mae(a, other), InvalidInput);
}

TEST_CASE("structural similarity basics") {
  Rng rng(1);
  RealImage a = random_image(32, 32, rng, 0.1);
  CHECK(metrics::ms_ssim(a, a, 2) == doctest::Approx(1.0));
  CHECK(metrics::ssim(a, a) == doctest::Approx(1.0));

  RealImage neg = a;
  for (double& v : neg.data) v = -v;
  CHECK(metrics::ms_ssim(a, neg, 2) < 1.0);

  RealImage b = random_image(32, 32, rng, 0.1);
  CHECK(metrics::ms_ssim(a, b, 2) == doctest::Approx(metrics::ms_ssim(b, a, 2)));
  CHECK(metrics::ms_ssim(a, b, 2) < 1.0);

  RealImage small(8, 8, 1e-6);
  CHECK_THROWS_AS(metrics::ms_ssim(small, small, 1), InvalidInput);
  RealImage mismatched(16, 16, 1e-6);
  CHECK_THROWS_AS(metrics::ms_ssim(a, mismatched, 2), InvalidInput);
  CHECK_THROWS_AS(metrics::ms_ssim(a, a, 0), InvalidInput);
  CHECK_THROWS_AS(metrics::ms_ssim(a, a, 6), InvalidInput);
}

TEST_CASE("multi-scale score agrees with a direct-convolution reference") {
  Rng rng(2);
  for (int trial = 0; trial < 18; ++trial) {
    RealImage a = random_image(32, 32, rng, 0.2);
    RealImage b = a;
    double mix = trial / 17.0;
    for (size_t i = 0; i < b.data.size(); ++i)
      b.data[i] = (1.0 - mix) * b.data[i] + mix * (0.5 + 0.2 * rng.normal());
    double got = metrics::ms_ssim(a, b, 2);
    double want = ref_ms_ssim(a, b, 2);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
  }

  // checkerboard against its half-period shift: strongly anticorrelated
  RealImage cb(32, 32, 1e-6), shifted(32, 32, 1e-6);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      cb.at(x, y) = ((x / 2 + y / 2) % 2) ? 1.0 : 0.0;
      shifted.at(x, y) = (((x + 2) / 2 + y / 2) % 2) ? 1.0 : 0.0;
    }
  double got = metrics::ms_ssim(cb, shifted, 1);
  double want = ref_ms_ssim(cb, shifted, 1);
  CHECK(got == doctest::Approx(want).epsilon(1e-6));
  CHECK(got < 0.5);
}

TEST_CASE("dissimilarity behaves like a distance on random triples") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    RealImage a = random_image(16, 16, rng, 0.15);
    RealImage b = random_image(16, 16, rng, 0.15);
    RealImage c = random_image(16, 16, rng, 0.15);
    double dab = 1.0 - metrics::ms_ssim(a, b, 1);
    double dbc = 1.0 - metrics::ms_ssim(b, c, 1);
    double dac = 1.0 - metrics::ms_ssim(a, c, 1);
    CHECK(dac <= dab + dbc + 1e-9);
  }
}

TEST_CASE("small images reduce the level count with a warning") {
  WarnCapture warns;
  Rng rng(4);
  RealImage a = random_image(16, 16, rng, 0.1);
  RealImage b = random_image(16, 16, rng, 0.1);
  double v = metrics::ms_ssim(a, b, 5);
  CHECK(std::isfinite(v));
  REQUIRE(!warns.messages.empty());
  CHECK(warns.messages[0].find("reduced") != std::string::npos);
}

TEST_CASE("metric report statistics and CSV layout") {
  metrics::MetricReport rep;
  rep.samples = {{"s0", 0.9, 0.1}, {"s1", 0.7, 0.3}};
  rep.finalize();
  CHECK(rep.ms_ssim_mean == doctest::Approx(0.8));
  CHECK(rep.mae_mean == doctest::Approx(0.2));
  CHECK(rep.ms_ssim_std == doctest::Approx(std::sqrt(0.02)));

  std::string csv = rep.to_csv();
  CHECK(csv.rfind("sample_id,ms_ssim,mae\n", 0) == 0);
  CHECK(csv.find("s0,") != std::string::npos);
  CHECK(csv.find("s1,") != std::string::npos);

  metrics::MetricReport empty;
  empty.finalize();
  CHECK(empty.ms_ssim_mean == 0.0);
}
