#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sfwm/analysis.hpp"
#include "sfwm/error.hpp"

using namespace sfwm;

namespace {

const Binning kBinning{4, 200};

CorrelationCurve flat_curve(double value, std::uint64_t counts = 10000) {
  auto c = empty_curve(kBinning, 100e-12, 1000, 1000, 1.0, 1);
  std::fill(c.values.begin(), c.values.end(), value);
  std::fill(c.raw_counts.begin(), c.raw_counts.end(), counts);
  for (std::size_t i = 0; i < c.n_bins(); ++i) c.sigma[i] = value / std::sqrt(static_cast<double>(counts));
  return c;
}

G2Matrix matrix_of(double cross, double autos) {
  G2Matrix m;
  for (auto id : kAllPairs) {
    const auto& def = pair_definition(id);
    m[static_cast<std::size_t>(id)] = flat_curve(def.cross ? cross : autos);
    m[static_cast<std::size_t>(id)].meta.pair = std::string(def.name);
  }
  return m;
}

G1Curve g1_from(const std::vector<double>& delay, const std::vector<double>& values) {
  G1Curve g;
  g.delay = delay;
  g.values = values;
  g.sigma.assign(values.size(), 0.0);
  return g;
}

}  // namespace

TEST(Siegert, KnownValues) {
  auto c = flat_curve(1.0);
  c.values[0] = 2.0;
  c.values[1] = 1.5;
  c.values[2] = 0.5;
  const auto g = siegert_invert(c);
  EXPECT_DOUBLE_EQ(g.values[0], 1.0);
  EXPECT_DOUBLE_EQ(g.values[1], std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(g.values[2], 0.0);
  EXPECT_DOUBLE_EQ(g.values[3], 0.0);
  EXPECT_DOUBLE_EQ(g.clamped_fraction, 0.01);
  EXPECT_FALSE(g.non_thermal);
  EXPECT_DOUBLE_EQ(g.delay[0], c.delay(0));
}

TEST(Siegert, RoundTripAboveUnity) {
  auto c = flat_curve(1.0);
  for (std::size_t i = 0; i < c.n_bins(); ++i) c.values[i] = 1.0 + 0.9 * std::exp(-0.03 * std::abs(50.0 - i)) + 1e-3 * (i % 7);
  const auto g = siegert_invert(c);
  for (std::size_t i = 0; i < c.n_bins(); ++i) EXPECT_NEAR(1 + g.values[i] * g.values[i], c.values[i], 1e-12);
}

TEST(Siegert, AntibunchedInputFlagged) {
  auto c = flat_curve(0.8);
  c.values[50] = 0.1;
  const auto g = siegert_invert(c);
  EXPECT_DOUBLE_EQ(g.clamped_fraction, 1.0);
  EXPECT_TRUE(g.non_thermal);
  for (double v : g.values) EXPECT_EQ(v, 0.0);
}

TEST(Spectrum, ConstantGivesDcOnly) {
  const auto c = flat_curve(2.0);
  const auto s = spectrum_fft(siegert_invert(c));
  EXPECT_DOUBLE_EQ(s.magnitude[0], 1.0);
  for (std::size_t k = 1; k < s.magnitude.size(); ++k) EXPECT_NEAR(s.magnitude[k], 0.0, 1e-12);
  EXPECT_NEAR(s.resolution, 1.0 / 40e-9, 1e-3);
  EXPECT_NEAR(s.freq[1], 25e6, 1e-3);
}

TEST(Spectrum, LorentzianWidth) {
  // |g1| = exp(-gamma |tau|) transforms to a Lorentzian of FWHM gamma / pi.
  const double gamma = 2e7;
  const double step = 1e-9;
  const int half = 2000;
  std::vector<double> delay, values;
  for (int i = -half; i < half; ++i) {
    const double t = (i + 0.5) * step;
    delay.push_back(t);
    values.push_back(std::exp(-gamma * std::abs(t)));
  }
  const auto s = spectrum_fft(g1_from(delay, values), 1, 4);
  std::size_t k = 0;
  while (s.magnitude[k + 1] >= 0.5) ++k;
  const double f_half = s.freq[k] + (s.magnitude[k] - 0.5) / (s.magnitude[k] - s.magnitude[k + 1]) * (s.freq[k + 1] - s.freq[k]);
  EXPECT_NEAR(2 * f_half, gamma / std::numbers::pi, 0.02 * gamma / std::numbers::pi);
}

TEST(Spectrum, BeatPeakLocationInvariantUnderPadding) {
  const double step = 0.4e-9;
  std::vector<double> delay, values;
  for (int i = -50; i < 50; ++i) {
    const double t = (i + 0.5) * step;
    delay.push_back(t);
    values.push_back(std::exp(-t * t / (36e-18)) * (1.0 + 0.6 * std::cos(2 * std::numbers::pi * 300e6 * t)));
  }
  const auto g = g1_from(delay, values);
  // Strongest local maximum away from DC.
  auto peak = [](const SpectrumEstimate& s) {
    const auto& m = s.magnitude;
    std::size_t best = 0;
    for (std::size_t k = 1; k + 1 < m.size(); ++k) {
      if (m[k] < m[k - 1] || m[k] < m[k + 1]) continue;
      if (best == 0 || m[k] > m[best]) best = k;
    }
    return s.freq[best];
  };
  const auto plain = spectrum_fft(g, 1, 1);
  const double p1 = peak(plain);
  EXPECT_NEAR(p1, 300e6, plain.resolution);
  for (std::size_t pad : {2u, 4u, 8u}) {
    const auto padded = spectrum_fft(g, 1, pad);
    EXPECT_NEAR(peak(padded), p1, plain.resolution) << pad;
    for (double m : padded.magnitude) EXPECT_GE(m, 0.0);
  }
}

TEST(Spectrum, RejectsBadAxes) {
  EXPECT_THROW(spectrum_fft(g1_from({0.0}, {1.0})), InvalidArgument);
  EXPECT_THROW(spectrum_fft(g1_from({-1.5, -0.5, 0.7, 1.5}, {1, 1, 1, 1})), InvalidArgument);
  EXPECT_THROW(spectrum_fft(g1_from({0.5, 1.5, 2.5}, {1, 1, 1})), InvalidArgument);
  EXPECT_THROW(spectrum_fft(g1_from({-0.5, 0.5}, {1, 1}), 0, 0), InvalidArgument);
}

TEST(CauchySchwarz, AllTwosGiveUnity) {
  const auto r = cauchy_schwarz(matrix_of(2.0, 2.0));
  for (std::size_t i = 0; i < r.rbar_curve.size(); ++i) {
    EXPECT_DOUBLE_EQ(r.r1_curve[i], 1.0);
    EXPECT_DOUBLE_EQ(r.r2_curve[i], 1.0);
    EXPECT_DOUBLE_EQ(r.rbar_curve[i], 1.0);
  }
  EXPECT_DOUBLE_EQ(r.rbar_max, 1.0);
  EXPECT_FALSE(r.violated);
}

TEST(CauchySchwarz, UncorrelatedThermalGivesQuarter) {
  const auto r = cauchy_schwarz(matrix_of(1.0, 2.0));
  for (double v : r.rbar_curve) EXPECT_DOUBLE_EQ(v, 0.25);
  // Four factors with 10^4 counts each: relative sigma 0.02 per R.
  EXPECT_NEAR(r.rbar_max_sigma, 0.5 * std::sqrt(2.0) * 0.25 * 0.02, 1e-12);
}

TEST(CauchySchwarz, PeakAndViolation) {
  auto m = matrix_of(1.0, 2.0);
  for (auto id : {PairId::k2b1a, PairId::k1b2a, PairId::k2a1a, PairId::k2b1b}) {
    m[static_cast<std::size_t>(id)].values[60] = 4.0;
  }
  const auto r = cauchy_schwarz(m);
  EXPECT_DOUBLE_EQ(r.rbar_max, 4.0);
  EXPECT_EQ(r.rbar_max_delay, 40);
  EXPECT_TRUE(r.violated);
  EXPECT_EQ(time_ordering_check(r), Ordering::kPositiveDelay);
}

TEST(CauchySchwarz, EmptyAutoBinRejected) {
  auto m = matrix_of(1.0, 2.0);
  m[static_cast<std::size_t>(PairId::k2b2a)].raw_counts[50] = 0;
  EXPECT_THROW(cauchy_schwarz(m), EmptyAutoBinError);
}

TEST(CauchySchwarz, MismatchedBinningRejected) {
  auto m = matrix_of(1.0, 2.0);
  m[0] = empty_curve(Binning{8, 200}, 100e-12, 1, 1, 1.0, 1);
  EXPECT_THROW(cauchy_schwarz(m), InvalidArgument);
}

TEST(Ordering, Verdicts) {
  CauchySchwarzResult r;
  r.delay = {-2e-9, -1e-9, 1e-9, 2e-9};
  r.rbar_curve = {0.3, 0.4, 1.5, 0.9};
  EXPECT_EQ(time_ordering_check(r), Ordering::kPositiveDelay);
  r.rbar_curve = {1.3, 0.4, 0.5, 0.9};
  EXPECT_EQ(time_ordering_check(r), Ordering::kNegativeDelay);
  r.rbar_curve = {1.3, 0.4, 1.5, 0.9};
  EXPECT_EQ(time_ordering_check(r), Ordering::kSymmetric);
  r.rbar_curve = {0.3, 0.4, 0.5, 0.9};
  EXPECT_EQ(time_ordering_check(r), Ordering::kSymmetric);
  EXPECT_STREQ(to_string(Ordering::kNegativeDelay), "negative-delay");
}

TEST(Sweep, ChaoticOnlyRowsAndStatisticsScaling) {
  ExperimentConfig base;
  base.pair_rate = 0;
  base.rayleigh_rate = 4e6;
  base.n_trials = 400;
  const std::vector<double> deltas{20, 50};
  const std::vector<FilterArm> arms{FilterArm::kNone, FilterArm::kResonant1};
  const auto rows = detuning_sweep(base, deltas, arms, {.binning = Binning{40, 200}, .threads = 1});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].arm, FilterArm::kNone);
  EXPECT_DOUBLE_EQ(rows[0].alpha, 1.0);
  EXPECT_NEAR(rows[1].alpha, 0.8618481344341615, 1e-12);
  EXPECT_NEAR(rows[3].alpha, 0.4996949448315993, 1e-12);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.ok) << r.status;
    EXPECT_GT(r.sigma, 0.0);
    EXPECT_LT(r.rbar_max, 1.0 + 3 * r.sigma);
  }

  auto doubled = base;
  doubled.n_trials *= 2;
  const std::vector<double> one{50};
  const std::vector<FilterArm> unfiltered{FilterArm::kNone};
  const auto a = detuning_sweep(base, one, unfiltered, {.binning = Binning{40, 200}, .threads = 1});
  const auto b = detuning_sweep(doubled, one, unfiltered, {.binning = Binning{40, 200}, .threads = 1});
  const double ratio = (a[0].sigma / a[0].rbar_max) / (b[0].sigma / b[0].rbar_max);
  EXPECT_NEAR(ratio, std::sqrt(2.0), 0.25);
}

TEST(Sweep, FailuresRecordedPerRow) {
  ExperimentConfig base;
  base.n_trials = 2;
  base.rayleigh_rate = 0;
  base.pair_rate = 0;
  base.detector.dark_rate = 0;
  const std::vector<double> deltas{-5, 30};
  const std::vector<FilterArm> arms{FilterArm::kNone};
  const auto rows = detuning_sweep(base, deltas, arms, {.threads = 1});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].ok);
  EXPECT_NE(rows[0].status.find("detuning"), std::string::npos);
  EXPECT_FALSE(rows[1].ok);
  EXPECT_TRUE(std::isnan(rows[1].rbar_max));
}
