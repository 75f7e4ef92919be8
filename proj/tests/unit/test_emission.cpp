#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "sfwm/emission.hpp"
#include "sfwm/error.hpp"

using namespace sfwm;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

ExperimentConfig quiet_config() {
  ExperimentConfig c;
  c.detector.quantum_efficiency = 1.0;
  c.detector.coupling_efficiency = 1.0;
  c.detector.dead_time = 0.0;
  c.detector.dark_rate = 0.0;
  c.detector.jitter_fwhm = 0.0;
  c.pair_rate = 0.0;
  c.rayleigh_rate = 0.0;
  return c;
}

SpectralTriplet single_line(double linewidth) {
  SpectralTriplet t;
  t.components = {SpectralComponent{0.0, 0.0, linewidth}, SpectralComponent{0.0, 1.0, linewidth},
                  SpectralComponent{0.0, 0.0, linewidth}};
  return t;
}

}  // namespace

TEST(PairDelay, MeanMatchesQuadrature) {
  for (const auto [decay, osc] : {std::pair{kTwoPi * 6.0666e6, kTwoPi * 303.33e6},
                                  std::pair{kTwoPi * 6.0666e6, kTwoPi * 5e6}}) {
    auto p = [&](double d) { return std::exp(-decay * d) * (1 - std::cos(osc * d)); };
    const double upper = 40.0 / decay;
    const double norm = simpson(p, 0, upper);
    const double mean = simpson([&](double d) { return d * p(d); }, 0, upper) / norm;
    const double second = simpson([&](double d) { return d * d * p(d); }, 0, upper) / norm;
    const double sd = std::sqrt(second - mean * mean);

    Rng rng(derive_seed(1, 0, Stage::kTest));
    constexpr int kDraws = 200000;
    double sum = 0;
    for (int i = 0; i < kDraws; ++i) sum += draw_pair_delay(decay, osc, rng);
    EXPECT_NEAR(sum / kDraws, mean, 5 * sd / std::sqrt(kDraws));
  }
}

TEST(PairDelay, ChiSquareAgainstDensity) {
  const double decay = kTwoPi * 6.0666e6;
  const double osc = kTwoPi * 20e6;
  auto p = [&](double d) { return std::exp(-decay * d) * (1 - std::cos(osc * d)); };
  const double upper = 6.0 / decay;
  constexpr int kBins = 40;
  const double norm = simpson(p, 0, 60.0 / decay, 200000);

  std::vector<double> expected(kBins + 1);
  for (int b = 0; b < kBins; ++b) {
    const double lo = upper * b / kBins;
    expected[b] = simpson(p, lo, lo + upper / kBins, 200) / norm;
  }
  expected[kBins] = 1.0 - std::accumulate(expected.begin(), expected.end() - 1, 0.0);

  constexpr int kDraws = 1000000;
  std::vector<double> observed(kBins + 1, 0.0);
  Rng rng(derive_seed(2, 0, Stage::kTest));
  for (int i = 0; i < kDraws; ++i) {
    const double d = draw_pair_delay(decay, osc, rng);
    ++observed[std::min(kBins, static_cast<int>(d / upper * kBins))];
  }
  double chi2 = 0;
  for (int b = 0; b <= kBins; ++b) {
    const double e = expected[b] * kDraws;
    chi2 += (observed[b] - e) * (observed[b] - e) / e;
  }
  // kBins degrees of freedom; mean 40, sd ~ 9.
  EXPECT_LT(chi2, kBins + 5 * std::sqrt(2.0 * kBins));
}

TEST(PairDelay, RejectsBadRates) {
  Rng rng(1);
  EXPECT_THROW(draw_pair_delay(0.0, 1.0, rng), InvalidArgument);
  EXPECT_THROW(draw_pair_delay(1.0, -1.0, rng), InvalidArgument);
}

TEST(Pairs, OffResonantFirstInOppositeFields) {
  ExperimentConfig c;
  const auto t = triplet_from_config(c);
  int field1_first = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto [first, second] = draw_pair(c, derive_seed(3, s, Stage::kTest));
    EXPECT_EQ(first.freq_offset, t.upper().offset);
    EXPECT_EQ(second.freq_offset, t.lower().offset);
    EXPECT_NE(first.field_id, second.field_id);
    EXPECT_GE(second.emission_time, first.emission_time);
    EXPECT_EQ(first.origin, Origin::kPair);
    field1_first += first.field_id == 1;
  }
  EXPECT_NEAR(field1_first, 1000, 5 * std::sqrt(500.0));
}

TEST(Pairs, TrialPairsSortedAndInsideTrial) {
  ExperimentConfig c;
  c.pair_rate = 2e6;
  Rng rng(derive_seed(4, 0, Stage::kTest));
  const auto fields = trial_pairs(c, rng);
  const auto total = fields[0].size() + fields[1].size();
  EXPECT_NEAR(static_cast<double>(total), 2 * c.pair_rate * c.trial_duration, 6 * std::sqrt(200.0));
  for (const auto& v : fields) {
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end(), [](auto& a, auto& b) { return a.emission_time < b.emission_time; }));
    for (const auto& e : v) {
      EXPECT_GE(e.emission_time, 0.0);
      EXPECT_LE(e.emission_time, c.trial_duration);
    }
  }
}

TEST(Chaotic, ThermalIntensityStatistics) {
  // Single Lorentzian line: I is exponentially distributed, var / mean^2 = 1.
  const auto line = single_line(1e6);
  const double flux = 1e6;
  double sum = 0, sum2 = 0;
  std::size_t n = 0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    const ChaoticField f(line, flux, 50e-6, derive_seed(5, s, Stage::kTest));
    // Samples 1 us apart, several coherence times.
    for (double t = 0.5e-6; t < 50e-6; t += 1e-6) {
      const double i = f.intensity(t);
      sum += i;
      sum2 += i * i;
      ++n;
    }
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  EXPECT_NEAR(mean / flux, 1.0, 0.03);
  EXPECT_NEAR(var / (mean * mean), 1.0, 0.05);
}

TEST(Chaotic, TripletIsAlsoThermal) {
  ExperimentConfig c;
  const auto triplet = triplet_from_config(c);
  double sum = 0, sum2 = 0;
  std::size_t n = 0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    const ChaoticField f(triplet, 1.0, 50e-6, derive_seed(6, s, Stage::kTest));
    for (double t = 0.37e-6; t < 50e-6; t += 1e-6) {
      const double i = f.intensity(t);
      sum += i;
      sum2 += i * i;
      ++n;
    }
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 1.0, 0.03);
  EXPECT_NEAR((sum2 / n - mean * mean) / (mean * mean), 1.0, 0.05);
}

TEST(Chaotic, PhotonCountMatchesFlux) {
  const auto line = single_line(1e6);
  const double flux = 2e6, duration = 50e-6;
  std::size_t total = 0;
  constexpr int kTrials = 500;
  for (int s = 0; s < kTrials; ++s) {
    const ChaoticField f(line, flux, duration, derive_seed(7, s, Stage::kTest));
    Rng rng(derive_seed(8, s, Stage::kTest));
    const auto photons = f.sample_photons(1, rng);
    EXPECT_TRUE(std::is_sorted(photons.begin(), photons.end(),
                               [](auto& a, auto& b) { return a.emission_time < b.emission_time; }));
    total += photons.size();
  }
  // Counts per trial are super-Poissonian; 500 trials of ~100 photons.
  EXPECT_NEAR(static_cast<double>(total) / kTrials, flux * duration, 4.0);
}

TEST(Chaotic, TraceRequiresResolvedBeat) {
  ExperimentConfig c;
  const auto t = triplet_from_config(c);
  const double dt_max = 1.0 / (20 * t.span());
  EXPECT_THROW(chaotic_field_trial(t, 1e5, 0.1e-9, 1e-6, 1), InvalidArgument);
  const auto trace = chaotic_field_trial(t, 1e5, 0.9 * dt_max, 1e-6, 1);
  EXPECT_GT(trace.size(), 1000u);
  for (double v : trace) EXPECT_GE(v, 0.0);

  c.detuning = 20;
  const auto slow = triplet_from_config(c);
  EXPECT_NO_THROW(chaotic_field_trial(slow, 1e5, 0.1e-9, 1e-6, 1));
}

TEST(Detect, IdentityPipelineSplitsEvents) {
  const auto c = quiet_config();
  std::vector<PhotonEvent> events;
  for (int i = 0; i < 2000; ++i) events.push_back({(i + 0.5) * 20e-9, 1, 0.0, Origin::kPair});
  const auto out = detect(1, events, nullptr, c, std::nullopt, 11);
  std::vector<std::uint64_t> merged(out[0]);
  merged.insert(merged.end(), out[1].begin(), out[1].end());
  std::sort(merged.begin(), merged.end());
  ASSERT_EQ(merged.size(), events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(merged[i], static_cast<std::uint64_t>(std::floor(events[i].emission_time / c.detector.tick)));
  }
  EXPECT_NEAR(static_cast<double>(out[0].size()), 1000.0, 5 * std::sqrt(500.0));
}

TEST(Detect, ThinningNeverCreatesPhotonTags) {
  auto c = quiet_config();
  c.detector.quantum_efficiency = 0.5;
  std::vector<PhotonEvent> events;
  std::set<std::uint64_t> allowed;
  for (int i = 0; i < 3000; ++i) {
    const double t = i * 13.1e-9 + 1e-9;
    events.push_back({t, 2, 0.0, Origin::kPair});
    allowed.insert(static_cast<std::uint64_t>(std::floor(t / c.detector.tick)));
  }
  const auto out = detect(2, events, nullptr, c, std::nullopt, 12);
  for (const auto& port : out) {
    EXPECT_TRUE(std::is_sorted(port.begin(), port.end()));
    for (auto tag : port) EXPECT_TRUE(allowed.count(tag));
  }
  const double kept = static_cast<double>(out[0].size() + out[1].size());
  EXPECT_NEAR(kept, 1500.0, 5 * std::sqrt(750.0));
}

TEST(Detect, DarkCountsOnly) {
  auto c = quiet_config();
  c.detector.quantum_efficiency = 0.0;
  c.detector.dark_rate = 1000.0;
  c.n_trials = 20000;
  const auto run = simulate_run(c, {}, 1);
  for (const auto& s : run.streams) EXPECT_NEAR(static_cast<double>(s.total()), 1000.0, 3 * std::sqrt(1000.0));
}

TEST(Detect, FilterTransmissionScalesSurvival) {
  auto c = quiet_config();
  FabryPerotFilter f;
  f.center_offset = 0.0;
  const double offset = 400e6;
  std::vector<PhotonEvent> events;
  for (int i = 0; i < 20000; ++i) events.push_back({i * 2.4e-9, 1, offset, Origin::kPair});
  const auto out = detect(1, events, nullptr, c, f, 13);
  const double expected = 20000 * transmission_at(f, offset);
  const double got = static_cast<double>(out[0].size() + out[1].size());
  EXPECT_NEAR(got, expected, 5 * std::sqrt(expected));
}

TEST(Detect, DeadTimeEnforced) {
  auto c = quiet_config();
  c.detector.dead_time = 22e-9;
  c.detector.jitter_fwhm = 350e-12;
  c.rayleigh_rate = 3e7;
  c.n_trials = 20;
  const auto run = simulate_run(c, {}, 1);
  const auto gap = c.detector.dead_ticks();
  for (const auto& s : run.streams) {
    ASSERT_GT(s.total(), 0u);
    for (std::size_t t = 0; t < run.n_trials; ++t) {
      const auto tags = s.trial(t);
      for (std::size_t i = 1; i < tags.size(); ++i) EXPECT_GE(tags[i] - tags[i - 1], gap);
      for (auto v : tags) EXPECT_LE(v, run.trial_ticks);
    }
  }
}

TEST(Detect, RejectsUnsortedEvents) {
  const auto c = quiet_config();
  std::vector<PhotonEvent> events{{2e-9, 1, 0, Origin::kPair}, {1e-9, 1, 0, Origin::kPair}};
  EXPECT_THROW(detect(1, events, nullptr, c, std::nullopt, 1), InvalidArgument);
}

TEST(SimulateRun, DeterministicAcrossThreadCounts) {
  ExperimentConfig c;
  c.n_trials = 600;
  c.rayleigh_rate = 2e6;
  c.pair_rate = 1e5;
  const auto filters = filters_for_arm(c, FilterArm::kResonant1);
  const auto a = simulate_run(c, filters, 1);
  const auto b = simulate_run(c, filters, 1);
  const auto d = simulate_run(c, filters, 4);
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a == d);
  c.rng_seed += 1;
  EXPECT_FALSE(a == simulate_run(c, filters, 1));
}

TEST(SimulateRun, ShapeAndRates) {
  ExperimentConfig c;
  c.n_trials = 300;
  const auto run = simulate_run(c, {}, 1);
  EXPECT_EQ(run.n_trials, 300u);
  EXPECT_EQ(run.trial_ticks, 500000u);
  for (const auto& s : run.streams) {
    EXPECT_EQ(s.n_trials(), 300u);
    const double rate = static_cast<double>(s.total()) / run.live_time();
    // (rayleigh + pair) * efficiency / 2 + dark, within 15%.
    const double expected = (c.rayleigh_rate + c.pair_rate) * c.detector.efficiency() / 2 + c.detector.dark_rate;
    EXPECT_NEAR(rate / expected, 1.0, 0.15);
  }
}

TEST(Threads, EnvironmentOverride) {
  EXPECT_EQ(resolve_threads(3), 3u);
  ::setenv("SFWM_THREADS", "2", 1);
  EXPECT_EQ(resolve_threads(0), 2u);
  ::setenv("SFWM_THREADS", "bogus", 1);
  EXPECT_GE(resolve_threads(0), 1u);
  ::unsetenv("SFWM_THREADS");
}
