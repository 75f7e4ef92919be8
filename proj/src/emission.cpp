#include "sfwm/emission.hpp"

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "sfwm/error.hpp"

namespace sfwm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Envelope grid: decay rate * step of the fastest component.
constexpr double kEnvelopeStep = 0.1;

double uniform(Rng& rng) { return boost::random::uniform_01<double>()(rng); }

std::uint64_t poisson(Rng& rng, double mean) {
  if (mean <= 0) return 0;
  return boost::random::poisson_distribution<std::uint64_t, double>(mean)(rng);
}

std::complex<double> complex_normal(Rng& rng) {
  boost::random::normal_distribution<double> n(0.0, std::numbers::sqrt2 / 2.0);
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace

ChaoticField::ChaoticField(const SpectralTriplet& triplet, double mean_flux, double duration,
                           std::uint64_t seed)
    : mean_flux_(mean_flux), duration_(duration) {
  if (!(duration > 0)) throw InvalidArgument("chaotic field duration must be positive");
  if (!(mean_flux >= 0)) throw InvalidArgument("chaotic field flux must be >= 0");
  if (mean_flux == 0) return;

  double fastest = 0.0;
  for (const auto& c : triplet.components) {
    if (c.weight > 0) fastest = std::max(fastest, std::numbers::pi * c.linewidth);
  }
  if (fastest == 0.0) return;

  base_step_ = kEnvelopeStep / fastest;
  n_segments_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / base_step_)));

  Rng rng(seed);
  const double reference = triplet.central().offset;
  for (const auto& c : triplet.components) {
    if (c.weight <= 0) continue;
    const double decay = std::numbers::pi * c.linewidth;
    Envelope e;
    e.offset = c.offset - reference;
    e.label = c.offset;
    e.ratio = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fastest / decay + 1e-9)));
    const double step = base_step_ * static_cast<double>(e.ratio);
    const double rho = std::exp(-decay * step);
    const double innovation = std::sqrt(1.0 - rho * rho);
    // Linear interpolation between exact OU samples loses variance inside a
    // segment; its time average is (2 + rho) / 3.
    e.amplitude = std::sqrt(c.weight * 3.0 / (2.0 + rho));

    const std::size_t n_knots = (n_segments_ + e.ratio - 1) / e.ratio + 1;
    e.knots.resize(n_knots);
    e.knots[0] = complex_normal(rng);
    for (std::size_t k = 1; k < n_knots; ++k) {
      e.knots[k] = rho * e.knots[k - 1] + innovation * complex_normal(rng);
    }
    e.segment_max.resize(n_knots - 1);
    for (std::size_t k = 0; k + 1 < n_knots; ++k) {
      e.segment_max[k] = std::sqrt(std::max(std::norm(e.knots[k]), std::norm(e.knots[k + 1])));
    }
    envelopes_.push_back(std::move(e));
  }
}

std::complex<double> ChaoticField::component(const Envelope& e, double t) const {
  const double pos = t / (base_step_ * static_cast<double>(e.ratio));
  const std::size_t last = e.knots.size() - 2;
  const std::size_t idx = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), last);
  const double frac = std::clamp(pos - static_cast<double>(idx), 0.0, 1.0);
  const auto slow = e.knots[idx] * (1.0 - frac) + e.knots[idx + 1] * frac;
  return e.amplitude * slow * std::polar(1.0, kTwoPi * e.offset * t);
}

double ChaoticField::intensity(double t) const {
  std::complex<double> field{};
  for (const auto& e : envelopes_) field += component(e, t);
  return mean_flux_ * std::norm(field);
}

std::vector<PhotonEvent> ChaoticField::sample_photons(int field_id, Rng& rng) const {
  std::vector<PhotonEvent> out;
  if (envelopes_.empty()) return out;

  boost::random::exponential_distribution<double> exponential(1.0);
  std::array<std::complex<double>, 3> parts{};
  std::array<double, 3> power{};

  // Exponential clock running in units of the bounding intensity's integral.
  double clock = exponential(rng);
  for (std::size_t j = 0; j < n_segments_; ++j) {
    const double start = static_cast<double>(j) * base_step_;
    const double end = std::min(start + base_step_, duration_);
    if (end <= start) break;

    double amp_bound = 0.0;
    for (const auto& e : envelopes_) amp_bound += e.amplitude * e.segment_max[j / e.ratio];
    const double bound = mean_flux_ * amp_bound * amp_bound;
    if (bound <= 0) continue;

    double pos = start;
    double remaining = (end - start) * bound;
    while (clock <= remaining) {
      pos += clock / bound;
      remaining -= clock;
      clock = exponential(rng);

      std::complex<double> field{};
      for (std::size_t k = 0; k < envelopes_.size(); ++k) {
        parts[k] = component(envelopes_[k], pos);
        field += parts[k];
      }
      const double value = mean_flux_ * std::norm(field);
      if (uniform(rng) * bound >= value) continue;

      double total = 0.0;
      for (std::size_t k = 0; k < envelopes_.size(); ++k) total += power[k] = std::norm(parts[k]);
      double pick = uniform(rng) * total;
      std::size_t chosen = 0;
      while (chosen + 1 < envelopes_.size() && pick >= power[chosen]) pick -= power[chosen++];
      out.push_back({pos, field_id, envelopes_[chosen].label, Origin::kChaotic});
    }
    clock -= remaining;
  }
  return out;
}

std::vector<double> chaotic_field_trial(const SpectralTriplet& triplet, double mean_flux, double dt,
                                        double duration, std::uint64_t seed) {
  double fastest = triplet.span();
  for (const auto& c : triplet.components) fastest = std::max(fastest, c.linewidth);
  if (!(dt > 0) || dt > 1.0 / (20.0 * fastest)) {
    throw InvalidArgument("trace step dt = " + std::to_string(dt) +
                          " s does not resolve the fastest beat (need dt <= " +
                          std::to_string(1.0 / (20.0 * fastest)) + " s)");
  }
  const ChaoticField field(triplet, mean_flux, duration, seed);
  const auto n = static_cast<std::size_t>(std::floor(duration / dt)) + 1;
  std::vector<double> trace(n);
  for (std::size_t i = 0; i < n; ++i) trace[i] = field.intensity(static_cast<double>(i) * dt);
  return trace;
}

double draw_pair_delay(double decay, double osc, Rng& rng) {
  if (!(decay > 0) || !(osc > 0)) throw InvalidArgument("pair waveform rates must be positive");
  boost::random::exponential_distribution<double> exponential(decay);
  // Envelope proposal; accept with (1 - cos) / 2 <= 1.
  while (true) {
    const double d = exponential(rng);
    if (2.0 * uniform(rng) < 1.0 - std::cos(osc * d)) return d;
  }
}

namespace {

struct PairModel {
  double decay;
  double osc;
  double off_resonant;  // upper sideband offset, Hz
  double resonant;      // lower sideband offset, Hz

  explicit PairModel(const ExperimentConfig& config) {
    const auto t = triplet_from_config(config);
    decay = config.pair_decay_rate();
    osc = config.pair_osc_rate();
    off_resonant = t.upper().offset;
    resonant = t.lower().offset;
  }

  std::pair<PhotonEvent, PhotonEvent> draw(double start, Rng& rng) const {
    const double delay = draw_pair_delay(decay, osc, rng);
    const int first_field = uniform(rng) < 0.5 ? 1 : 2;
    return {PhotonEvent{start, first_field, off_resonant, Origin::kPair},
            PhotonEvent{start + delay, 3 - first_field, resonant, Origin::kPair}};
  }
};

}  // namespace

std::pair<PhotonEvent, PhotonEvent> draw_pair(const ExperimentConfig& config, double start_time,
                                              Rng& rng) {
  return PairModel(config).draw(start_time, rng);
}

std::pair<PhotonEvent, PhotonEvent> draw_pair(const ExperimentConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  return draw_pair(config, 0.0, rng);
}

namespace {

std::array<std::vector<PhotonEvent>, 2> trial_pairs_impl(const ExperimentConfig& config,
                                                         const PairModel& model, Rng& rng) {
  std::array<std::vector<PhotonEvent>, 2> out;
  const double duration = config.trial_duration;
  const auto n = poisson(rng, config.pair_rate * duration);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto [first, second] = model.draw(uniform(rng) * duration, rng);
    out[first.field_id - 1].push_back(first);
    if (second.emission_time <= duration) out[second.field_id - 1].push_back(second);
  }
  for (auto& v : out) {
    std::sort(v.begin(), v.end(),
              [](const PhotonEvent& a, const PhotonEvent& b) { return a.emission_time < b.emission_time; });
  }
  return out;
}

}  // namespace

std::array<std::vector<PhotonEvent>, 2> trial_pairs(const ExperimentConfig& config, Rng& rng) {
  return trial_pairs_impl(config, PairModel(config), rng);
}

std::array<std::vector<std::uint64_t>, 2> detect(int field_id, std::span<const PhotonEvent> events,
                                                 const ChaoticField* chaotic,
                                                 const ExperimentConfig& config,
                                                 const std::optional<FabryPerotFilter>& filter,
                                                 std::uint64_t seed) {
  if (!std::is_sorted(events.begin(), events.end(), [](const PhotonEvent& a, const PhotonEvent& b) {
        return a.emission_time < b.emission_time;
      })) {
    throw InvalidArgument("detect: events must be sorted by emission time");
  }
  const auto& det = config.detector;
  Rng rng(seed);

  std::vector<PhotonEvent> merged;
  if (chaotic != nullptr) {
    auto photons = chaotic->sample_photons(field_id, rng);
    merged.reserve(photons.size() + events.size());
    std::merge(photons.begin(), photons.end(), events.begin(), events.end(), std::back_inserter(merged),
               [](const PhotonEvent& a, const PhotonEvent& b) { return a.emission_time < b.emission_time; });
  } else {
    merged.assign(events.begin(), events.end());
  }

  const double efficiency = det.efficiency();
  const double sigma = det.jitter_fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  const std::uint64_t last_tick = config.trial_ticks();
  boost::random::normal_distribution<double> jitter(0.0, 1.0);

  std::array<std::vector<std::uint64_t>, 2> out;
  for (const auto& ev : merged) {
    double p = efficiency;
    if (filter) p *= transmission_at(*filter, ev.freq_offset);
    if (uniform(rng) >= p) continue;
    const std::size_t port = uniform(rng) < 0.5 ? 0 : 1;
    double t = ev.emission_time;
    if (sigma > 0) t += sigma * jitter(rng);
    if (t < 0) continue;
    const double tick = std::floor(t / det.tick);
    if (tick > static_cast<double>(last_tick)) continue;
    out[port].push_back(static_cast<std::uint64_t>(tick));
  }

  boost::random::uniform_int_distribution<std::uint64_t> any_tick(0, last_tick);
  const std::uint64_t gap = std::max<std::uint64_t>(det.dead_ticks(), 1);
  for (auto& tags : out) {
    const auto n_dark = poisson(rng, det.dark_rate * config.trial_duration);
    for (std::uint64_t i = 0; i < n_dark; ++i) tags.push_back(any_tick(rng));
    std::sort(tags.begin(), tags.end());
    // Non-paralyzable dead time, which also removes same-tick duplicates.
    std::size_t kept = 0;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (kept == 0 || tags[i] - tags[kept - 1] >= gap) tags[kept++] = tags[i];
    }
    tags.resize(kept);
  }
  return out;
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SFWM_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long n = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(std::min(n, 1024UL));
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

Run simulate_run(const ExperimentConfig& config, const FilterPair& filters, unsigned threads) {
  config.validate();
  if (filters.field1) filters.field1->validate();
  if (filters.field2) filters.field2->validate();

  const auto triplet = triplet_from_config(config);
  const PairModel pairs(config);
  const std::uint64_t master = config.rng_seed;

  Run run;
  run.tick = config.detector.tick;
  run.trial_ticks = config.trial_ticks();
  run.n_trials = config.n_trials;

  using TrialOutput = std::array<std::vector<std::uint64_t>, 4>;
  auto simulate_trial = [&](std::uint32_t trial) {
    Rng pair_rng(derive_seed(master, trial, Stage::kPairs));
    const auto events = config.pair_rate > 0 ? trial_pairs_impl(config, pairs, pair_rng)
                                             : std::array<std::vector<PhotonEvent>, 2>{};
    TrialOutput out;
    for (int field = 1; field <= 2; ++field) {
      std::optional<ChaoticField> chaotic;
      if (config.rayleigh_rate > 0) {
        const auto stage = field == 1 ? Stage::kChaoticField1 : Stage::kChaoticField2;
        chaotic.emplace(triplet, config.rayleigh_rate, config.trial_duration,
                        derive_seed(master, trial, stage));
      }
      const auto stage = field == 1 ? Stage::kDetectField1 : Stage::kDetectField2;
      const auto& filter = field == 1 ? filters.field1 : filters.field2;
      auto tags = detect(field, events[field - 1], chaotic ? &*chaotic : nullptr, config, filter,
                         derive_seed(master, trial, stage));
      out[2 * (field - 1)] = std::move(tags[0]);
      out[2 * (field - 1) + 1] = std::move(tags[1]);
    }
    return out;
  };

  const unsigned n_threads = std::min<unsigned>(resolve_threads(threads), config.n_trials);
  constexpr std::uint32_t kBlock = 256;
  std::vector<TrialOutput> block;
  for (std::uint32_t first = 0; first < config.n_trials; first += kBlock) {
    const std::uint32_t count = std::min(kBlock, config.n_trials - first);
    block.assign(count, {});
    if (n_threads <= 1) {
      for (std::uint32_t i = 0; i < count; ++i) block[i] = simulate_trial(first + i);
    } else {
      std::atomic<std::uint32_t> next{0};
      std::exception_ptr failure;
      std::mutex failure_mutex;
      {
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < n_threads; ++w) {
          workers.emplace_back([&] {
            try {
              for (std::uint32_t i = next++; i < count; i = next++) block[i] = simulate_trial(first + i);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          });
        }
      }
      if (failure) std::rethrow_exception(failure);
    }
    for (const auto& trial : block) {
      for (std::size_t d = 0; d < 4; ++d) run.streams[d].append_trial(trial[d]);
    }
  }
  return run;
}

}  // namespace sfwm
