#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sfwm/config.hpp"
#include "sfwm/model.hpp"
#include "sfwm/random.hpp"
#include "sfwm/timetag.hpp"

namespace sfwm {

enum class Origin : std::uint8_t { kChaotic, kPair };

struct PhotonEvent {
  double emission_time = 0.0;  // s within the trial
  int field_id = 1;            // 1 or 2
  double freq_offset = 0.0;    // Hz from resonance, one of the triplet offsets
  Origin origin = Origin::kChaotic;
};

/// Chaotic (Gaussian) field of one detected mode over one trial.
///
/// Each triplet component is an independent complex Ornstein-Uhlenbeck
/// amplitude with decay rate pi * linewidth, rotating at its offset
/// frequency. The slow amplitudes are sampled exactly on a grid fine
/// compared with the coherence time (decay * step <= 0.1) and interpolated
/// linearly; the rotation is evaluated exactly, so intensity(t) is defined
/// at every t regardless of how fast the beat notes are.
class ChaoticField {
 public:
  ChaoticField(const SpectralTriplet& triplet, double mean_flux, double duration,
               std::uint64_t seed);

  /// Photon flux at t in photons/s; time average equals mean_flux().
  double intensity(double t) const;
  double mean_flux() const noexcept { return mean_flux_; }
  double duration() const noexcept { return duration_; }

  /// Cox-process realization of the photon stream for this trial (exact
  /// thinning against a piecewise bound on the intensity). Each photon is
  /// labelled with a component drawn in proportion to its instantaneous
  /// power.
  std::vector<PhotonEvent> sample_photons(int field_id, Rng& rng) const;

 private:
  struct Envelope {
    double offset;      // Hz, rotation frequency relative to the central line
    double label;       // Hz from resonance, reported on photons
    double amplitude;   // sqrt(weight / mean interpolated variance)
    std::size_t ratio;  // grid step in units of the finest step
    std::vector<std::complex<double>> knots;
    std::vector<double> segment_max;  // max |knot| at either end of each segment
  };

  std::complex<double> component(const Envelope& e, double t) const;

  double mean_flux_;
  double duration_;
  double base_step_ = 0.0;
  std::size_t n_segments_ = 0;
  std::vector<Envelope> envelopes_;
};

/// Samples the chaotic intensity on a grid of spacing dt over [0, duration].
/// dt must resolve the fastest beat: dt <= 1 / (20 max(span, linewidths)).
std::vector<double> chaotic_field_trial(const SpectralTriplet& triplet, double mean_flux, double dt,
                                        double duration, std::uint64_t seed);

/// Draws a delay from p(d) ~ exp(-decay d)(1 - cos(osc d)), rates in rad/s.
double draw_pair_delay(double decay, double osc, Rng& rng);

/// One sideband pair: the off-resonant (upper) photon first, its resonant
/// partner delay later, in different fields chosen uniformly.
std::pair<PhotonEvent, PhotonEvent> draw_pair(const ExperimentConfig& config, double start_time,
                                              Rng& rng);
std::pair<PhotonEvent, PhotonEvent> draw_pair(const ExperimentConfig& config, std::uint64_t seed);

/// Sideband pairs emitted during one trial, as per-field time-sorted lists.
std::array<std::vector<PhotonEvent>, 2> trial_pairs(const ExperimentConfig& config, Rng& rng);

/// Detector chain for one field: Cox sampling of the chaotic field (if any),
/// Bernoulli survival with coupling * QE * filter transmission at the photon
/// frequency, 50/50 split, Gaussian jitter, quantization to ticks, dark
/// counts and non-paralyzable dead time. Returns the (a, b) tick lists.
std::array<std::vector<std::uint64_t>, 2> detect(int field_id, std::span<const PhotonEvent> events,
                                                 const ChaoticField* chaotic,
                                                 const ExperimentConfig& config,
                                                 const std::optional<FabryPerotFilter>& filter,
                                                 std::uint64_t seed);

/// Full acquisition: all trials, four detectors. Bit-identical for equal
/// inputs whatever the thread count (0 = SFWM_THREADS or all cores).
Run simulate_run(const ExperimentConfig& config, const FilterPair& filters, unsigned threads = 0);

/// Thread count after applying the SFWM_THREADS override.
unsigned resolve_threads(unsigned requested);

}  // namespace sfwm
