#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfwm/config.hpp"
#include "sfwm/correlator.hpp"
#include "sfwm/model.hpp"

namespace sfwm {

/// |g1(tau)| recovered from an auto-correlation through g2 = 1 + |g1|^2.
struct G1Curve {
  std::vector<double> delay;  // bin centers, s
  std::vector<double> values;
  std::vector<double> sigma;  // NaN where undefined
  double clamped_fraction = 0.0;
  /// More than 20% of the bins had g2 < 1: the input does not look thermal.
  bool non_thermal = false;
};

G1Curve siegert_invert(const CorrelationCurve& auto_curve);

struct SpectrumEstimate {
  std::vector<double> freq;       // beat frequency, Hz
  std::vector<double> magnitude;  // normalized to a maximum of 1
  int field_id = 0;
  double resolution = 0.0;        // Hz, 1 / curve span
};

/// Magnitude of the discrete Fourier transform of |g1|, symmetrized about
/// tau = 0 first. pad_factor > 1 zero-pads to refine the frequency grid.
SpectrumEstimate spectrum_fft(const G1Curve& g1, int field_id = 0, std::size_t pad_factor = 1);

struct CauchySchwarzResult {
  std::vector<double> delay;  // bin centers, s
  std::vector<std::int64_t> bin_lower;  // ticks
  std::vector<double> r1_curve;
  std::vector<double> r2_curve;
  std::vector<double> rbar_curve;
  std::vector<double> sigma;  // of rbar
  double rbar_max = 0.0;
  double rbar_max_sigma = 0.0;
  std::int64_t rbar_max_delay = 0;  // lower bin edge, ticks
  bool violated = false;            // rbar_max - sigma > 1
};

/// R1 = g_2b1a g_2a1b / (g_1b1a(0) g_2b2a(0)), R2 = g_2a1a g_2b1b / (same),
/// Rbar = (R1 + R2) / 2. Throws EmptyAutoBinError when a zero-delay auto bin
/// has no counts.
CauchySchwarzResult cauchy_schwarz(const G2Matrix& curves);

enum class Ordering { kPositiveDelay, kNegativeDelay, kSymmetric };

/// Which delay sign carries the Rbar > 1 bins.
Ordering time_ordering_check(const CauchySchwarzResult& result);
const char* to_string(Ordering ordering) noexcept;

struct SweepOptions {
  std::optional<Binning> binning;  // default: 0.4 ns bins over +-20 ns
  FabryPerotFilter filter{};
  unsigned threads = 0;
};

struct SweepRow {
  double delta_over_gamma = 0.0;
  FilterArm arm = FilterArm::kNone;
  double alpha = 1.0;
  double rbar_max = 0.0;
  double sigma = 0.0;
  bool ok = false;
  std::string status;
};

/// One simulate -> correlate -> Cauchy-Schwarz pipeline per (detuning, arm).
/// Every point reuses the base seed. Failures are recorded per row.
std::vector<SweepRow> detuning_sweep(const ExperimentConfig& base, std::span<const double> detunings,
                                     std::span<const FilterArm> arms, const SweepOptions& options = {});

}  // namespace sfwm
