#pragma once

#include <array>

#include "sfwm/config.hpp"

namespace sfwm {

struct SpectralComponent {
  double offset = 0.0;     // Hz from the atomic resonance
  double weight = 0.0;     // power fraction
  double linewidth = 0.0;  // FWHM, Hz
};

/// Rayleigh line plus the two sidebands, ordered (lower, central, upper).
struct SpectralTriplet {
  static constexpr std::size_t kLower = 0;
  static constexpr std::size_t kCentral = 1;
  static constexpr std::size_t kUpper = 2;

  std::array<SpectralComponent, 3> components;

  const SpectralComponent& lower() const noexcept { return components[kLower]; }
  const SpectralComponent& central() const noexcept { return components[kCentral]; }
  const SpectralComponent& upper() const noexcept { return components[kUpper]; }
  /// Frequency distance between the outer components.
  double span() const noexcept { return upper().offset - lower().offset; }
};

SpectralTriplet triplet_from_config(const ExperimentConfig& config);

/// Fiber Fabry-Perot filter with Airy intensity transmission.
struct FabryPerotFilter {
  double center_offset = 0.0;      // Hz from the atomic resonance
  double fsr = 20e9;               // Hz
  double finesse = 33.0;
  double peak_transmission = 0.5;  // 3 dB insertion loss

  double fwhm() const noexcept { return fsr / finesse; }
  /// Off-resonance floor of the transmission.
  double min_transmission() const noexcept;
  void validate() const;
};

/// T(nu) = T_max / (1 + (2F/pi)^2 sin^2(pi nu / FSR)), nu measured from the
/// filter center. Periodic in FSR and even in nu, both bit-exactly.
double airy_transmission(const FabryPerotFilter& filter, double freq_offset);

/// Transmission at the given absolute offset (Hz from resonance).
inline double transmission_at(const FabryPerotFilter& filter, double offset) {
  return airy_transmission(filter, offset - filter.center_offset);
}

/// Relative Rayleigh leakage: transmission a pump_offset away from the
/// filter center, normalized to the peak.
double filter_alpha(const FabryPerotFilter& filter, double pump_offset);

/// Filter placement on the two fields.
enum class FilterArm { kNone, kResonant1, kResonant2 };

struct FilterPair {
  std::optional<FabryPerotFilter> field1;
  std::optional<FabryPerotFilter> field2;
};

/// kResonant1 puts field 1's filter on the resonant sideband and field 2's on
/// the off-resonant one; kResonant2 swaps them.
FilterPair filters_for_arm(const ExperimentConfig& config, FilterArm arm,
                           const FabryPerotFilter& prototype = {});

const char* to_string(FilterArm arm) noexcept;
FilterArm parse_filter_arm(std::string_view name);

}  // namespace sfwm
