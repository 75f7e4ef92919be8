#include "sfwm/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sfwm/error.hpp"

namespace sfwm {

SpectralTriplet triplet_from_config(const ExperimentConfig& config) {
  config.validate();
  const double pump = config.detuning_hz();
  double shift = pump;
  if (config.rabi_frequency) shift = std::hypot(pump, *config.rabi_frequency);

  SpectralTriplet t;
  const std::array<double, 3> offsets{pump - shift, pump, pump + shift};
  for (std::size_t i = 0; i < 3; ++i) {
    t.components[i] = {offsets[i], config.triplet_weights[i], config.triplet_linewidths[i]};
  }
  return t;
}

double FabryPerotFilter::min_transmission() const noexcept {
  const double k = 2.0 * finesse / std::numbers::pi;
  return peak_transmission / (1.0 + k * k);
}

void FabryPerotFilter::validate() const {
  if (!(fsr > 0)) throw InvalidArgument("filter fsr must be positive");
  if (!(finesse > 0)) throw InvalidArgument("filter finesse must be positive");
  if (!(peak_transmission > 0 && peak_transmission <= 1)) {
    throw InvalidArgument("filter peak transmission must lie in (0, 1]");
  }
}

double airy_transmission(const FabryPerotFilter& filter, double freq_offset) {
  // remainder() is exact, so shifting by whole FSRs cannot change the result.
  const double reduced = std::abs(std::remainder(freq_offset, filter.fsr));
  const double s = std::sin(std::numbers::pi * reduced / filter.fsr);
  const double k = 2.0 * filter.finesse / std::numbers::pi;
  return filter.peak_transmission / (1.0 + k * k * s * s);
}

double filter_alpha(const FabryPerotFilter& filter, double pump_offset) {
  return airy_transmission(filter, pump_offset) / filter.peak_transmission;
}

FilterPair filters_for_arm(const ExperimentConfig& config, FilterArm arm,
                           const FabryPerotFilter& prototype) {
  if (arm == FilterArm::kNone) return {};
  const auto triplet = triplet_from_config(config);
  FabryPerotFilter resonant = prototype;
  resonant.center_offset = triplet.lower().offset;
  FabryPerotFilter off_resonant = prototype;
  off_resonant.center_offset = triplet.upper().offset;
  if (arm == FilterArm::kResonant1) return {resonant, off_resonant};
  return {off_resonant, resonant};
}

const char* to_string(FilterArm arm) noexcept {
  switch (arm) {
    case FilterArm::kNone: return "none";
    case FilterArm::kResonant1: return "resonant-1";
    case FilterArm::kResonant2: return "resonant-2";
  }
  return "?";
}

FilterArm parse_filter_arm(std::string_view name) {
  if (name == "none") return FilterArm::kNone;
  if (name == "resonant-1") return FilterArm::kResonant1;
  if (name == "resonant-2") return FilterArm::kResonant2;
  throw InvalidArgument("unknown filter arm '" + std::string(name) + "'");
}

}  // namespace sfwm
