#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace sfwm {

/// 87Rb D2 natural linewidth Gamma/2pi in Hz.
inline constexpr double kDefaultGammaHz = 6.0666e6;

struct DetectorModel {
  double quantum_efficiency = 0.6;
  double coupling_efficiency = 0.7;
  double dead_time = 22e-9;     // s
  double dark_rate = 250.0;     // Hz
  double jitter_fwhm = 350e-12; // s
  double tick = 100e-12;        // s

  double efficiency() const noexcept { return quantum_efficiency * coupling_efficiency; }
  std::uint64_t dead_ticks() const;
};

/// All physical and acquisition parameters of a run.
///
/// Frequencies are plain (not angular) Hz and are offsets from the atomic
/// resonance; the pump sits at +detuning * gamma.
struct ExperimentConfig {
  double gamma = kDefaultGammaHz;
  double detuning = 50.0;  // multiples of gamma
  std::optional<double> rabi_frequency;  // Hz; shifts sidebands to +-sqrt(D^2 + W^2)

  double pump_power = 350e-6;  // W, metadata
  double optical_depth = 15.0; // metadata

  double trial_duration = 50e-6;
  double cycle_period = 25e-3;
  std::uint32_t n_trials = 2000;

  double pair_rate = 2.5e3;      // pair emission events per s
  double rayleigh_rate = 1.7e5;  // chaotic photon flux per field per s

  std::array<double, 3> triplet_weights{0.01, 0.98, 0.01};
  std::array<double, 3> triplet_linewidths{0.5 * kDefaultGammaHz, 1e6, 0.5 * kDefaultGammaHz};

  // Pair waveform p(d) ~ exp(-2pi*decay*d) * (1 - cos(2pi*osc*d)). Unset means
  // decay = gamma and osc = detuning, so both follow a detuning sweep.
  std::optional<double> biphoton_decay;
  std::optional<double> biphoton_osc;

  DetectorModel detector;
  std::uint64_t rng_seed = 0x5f3759dfULL;

  double detuning_hz() const noexcept { return detuning * gamma; }
  double pair_decay_rate() const noexcept;  // rad/s
  double pair_osc_rate() const noexcept;    // rad/s
  std::uint64_t trial_ticks() const;
  double live_time() const noexcept { return n_trials * trial_duration; }

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Parses "12.5MHz", "3 kHz", "20gamma", "1e6" (bare numbers are Hz).
double parse_frequency(std::string_view text, double gamma_hz);
/// Parses "50us", "22 ns", "1e-3" (bare numbers are seconds).
double parse_duration(std::string_view text);

/// Reads the key = value config format. Keys are the ExperimentConfig field
/// names; detector fields are either "detector.<name>" or live in a
/// [detector] section. Unknown keys are rejected.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes a config that parse_config reads back to an equal value.
std::string format_config(const ExperimentConfig& config);

}  // namespace sfwm
