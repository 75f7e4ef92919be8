#include "sfwm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include "sfwm/error.hpp"

namespace sfwm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Splits "12.5 MHz" into (12.5, "mhz").
std::pair<double, std::string> split_number(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr == text.data()) {
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  }
  return {value, lower(trim(std::string_view(ptr, text.data() + text.size() - ptr)))};
}

double frequency_scale(const std::string& unit, double gamma_hz) {
  if (unit.empty() || unit == "hz") return 1.0;
  if (unit == "khz") return 1e3;
  if (unit == "mhz") return 1e6;
  if (unit == "ghz") return 1e9;
  if (unit == "gamma") return gamma_hz;
  throw InvalidArgument("unknown frequency unit '" + unit + "'");
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  while (true) {
    auto pos = text.find(',');
    out.push_back(trim(text.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

template <class F>
auto field(const std::string& name, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(name, e.what());
  }
}

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::uint64_t DetectorModel::dead_ticks() const {
  return static_cast<std::uint64_t>(std::ceil(dead_time / tick - 1e-9));
}

double ExperimentConfig::pair_decay_rate() const noexcept {
  return 2.0 * std::numbers::pi * biphoton_decay.value_or(gamma);
}

double ExperimentConfig::pair_osc_rate() const noexcept {
  return 2.0 * std::numbers::pi * biphoton_osc.value_or(detuning_hz());
}

std::uint64_t ExperimentConfig::trial_ticks() const {
  return static_cast<std::uint64_t>(std::llround(trial_duration / detector.tick));
}

double parse_frequency(std::string_view text, double gamma_hz) {
  auto [value, unit] = split_number(text);
  return value * frequency_scale(unit, gamma_hz);
}

double parse_duration(std::string_view text) {
  auto [value, unit] = split_number(text);
  if (unit.empty() || unit == "s") return value;
  if (unit == "ms") return value * 1e-3;
  if (unit == "us") return value * 1e-6;
  if (unit == "ns") return value * 1e-9;
  if (unit == "ps") return value * 1e-12;
  throw InvalidArgument("unknown time unit '" + unit + "'");
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* name, const std::string& what) {
    if (!ok) throw ConfigError(name, what);
  };
  require(gamma > 0 && std::isfinite(gamma), "gamma", "must be positive");
  require(detuning > 0 && std::isfinite(detuning), "detuning", "multiplier must be > 0");
  if (rabi_frequency) require(*rabi_frequency >= 0, "rabi_frequency", "must be >= 0");
  require(trial_duration > 0 && trial_duration <= cycle_period, "trial_duration",
          "must lie in (0, cycle_period]");
  require(n_trials > 0, "n_trials", "must be >= 1");
  require(pair_rate >= 0 && std::isfinite(pair_rate), "pair_rate", "must be >= 0");
  require(rayleigh_rate >= 0 && std::isfinite(rayleigh_rate), "rayleigh_rate", "must be >= 0");
  require(pump_power >= 0, "pump_power", "must be >= 0");
  require(optical_depth >= 0, "optical_depth", "must be >= 0");

  double sum = 0;
  for (double w : triplet_weights) {
    require(w >= 0 && w <= 1, "triplet_weights", "each weight must lie in [0, 1]");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "triplet_weights", "weights must sum to 1");
  for (double lw : triplet_linewidths) {
    require(lw > 0 && std::isfinite(lw), "triplet_linewidths", "linewidths must be positive");
  }
  if (biphoton_decay) require(*biphoton_decay > 0, "biphoton_decay", "must be > 0");
  if (biphoton_osc) require(*biphoton_osc > 0, "biphoton_osc", "must be > 0");

  const auto& d = detector;
  require(d.quantum_efficiency >= 0 && d.quantum_efficiency <= 1, "detector.quantum_efficiency",
          "must lie in [0, 1]");
  require(d.coupling_efficiency >= 0 && d.coupling_efficiency <= 1,
          "detector.coupling_efficiency", "must lie in [0, 1]");
  require(d.dead_time >= 0, "detector.dead_time", "must be >= 0");
  require(d.dark_rate >= 0, "detector.dark_rate", "must be >= 0");
  require(d.jitter_fwhm >= 0, "detector.jitter_fwhm", "must be >= 0");
  require(d.tick > 0, "detector.tick", "must be positive");
  require(trial_duration / d.tick < 1.8e19, "trial_duration", "too many ticks");
}

ExperimentConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("<file>", e.what());
  }

  std::map<std::string, std::string> kv;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      kv[key] = node.data();
      continue;
    }
    for (const auto& [sub, leaf] : node) kv[key + "." + sub] = leaf.data();
  }

  ExperimentConfig c;
  // gamma first: other frequencies may be given in units of it.
  if (auto it = kv.find("gamma"); it != kv.end()) {
    c.gamma = field("gamma", [&] { return parse_frequency(it->second, kDefaultGammaHz); });
    kv.erase(it);
  }
  const double g = c.gamma;
  auto freq = [g](const std::string& v) { return parse_frequency(v, g); };
  auto number = [](const std::string& v) {
    auto [x, unit] = split_number(v);
    if (!unit.empty()) throw InvalidArgument("unexpected unit '" + unit + "'");
    return x;
  };
  auto triple = [](const std::string& v, const auto& conv) {
    auto parts = split_list(v);
    if (parts.size() != 3) throw InvalidArgument("expected exactly three comma-separated values");
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) out[i] = conv(std::string(parts[i]));
    return out;
  };

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"detuning",
       [&](const std::string& v) {
         auto [x, unit] = split_number(v);
         c.detuning = unit.empty() || unit == "gamma" ? x : x * frequency_scale(unit, g) / g;
       }},
      {"rabi_frequency", [&](const std::string& v) { c.rabi_frequency = freq(v); }},
      {"pump_power", [&](const std::string& v) {
         auto [x, unit] = split_number(v);
         if (unit == "uw") x *= 1e-6;
         else if (unit == "mw") x *= 1e-3;
         else if (!unit.empty() && unit != "w") throw InvalidArgument("unknown power unit '" + unit + "'");
         c.pump_power = x;
       }},
      {"optical_depth", [&](const std::string& v) { c.optical_depth = number(v); }},
      {"trial_duration", [&](const std::string& v) { c.trial_duration = parse_duration(v); }},
      {"cycle_period", [&](const std::string& v) { c.cycle_period = parse_duration(v); }},
      {"n_trials",
       [&](const std::string& v) {
         double x = number(v);
         if (x < 0 || x != std::floor(x) || x > 4294967295.0) throw InvalidArgument("must be a non-negative integer");
         c.n_trials = static_cast<std::uint32_t>(x);
       }},
      {"pair_rate", [&](const std::string& v) { c.pair_rate = freq(v); }},
      {"rayleigh_rate", [&](const std::string& v) { c.rayleigh_rate = freq(v); }},
      {"triplet_weights", [&](const std::string& v) { c.triplet_weights = triple(v, number); }},
      {"triplet_linewidths", [&](const std::string& v) { c.triplet_linewidths = triple(v, freq); }},
      {"biphoton_decay", [&](const std::string& v) { c.biphoton_decay = freq(v); }},
      {"biphoton_osc", [&](const std::string& v) { c.biphoton_osc = freq(v); }},
      {"rng_seed",
       [&](const std::string& v) {
         auto s = trim(v);
         std::uint64_t seed = 0;
         auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
         if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidArgument("must be an unsigned 64-bit integer");
         c.rng_seed = seed;
       }},
      {"detector.quantum_efficiency", [&](const std::string& v) { c.detector.quantum_efficiency = number(v); }},
      {"detector.coupling_efficiency", [&](const std::string& v) { c.detector.coupling_efficiency = number(v); }},
      {"detector.dead_time", [&](const std::string& v) { c.detector.dead_time = parse_duration(v); }},
      {"detector.dark_rate", [&](const std::string& v) { c.detector.dark_rate = freq(v); }},
      {"detector.jitter_fwhm", [&](const std::string& v) { c.detector.jitter_fwhm = parse_duration(v); }},
      {"detector.tick", [&](const std::string& v) { c.detector.tick = parse_duration(v); }},
  };

  for (const auto& [key, value] : kv) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key");
    field(key, [&] {
      it->second(value);
      return 0;
    });
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_config(in);
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto line = [&](const char* key, const std::string& v) { out << key << " = " << v << '\n'; };
  auto triple = [](const std::array<double, 3>& a) {
    return fmt_double(a[0]) + ", " + fmt_double(a[1]) + ", " + fmt_double(a[2]);
  };
  line("gamma", fmt_double(c.gamma));
  line("detuning", fmt_double(c.detuning));
  if (c.rabi_frequency) line("rabi_frequency", fmt_double(*c.rabi_frequency));
  line("pump_power", fmt_double(c.pump_power));
  line("optical_depth", fmt_double(c.optical_depth));
  line("trial_duration", fmt_double(c.trial_duration));
  line("cycle_period", fmt_double(c.cycle_period));
  line("n_trials", std::to_string(c.n_trials));
  line("pair_rate", fmt_double(c.pair_rate));
  line("rayleigh_rate", fmt_double(c.rayleigh_rate));
  line("triplet_weights", triple(c.triplet_weights));
  line("triplet_linewidths", triple(c.triplet_linewidths));
  if (c.biphoton_decay) line("biphoton_decay", fmt_double(*c.biphoton_decay));
  if (c.biphoton_osc) line("biphoton_osc", fmt_double(*c.biphoton_osc));
  line("rng_seed", std::to_string(c.rng_seed));
  out << "\n[detector]\n";
  line("quantum_efficiency", fmt_double(c.detector.quantum_efficiency));
  line("coupling_efficiency", fmt_double(c.detector.coupling_efficiency));
  line("dead_time", fmt_double(c.detector.dead_time));
  line("dark_rate", fmt_double(c.detector.dark_rate));
  line("jitter_fwhm", fmt_double(c.detector.jitter_fwhm));
  line("tick", fmt_double(c.detector.tick));
  return out.str();
}

}  // namespace sfwm
