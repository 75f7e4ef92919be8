#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfwm/timetag.hpp"

namespace sfwm {

/// Signed-delay binning in ticks: bins cover [-max_delay, max_delay) with
/// edges on multiples of bin_width, so delay 0 opens a bin.
struct Binning {
  std::uint64_t bin_width = 4;   // ticks
  std::uint64_t max_delay = 200; // ticks

  std::size_t n_bins() const noexcept { return static_cast<std::size_t>(2 * max_delay / bin_width); }
  void validate() const;

  /// Defaults of 0.4 ns bins over +-20 ns at the given tick.
  static Binning from_ns(double bin_ns, double max_delay_ns, double tick_s);
};

/// Adds the ordered pairs (t_i, t_j) with t_j - t_i in [-max_delay, max_delay)
/// to hist, which must hold binning.n_bins() entries. Two-pointer sweep,
/// O(N_i + N_j + coincidences). Throws InvalidArgument on unsorted input.
void accumulate_coincidences(std::span<const std::uint64_t> tags_i, std::span<const std::uint64_t> tags_j,
                             const Binning& binning, std::span<std::uint64_t> hist);

std::vector<std::uint64_t> coincidence_histogram(std::span<const std::uint64_t> tags_i,
                                                 std::span<const std::uint64_t> tags_j,
                                                 const Binning& binning);

/// O(N_i N_j) enumeration of every pair; reference for coincidence_histogram.
std::vector<std::uint64_t> brute_force_g2(std::span<const std::uint64_t> tags_i,
                                          std::span<const std::uint64_t> tags_j, const Binning& binning);

struct CurveMeta {
  std::string pair;  // e.g. "2b1a"
  std::uint64_t singles_i = 0;
  std::uint64_t singles_j = 0;
  double live_time = 0.0;  // s
  std::uint32_t n_trials = 0;
  double tick = 100e-12;   // s
};

/// Trial-averaged normalized correlation g(tau) = C tau_live / (N_i N_j w).
struct CorrelationCurve {
  std::vector<std::int64_t> bin_edges;  // ticks, n_bins + 1 entries
  std::vector<double> values;
  std::vector<std::uint64_t> raw_counts;
  std::vector<double> sigma;  // values / sqrt(counts); NaN where counts == 0
  CurveMeta meta;

  std::size_t n_bins() const noexcept { return values.size(); }
  std::int64_t bin_width() const { return bin_edges.at(1) - bin_edges.at(0); }
  /// Bin center in seconds.
  double delay(std::size_t i) const { return 0.5 * static_cast<double>(bin_edges[i] + bin_edges[i + 1]) * meta.tick; }
  /// Index of the bin [0, bin_width).
  std::optional<std::size_t> zero_bin() const;
};

/// Throws EmptyCurveError when either singles count is zero.
CorrelationCurve normalize_g2(std::span<const std::uint64_t> hist, const Binning& binning, double tick,
                              std::uint64_t singles_i, std::uint64_t singles_j, double live_time,
                              std::uint32_t n_trials);

/// Raw counts with zero values and flagged (NaN) sigma everywhere; used when
/// a stream has no singles.
CorrelationCurve empty_curve(const Binning& binning, double tick, std::uint64_t singles_i,
                             std::uint64_t singles_j, double live_time, std::uint32_t n_trials);

/// The six detector pairs of the measurement. Every curve uses
/// tau = t(second detector) - t(first detector); for the cross pairs that is
/// always t(field 1) - t(field 2), so "1b2a" is evaluated with 2a as the
/// first detector (it equals g_2a1b).
enum class PairId : std::uint8_t { k2a1a, k2b1a, k1b2a, k2b1b, k1b1a, k2b2a };

inline constexpr std::array<PairId, 6> kAllPairs{PairId::k2a1a, PairId::k2b1a, PairId::k1b2a,
                                                 PairId::k2b1b, PairId::k1b1a, PairId::k2b2a};

struct PairDefinition {
  std::string_view name;
  DetectorId first;   // t_i
  DetectorId second;  // t_j
  bool cross;
};

const PairDefinition& pair_definition(PairId id);
std::optional<PairId> parse_pair(std::string_view name);

using G2Matrix = std::array<CorrelationCurve, 6>;

inline const CorrelationCurve& curve(const G2Matrix& m, PairId id) { return m[static_cast<std::size_t>(id)]; }

/// Raw per-pair histograms summed over trials (pairs never span trials).
std::array<std::vector<std::uint64_t>, 6> pair_histograms(const Run& run, const Binning& binning,
                                                          unsigned threads = 1);

/// Normalized six-curve matrix. Streams without singles give empty_curve().
G2Matrix g2_matrix(const Run& run, const Binning& binning, unsigned threads = 1);

struct RunSummary {
  std::array<double, 4> singles_rate{};  // per detector, 1/s of live time
  double coincidence_rate = 0.0;         // field-1 x field-2 pairs within the window, 1/s
};

/// Singles rates and the summed cross-pair coincidence rate with
/// |delay| inside the binning window.
RunSummary summarize_run(const Run& run, const Binning& window);

}  // namespace sfwm
