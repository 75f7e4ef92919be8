#include "sfwm/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "sfwm/error.hpp"

namespace sfwm {

void Binning::validate() const {
  if (bin_width < 1) throw InvalidArgument("bin width must be at least one tick");
  if (max_delay == 0 || max_delay % bin_width != 0) {
    throw InvalidArgument("max delay must be a positive multiple of the bin width");
  }
}

Binning Binning::from_ns(double bin_ns, double max_delay_ns, double tick_s) {
  const double tick_ns = tick_s * 1e9;
  const double width = bin_ns / tick_ns;
  const double max = max_delay_ns / tick_ns;
  const auto w = static_cast<std::uint64_t>(std::llround(width));
  const auto m = static_cast<std::uint64_t>(std::llround(max));
  if (w < 1 || std::abs(width - static_cast<double>(w)) > 1e-6) {
    throw InvalidArgument("bin width must be a whole number of ticks");
  }
  if (std::abs(max - static_cast<double>(m)) > 1e-6) {
    throw InvalidArgument("max delay must be a whole number of ticks");
  }
  Binning b{w, m};
  b.validate();
  return b;
}

void accumulate_coincidences(std::span<const std::uint64_t> tags_i, std::span<const std::uint64_t> tags_j,
                             const Binning& binning, std::span<std::uint64_t> hist) {
  binning.validate();
  if (hist.size() != binning.n_bins()) throw InvalidArgument("histogram size does not match binning");
  if (!std::is_sorted(tags_i.begin(), tags_i.end()) || !std::is_sorted(tags_j.begin(), tags_j.end())) {
    throw InvalidArgument("coincidence_histogram: tag streams must be sorted");
  }
  const std::uint64_t max = binning.max_delay;
  const std::uint64_t width = binning.bin_width;
  const std::uint64_t* tj = tags_j.data();
  const std::size_t nj = tags_j.size();
  std::uint64_t* out = hist.data();

  std::size_t lo = 0;
  for (const std::uint64_t ti : tags_i) {
    while (lo < nj && tj[lo] + max < ti) ++lo;  // tj < ti - max
    const std::uint64_t shifted = max - ti;     // modular: tj + shifted = tj - ti + max
    const std::uint64_t hi = ti + max;
    for (std::size_t k = lo; k < nj && tj[k] < hi; ++k) ++out[(tj[k] + shifted) / width];
  }
}

std::vector<std::uint64_t> coincidence_histogram(std::span<const std::uint64_t> tags_i,
                                                 std::span<const std::uint64_t> tags_j,
                                                 const Binning& binning) {
  binning.validate();
  std::vector<std::uint64_t> hist(binning.n_bins(), 0);
  accumulate_coincidences(tags_i, tags_j, binning, hist);
  return hist;
}

std::vector<std::uint64_t> brute_force_g2(std::span<const std::uint64_t> tags_i,
                                          std::span<const std::uint64_t> tags_j, const Binning& binning) {
  binning.validate();
  std::vector<std::uint64_t> hist(binning.n_bins(), 0);
  const auto max = static_cast<std::int64_t>(binning.max_delay);
  const auto width = static_cast<std::int64_t>(binning.bin_width);
  for (const auto ti : tags_i) {
    for (const auto tj : tags_j) {
      const std::int64_t d = static_cast<std::int64_t>(tj) - static_cast<std::int64_t>(ti);
      if (d >= -max && d < max) ++hist[static_cast<std::size_t>((d + max) / width)];
    }
  }
  return hist;
}

std::optional<std::size_t> CorrelationCurve::zero_bin() const {
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
    if (bin_edges[i] == 0) return i;
  }
  return std::nullopt;
}

namespace {

CorrelationCurve make_curve(std::span<const std::uint64_t> hist, const Binning& binning, double tick,
                            std::uint64_t singles_i, std::uint64_t singles_j, double live_time,
                            std::uint32_t n_trials) {
  if (hist.size() != binning.n_bins()) throw InvalidArgument("histogram size does not match binning");
  CorrelationCurve c;
  const auto n = binning.n_bins();
  const auto max = static_cast<std::int64_t>(binning.max_delay);
  const auto width = static_cast<std::int64_t>(binning.bin_width);
  c.bin_edges.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) c.bin_edges[i] = -max + static_cast<std::int64_t>(i) * width;
  c.raw_counts.assign(hist.begin(), hist.end());
  c.values.assign(n, 0.0);
  c.sigma.assign(n, std::numeric_limits<double>::quiet_NaN());
  c.meta = {"", singles_i, singles_j, live_time, n_trials, tick};
  return c;
}

}  // namespace

CorrelationCurve normalize_g2(std::span<const std::uint64_t> hist, const Binning& binning, double tick,
                              std::uint64_t singles_i, std::uint64_t singles_j, double live_time,
                              std::uint32_t n_trials) {
  binning.validate();
  if (singles_i == 0 || singles_j == 0) {
    throw EmptyCurveError("cannot normalize correlation: a singles count is zero");
  }
  if (!(live_time > 0)) throw InvalidArgument("live time must be positive");
  auto c = make_curve(hist, binning, tick, singles_i, singles_j, live_time, n_trials);
  const double width_s = static_cast<double>(binning.bin_width) * tick;
  const double scale =
      live_time / (static_cast<double>(singles_i) * static_cast<double>(singles_j) * width_s);
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    const auto counts = static_cast<double>(c.raw_counts[i]);
    c.values[i] = counts * scale;
    if (c.raw_counts[i] > 0) c.sigma[i] = c.values[i] / std::sqrt(counts);
  }
  return c;
}

CorrelationCurve empty_curve(const Binning& binning, double tick, std::uint64_t singles_i,
                             std::uint64_t singles_j, double live_time, std::uint32_t n_trials) {
  binning.validate();
  const std::vector<std::uint64_t> zeros(binning.n_bins(), 0);
  return make_curve(zeros, binning, tick, singles_i, singles_j, live_time, n_trials);
}

const PairDefinition& pair_definition(PairId id) {
  using D = DetectorId;
  static const std::array<PairDefinition, 6> table{{
      {"2a1a", D::k2a, D::k1a, true},
      {"2b1a", D::k2b, D::k1a, true},
      {"1b2a", D::k2a, D::k1b, true},
      {"2b1b", D::k2b, D::k1b, true},
      {"1b1a", D::k1b, D::k1a, false},
      {"2b2a", D::k2b, D::k2a, false},
  }};
  return table[static_cast<std::size_t>(id)];
}

std::optional<PairId> parse_pair(std::string_view name) {
  for (auto id : kAllPairs) {
    if (pair_definition(id).name == name) return id;
  }
  return std::nullopt;
}

std::array<std::vector<std::uint64_t>, 6> pair_histograms(const Run& run, const Binning& binning,
                                                          unsigned threads) {
  binning.validate();
  for (const auto& s : run.streams) {
    if (s.n_trials() != run.n_trials) {
      throw InvalidArgument("g2_matrix: detector " + std::string(to_string(s.detector())) + " has " +
                            std::to_string(s.n_trials()) + " trials, run has " +
                            std::to_string(run.n_trials));
    }
  }
  std::array<std::vector<std::uint64_t>, 6> hists;
  auto one_pair = [&](std::size_t p) {
    const auto& def = pair_definition(kAllPairs[p]);
    hists[p].assign(binning.n_bins(), 0);
    const auto& a = run.stream(def.first);
    const auto& b = run.stream(def.second);
    for (std::size_t t = 0; t < run.n_trials; ++t) accumulate_coincidences(a.trial(t), b.trial(t), binning, hists[p]);
  };
  if (threads <= 1) {
    for (std::size_t p = 0; p < 6; ++p) one_pair(p);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t p = 0; p < 6; ++p) workers.emplace_back(one_pair, p);
  }
  return hists;
}

G2Matrix g2_matrix(const Run& run, const Binning& binning, unsigned threads) {
  const auto hists = pair_histograms(run, binning, threads);
  G2Matrix m;
  const double live = run.live_time();
  for (std::size_t p = 0; p < 6; ++p) {
    const auto& def = pair_definition(kAllPairs[p]);
    const auto ni = run.stream(def.first).total();
    const auto nj = run.stream(def.second).total();
    m[p] = ni > 0 && nj > 0 ? normalize_g2(hists[p], binning, run.tick, ni, nj, live, run.n_trials)
                            : empty_curve(binning, run.tick, ni, nj, live, run.n_trials);
    // Raw counts are kept even when normalization is undefined.
    if (ni == 0 || nj == 0) m[p].raw_counts = hists[p];
    m[p].meta.pair = std::string(def.name);
  }
  return m;
}

RunSummary summarize_run(const Run& run, const Binning& window) {
  RunSummary s;
  const double live = run.live_time();
  if (!(live > 0)) return s;
  for (std::size_t d = 0; d < 4; ++d) s.singles_rate[d] = static_cast<double>(run.streams[d].total()) / live;
  const auto hists = pair_histograms(run, window);
  std::uint64_t total = 0;
  for (std::size_t p = 0; p < 6; ++p) {
    if (!pair_definition(kAllPairs[p]).cross) continue;
    for (const auto c : hists[p]) total += c;
  }
  s.coincidence_rate = static_cast<double>(total) / live;
  return s;
}

}  // namespace sfwm
