#include "sfwm/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

#include "sfwm/emission.hpp"
#include "sfwm/error.hpp"

namespace sfwm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

G1Curve siegert_invert(const CorrelationCurve& auto_curve) {
  G1Curve out;
  const auto n = auto_curve.n_bins();
  out.delay.resize(n);
  out.values.resize(n);
  out.sigma.assign(n, kNaN);
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.delay[i] = auto_curve.delay(i);
    const double excess = auto_curve.values[i] - 1.0;
    if (excess < 0) ++clamped;
    const double g1 = std::sqrt(std::max(excess, 0.0));
    out.values[i] = g1;
    if (g1 > 0) out.sigma[i] = auto_curve.sigma[i] / (2.0 * g1);
  }
  out.clamped_fraction = n > 0 ? static_cast<double>(clamped) / static_cast<double>(n) : 0.0;
  out.non_thermal = out.clamped_fraction > 0.2;
  return out;
}

SpectrumEstimate spectrum_fft(const G1Curve& g1, int field_id, std::size_t pad_factor) {
  const auto n = g1.values.size();
  if (n < 2) throw InvalidArgument("spectrum_fft: need at least two delay bins");
  if (pad_factor < 1) throw InvalidArgument("spectrum_fft: pad factor must be >= 1");
  const double step = g1.delay[1] - g1.delay[0];
  if (!(step > 0)) throw InvalidArgument("spectrum_fft: delays must increase");
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((g1.delay[i] - g1.delay[i - 1]) - step) > 1e-6 * step) {
      throw InvalidArgument("spectrum_fft: delay bins are not uniform");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(g1.delay[i] + g1.delay[n - 1 - i]) > 1e-6 * step) {
      throw InvalidArgument("spectrum_fft: delay axis is not symmetric about zero");
    }
  }

  const std::size_t m = n * pad_factor;
  std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(m), &fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(m / 2 + 1), &fftw_free);
  std::fill(in.get(), in.get() + m, 0.0);
  for (std::size_t i = 0; i < n; ++i) in.get()[i] = 0.5 * (g1.values[i] + g1.values[n - 1 - i]);

  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.get(), out.get(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  SpectrumEstimate s;
  s.field_id = field_id;
  s.resolution = 1.0 / (static_cast<double>(n) * step);
  const std::size_t bins = m / 2 + 1;
  s.freq.resize(bins);
  s.magnitude.resize(bins);
  double peak = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    s.freq[k] = static_cast<double>(k) / (static_cast<double>(m) * step);
    s.magnitude[k] = std::hypot(out.get()[k][0], out.get()[k][1]);
    peak = std::max(peak, s.magnitude[k]);
  }
  if (peak > 0) {
    for (auto& v : s.magnitude) v /= peak;
  }
  return s;
}

CauchySchwarzResult cauchy_schwarz(const G2Matrix& curves) {
  const auto& reference = curves[0];
  for (const auto& c : curves) {
    if (c.bin_edges != reference.bin_edges) {
      throw InvalidArgument("cauchy_schwarz: curves do not share the same binning");
    }
  }
  const auto& auto1 = curve(curves, PairId::k1b1a);
  const auto& auto2 = curve(curves, PairId::k2b2a);
  const auto zero = auto1.zero_bin();
  if (!zero) throw InvalidArgument("cauchy_schwarz: no bin starts at zero delay");
  for (const auto* a : {&auto1, &auto2}) {
    if (a->raw_counts[*zero] == 0) {
      throw EmptyAutoBinError("zero-delay bin of auto-correlation " + a->meta.pair + " has no coincidences");
    }
  }
  const double denom = auto1.values[*zero] * auto2.values[*zero];
  const double denom_rel_var =
      1.0 / static_cast<double>(auto1.raw_counts[*zero]) + 1.0 / static_cast<double>(auto2.raw_counts[*zero]);

  auto term = [&](PairId a, PairId b, std::size_t i, double& sigma) {
    const auto& ca = curve(curves, a);
    const auto& cb = curve(curves, b);
    const double r = ca.values[i] * cb.values[i] / denom;
    if (ca.raw_counts[i] == 0 || cb.raw_counts[i] == 0) {
      sigma = kNaN;
    } else {
      const double rel_var = 1.0 / static_cast<double>(ca.raw_counts[i]) +
                             1.0 / static_cast<double>(cb.raw_counts[i]) + denom_rel_var;
      sigma = r * std::sqrt(rel_var);
    }
    return r;
  };

  CauchySchwarzResult out;
  const auto n = reference.n_bins();
  out.delay.resize(n);
  out.bin_lower.resize(n);
  out.r1_curve.resize(n);
  out.r2_curve.resize(n);
  out.rbar_curve.resize(n);
  out.sigma.resize(n);
  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s1 = 0.0, s2 = 0.0;
    out.delay[i] = reference.delay(i);
    out.bin_lower[i] = reference.bin_edges[i];
    out.r1_curve[i] = term(PairId::k2b1a, PairId::k1b2a, i, s1);
    out.r2_curve[i] = term(PairId::k2a1a, PairId::k2b1b, i, s2);
    out.rbar_curve[i] = 0.5 * (out.r1_curve[i] + out.r2_curve[i]);
    out.sigma[i] = 0.5 * std::sqrt(s1 * s1 + s2 * s2);
    if (out.rbar_curve[i] > out.rbar_curve[best]) best = i;
  }
  out.rbar_max = out.rbar_curve[best];
  out.rbar_max_sigma = out.sigma[best];
  out.rbar_max_delay = out.bin_lower[best];
  out.violated = std::isfinite(out.rbar_max_sigma) && out.rbar_max - out.rbar_max_sigma > 1.0;
  return out;
}

Ordering time_ordering_check(const CauchySchwarzResult& result) {
  bool positive = false;
  bool negative = false;
  for (std::size_t i = 0; i < result.rbar_curve.size(); ++i) {
    if (!(result.rbar_curve[i] > 1.0)) continue;
    (result.delay[i] > 0 ? positive : negative) = true;
  }
  if (positive && !negative) return Ordering::kPositiveDelay;
  if (negative && !positive) return Ordering::kNegativeDelay;
  return Ordering::kSymmetric;
}

const char* to_string(Ordering ordering) noexcept {
  switch (ordering) {
    case Ordering::kPositiveDelay: return "positive-delay";
    case Ordering::kNegativeDelay: return "negative-delay";
    case Ordering::kSymmetric: return "symmetric";
  }
  return "?";
}

std::vector<SweepRow> detuning_sweep(const ExperimentConfig& base, std::span<const double> detunings,
                                     std::span<const FilterArm> arms, const SweepOptions& options) {
  std::vector<SweepRow> rows;
  for (const double delta : detunings) {
    for (const FilterArm arm : arms) {
      SweepRow row;
      row.delta_over_gamma = delta;
      row.arm = arm;
      try {
        ExperimentConfig config = base;
        config.detuning = delta;
        config.validate();
        const auto filters = filters_for_arm(config, arm, options.filter);
        if (filters.field1) {
          row.alpha = transmission_at(*filters.field1, config.detuning_hz()) / filters.field1->peak_transmission;
        }
        const Binning binning = options.binning.value_or(Binning::from_ns(0.4, 20.0, config.detector.tick));
        const auto run = simulate_run(config, filters, options.threads);
        const auto result = cauchy_schwarz(g2_matrix(run, binning));
        row.rbar_max = result.rbar_max;
        row.sigma = result.rbar_max_sigma;
        row.ok = true;
        row.status = "ok";
      } catch (const std::exception& e) {
        row.ok = false;
        row.rbar_max = kNaN;
        row.sigma = kNaN;
        row.status = std::string("error: ") + e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace sfwm
