// sfwm: simulate, correlate and analyze four-detector biphoton time-tag data.
//
// Exit codes: 0 success, 1 usage or unexpected failure, 2 configuration or
// malformed input, 3 I/O failure, 4 empty zero-delay auto-correlation bin,
// 5 --verify mismatch.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sfwm/analysis.hpp"
#include "sfwm/config.hpp"
#include "sfwm/correlator.hpp"
#include "sfwm/emission.hpp"
#include "sfwm/error.hpp"
#include "sfwm/io.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kBadInput = 2,
  kIoFailure = 3,
  kEmptyAutoBin = 4,
  kVerifyMismatch = 5,
};

struct SimulateArgs {
  std::string config;
  std::string output;
  std::string filters = "none";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> trials;
};

struct CorrelateArgs {
  std::string input;
  std::string output;
  double bin_ns = 0.4;
  double max_delay_ns = 20.0;
  bool verify = false;
};

struct AnalyzeArgs {
  std::string curves;
  std::string mode;
  std::string output;
};

struct SweepArgs {
  std::string config;
  std::string output = "sweep.csv";
  std::vector<double> deltas;
  bool both_arms = false;
  std::string arm = "resonant-1";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> trials;
};

sfwm::ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed,
                            const std::optional<std::uint32_t>& trials) {
  auto config = sfwm::load_config(path);
  if (seed) config.rng_seed = *seed;
  if (trials) config.n_trials = *trials;
  config.validate();
  return config;
}

int run_simulate(const SimulateArgs& args) {
  const auto config = load(args.config, args.seed, args.trials);
  const auto arm = sfwm::parse_filter_arm(args.filters);
  const auto run = sfwm::simulate_run(config, sfwm::filters_for_arm(config, arm), 0);
  sfwm::write_tagfile(fs::path(args.output), run);

  const auto window = sfwm::Binning::from_ns(0.4, 20.0, run.tick);
  const auto summary = sfwm::summarize_run(run, window);
  std::printf("wrote %s: %u trials, live time %.6g s, filters %s\n", args.output.c_str(), run.n_trials,
              run.live_time(), sfwm::to_string(arm));
  for (auto d : sfwm::kAllDetectors) {
    std::printf("singles rate %s: %.6g Hz\n", std::string(sfwm::to_string(d)).c_str(),
                summary.singles_rate[static_cast<std::size_t>(d)]);
  }
  std::printf("coincidence rate (field 1 x field 2, |tau| < 20 ns): %.6g Hz\n", summary.coincidence_rate);
  return kOk;
}

int run_correlate(const CorrelateArgs& args) {
  const auto run = sfwm::read_tagfile(fs::path(args.input));
  const auto binning = sfwm::Binning::from_ns(args.bin_ns, args.max_delay_ns, run.tick);
  const auto matrix = sfwm::g2_matrix(run, binning, sfwm::resolve_threads(0));
  sfwm::write_g2_matrix(args.output, matrix);
  std::printf("wrote 6 curves (%zu bins each) to %s\n", binning.n_bins(), args.output.c_str());

  if (args.verify) {
    constexpr std::size_t kMaxVerifyTags = 10000;
    std::size_t checked = 0;
    for (auto id : sfwm::kAllPairs) {
      const auto& def = sfwm::pair_definition(id);
      for (std::size_t t = 0; t < run.n_trials; ++t) {
        const auto a = run.stream(def.first).trial(t);
        const auto b = run.stream(def.second).trial(t);
        if (a.size() > kMaxVerifyTags || b.size() > kMaxVerifyTags) {
          std::fprintf(stderr, "verify: trial %zu of %s too large for brute force, skipped\n", t,
                       std::string(def.name).c_str());
          continue;
        }
        if (sfwm::coincidence_histogram(a, b, binning) != sfwm::brute_force_g2(a, b, binning)) {
          std::fprintf(stderr, "verify: mismatch for pair %s in trial %zu\n", std::string(def.name).c_str(), t);
          return kVerifyMismatch;
        }
        ++checked;
      }
    }
    std::printf("verify: fast histogram equals brute force on %zu pair-trials\n", checked);
  }
  return kOk;
}

int run_analyze(const AnalyzeArgs& args) {
  const auto matrix = sfwm::read_g2_matrix(args.curves);
  const fs::path out_dir = args.output.empty() ? fs::path(args.curves) : fs::path(args.output);
  fs::create_directories(out_dir);

  if (args.mode == "spectrum") {
    for (int field = 1; field <= 2; ++field) {
      const auto& auto_curve = sfwm::curve(matrix, field == 1 ? sfwm::PairId::k1b1a : sfwm::PairId::k2b2a);
      const auto g1 = sfwm::siegert_invert(auto_curve);
      if (g1.non_thermal) {
        std::fprintf(stderr, "warning: %.0f%% of %s bins fall below 1, input does not look thermal\n",
                     100.0 * g1.clamped_fraction, auto_curve.meta.pair.c_str());
      }
      const auto spectrum = sfwm::spectrum_fft(g1, field);
      const auto path = out_dir / ("spectrum_field" + std::to_string(field) + ".csv");
      sfwm::write_spectrum_csv(path, spectrum);
      // Strongest local maximum away from the DC lobe.
      std::size_t best = 0;
      for (std::size_t k = 2; k + 1 < spectrum.magnitude.size(); ++k) {
        const auto& m = spectrum.magnitude;
        if (m[k] >= m[k - 1] && m[k] >= m[k + 1] && (best == 0 || m[k] > m[best])) best = k;
      }
      std::printf("field %d: wrote %s; strongest beat peak %.4g MHz at relative magnitude %.3g\n", field,
                  path.string().c_str(), best ? spectrum.freq[best] * 1e-6 : 0.0,
                  best ? spectrum.magnitude[best] : 0.0);
    }
    return kOk;
  }

  const auto result = sfwm::cauchy_schwarz(matrix);
  if (args.mode == "cs") {
    sfwm::write_cs_csv(out_dir / "r_curve.csv", result);
    std::printf("Rbar_max = %.4g ± %.2g, CS violated: %s\n", result.rbar_max, result.rbar_max_sigma,
                result.violated ? "yes" : "no");
    return kOk;
  }
  std::printf("ordering: %s\n", sfwm::to_string(sfwm::time_ordering_check(result)));
  return kOk;
}

int run_sweep(const SweepArgs& args) {
  const auto config = load(args.config, args.seed, args.trials);
  std::vector<sfwm::FilterArm> arms;
  if (args.both_arms) {
    arms = {sfwm::FilterArm::kNone, sfwm::FilterArm::kResonant1};
  } else {
    arms = {sfwm::parse_filter_arm(args.arm)};
  }
  const auto rows = sfwm::detuning_sweep(config, args.deltas, arms);
  sfwm::write_sweep_csv(fs::path(args.output), rows);
  std::size_t ok = 0;
  for (const auto& r : rows) {
    if (r.ok) {
      ++ok;
      std::printf("delta = %g gamma, %s: alpha = %.3f, Rbar_max = %.4g ± %.2g\n", r.delta_over_gamma,
                  sfwm::to_string(r.arm), r.alpha, r.rbar_max, r.sigma);
    } else {
      std::fprintf(stderr, "delta = %g gamma, %s: %s\n", r.delta_over_gamma, sfwm::to_string(r.arm),
                   r.status.c_str());
    }
  }
  std::printf("wrote %s (%zu of %zu points ok)\n", args.output.c_str(), ok, rows.size());
  return ok > 0 ? kOk : kFailure;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const sfwm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kBadInput;
  } catch (const sfwm::FormatError& e) {
    std::fprintf(stderr, "malformed input: %s\n", e.what());
    return kBadInput;
  } catch (const sfwm::EmptyAutoBinError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kEmptyAutoBin;
  } catch (const sfwm::IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIoFailure;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIoFailure;
  } catch (const sfwm::InvalidArgument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Biphoton time-tag simulator and correlation analysis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a run and write a binary time-tag file");
  simulate->add_option("config", sim.config, "Config file")->required();
  simulate->add_option("-o,--output", sim.output, "Output time-tag file")->required();
  simulate->add_option("--filters", sim.filters, "Filter placement")
      ->check(CLI::IsMember({"none", "resonant-1", "resonant-2"}));
  simulate->add_option("--seed", sim.seed, "Override rng_seed");
  simulate->add_option("--trials", sim.trials, "Override n_trials");

  CorrelateArgs cor;
  auto* correlate = app.add_subcommand("correlate", "Compute the six g2 curves from a time-tag file");
  correlate->add_option("tagfile", cor.input, "Time-tag file")->required();
  correlate->add_option("-o,--output", cor.output, "Output directory")->required();
  correlate->add_option("--bin-ns", cor.bin_ns, "Bin width in ns")->capture_default_str();
  correlate->add_option("--max-delay-ns", cor.max_delay_ns, "Delay window half-width in ns")->capture_default_str();
  correlate->add_flag("--verify", cor.verify, "Cross-check every trial against the brute-force oracle");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Spectra, Cauchy-Schwarz ratios or time ordering");
  analyze->add_option("curves", ana.curves, "Directory holding g_<pair>.csv")->required();
  analyze->add_option("--mode", ana.mode, "Analysis")->required()->check(CLI::IsMember({"spectrum", "cs", "ordering"}));
  analyze->add_option("-o,--output", ana.output, "Output directory (default: the curve directory)");

  SweepArgs swp;
  auto* sweep = app.add_subcommand("sweep", "Rbar_max versus detuning");
  sweep->add_option("config", swp.config, "Config file")->required();
  sweep->add_option("--deltas", swp.deltas, "Detunings in units of gamma")->required()->delimiter(',');
  sweep->add_flag("--both-arms", swp.both_arms, "Run unfiltered and resonant-1 arms");
  sweep->add_option("--arm", swp.arm, "Single arm when --both-arms is absent")
      ->check(CLI::IsMember({"none", "resonant-1", "resonant-2"}))->capture_default_str();
  sweep->add_option("-o,--output", swp.output, "Sweep CSV")->capture_default_str();
  sweep->add_option("--seed", swp.seed, "Override rng_seed");
  sweep->add_option("--trials", swp.trials, "Override n_trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kFailure;
  }

  if (*simulate) return guarded([&] { return run_simulate(sim); });
  if (*correlate) return guarded([&] { return run_correlate(cor); });
  if (*analyze) return guarded([&] { return run_analyze(ana); });
  return guarded([&] { return run_sweep(swp); });
}
