#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sfwm/analysis.hpp"
#include "sfwm/config.hpp"
#include "sfwm/correlator.hpp"
#include "sfwm/emission.hpp"
#include "sfwm/error.hpp"
#include "sfwm/io.hpp"
#include "sfwm/model.hpp"

PYBIND11_MAKE_OPAQUE(sfwm::G2Matrix)

namespace py = pybind11;

namespace {

template <class T>
py::array_t<T> to_array(std::span<const T> v) {
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return to_array(std::span<const T>(v));
}

std::vector<std::uint64_t> to_ticks(const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

py::dict curve_dict(const sfwm::CorrelationCurve& c) {
  py::dict d;
  d["pair"] = c.meta.pair;
  d["bin_edges"] = to_array(c.bin_edges);
  d["values"] = to_array(c.values);
  d["counts"] = to_array(c.raw_counts);
  d["sigma"] = to_array(c.sigma);
  d["singles_i"] = c.meta.singles_i;
  d["singles_j"] = c.meta.singles_j;
  d["live_time"] = c.meta.live_time;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Biphoton time-tag simulation and correlation analysis";

  const auto& base = py::register_exception<sfwm::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<sfwm::ConfigError>(m, "ConfigError", base);
  py::register_exception<sfwm::FormatError>(m, "FormatError", base);
  py::register_exception<sfwm::EmptyAutoBinError>(m, "EmptyAutoBinError", base);
  py::register_exception<sfwm::EmptyCurveError>(m, "EmptyCurveError", base);
  py::register_exception<sfwm::InvalidArgument>(m, "InvalidArgument", base);
  py::register_exception<sfwm::IoError>(m, "IoError", base);

  py::class_<sfwm::DetectorModel>(m, "DetectorModel")
      .def(py::init<>())
      .def_readwrite("quantum_efficiency", &sfwm::DetectorModel::quantum_efficiency)
      .def_readwrite("coupling_efficiency", &sfwm::DetectorModel::coupling_efficiency)
      .def_readwrite("dead_time", &sfwm::DetectorModel::dead_time)
      .def_readwrite("dark_rate", &sfwm::DetectorModel::dark_rate)
      .def_readwrite("jitter_fwhm", &sfwm::DetectorModel::jitter_fwhm)
      .def_readwrite("tick", &sfwm::DetectorModel::tick);

  py::class_<sfwm::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("gamma", &sfwm::ExperimentConfig::gamma)
      .def_readwrite("detuning", &sfwm::ExperimentConfig::detuning)
      .def_readwrite("rabi_frequency", &sfwm::ExperimentConfig::rabi_frequency)
      .def_readwrite("trial_duration", &sfwm::ExperimentConfig::trial_duration)
      .def_readwrite("cycle_period", &sfwm::ExperimentConfig::cycle_period)
      .def_readwrite("n_trials", &sfwm::ExperimentConfig::n_trials)
      .def_readwrite("pair_rate", &sfwm::ExperimentConfig::pair_rate)
      .def_readwrite("rayleigh_rate", &sfwm::ExperimentConfig::rayleigh_rate)
      .def_readwrite("triplet_weights", &sfwm::ExperimentConfig::triplet_weights)
      .def_readwrite("triplet_linewidths", &sfwm::ExperimentConfig::triplet_linewidths)
      .def_readwrite("biphoton_decay", &sfwm::ExperimentConfig::biphoton_decay)
      .def_readwrite("biphoton_osc", &sfwm::ExperimentConfig::biphoton_osc)
      .def_readwrite("detector", &sfwm::ExperimentConfig::detector)
      .def_readwrite("rng_seed", &sfwm::ExperimentConfig::rng_seed)
      .def("validate", &sfwm::ExperimentConfig::validate)
      .def("__str__", &sfwm::format_config);

  m.def("load_config", [](const std::filesystem::path& p) { return sfwm::load_config(p); });
  m.def("parse_config", &sfwm::parse_config_string);

  py::class_<sfwm::FabryPerotFilter>(m, "FabryPerotFilter")
      .def(py::init<>())
      .def_readwrite("center_offset", &sfwm::FabryPerotFilter::center_offset)
      .def_readwrite("fsr", &sfwm::FabryPerotFilter::fsr)
      .def_readwrite("finesse", &sfwm::FabryPerotFilter::finesse)
      .def_readwrite("peak_transmission", &sfwm::FabryPerotFilter::peak_transmission);
  m.def("airy_transmission", &sfwm::airy_transmission, py::arg("filter"), py::arg("freq_offset"));
  m.def("filter_alpha", &sfwm::filter_alpha, py::arg("filter"), py::arg("pump_offset"));

  py::class_<sfwm::Run>(m, "Run")
      .def_readonly("tick", &sfwm::Run::tick)
      .def_readonly("trial_ticks", &sfwm::Run::trial_ticks)
      .def_readonly("n_trials", &sfwm::Run::n_trials)
      .def_property_readonly("live_time", &sfwm::Run::live_time)
      .def("ticks",
           [](const sfwm::Run& r, const std::string& det) {
             for (auto d : sfwm::kAllDetectors) {
               if (sfwm::to_string(d) == det) return to_array(r.stream(d).all_ticks());
             }
             throw py::value_error("unknown detector " + det);
           })
      .def("trial", [](const sfwm::Run& r, const std::string& det, std::size_t i) {
        if (i >= r.n_trials) throw py::index_error("trial index out of range");
        for (auto d : sfwm::kAllDetectors) {
          if (sfwm::to_string(d) == det) return to_array(r.stream(d).trial(i));
        }
        throw py::value_error("unknown detector " + det);
      });

  m.def(
      "simulate",
      [](const sfwm::ExperimentConfig& config, const std::string& filters, unsigned threads) {
        const auto pair = sfwm::filters_for_arm(config, sfwm::parse_filter_arm(filters));
        py::gil_scoped_release release;
        return sfwm::simulate_run(config, pair, threads);
      },
      py::arg("config"), py::arg("filters") = "none", py::arg("threads") = 0);
  m.def("read_tagfile", [](const std::filesystem::path& p) { return sfwm::read_tagfile(p); });
  m.def("write_tagfile", [](const std::filesystem::path& p, const sfwm::Run& r) { sfwm::write_tagfile(p, r); });

  m.def(
      "coincidence_histogram",
      [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& b, std::uint64_t bin_width,
         std::uint64_t max_delay) {
        return to_array(sfwm::coincidence_histogram(to_ticks(a), to_ticks(b), {bin_width, max_delay}));
      },
      py::arg("tags_i"), py::arg("tags_j"), py::arg("bin_width"), py::arg("max_delay"));
  m.def(
      "brute_force_g2",
      [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& b, std::uint64_t bin_width,
         std::uint64_t max_delay) {
        return to_array(sfwm::brute_force_g2(to_ticks(a), to_ticks(b), {bin_width, max_delay}));
      },
      py::arg("tags_i"), py::arg("tags_j"), py::arg("bin_width"), py::arg("max_delay"));

  py::class_<sfwm::G2Matrix>(m, "G2Matrix")
      .def("curve",
           [](const sfwm::G2Matrix& g, const std::string& name) {
             const auto id = sfwm::parse_pair(name);
             if (!id) throw py::value_error("unknown pair " + name);
             return curve_dict(sfwm::curve(g, *id));
           })
      .def("save", [](const sfwm::G2Matrix& g, const std::filesystem::path& dir) { sfwm::write_g2_matrix(dir, g); });
  m.def(
      "correlate",
      [](const sfwm::Run& run, double bin_ns, double max_delay_ns) {
        return sfwm::g2_matrix(run, sfwm::Binning::from_ns(bin_ns, max_delay_ns, run.tick));
      },
      py::arg("run"), py::arg("bin_ns") = 0.4, py::arg("max_delay_ns") = 20.0);
  m.def("load_curves", [](const std::filesystem::path& dir) { return sfwm::read_g2_matrix(dir); });

  m.def("cauchy_schwarz", [](const sfwm::G2Matrix& g) {
    const auto r = sfwm::cauchy_schwarz(g);
    py::dict d;
    d["delay"] = to_array(r.delay);
    d["r1"] = to_array(r.r1_curve);
    d["r2"] = to_array(r.r2_curve);
    d["rbar"] = to_array(r.rbar_curve);
    d["sigma"] = to_array(r.sigma);
    d["rbar_max"] = r.rbar_max;
    d["rbar_max_sigma"] = r.rbar_max_sigma;
    d["violated"] = r.violated;
    d["ordering"] = std::string(sfwm::to_string(sfwm::time_ordering_check(r)));
    return d;
  });

  m.def(
      "spectrum",
      [](const sfwm::G2Matrix& g, int field, std::size_t pad_factor) {
        if (field != 1 && field != 2) throw py::value_error("field must be 1 or 2");
        const auto g1 = sfwm::siegert_invert(sfwm::curve(g, field == 1 ? sfwm::PairId::k1b1a : sfwm::PairId::k2b2a));
        const auto s = sfwm::spectrum_fft(g1, field, pad_factor);
        py::dict d;
        d["freq"] = to_array(s.freq);
        d["magnitude"] = to_array(s.magnitude);
        d["resolution"] = s.resolution;
        d["non_thermal"] = g1.non_thermal;
        return d;
      },
      py::arg("curves"), py::arg("field"), py::arg("pad_factor") = 1);
}
