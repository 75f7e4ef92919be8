#include "sfwm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "sfwm/error.hpp"

namespace sfwm {

namespace {

template <class T>
void put_le(std::string& buf, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>(static_cast<std::uint64_t>(value) >> (8 * i) & 0xff));
  }
}

template <class T>
T get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError(0, "bad number '" + s + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError(0, "bad integer '" + s + "'");
  return v;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_tagfile(std::ostream& out, const Run& run) {
  const double tick_ps = run.tick * 1e12;
  if (std::abs(tick_ps - std::round(tick_ps)) > 1e-6 || tick_ps < 1 || tick_ps > 4294967295.0) {
    throw InvalidArgument("tick must be a whole number of picoseconds");
  }
  std::string buf;
  buf.append(kTagFileMagic, 4);
  put_le<std::uint16_t>(buf, kTagFileVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(std::llround(tick_ps)));
  put_le<std::uint8_t>(buf, 4);
  put_le<std::uint32_t>(buf, run.n_trials);
  put_le<std::uint64_t>(buf, run.trial_ticks);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));

  for (std::uint32_t t = 0; t < run.n_trials; ++t) {
    buf.clear();
    std::uint64_t count = 0;
    for (const auto& s : run.streams) count += s.trial(t).size();
    put_le<std::uint32_t>(buf, t);
    put_le<std::uint64_t>(buf, count);
    for (const auto& s : run.streams) {
      for (const auto tick : s.trial(t)) {
        put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(s.detector()));
        put_le<std::uint64_t>(buf, tick);
      }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw IoError("failed writing time-tag stream");
}

void write_tagfile(const std::filesystem::path& path, const Run& run) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  write_tagfile(out, run);
  check_written(out, path);
}

Run read_tagfile(std::istream& in) {
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::uint64_t size = data.size();

  if (size < kTagFileHeaderSize) throw FormatError(0, "truncated header");
  if (std::memcmp(bytes, kTagFileMagic, 4) != 0) throw FormatError(0, "bad magic, not an SFWM time-tag file");
  const auto version = get_le<std::uint16_t>(bytes + 4);
  if (version != kTagFileVersion) throw FormatError(4, "unsupported format version " + std::to_string(version));
  const auto tick_ps = get_le<std::uint32_t>(bytes + 6);
  if (tick_ps == 0) throw FormatError(6, "tick resolution is zero");
  const auto n_detectors = get_le<std::uint8_t>(bytes + 10);
  if (n_detectors != 4) throw FormatError(10, "expected 4 detectors, found " + std::to_string(n_detectors));

  Run run;
  run.tick = static_cast<double>(tick_ps) * 1e-12;
  run.n_trials = get_le<std::uint32_t>(bytes + 11);
  run.trial_ticks = get_le<std::uint64_t>(bytes + 15);

  std::uint64_t pos = kTagFileHeaderSize;
  std::array<std::vector<std::uint64_t>, 4> trial;
  for (std::uint32_t t = 0; t < run.n_trials; ++t) {
    if (size - pos < 12) throw FormatError(pos, "truncated block header for trial " + std::to_string(t));
    const auto index = get_le<std::uint32_t>(bytes + pos);
    if (index != t) throw FormatError(pos, "expected trial " + std::to_string(t) + ", found " + std::to_string(index));
    const auto count = get_le<std::uint64_t>(bytes + pos + 4);
    const auto block = pos;
    pos += 12;
    if (count > (size - pos) / kTagFileRecordSize) {
      throw FormatError(block, "block of trial " + std::to_string(t) + " declares " + std::to_string(count) +
                                 " records but the file is shorter");
    }
    for (auto& v : trial) v.clear();
    int last_detector = -1;
    for (std::uint64_t r = 0; r < count; ++r, pos += kTagFileRecordSize) {
      const int det = bytes[pos];
      const auto tick = get_le<std::uint64_t>(bytes + pos + 1);
      if (det >= 4) throw FormatError(pos, "detector id " + std::to_string(det) + " out of range");
      if (det < last_detector) throw FormatError(pos, "records not grouped by detector");
      auto& v = trial[static_cast<std::size_t>(det)];
      if (!v.empty() && tick <= v.back()) throw FormatError(pos, "timestamps not strictly increasing");
      if (tick > run.trial_ticks) throw FormatError(pos, "timestamp beyond the trial duration");
      last_detector = det;
      v.push_back(tick);
    }
    for (std::size_t d = 0; d < 4; ++d) run.streams[d].append_trial(trial[d]);
  }
  if (pos != size) throw FormatError(pos, "trailing bytes after the last trial block");
  return run;
}

Run read_tagfile(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  return read_tagfile(in);
}

void write_curve_csv(std::ostream& out, const CorrelationCurve& c) {
  const double tick_ns = c.meta.tick * 1e9;
  const auto n = c.n_bins();
  out << "# pair=" << c.meta.pair << ",bin_ns=" << format_number(static_cast<double>(c.bin_width()) * tick_ns)
      << ",max_delay_ns=" << format_number(static_cast<double>(-c.bin_edges.front()) * tick_ns)
      << ",tick_ps=" << format_number(c.meta.tick * 1e12) << ",singles_i=" << c.meta.singles_i
      << ",singles_j=" << c.meta.singles_j << ",live_time_s=" << format_number(c.meta.live_time)
      << ",n_trials=" << c.meta.n_trials << '\n';
  out << "delay_ns,g2,counts,sigma\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << format_number(c.delay(i) * 1e9) << ',' << format_number(c.values[i]) << ',' << c.raw_counts[i]
        << ',' << format_number(c.sigma[i]) << '\n';
  }
}

void write_curve_csv(const std::filesystem::path& path, const CorrelationCurve& curve) {
  auto out = open_out(path);
  write_curve_csv(out, curve);
  check_written(out, path);
}

CorrelationCurve read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw FormatError(0, "missing curve header line");
  std::map<std::string, std::string> meta;
  for (const auto& item : split(line.substr(2), ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw FormatError(0, "bad header item '" + item + "'");
    meta[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw FormatError(0, std::string("header lacks '") + key + "'");
    return it->second;
  };

  CorrelationCurve c;
  c.meta.pair = get("pair");
  c.meta.tick = parse_number(get("tick_ps")) * 1e-12;
  c.meta.singles_i = parse_unsigned(get("singles_i"));
  c.meta.singles_j = parse_unsigned(get("singles_j"));
  c.meta.live_time = parse_number(get("live_time_s"));
  c.meta.n_trials = static_cast<std::uint32_t>(parse_unsigned(get("n_trials")));
  const auto binning = Binning::from_ns(parse_number(get("bin_ns")), parse_number(get("max_delay_ns")), c.meta.tick);

  if (!std::getline(in, line) || line != "delay_ns,g2,counts,sigma") throw FormatError(0, "missing column header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 4) throw FormatError(0, "expected 4 columns in '" + line + "'");
    c.values.push_back(parse_number(cols[1]));
    c.raw_counts.push_back(parse_unsigned(cols[2]));
    c.sigma.push_back(parse_number(cols[3]));
  }
  if (c.values.size() != binning.n_bins()) {
    throw FormatError(0, "curve has " + std::to_string(c.values.size()) + " rows, header implies " +
                             std::to_string(binning.n_bins()));
  }
  const auto max = static_cast<std::int64_t>(binning.max_delay);
  const auto width = static_cast<std::int64_t>(binning.bin_width);
  for (std::size_t i = 0; i <= binning.n_bins(); ++i) c.bin_edges.push_back(-max + static_cast<std::int64_t>(i) * width);
  return c;
}

CorrelationCurve read_curve_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_curve_csv(in);
}

void write_g2_matrix(const std::filesystem::path& dir, const G2Matrix& matrix) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& c : matrix) write_curve_csv(dir / ("g_" + c.meta.pair + ".csv"), c);
}

G2Matrix read_g2_matrix(const std::filesystem::path& dir) {
  G2Matrix m;
  for (std::size_t p = 0; p < 6; ++p) {
    const auto name = std::string(pair_definition(kAllPairs[p]).name);
    const auto path = dir / ("g_" + name + ".csv");
    if (!std::filesystem::exists(path)) throw IoError("missing curve file " + path.string());
    m[p] = read_curve_csv(path);
    if (m[p].meta.pair != name) throw FormatError(0, path.string() + " holds pair " + m[p].meta.pair);
  }
  return m;
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumEstimate& s) {
  auto out = open_out(path);
  out << "# field=" << s.field_id << ",resolution_hz=" << format_number(s.resolution) << '\n';
  out << "freq_hz,magnitude\n";
  for (std::size_t i = 0; i < s.freq.size(); ++i) {
    out << format_number(s.freq[i]) << ',' << format_number(s.magnitude[i]) << '\n';
  }
  check_written(out, path);
}

void write_cs_csv(const std::filesystem::path& path, const CauchySchwarzResult& r) {
  auto out = open_out(path);
  out << "# rbar_max=" << format_number(r.rbar_max) << ",sigma=" << format_number(r.rbar_max_sigma)
      << ",rbar_max_delay_ticks=" << r.rbar_max_delay << ",violated=" << (r.violated ? "yes" : "no") << '\n';
  out << "delay_ns,r1,r2,rbar,sigma\n";
  for (std::size_t i = 0; i < r.rbar_curve.size(); ++i) {
    out << format_number(r.delay[i] * 1e9) << ',' << format_number(r.r1_curve[i]) << ','
        << format_number(r.r2_curve[i]) << ',' << format_number(r.rbar_curve[i]) << ','
        << format_number(r.sigma[i]) << '\n';
  }
  check_written(out, path);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "delta_over_gamma,alpha,rbar_max,sigma,filtered,arm,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (auto& ch : status) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << format_number(r.delta_over_gamma) << ',' << format_number(r.alpha) << ','
        << format_number(r.rbar_max) << ',' << format_number(r.sigma) << ','
        << (r.arm == FilterArm::kNone ? 0 : 1) << ',' << to_string(r.arm) << ',' << status << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
  auto out = open_out(path);
  write_sweep_csv(out, rows);
  check_written(out, path);
}

}  // namespace sfwm
