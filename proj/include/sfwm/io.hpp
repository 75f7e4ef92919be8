#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "sfwm/analysis.hpp"
#include "sfwm/correlator.hpp"
#include "sfwm/timetag.hpp"

namespace sfwm {

/// Binary time-tag file, all integers little-endian:
///
///   header  "SFWM" | version u16 | tick ps u32 | detector count u8 |
///           trial count u32 | trial duration in ticks u64
///   block   trial index u32 | record count u64 | records
///   record  detector id u8 | timestamp ticks u64
///
/// One block per trial in trial order; records sorted by detector, then
/// strictly increasing timestamp.
inline constexpr char kTagFileMagic[4] = {'S', 'F', 'W', 'M'};
inline constexpr std::uint16_t kTagFileVersion = 1;
inline constexpr std::size_t kTagFileHeaderSize = 23;
inline constexpr std::size_t kTagFileRecordSize = 9;

void write_tagfile(std::ostream& out, const Run& run);
void write_tagfile(const std::filesystem::path& path, const Run& run);
/// Throws FormatError carrying the byte offset of the first bad record.
Run read_tagfile(std::istream& in);
Run read_tagfile(const std::filesystem::path& path);

/// Shortest round-trip decimal; "nan" for NaN.
std::string format_number(double v);

void write_curve_csv(std::ostream& out, const CorrelationCurve& curve);
void write_curve_csv(const std::filesystem::path& path, const CorrelationCurve& curve);
CorrelationCurve read_curve_csv(std::istream& in);
CorrelationCurve read_curve_csv(const std::filesystem::path& path);

/// Writes g_<pair>.csv for all six pairs into dir.
void write_g2_matrix(const std::filesystem::path& dir, const G2Matrix& matrix);
/// Reads the six g_<pair>.csv files; throws IoError naming a missing one.
G2Matrix read_g2_matrix(const std::filesystem::path& dir);

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumEstimate& spectrum);
void write_cs_csv(const std::filesystem::path& path, const CauchySchwarzResult& result);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);

}  // namespace sfwm
