#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bcgsleep/record.hpp"

namespace bcgsleep {

enum class NightFormat { Ndjson, Csv };

inline constexpr std::string_view kCsvHeader = "t,hr,rr,sv,hrv,b2b";

/// ".csv" selects CSV; everything else is NDJSON.
NightFormat format_for_path(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the identical double; always
/// carries a decimal point or exponent ("62.0", not "62").
std::string format_real(double value);

/// One wire/NDJSON line without the trailing newline, fields in fixed order.
std::string format_sample_line(const VitalsSample& sample);

/// Parses one NDJSON sample line. Throws MalformedRow (tagged with
/// `line_no`) or NegativeVital.
VitalsSample parse_sample_line(std::string_view line, std::size_t line_no = 1);

/// Reads a whole night. Blank lines are skipped; line numbers in errors
/// are 1-based.
NightRecord parse_night(std::istream& in, NightFormat format, NightMeta meta = {});
NightRecord read_night_file(const std::filesystem::path& path);

void write_night(const NightRecord& record, NightFormat format, std::ostream& out);
void write_night_file(const NightRecord& record, const std::filesystem::path& path);

struct LabelDocument {
  std::string night_id;
  std::vector<StageInterval> intervals;
};

/// Parses {"night_id":..., "levels":[{"level":"wake","start_t":0,"seconds":300},...]}.
/// Throws UnknownLevel, OverlappingIntervals or MalformedLabels.
LabelDocument parse_labels(std::string_view document);
LabelDocument read_labels_file(const std::filesystem::path& path);
std::string format_labels(const LabelDocument& doc);
void write_labels_file(const LabelDocument& doc, const std::filesystem::path& path);

/// Per-second reference labels over [0, record.length()).
std::vector<SecondLabel> align_labels(const NightRecord& record,
                                      const std::vector<StageInterval>& intervals);

/// Same, for a bare length.
std::vector<SecondLabel> align_labels(Seconds length, const std::vector<StageInterval>& intervals);

/// Reads a text file or throws Error(Io).
std::string read_text_file(const std::filesystem::path& path);
/// Writes a text file or throws Error(Io).
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace bcgsleep
