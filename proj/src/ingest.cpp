#include "bcgsleep/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bcgsleep/error.hpp"

namespace bcgsleep {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 5> kCsvVitals{"hr", "rr", "sv", "hrv", "b2b"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": " + why);
}

void check_vitals(const VitalsSample& s, std::size_t line_no) {
  for (Signal sig : kAllSignals) {
    const double v = signal_value(s, sig);
    if (!std::isfinite(v)) malformed(line_no, "non-finite " + std::string(signal_name(sig)));
    if (v < 0.0) {
      throw Error(ErrorKind::NegativeVital,
                  std::string(signal_name(sig)) + " at t=" + std::to_string(s.t));
    }
  }
}

double parse_double_field(std::string_view text, std::size_t line_no, std::string_view field) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    malformed(line_no, "bad " + std::string(field) + " value '" + std::string(text) + "'");
  }
  return value;
}

Seconds parse_time_field(std::string_view text, std::size_t line_no) {
  text = trim(text);
  Seconds value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    malformed(line_no, "bad t value '" + std::string(text) + "'");
  }
  return value;
}

VitalsSample parse_csv_row(std::string_view line, std::size_t line_no) {
  std::array<std::string_view, 6> cells;
  std::size_t n = 0;
  while (true) {
    const auto comma = line.find(',');
    if (n == cells.size()) malformed(line_no, "too many columns");
    cells[n++] = line.substr(0, comma);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  if (n != cells.size()) malformed(line_no, "expected 6 columns");
  VitalsSample s;
  s.t = parse_time_field(cells[0], line_no);
  s.hr = parse_double_field(cells[1], line_no, "hr");
  s.rr = parse_double_field(cells[2], line_no, "rr");
  s.sv = parse_double_field(cells[3], line_no, "sv");
  s.hrv = parse_double_field(cells[4], line_no, "hrv");
  s.b2b = parse_double_field(cells[5], line_no, "b2b");
  check_vitals(s, line_no);
  return s;
}

}  // namespace

NightFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? NightFormat::Csv : NightFormat::Ndjson;
}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  std::string text(buf.data(), ptr);
  if (std::isfinite(value) && text.find_first_of(".eE") == std::string::npos) text += ".0";
  return text;
}

std::string format_sample_line(const VitalsSample& s) {
  std::string line;
  line.reserve(96);
  line += "{\"t\":";
  line += std::to_string(s.t);
  line += ",\"hr\":" + format_real(s.hr);
  line += ",\"rr\":" + format_real(s.rr);
  line += ",\"sv\":" + format_real(s.sv);
  line += ",\"hrv\":" + format_real(s.hrv);
  line += ",\"b2b\":" + format_real(s.b2b);
  line += '}';
  return line;
}

VitalsSample parse_sample_line(std::string_view line, std::size_t line_no) {
  json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) malformed(line_no, "not a JSON object");
  VitalsSample s;
  const auto t = doc.find("t");
  if (t == doc.end() || !t->is_number_integer()) malformed(line_no, "missing integer t");
  s.t = t->get<Seconds>();
  for (Signal sig : kAllSignals) {
    const auto it = doc.find(std::string(signal_name(sig)));
    if (it == doc.end() || !it->is_number()) {
      malformed(line_no, "missing numeric " + std::string(signal_name(sig)));
    }
    set_signal_value(s, sig, it->get<double>());
  }
  check_vitals(s, line_no);
  return s;
}

NightRecord parse_night(std::istream& in, NightFormat format, NightMeta meta) {
  std::vector<VitalsSample> samples;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    VitalsSample s;
    if (format == NightFormat::Csv) {
      if (!header_seen) {
        if (line != kCsvHeader) malformed(line_no, "expected header '" + std::string(kCsvHeader) + "'");
        header_seen = true;
        continue;
      }
      s = parse_csv_row(line, line_no);
    } else {
      s = parse_sample_line(line, line_no);
    }
    if (s.t < 0 || (!samples.empty() && s.t <= samples.back().t)) {
      throw Error(ErrorKind::NonMonotonicTimestamp,
                  "t=" + std::to_string(s.t) + " at line " + std::to_string(line_no));
    }
    samples.push_back(s);
  }
  return NightRecord::make(std::move(meta), std::move(samples));
}

NightRecord read_night_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  NightMeta meta;
  meta.night_id = path.stem().string();
  return parse_night(in, format_for_path(path), std::move(meta));
}

void write_night(const NightRecord& record, NightFormat format, std::ostream& out) {
  if (format == NightFormat::Csv) {
    out << kCsvHeader << '\n';
    for (const auto& s : record.samples()) {
      out << s.t << ',' << format_real(s.hr) << ',' << format_real(s.rr) << ','
          << format_real(s.sv) << ',' << format_real(s.hrv) << ',' << format_real(s.b2b) << '\n';
    }
  } else {
    for (const auto& s : record.samples()) out << format_sample_line(s) << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed");
}

void write_night_file(const NightRecord& record, const std::filesystem::path& path) {
  std::ostringstream text;
  write_night(record, format_for_path(path), text);
  write_text_file(path, text.str());
}

LabelDocument parse_labels(std::string_view document) {
  json doc = json::parse(document, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorKind::MalformedLabels, "label document is not a JSON object");
  }
  LabelDocument out;
  if (const auto id = doc.find("night_id"); id != doc.end() && id->is_string()) {
    out.night_id = id->get<std::string>();
  }
  const auto levels = doc.find("levels");
  if (levels == doc.end() || !levels->is_array()) {
    throw Error(ErrorKind::MalformedLabels, "missing 'levels' array");
  }
  std::vector<StageInterval> intervals;
  for (std::size_t i = 0; i < levels->size(); ++i) {
    const json& entry = (*levels)[i];
    const auto level = entry.find("level");
    const auto start = entry.find("start_t");
    const auto secs = entry.find("seconds");
    if (!entry.is_object() || level == entry.end() || !level->is_string() || start == entry.end() ||
        !start->is_number_integer() || secs == entry.end() || !secs->is_number_integer()) {
      throw Error(ErrorKind::MalformedLabels, "level entry " + std::to_string(i) + " is incomplete");
    }
    const auto name = level->get<std::string>();
    const auto stage = stage_from_name(name);
    if (!stage) throw Error(ErrorKind::UnknownLevel, "'" + name + "'");
    intervals.push_back({*stage, start->get<Seconds>(), secs->get<Seconds>()});
  }
  out.intervals = validate_intervals(std::move(intervals));
  return out;
}

LabelDocument read_labels_file(const std::filesystem::path& path) {
  return parse_labels(read_text_file(path));
}

std::string format_labels(const LabelDocument& doc) {
  json levels = json::array();
  for (const auto& iv : doc.intervals) {
    json entry;
    entry["level"] = std::string(stage_name(iv.stage));
    entry["start_t"] = iv.start_t;
    entry["seconds"] = iv.duration;
    levels.push_back(std::move(entry));
  }
  json out;
  out["night_id"] = doc.night_id;
  out["levels"] = std::move(levels);
  return out.dump(1) + "\n";
}

void write_labels_file(const LabelDocument& doc, const std::filesystem::path& path) {
  write_text_file(path, format_labels(doc));
}

std::vector<SecondLabel> align_labels(Seconds length, const std::vector<StageInterval>& intervals) {
  std::vector<SecondLabel> labels(static_cast<std::size_t>(std::max<Seconds>(length, 0)));
  for (const auto& iv : intervals) {
    const Seconds lo = std::max<Seconds>(iv.start_t, 0);
    const Seconds hi = std::min<Seconds>(iv.end_t(), length);
    for (Seconds s = lo; s < hi; ++s) labels[static_cast<std::size_t>(s)] = iv.stage;
  }
  return labels;
}

std::vector<SecondLabel> align_labels(const NightRecord& record,
                                      const std::vector<StageInterval>& intervals) {
  return align_labels(record.length(), intervals);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace bcgsleep
