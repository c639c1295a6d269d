#include "bcgsleep/features.hpp"

#include <charconv>

#include "bcgsleep/error.hpp"
#include "bcgsleep/ingest.hpp"

namespace bcgsleep {

namespace {

constexpr std::array<std::string_view, kStatCount> kStatNames{"mean", "median", "max",
                                                             "min",  "std",    "p75"};

void require_fully_sampled(const NightRecord& record) {
  if (!record.gaps().empty() || (!record.empty() && record.samples().front().t != 0)) {
    throw Error(ErrorKind::InvalidArgument,
                "windowing needs a cleaned record with one sample per second");
  }
}

FeatureVector features_of(const Eigen::MatrixXd& signals, Eigen::Index start, Eigen::Index length) {
  FeatureVector f;
  for (int s = 0; s < kSignalCount; ++s) {
    const auto st = compute_stats(signals.col(s).segment(start, length));
    const int base = s * kStatCount;
    f(base + 0) = st.mean;
    f(base + 1) = st.median;
    f(base + 2) = st.max;
    f(base + 3) = st.min;
    f(base + 4) = st.std;
    f(base + 5) = st.p75;
  }
  return f;
}

}  // namespace

const std::array<std::string, kFeatureCount>& feature_names() {
  static const auto names = [] {
    std::array<std::string, kFeatureCount> out;
    for (int s = 0; s < kSignalCount; ++s) {
      for (int k = 0; k < kStatCount; ++k) {
        out[static_cast<std::size_t>(s * kStatCount + k)] =
            std::string(signal_name(kAllSignals[static_cast<std::size_t>(s)])) + "_" +
            std::string(kStatNames[static_cast<std::size_t>(k)]);
      }
    }
    return out;
  }();
  return names;
}

Eigen::MatrixXd signal_matrix(const NightRecord& record) {
  const auto samples = record.samples();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(samples.size()), kSignalCount);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int s = 0; s < kSignalCount; ++s) {
      m(static_cast<Eigen::Index>(i), s) = signal_value(samples[i], kAllSignals[static_cast<std::size_t>(s)]);
    }
  }
  return m;
}

FeatureVector window_features(const NightRecord& cleaned, Seconds start, Seconds length) {
  require_fully_sampled(cleaned);
  if (start < 0 || length <= 0 || start + length > cleaned.length()) {
    throw Error(ErrorKind::InvalidArgument, "window lies outside the record");
  }
  return features_of(signal_matrix(cleaned), start, length);
}

WindowSet window_night(const NightRecord& cleaned, const std::vector<SecondLabel>& labels,
                       Seconds window, Seconds stride) {
  require_fully_sampled(cleaned);
  if (window <= 0 || stride <= 0) throw Error(ErrorKind::InvalidArgument, "window and stride must be positive");
  WindowSet out;
  const Seconds length = cleaned.length();
  if (length < window) return out;
  const Eigen::MatrixXd signals = signal_matrix(cleaned);
  const auto label_at = [&](Seconds s) -> SecondLabel {
    return s < static_cast<Seconds>(labels.size()) ? labels[static_cast<std::size_t>(s)] : std::nullopt;
  };
  for (Seconds start = 0; start + window <= length; start += stride) {
    const SecondLabel first = label_at(start);
    bool uniform = first.has_value();
    for (Seconds s = start + 1; uniform && s < start + window; ++s) uniform = label_at(s) == first;
    if (!uniform) {
      ++out.discarded;
      continue;
    }
    out.kept.push_back({start, features_of(signals, start, window), *first});
  }
  return out;
}

Eigen::MatrixXd all_window_features(const NightRecord& cleaned, Seconds window) {
  require_fully_sampled(cleaned);
  const Seconds length = cleaned.length();
  if (length < window) return Eigen::MatrixXd(0, kFeatureCount);
  const Eigen::MatrixXd signals = signal_matrix(cleaned);
  Eigen::MatrixXd x(length - window + 1, kFeatureCount);
  for (Seconds start = 0; start + window <= length; ++start) {
    x.row(start) = features_of(signals, start, window).transpose();
  }
  return x;
}

FeatureMatrix to_matrix(const std::vector<FeatureWindow>& windows, const std::string& group) {
  FeatureMatrix m;
  m.x.resize(static_cast<Eigen::Index>(windows.size()), kFeatureCount);
  m.y.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    m.x.row(static_cast<Eigen::Index>(i)) = windows[i].stats.transpose();
    m.y.push_back(windows[i].label);
  }
  if (!group.empty()) m.groups.assign(windows.size(), group);
  return m;
}

FeatureMatrix concat(const std::vector<FeatureMatrix>& parts) {
  Eigen::Index rows = 0;
  Eigen::Index cols = kFeatureCount;
  bool grouped = !parts.empty();
  for (const auto& p : parts) {
    rows += p.rows();
    if (p.rows() > 0) cols = p.x.cols();
    grouped = grouped && p.groups.size() == p.y.size();
  }
  FeatureMatrix out;
  out.x.resize(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    if (p.rows() == 0) continue;
    if (p.x.cols() != cols) throw Error(ErrorKind::SchemaMismatch, "feature width differs between parts");
    out.x.middleRows(at, p.rows()) = p.x;
    at += p.rows();
    out.y.insert(out.y.end(), p.y.begin(), p.y.end());
    if (grouped) out.groups.insert(out.groups.end(), p.groups.begin(), p.groups.end());
  }
  return out;
}

Eigen::Matrix<double, 1, kSignalCount> feature_means_report(const NightRecord& record) {
  if (record.empty()) throw Error(ErrorKind::EmptyRecord, "no samples to average");
  return signal_matrix(record).colwise().mean();
}

std::string format_features_csv(const std::vector<FeatureWindow>& windows) {
  std::string out;
  for (const auto& name : feature_names()) out += name + ',';
  out += "label\n";
  for (const auto& w : windows) {
    for (int j = 0; j < kFeatureCount; ++j) out += format_real(w.stats(j)) + ',';
    out += std::string(stage_name(w.label)) + '\n';
  }
  return out;
}

FeatureMatrix parse_features_csv(std::string_view text, const std::string& group) {
  std::vector<double> values;
  std::vector<Stage> labels;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      std::string expected;
      for (const auto& name : feature_names()) expected += name + ',';
      expected += "label";
      if (line != expected) throw Error(ErrorKind::SchemaMismatch, "unexpected feature CSV header");
      header = false;
      continue;
    }
    for (int j = 0; j < kFeatureCount; ++j) {
      const auto comma = line.find(',');
      if (comma == std::string_view::npos) {
        throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": too few columns");
      }
      const auto cell = line.substr(0, comma);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
        throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": bad number");
      }
      values.push_back(v);
      line.remove_prefix(comma + 1);
    }
    const auto stage = stage_from_name(line);
    if (!stage) throw Error(ErrorKind::UnknownLevel, "'" + std::string(line) + "'");
    labels.push_back(*stage);
  }
  FeatureMatrix m;
  m.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(labels.size()), kFeatureCount);
  m.y = std::move(labels);
  if (!group.empty()) m.groups.assign(m.y.size(), group);
  return m;
}

}  // namespace bcgsleep
