#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bcgsleep/record.hpp"
#include "bcgsleep/stats.hpp"

namespace bcgsleep {

inline constexpr int kFeatureCount = kSignalCount * kStatCount;  // 30
inline constexpr Seconds kWindowLength = 10;

using FeatureVector = Eigen::Matrix<double, kFeatureCount, 1>;

/// One 10-second window: signal-major (hr, rr, sv, b2b, hrv) x
/// (mean, median, max, min, std, p75).
struct FeatureWindow {
  Seconds start_t = 0;
  FeatureVector stats = FeatureVector::Zero();
  Stage label = Stage::Wake;
};

struct WindowSet {
  std::vector<FeatureWindow> kept;
  std::size_t discarded = 0;
};

/// Design matrix (one row per window) with its labels.
struct FeatureMatrix {
  Eigen::MatrixXd x;
  std::vector<Stage> y;
  std::vector<std::string> groups;  // night id per row; may be empty

  Eigen::Index rows() const noexcept { return x.rows(); }
};

/// "hr_mean", "hr_median", ..., "hrv_p75".
const std::array<std::string, kFeatureCount>& feature_names();

/// Features of the window [start, start + length) of a fully sampled record.
FeatureVector window_features(const NightRecord& cleaned, Seconds start, Seconds length = kWindowLength);

/// Slides a window over a cleaned record and keeps each window whose every
/// second carries the same reference stage. Unlabeled seconds discard.
/// Throws InvalidArgument if the record is not fully sampled.
WindowSet window_night(const NightRecord& cleaned, const std::vector<SecondLabel>& labels,
                       Seconds window = kWindowLength, Seconds stride = 1);

/// Features for every window start 0..length-window, ignoring labels.
Eigen::MatrixXd all_window_features(const NightRecord& cleaned, Seconds window = kWindowLength);

FeatureMatrix to_matrix(const std::vector<FeatureWindow>& windows, const std::string& group = {});

/// Stacks matrices (rows in argument order).
FeatureMatrix concat(const std::vector<FeatureMatrix>& parts);

/// Per-second signals of a record as an N x 5 matrix in feature order.
Eigen::MatrixXd signal_matrix(const NightRecord& record);

/// Night-long arithmetic mean of each signal. Throws EmptyRecord.
Eigen::Matrix<double, 1, kSignalCount> feature_means_report(const NightRecord& record);

/// 31-column CSV: the 30 feature names then "label".
std::string format_features_csv(const std::vector<FeatureWindow>& windows);
/// Inverse of format_features_csv. Throws MalformedRow / SchemaMismatch.
FeatureMatrix parse_features_csv(std::string_view text, const std::string& group = {});

}  // namespace bcgsleep
