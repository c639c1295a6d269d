#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcgsleep/eval.hpp"
#include "bcgsleep/ingest.hpp"
#include "bcgsleep/models.hpp"
#include "bcgsleep/synth.hpp"

// File-level steps behind each command-line subcommand. Every step reads
// and writes only the paths it is given.

namespace bcgsleep {

namespace fs = std::filesystem;

/// "night_01.ndjson" -> "night_01.labels.json" in the same directory.
fs::path labels_path_for(const fs::path& night_file);

/// Night id of a features file: "night_01.features.csv" -> "night_01".
std::string night_id_from_features_path(const fs::path& path);

/// Expands directories to their files ending in `suffix` (sorted by name);
/// plain files pass through. Throws Io for a missing path.
std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs, const std::string& suffix);

/// Reads a night and, when present, its sibling label file.
NightRecord load_night(const fs::path& night_file, bool require_labels);

nlohmann::json profile_to_json(const SubjectProfile& profile);
/// Missing keys keep the default profile's values. Throws InvalidProfile.
SubjectProfile profile_from_json(const nlohmann::json& doc);

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::size_t nights = 8;
  std::uint64_t seed = 0;
  fs::path out;
  double hours = 8.0;
  double efficiency_lo = 0.7;
  double efficiency_hi = 0.95;
  double hr_jitter = 2.0;
  NightFormat format = NightFormat::Ndjson;
  std::optional<fs::path> profile;
};

/// Writes night_XX.<ext>, night_XX.labels.json and truth.json. Returns the
/// night files.
std::vector<fs::path> run_synth(const SynthOptions& opt);

struct SleepwakeOptions {
  fs::path in;
  fs::path out;
  std::optional<fs::path> summary;
};

/// Writes the epoch CSV (and optionally a JSON summary); returns the summary.
nlohmann::json run_sleepwake(const SleepwakeOptions& opt);

struct FeaturizeOptions {
  std::vector<fs::path> in;  // night files or directories
  fs::path out;
  Seconds stride = 1;
};

struct FeaturizeSummary {
  std::vector<fs::path> files;
  std::size_t kept = 0;
  std::size_t discarded = 0;
};

/// One <night_id>.features.csv per labelled night.
FeaturizeSummary run_featurize(const FeaturizeOptions& opt);

/// Concatenates features files in name order, grouped by night id.
FeatureMatrix load_features(const std::vector<fs::path>& files);

struct TrainOptions {
  std::vector<fs::path> features;  // features files or directories
  fs::path out;
  ModelKind model = ModelKind::RandomForest;
  ModelParams params;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  Grouping grouping = Grouping::Window;
};

/// Trains on the training side of a seeded split; the split is recorded in
/// the model file so evaluate can rebuild the held-out side.
StageModel run_train(const TrainOptions& opt);

struct EvaluateOptions {
  fs::path model;
  std::vector<fs::path> features;
  fs::path out;
  int cv_folds = 0;  // 0 disables cross-validation
};

/// Writes metrics.json and confusion.csv; returns the held-out metrics.
Metrics run_evaluate(const EvaluateOptions& opt);

struct ReportOptions {
  std::vector<fs::path> nights;  // labelled night files or directories
  fs::path model;
  std::vector<fs::path> features;
  fs::path out;
  std::string hypnogram_night;  // empty = first night
  Seconds trace_start = 0;
  Seconds trace_length = 3600;
};

/// Writes hypnogram.svg, confusion.svg, efficiency.svg, threshold_trace.svg,
/// efficiency.json and metrics.json.
void run_report(const ReportOptions& opt);

}  // namespace bcgsleep
