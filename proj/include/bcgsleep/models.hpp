#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "bcgsleep/features.hpp"
#include "bcgsleep/stage.hpp"
#include "bcgsleep/stats.hpp"

namespace bcgsleep {

// ---------------------------------------------------------------------------
// Splitting

enum class Grouping { Window, Night };

struct SplitSpec {
  double train_fraction = 0.8;
  int n_folds = 5;
  std::uint64_t seed = 0;
  Grouping grouping = Grouping::Window;
};

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Seeded shuffle split. Window grouping puts round(fraction * n) items in
/// train; night grouping assigns round(fraction * nights) whole nights to
/// train. Throws TooFewItems (fewer than two items or groups).
TrainTestSplit split_train_test(std::size_t n, const SplitSpec& spec,
                                std::span<const std::string> groups = {});

/// `folds` disjoint test folds partitioning 0..n-1, sizes differing by at
/// most one (larger folds first). Throws TooFewItems when n < folds.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int folds, std::uint64_t seed);

FeatureMatrix select_rows(const FeatureMatrix& data, std::span<const std::size_t> rows);

// ---------------------------------------------------------------------------
// Learners

enum class ModelKind { DecisionTree, RandomForest, Knn, GaussianNb };

std::string_view model_kind_name(ModelKind kind) noexcept;
/// Accepts the canonical names and the short forms dt, rf, knn, nb.
std::optional<ModelKind> model_kind_from_name(std::string_view name) noexcept;

/// Gini CART parameters. max_depth <= 0 means unlimited.
struct TreeParams {
  int max_depth = 20;
  int min_samples_split = 2;
};

struct ForestParams {
  int n_trees = 100;
  int features_per_split = 6;  // ceil(sqrt(30))
  bool bootstrap = true;
  int max_depth = 20;
  int min_samples_split = 2;
};

struct KnnParams {
  int k = 5;
};

struct NbParams {
  double var_smoothing = 1e-9;  // times the largest feature variance
};

struct ModelParams {
  TreeParams tree;
  ForestParams forest;
  KnnParams knn;
  NbParams nb;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;  // rows with value <= threshold
  int right = -1;
  Stage label = Stage::Wake;
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  Stage predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  int depth() const;
};

/// Grows one tree on `rows` of x (repeats allowed, as in a bootstrap
/// sample). With features_per_split < x.cols() each node draws a uniform
/// feature subset from `rng`.
DecisionTree grow_tree(const Eigen::MatrixXd& x, std::span<const Stage> y,
                       std::span<const std::size_t> rows, const TreeParams& params,
                       int features_per_split, class Rng* rng);

struct RandomForest {
  std::vector<DecisionTree> trees;

  Stage predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct Neighbor {
  std::size_t index = 0;
  double distance_sq = 0.0;
};

struct Knn {
  int k = 5;
  Standardizer<double> scaler;
  Eigen::MatrixXd train;  // raw training windows; distances use scaler.scale
  std::vector<Stage> labels;

  /// The k nearest training rows to a raw query under standardized
  /// Euclidean distance, ordered by (squared distance, row index).
  std::vector<Neighbor> neighbors(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Stage predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct GaussianNb {
  struct ClassModel {
    Stage stage = Stage::Wake;
    double log_prior = 0.0;
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd var;  // already includes smoothing
  };
  std::vector<ClassModel> classes;  // ascending stage code, present classes only
  double epsilon = 0.0;

  /// log prior + sum of log Gaussian densities, per present class.
  std::vector<std::pair<Stage, double>> joint_log_likelihood(
      const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Stage predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

/// A trained classifier with the provenance needed to reproduce it.
class StageModel {
 public:
  using State = std::variant<DecisionTree, RandomForest, Knn, GaussianNb>;

  StageModel(ModelKind kind, ModelParams params, std::uint64_t seed, int n_features, State state);

  ModelKind kind() const noexcept { return kind_; }
  const ModelParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int n_features() const noexcept { return n_features_; }
  const State& state() const noexcept { return state_; }

  /// One stage per row. Throws SchemaMismatch on a width mismatch.
  std::vector<Stage> predict(const Eigen::MatrixXd& rows) const;
  Stage predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;

  /// {"schema":1,"kind":...,"params":...,"seed":...,"state":...}
  nlohmann::json to_json() const;
  std::string serialize() const;
  /// Throws MalformedModel.
  static StageModel from_json(const nlohmann::json& doc);
  static StageModel deserialize(std::string_view text);

  /// Extra provenance carried alongside the model (e.g. the split used).
  nlohmann::json extra = nlohmann::json::object();

 private:
  ModelKind kind_;
  ModelParams params_;
  std::uint64_t seed_;
  int n_features_;
  State state_;
};

inline constexpr int kModelSchemaVersion = 1;

/// Throws EmptyTrainingSet / LengthMismatch.
StageModel train_decision_tree(const Eigen::MatrixXd& x, std::span<const Stage> y,
                               const TreeParams& params = {});
StageModel train_random_forest(const Eigen::MatrixXd& x, std::span<const Stage> y,
                               const ForestParams& params, std::uint64_t seed);
/// Throws TooFewItems when there are fewer than k rows.
StageModel train_knn(const Eigen::MatrixXd& x, std::span<const Stage> y, const KnnParams& params = {});
StageModel train_gaussian_nb(const Eigen::MatrixXd& x, std::span<const Stage> y,
                             const NbParams& params = {});

StageModel train_model(ModelKind kind, const Eigen::MatrixXd& x, std::span<const Stage> y,
                       const ModelParams& params, std::uint64_t seed);

/// Per-second hypnogram: second s takes the prediction of the window
/// starting at s; the final window-1 seconds repeat the last prediction.
/// Throws RecordTooShort below one window.
std::vector<Stage> predict_hypnogram(const StageModel& model, const NightRecord& cleaned);

}  // namespace bcgsleep
