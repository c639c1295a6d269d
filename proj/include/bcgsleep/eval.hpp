#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "bcgsleep/models.hpp"
#include "bcgsleep/stage.hpp"

namespace bcgsleep {

/// Rows are predicted stages, columns are reference stages.
using ConfusionMatrix = Eigen::Matrix<std::int64_t, kStageCount, kStageCount>;

/// Throws LengthMismatch or TooFewPoints (empty input).
ConfusionMatrix confusion_matrix(std::span<const Stage> truth, std::span<const Stage> predicted);

double accuracy(const ConfusionMatrix& cm);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

std::array<ClassScores, kStageCount> per_class_scores(const ConfusionMatrix& cm);

/// Unweighted mean of the four per-class F1 scores (0 where P + R = 0).
double macro_f1(const ConfusionMatrix& cm);

/// Root-mean-square difference of stage codes.
double rmse(std::span<const Stage> truth, std::span<const Stage> predicted);

struct Metrics {
  ConfusionMatrix confusion = ConfusionMatrix::Zero();
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

Metrics evaluate(std::span<const Stage> truth, std::span<const Stage> predicted);
nlohmann::json metrics_json(const Metrics& m);
/// 5x5 CSV with a "predicted\\true" corner cell and stage-name headers.
std::string format_confusion_csv(const ConfusionMatrix& cm);

/// I_x(a, b), evaluated by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
};

/// Sample correlation and its two-sided p-value (t-test with n-2 df).
/// Throws LengthMismatch, TooFewPoints (n < 3) or ConstantInput.
PearsonResult pearson_r(std::span<const double> x, std::span<const double> y);

struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Quartiles by linear interpolation (same percentile rule as features).
BoxStats box_stats(std::span<const double> values);

struct NightEfficiency {
  std::string night_id;
  double bcg = 0.0;
  double reference = 0.0;
};

struct EfficiencySummary {
  std::vector<NightEfficiency> nights;
  BoxStats bcg;
  BoxStats reference;
  PearsonResult correlation;
};

/// Throws TooFewPoints below three nights.
EfficiencySummary efficiency_comparison(std::vector<NightEfficiency> nights);
nlohmann::json efficiency_json(const EfficiencySummary& s);

struct FoldResult {
  std::size_t fold = 0;
  Metrics metrics;
};

/// k-fold cross-validation of one learner configuration over `data`.
std::vector<FoldResult> cross_validate(ModelKind kind, const ModelParams& params, std::uint64_t seed,
                                       const FeatureMatrix& data, int folds);

}  // namespace bcgsleep
