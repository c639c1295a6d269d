#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bcgsleep/error.hpp"
#include "bcgsleep/models.hpp"

namespace bcgsleep {

std::vector<Neighbor> Knn::neighbors(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  const auto n = static_cast<std::size_t>(train.rows());
  // Differences are taken before scaling, so rows equally far from the query
  // in raw units tie exactly. Summed feature by feature, in feature order.
  Eigen::ArrayXd dist = Eigen::ArrayXd::Zero(train.rows());
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    dist += ((train.col(j).array() - row(j)) / scaler.scale(j)).square();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto closer = [&](std::size_t a, std::size_t b) {
    const double da = dist(static_cast<Eigen::Index>(a));
    const double db = dist(static_cast<Eigen::Index>(b));
    return da < db || (da == db && a < b);
  };
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk - 1), order.end(), closer);
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk), closer);

  std::vector<Neighbor> out;
  out.reserve(kk);
  for (std::size_t i = 0; i < kk; ++i) out.push_back({order[i], dist(static_cast<Eigen::Index>(order[i]))});
  return out;
}

Stage Knn::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  const auto near = neighbors(row);
  std::array<int, kStageCount> votes{};
  for (const auto& nb : near) ++votes[static_cast<std::size_t>(labels[nb.index])];
  const int top = *std::max_element(votes.begin(), votes.end());
  // Vote ties go to the tied class of the closest neighbour.
  for (const auto& nb : near) {
    const Stage s = labels[nb.index];
    if (votes[static_cast<std::size_t>(s)] == top) return s;
  }
  return Stage::Wake;
}

std::vector<std::pair<Stage, double>> GaussianNb::joint_log_likelihood(
    const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  std::vector<std::pair<Stage, double>> out;
  out.reserve(classes.size());
  for (const auto& c : classes) {
    const Eigen::ArrayXd diff = (row - c.mean).array().transpose();
    const Eigen::ArrayXd var = c.var.array().transpose();
    const double log_norm = -0.5 * (2.0 * std::numbers::pi * var).log().sum();
    const double quad = -0.5 * (diff.square() / var).sum();
    out.emplace_back(c.stage, c.log_prior + log_norm + quad);
  }
  return out;
}

Stage GaussianNb::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  const auto scores = joint_log_likelihood(row);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].second > scores[best].second) best = i;
  }
  return scores[best].first;
}

StageModel train_knn(const Eigen::MatrixXd& x, std::span<const Stage> y, const KnnParams& params) {
  if (params.k < 1) throw Error(ErrorKind::InvalidArgument, "k must be positive");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ in length");
  }
  if (x.rows() < params.k) {
    throw Error(ErrorKind::TooFewItems,
                std::to_string(x.rows()) + " training rows for k=" + std::to_string(params.k));
  }
  Knn knn;
  knn.k = params.k;
  knn.scaler = Standardizer<double>::fit(x);
  knn.train = x;
  knn.labels.assign(y.begin(), y.end());
  ModelParams all;
  all.knn = params;
  return StageModel(ModelKind::Knn, all, 0, static_cast<int>(x.cols()), std::move(knn));
}

StageModel train_gaussian_nb(const Eigen::MatrixXd& x, std::span<const Stage> y, const NbParams& params) {
  if (x.rows() == 0) throw Error(ErrorKind::EmptyTrainingSet, "training matrix has no rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ in length");
  }
  const auto n = static_cast<double>(x.rows());
  const Eigen::RowVectorXd overall_mean = x.colwise().mean();
  const double max_var =
      ((x.rowwise() - overall_mean).array().square().colwise().sum() / n).maxCoeff();
  GaussianNb nb;
  nb.epsilon = params.var_smoothing * max_var;
  // All-constant training data would otherwise give zero variances.
  if (!(nb.epsilon > 0.0)) nb.epsilon = params.var_smoothing > 0.0 ? params.var_smoothing : 1e-9;

  for (Stage s : kAllStages) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == s) rows.push_back(static_cast<Eigen::Index>(i));
    }
    if (rows.empty()) continue;
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    GaussianNb::ClassModel c;
    c.stage = s;
    c.log_prior = std::log(static_cast<double>(rows.size()) / n);
    c.mean = sub.colwise().mean();
    c.var = ((sub.rowwise() - c.mean).array().square().colwise().sum() /
             static_cast<double>(rows.size()))
                .matrix();
    c.var.array() += nb.epsilon;
    nb.classes.push_back(std::move(c));
  }
  ModelParams all;
  all.nb = params;
  return StageModel(ModelKind::GaussianNb, all, 0, static_cast<int>(x.cols()), std::move(nb));
}

}  // namespace bcgsleep
