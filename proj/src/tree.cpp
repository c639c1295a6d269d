#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

#include "bcgsleep/error.hpp"
#include "bcgsleep/models.hpp"
#include "bcgsleep/rng.hpp"

namespace bcgsleep {

namespace {

using Counts = std::array<std::int64_t, kStageCount>;
using Wide = __int128;

Stage majority(const Counts& counts) {
  int best = 0;
  for (int k = 1; k < kStageCount; ++k) {
    if (counts[static_cast<std::size_t>(k)] > counts[static_cast<std::size_t>(best)]) best = k;
  }
  return static_cast<Stage>(best);
}

// Gini impurity is minimized where sum(left^2)/nl + sum(right^2)/nr is
// maximized. Scores are kept as exact fractions num/den of integers so split
// choice and tie-breaks never depend on rounding.
struct Score {
  Wide num = 0;
  Wide den = 1;

  bool beats(const Score& other) const { return num * other.den > other.num * den; }
};

struct Frame {
  int node;
  std::size_t begin;
  std::size_t end;
  int depth;
};

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

}  // namespace

DecisionTree grow_tree(const Eigen::MatrixXd& x, std::span<const Stage> y,
                       std::span<const std::size_t> rows, const TreeParams& params,
                       int features_per_split, Rng* rng) {
  if (rows.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no rows to grow a tree on");
  const auto n_features = static_cast<int>(x.cols());
  const int per_split = std::clamp(features_per_split, 1, n_features);
  const bool subsample = per_split < n_features;
  if (subsample && rng == nullptr) throw Error(ErrorKind::InvalidArgument, "feature subsampling needs an rng");

  DecisionTree tree;
  tree.nodes.emplace_back();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  std::vector<Frame> stack{{0, 0, idx.size(), 0}};
  std::vector<std::pair<double, std::uint8_t>> column;
  column.reserve(idx.size());
  std::vector<int> candidates(static_cast<std::size_t>(n_features));

  while (!stack.empty()) {
    const Frame frame = stack.back();
    stack.pop_back();
    const std::size_t n = frame.end - frame.begin;

    Counts counts{};
    for (std::size_t i = frame.begin; i < frame.end; ++i) ++counts[static_cast<std::size_t>(y[idx[i]])];
    tree.nodes[static_cast<std::size_t>(frame.node)].label = majority(counts);

    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    const bool depth_capped = params.max_depth > 0 && frame.depth >= params.max_depth;
    if (pure || depth_capped || n < static_cast<std::size_t>(std::max(2, params.min_samples_split))) continue;

    std::iota(candidates.begin(), candidates.end(), 0);
    std::size_t n_candidates = candidates.size();
    if (subsample) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(per_split); ++i) {
        const auto j = i + static_cast<std::size_t>(rng->below(candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
      }
      n_candidates = static_cast<std::size_t>(per_split);
      std::sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n_candidates));
    }

    Wide parent_sq = 0;
    for (auto c : counts) parent_sq += static_cast<Wide>(c) * c;
    Score best{parent_sq, static_cast<Wide>(n)};
    int best_feature = -1;
    double best_threshold = 0.0;

    for (std::size_t ci = 0; ci < n_candidates; ++ci) {
      const int f = candidates[ci];
      column.clear();
      for (std::size_t i = frame.begin; i < frame.end; ++i) {
        column.emplace_back(x(static_cast<Eigen::Index>(idx[i]), f), static_cast<std::uint8_t>(y[idx[i]]));
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (!(column.front().first < column.back().first)) continue;

      Counts left{};
      Counts right = counts;
      Wide left_sq = 0;
      Wide right_sq = parent_sq;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = column[i].second;
        left_sq += 2 * static_cast<Wide>(left[c]) + 1;
        right_sq -= 2 * static_cast<Wide>(right[c]) - 1;
        ++left[c];
        --right[c];
        if (!(column[i].first < column[i + 1].first)) continue;
        const auto nl = static_cast<Wide>(i + 1);
        const auto nr = static_cast<Wide>(n) - nl;
        const Score s{left_sq * nr + right_sq * nl, nl * nr};
        if (s.beats(best)) {
          best = s;
          best_feature = f;
          best_threshold = midpoint(column[i].first, column[i + 1].first);
        }
      }
    }
    if (best_feature < 0) continue;

    const auto split = std::stable_partition(
        idx.begin() + static_cast<std::ptrdiff_t>(frame.begin), idx.begin() + static_cast<std::ptrdiff_t>(frame.end),
        [&](std::size_t r) { return x(static_cast<Eigen::Index>(r), best_feature) <= best_threshold; });
    const auto mid = static_cast<std::size_t>(split - idx.begin());

    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[static_cast<std::size_t>(frame.node)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_id;
    node.right = left_id + 1;
    stack.push_back({left_id + 1, mid, frame.end, frame.depth + 1});
    stack.push_back({left_id, frame.begin, mid, frame.depth + 1});
  }
  return tree;
}

Stage DecisionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  std::size_t at = 0;
  while (nodes[at].feature >= 0) {
    const auto& node = nodes[at];
    at = static_cast<std::size_t>(row(node.feature) <= node.threshold ? node.left : node.right);
  }
  return nodes[at].label;
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const auto& node = nodes[static_cast<std::size_t>(id)];
    if (node.feature >= 0) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

Stage RandomForest::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  Counts votes{};
  for (const auto& tree : trees) ++votes[static_cast<std::size_t>(tree.predict_row(row))];
  return majority(votes);
}

namespace {

void check_training_set(const Eigen::MatrixXd& x, std::span<const Stage> y) {
  if (x.rows() == 0) throw Error(ErrorKind::EmptyTrainingSet, "training matrix has no rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ in length");
  }
}

}  // namespace

StageModel train_decision_tree(const Eigen::MatrixXd& x, std::span<const Stage> y, const TreeParams& params) {
  check_training_set(x, y);
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  ModelParams all;
  all.tree = params;
  return StageModel(ModelKind::DecisionTree, all, 0, static_cast<int>(x.cols()),
                    grow_tree(x, y, rows, params, static_cast<int>(x.cols()), nullptr));
}

StageModel train_random_forest(const Eigen::MatrixXd& x, std::span<const Stage> y,
                               const ForestParams& params, std::uint64_t seed) {
  check_training_set(x, y);
  if (params.n_trees < 1) throw Error(ErrorKind::InvalidArgument, "a forest needs at least one tree");
  const auto n = static_cast<std::size_t>(x.rows());
  const TreeParams tree_params{params.max_depth, params.min_samples_split};

  RandomForest forest;
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    std::vector<std::size_t> rows(n);
    for (std::size_t t = next++; t < forest.trees.size(); t = next++) {
      Rng rng(mix_seed(seed, t));
      if (params.bootstrap) {
        for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
      } else {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
      }
      forest.trees[t] = grow_tree(x, y, rows, tree_params, params.features_per_split, &rng);
    }
  };
  const auto n_workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, forest.trees.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
  }
  ModelParams all;
  all.forest = params;
  return StageModel(ModelKind::RandomForest, all, seed, static_cast<int>(x.cols()), std::move(forest));
}

}  // namespace bcgsleep
