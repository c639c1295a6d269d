#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "bcgsleep/error.hpp"
#include "bcgsleep/models.hpp"
#include "bcgsleep/rng.hpp"

namespace bcgsleep {

namespace {

std::size_t train_count(std::size_t n, double fraction) {
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

}  // namespace

TrainTestSplit split_train_test(std::size_t n, const SplitSpec& spec, std::span<const std::string> groups) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  if (n < 2) throw Error(ErrorKind::TooFewItems, "need at least two items to split");
  Rng rng(spec.seed);
  TrainTestSplit out;

  if (spec.grouping == Grouping::Window) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    const auto k = train_count(n, spec.train_fraction);
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  } else {
    if (groups.size() != n) throw Error(ErrorKind::LengthMismatch, "one group id per item is required");
    std::map<std::string, std::size_t> ids;
    for (const auto& g : groups) ids.emplace(g, 0);
    if (ids.size() < 2) throw Error(ErrorKind::TooFewItems, "need at least two nights to split by night");
    std::vector<std::string> names;
    for (const auto& [name, _] : ids) names.push_back(name);
    rng.shuffle(std::span(names));
    const auto k = train_count(names.size(), spec.train_fraction);
    for (std::size_t i = 0; i < names.size(); ++i) ids[names[i]] = i < k ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) (ids[groups[i]] ? out.train : out.test).push_back(i);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::InvalidArgument, "need at least two folds");
  const auto f = static_cast<std::size_t>(folds);
  if (n < f) throw Error(ErrorKind::TooFewItems, std::to_string(n) + " items for " + std::to_string(folds) + " folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span(order));
  std::vector<std::vector<std::size_t>> out(f);
  std::size_t at = 0;
  for (std::size_t i = 0; i < f; ++i) {
    const std::size_t size = n / f + (i < n % f ? 1 : 0);
    out[i].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                  order.begin() + static_cast<std::ptrdiff_t>(at + size));
    std::sort(out[i].begin(), out[i].end());
    at += size;
  }
  return out;
}

FeatureMatrix select_rows(const FeatureMatrix& data, std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), data.x.cols());
  out.y.reserve(rows.size());
  const bool grouped = data.groups.size() == data.y.size() && !data.groups.empty();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = data.x.row(static_cast<Eigen::Index>(rows[i]));
    out.y.push_back(data.y[rows[i]]);
    if (grouped) out.groups.push_back(data.groups[rows[i]]);
  }
  return out;
}

}  // namespace bcgsleep
