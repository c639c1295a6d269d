#include "bcgsleep/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bcgsleep/error.hpp"
#include "bcgsleep/rng.hpp"
#include "bcgsleep/stats.hpp"

namespace bcgsleep {

using nlohmann::json;

namespace {

void check_pairs(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(a) + " reference vs " + std::to_string(b) + " predicted");
  }
  if (a == 0) throw Error(ErrorKind::TooFewPoints, "no pairs to score");
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const Stage> truth, std::span<const Stage> predicted) {
  check_pairs(truth.size(), predicted.size());
  ConfusionMatrix cm = ConfusionMatrix::Zero();
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm(stage_code(predicted[i]), stage_code(truth[i]));
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.sum();
  if (total == 0) throw Error(ErrorKind::TooFewPoints, "empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

std::array<ClassScores, kStageCount> per_class_scores(const ConfusionMatrix& cm) {
  std::array<ClassScores, kStageCount> out{};
  for (int c = 0; c < kStageCount; ++c) {
    const auto tp = static_cast<double>(cm(c, c));
    const auto predicted = static_cast<double>(cm.row(c).sum());
    const auto actual = static_cast<double>(cm.col(c).sum());
    auto& s = out[static_cast<std::size_t>(c)];
    s.precision = predicted > 0 ? tp / predicted : 0.0;
    s.recall = actual > 0 ? tp / actual : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  }
  return out;
}

double macro_f1(const ConfusionMatrix& cm) {
  double sum = 0.0;
  for (const auto& s : per_class_scores(cm)) sum += s.f1;
  return sum / kStageCount;
}

double rmse(std::span<const Stage> truth, std::span<const Stage> predicted) {
  check_pairs(truth.size(), predicted.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = stage_code(truth[i]) - stage_code(predicted[i]);
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(truth.size()));
}

Metrics evaluate(std::span<const Stage> truth, std::span<const Stage> predicted) {
  Metrics m;
  m.confusion = confusion_matrix(truth, predicted);
  m.accuracy = accuracy(m.confusion);
  m.macro_f1 = macro_f1(m.confusion);
  m.rmse = rmse(truth, predicted);
  m.n = truth.size();
  return m;
}

json metrics_json(const Metrics& m) {
  json cm = json::array();
  for (int p = 0; p < kStageCount; ++p) {
    json row = json::array();
    for (int t = 0; t < kStageCount; ++t) row.push_back(m.confusion(p, t));
    cm.push_back(std::move(row));
  }
  json per_class = json::object();
  const auto scores = per_class_scores(m.confusion);
  for (Stage s : kAllStages) {
    const auto& c = scores[static_cast<std::size_t>(stage_code(s))];
    per_class[std::string(stage_name(s))] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
  }
  return {{"n", m.n},
          {"accuracy", m.accuracy},
          {"macro_f1", m.macro_f1},
          {"rmse", m.rmse},
          {"per_class", std::move(per_class)},
          {"confusion", {{"rows", "predicted"}, {"columns", "reference"}, {"counts", std::move(cm)}}}};
}

std::string format_confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "predicted\\reference";
  for (Stage s : kAllStages) out += "," + std::string(stage_name(s));
  out += '\n';
  for (Stage p : kAllStages) {
    out += std::string(stage_name(p));
    for (Stage t : kAllStages) out += "," + std::to_string(cm(stage_code(p), stage_code(t)));
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Incomplete beta and Student t

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 1000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorKind::InvalidArgument, "degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

PearsonResult pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "x and y differ in length");
  if (x.size() < 3) throw Error(ErrorKind::TooFewPoints, "correlation needs at least three points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ConstantInput, "correlation of a constant series");
  PearsonResult out;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = n - 2.0;
  const double denom = 1.0 - out.r * out.r;
  out.p = denom <= 0.0 ? 0.0 : student_t_two_sided_p(out.r * std::sqrt(df / denom), df);
  return out;
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::TooFewPoints, "no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats b;
  b.min = sorted.front();
  b.max = sorted.back();
  b.q1 = percentile_sorted(sorted, 0.25);
  b.median = percentile_sorted(sorted, 0.5);
  b.q3 = percentile_sorted(sorted, 0.75);
  double sum = 0.0;
  for (double v : sorted) sum += v;
  b.mean = sum / static_cast<double>(sorted.size());
  return b;
}

EfficiencySummary efficiency_comparison(std::vector<NightEfficiency> nights) {
  if (nights.size() < 3) throw Error(ErrorKind::TooFewPoints, "efficiency comparison needs at least three nights");
  EfficiencySummary s;
  std::vector<double> bcg;
  std::vector<double> ref;
  for (const auto& n : nights) {
    bcg.push_back(n.bcg);
    ref.push_back(n.reference);
  }
  s.bcg = box_stats(bcg);
  s.reference = box_stats(ref);
  s.correlation = pearson_r(bcg, ref);
  s.nights = std::move(nights);
  return s;
}

namespace {

json box_json(const BoxStats& b) {
  return {{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}, {"mean", b.mean}};
}

}  // namespace

json efficiency_json(const EfficiencySummary& s) {
  json nights = json::array();
  for (const auto& n : s.nights) {
    nights.push_back({{"night_id", n.night_id}, {"bcg", n.bcg}, {"reference", n.reference}});
  }
  return {{"nights", std::move(nights)},
          {"bcg", box_json(s.bcg)},
          {"reference", box_json(s.reference)},
          {"pearson_r", s.correlation.r},
          {"p_value", s.correlation.p}};
}

std::vector<FoldResult> cross_validate(ModelKind kind, const ModelParams& params, std::uint64_t seed,
                                       const FeatureMatrix& data, int folds) {
  const auto test_folds = kfold_indices(static_cast<std::size_t>(data.rows()), folds, seed);
  std::vector<FoldResult> out;
  for (std::size_t f = 0; f < test_folds.size(); ++f) {
    std::vector<char> in_test(static_cast<std::size_t>(data.rows()), 0);
    for (auto i : test_folds[f]) in_test[i] = 1;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < in_test.size(); ++i) {
      if (!in_test[i]) train.push_back(i);
    }
    const auto train_set = select_rows(data, train);
    const auto test_set = select_rows(data, test_folds[f]);
    const auto model = train_model(kind, train_set.x, train_set.y, params, mix_seed(seed, f));
    out.push_back({f, evaluate(test_set.y, model.predict(test_set.x))});
  }
  return out;
}

}  // namespace bcgsleep
