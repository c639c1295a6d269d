#include <algorithm>

#include "bcgsleep/error.hpp"
#include "bcgsleep/models.hpp"
#include "bcgsleep/preprocess.hpp"

namespace bcgsleep {

using nlohmann::json;

std::string_view model_kind_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::DecisionTree: return "decision_tree";
    case ModelKind::RandomForest: return "random_forest";
    case ModelKind::Knn: return "knn";
    case ModelKind::GaussianNb: return "gaussian_nb";
  }
  return "decision_tree";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) noexcept {
  if (name == "decision_tree" || name == "dt") return ModelKind::DecisionTree;
  if (name == "random_forest" || name == "rf") return ModelKind::RandomForest;
  if (name == "knn") return ModelKind::Knn;
  if (name == "gaussian_nb" || name == "nb") return ModelKind::GaussianNb;
  return std::nullopt;
}

StageModel::StageModel(ModelKind kind, ModelParams params, std::uint64_t seed, int n_features, State state)
    : kind_(kind), params_(params), seed_(seed), n_features_(n_features), state_(std::move(state)) {}

Stage StageModel::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  if (row.size() != n_features_) {
    throw Error(ErrorKind::SchemaMismatch, "row has " + std::to_string(row.size()) +
                                               " features; model expects " + std::to_string(n_features_));
  }
  return std::visit([&](const auto& m) { return m.predict_row(row); }, state_);
}

std::vector<Stage> StageModel::predict(const Eigen::MatrixXd& rows) const {
  if (rows.rows() > 0 && rows.cols() != n_features_) {
    throw Error(ErrorKind::SchemaMismatch, "rows have " + std::to_string(rows.cols()) +
                                               " features; model expects " + std::to_string(n_features_));
  }
  std::vector<Stage> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.push_back(predict_row(rows.row(i)));
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json vector_json(const Eigen::RowVectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::RowVectorXd vector_from(const json& a) {
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
  return v;
}

json tree_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, stage_code(n.label)}));
  }
  return json{{"nodes", std::move(nodes)}};
}

DecisionTree tree_from(const json& doc) {
  DecisionTree tree;
  for (const auto& n : doc.at("nodes")) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.label = stage_from_code(n.at(4).get<int>());
    tree.nodes.push_back(node);
  }
  const auto count = static_cast<int>(tree.nodes.size());
  if (count == 0) throw Error(ErrorKind::MalformedModel, "tree without nodes");
  for (const auto& n : tree.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
      throw Error(ErrorKind::MalformedModel, "tree child index out of range");
    }
  }
  return tree;
}

json params_json(ModelKind kind, const ModelParams& p) {
  switch (kind) {
    case ModelKind::DecisionTree:
      return {{"criterion", "gini"}, {"max_depth", p.tree.max_depth}, {"min_samples_split", p.tree.min_samples_split}};
    case ModelKind::RandomForest:
      return {{"criterion", "gini"},
              {"n_trees", p.forest.n_trees},
              {"features_per_split", p.forest.features_per_split},
              {"bootstrap", p.forest.bootstrap},
              {"max_depth", p.forest.max_depth},
              {"min_samples_split", p.forest.min_samples_split}};
    case ModelKind::Knn:
      return {{"k", p.knn.k}, {"metric", "euclidean_standardized"}};
    case ModelKind::GaussianNb:
      return {{"var_smoothing", p.nb.var_smoothing}};
  }
  return json::object();
}

ModelParams params_from(ModelKind kind, const json& doc) {
  ModelParams p;
  switch (kind) {
    case ModelKind::DecisionTree:
      p.tree.max_depth = doc.at("max_depth").get<int>();
      p.tree.min_samples_split = doc.at("min_samples_split").get<int>();
      break;
    case ModelKind::RandomForest:
      p.forest.n_trees = doc.at("n_trees").get<int>();
      p.forest.features_per_split = doc.at("features_per_split").get<int>();
      p.forest.bootstrap = doc.at("bootstrap").get<bool>();
      p.forest.max_depth = doc.at("max_depth").get<int>();
      p.forest.min_samples_split = doc.at("min_samples_split").get<int>();
      break;
    case ModelKind::Knn:
      p.knn.k = doc.at("k").get<int>();
      break;
    case ModelKind::GaussianNb:
      p.nb.var_smoothing = doc.at("var_smoothing").get<double>();
      break;
  }
  return p;
}

struct StateWriter {
  json operator()(const DecisionTree& t) const { return tree_json(t); }
  json operator()(const RandomForest& f) const {
    json trees = json::array();
    for (const auto& t : f.trees) trees.push_back(tree_json(t));
    return {{"trees", std::move(trees)}};
  }
  json operator()(const Knn& k) const {
    json rows = json::array();
    for (Eigen::Index i = 0; i < k.train.rows(); ++i) rows.push_back(vector_json(k.train.row(i)));
    json labels = json::array();
    for (Stage s : k.labels) labels.push_back(stage_code(s));
    return {{"k", k.k},
            {"mean", vector_json(k.scaler.mean)},
            {"scale", vector_json(k.scaler.scale)},
            {"train", std::move(rows)},
            {"labels", std::move(labels)}};
  }
  json operator()(const GaussianNb& nb) const {
    json classes = json::array();
    for (const auto& c : nb.classes) {
      classes.push_back({{"stage", stage_code(c.stage)},
                         {"log_prior", c.log_prior},
                         {"mean", vector_json(c.mean)},
                         {"var", vector_json(c.var)}});
    }
    return {{"epsilon", nb.epsilon}, {"classes", std::move(classes)}};
  }
};

StageModel::State state_from(ModelKind kind, const json& doc, int n_features) {
  switch (kind) {
    case ModelKind::DecisionTree:
      return tree_from(doc);
    case ModelKind::RandomForest: {
      RandomForest f;
      for (const auto& t : doc.at("trees")) f.trees.push_back(tree_from(t));
      if (f.trees.empty()) throw Error(ErrorKind::MalformedModel, "forest without trees");
      return f;
    }
    case ModelKind::Knn: {
      Knn k;
      k.k = doc.at("k").get<int>();
      k.scaler.mean = vector_from(doc.at("mean"));
      k.scaler.scale = vector_from(doc.at("scale"));
      const auto& rows = doc.at("train");
      k.train.resize(static_cast<Eigen::Index>(rows.size()), n_features);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = vector_from(rows.at(i));
        if (row.size() != n_features) throw Error(ErrorKind::MalformedModel, "knn row width");
        k.train.row(static_cast<Eigen::Index>(i)) = row;
      }
      for (const auto& code : doc.at("labels")) k.labels.push_back(stage_from_code(code.get<int>()));
      if (k.labels.size() != rows.size() || k.k < 1 || rows.size() < static_cast<std::size_t>(k.k)) {
        throw Error(ErrorKind::MalformedModel, "inconsistent knn state");
      }
      return k;
    }
    case ModelKind::GaussianNb: {
      GaussianNb nb;
      nb.epsilon = doc.at("epsilon").get<double>();
      for (const auto& c : doc.at("classes")) {
        GaussianNb::ClassModel m;
        m.stage = stage_from_code(c.at("stage").get<int>());
        m.log_prior = c.at("log_prior").get<double>();
        m.mean = vector_from(c.at("mean"));
        m.var = vector_from(c.at("var"));
        nb.classes.push_back(std::move(m));
      }
      if (nb.classes.empty()) throw Error(ErrorKind::MalformedModel, "naive Bayes without classes");
      return nb;
    }
  }
  throw Error(ErrorKind::MalformedModel, "unknown kind");
}

}  // namespace

json StageModel::to_json() const {
  json state = std::visit(StateWriter{}, state_);
  state["n_features"] = n_features_;
  json doc{{"schema", kModelSchemaVersion},
           {"kind", std::string(model_kind_name(kind_))},
           {"params", params_json(kind_, params_)},
           {"seed", seed_},
           {"state", std::move(state)}};
  if (!extra.empty()) doc["provenance"] = extra;
  return doc;
}

std::string StageModel::serialize() const { return to_json().dump() + "\n"; }

StageModel StageModel::from_json(const json& doc) {
  try {
    if (doc.at("schema").get<int>() != kModelSchemaVersion) {
      throw Error(ErrorKind::MalformedModel, "unsupported schema version");
    }
    const auto kind = model_kind_from_name(doc.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorKind::MalformedModel, "unknown model kind");
    const auto& state = doc.at("state");
    const int n_features = state.at("n_features").get<int>();
    StageModel model(*kind, params_from(*kind, doc.at("params")), doc.at("seed").get<std::uint64_t>(),
                     n_features, state_from(*kind, state, n_features));
    if (const auto it = doc.find("provenance"); it != doc.end()) model.extra = *it;
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedModel, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MalformedModel) throw;
    throw Error(ErrorKind::MalformedModel, e.what());
  }
}

StageModel StageModel::deserialize(std::string_view text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(ErrorKind::MalformedModel, "model file is not valid JSON");
  return from_json(doc);
}

StageModel train_model(ModelKind kind, const Eigen::MatrixXd& x, std::span<const Stage> y,
                       const ModelParams& params, std::uint64_t seed) {
  switch (kind) {
    case ModelKind::DecisionTree: return train_decision_tree(x, y, params.tree);
    case ModelKind::RandomForest: return train_random_forest(x, y, params.forest, seed);
    case ModelKind::Knn: return train_knn(x, y, params.knn);
    case ModelKind::GaussianNb: return train_gaussian_nb(x, y, params.nb);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown model kind");
}

std::vector<Stage> predict_hypnogram(const StageModel& model, const NightRecord& cleaned) {
  if (cleaned.length() < kWindowLength) {
    throw Error(ErrorKind::RecordTooShort, "hypnogram needs at least " + std::to_string(kWindowLength) + " s");
  }
  const auto windows = model.predict(all_window_features(cleaned));
  std::vector<Stage> out(windows);
  out.resize(static_cast<std::size_t>(cleaned.length()), windows.back());
  return out;
}

}  // namespace bcgsleep
