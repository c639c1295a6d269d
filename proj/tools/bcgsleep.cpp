// bcgsleep: command-line entry point for the sleep-staging pipeline.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcgsleep/devicesim.hpp"
#include "bcgsleep/error.hpp"
#include "bcgsleep/pipeline.hpp"

namespace {

using namespace bcgsleep;
using nlohmann::json;

/// JSON config: {"flag-name": value, ...} applies to the invoked command;
/// {"command": {...}} targets a command explicitly. Arrays feed repeatable flags.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json doc = json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
      const std::string& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& results = opt->results();
        doc[name] = results.size() == 1 ? json(results.front()) : json(results);
      } else if (default_also && !opt->get_default_str().empty()) {
        doc[name] = opt->get_default_str();
      }
    }
    return doc.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json doc = json::parse(input, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw CLI::ConfigError("config file is not a JSON object");
    std::vector<std::string> active;
    for (const CLI::App* sub : root_->get_subcommands()) active.push_back(sub->get_name());
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      if (value.is_object()) {
        if (root_->get_subcommand_no_throw(key) == nullptr) throw CLI::ConfigError("unknown command " + key);
        for (const auto& [sub_key, sub_value] : value.items()) items.push_back(make_item({key}, sub_key, sub_value));
      } else {
        items.push_back(make_item(active, key, value));
      }
    }
    return items;
  }

 private:
  static CLI::ConfigItem make_item(std::vector<std::string> parents, const std::string& key, const json& value) {
    CLI::ConfigItem item;
    item.parents = std::move(parents);
    item.name = key;
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(scalar(key, v));
    } else {
      item.inputs.push_back(scalar(key, value));
    }
    return item;
  }

  static std::string scalar(const std::string& key, const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config key " + key + " must be a string, number, boolean or array of those");
  }

  const CLI::App* root_;
};

// The root app owns --config; commands pass it through.
void inherit_config(CLI::App* cmd) { cmd->fallthrough(); }

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

DropoutWindow parse_dropout(const std::string& text) {
  // start:length[:disconnect]
  DropoutWindow w;
  const auto a = text.find(':');
  if (a == std::string::npos) throw CLI::ValidationError("--dropout", "expected start:length[:disconnect]");
  const auto b = text.find(':', a + 1);
  try {
    w.start_t = std::stoll(text.substr(0, a));
    w.length = std::stoll(text.substr(a + 1, b == std::string::npos ? std::string::npos : b - a - 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--dropout", "expected start:length[:disconnect]");
  }
  if (b != std::string::npos) {
    const std::string mode = text.substr(b + 1);
    if (mode != "disconnect" && mode != "gap") throw CLI::ValidationError("--dropout", "mode must be disconnect or gap");
    w.disconnect = mode == "disconnect";
  }
  return w;
}

const std::map<std::string, Grouping> kGroupings{{"window", Grouping::Window}, {"night", Grouping::Night}};
const std::map<std::string, NightFormat> kFormats{{"ndjson", NightFormat::Ndjson}, {"csv", NightFormat::Csv}};
const std::map<std::string, ModelKind> kModels{{"decision_tree", ModelKind::DecisionTree},
                                               {"dt", ModelKind::DecisionTree},
                                               {"random_forest", ModelKind::RandomForest},
                                               {"rf", ModelKind::RandomForest},
                                               {"knn", ModelKind::Knn},
                                               {"gaussian_nb", ModelKind::GaussianNb},
                                               {"nb", ModelKind::GaussianNb}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sleep staging from 1 Hz ballistocardiography vitals"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "JSON file mirroring the command's flags (command-line values win)");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  // synth
  SynthOptions synth;
  std::string synth_format = "ndjson";
  std::string synth_profile;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort with reference labels");
  inherit_config(synth_cmd);
  synth_cmd->add_option("--nights", synth.nights, "Number of nights")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--hours", synth.hours, "Night length in hours")->capture_default_str();
  synth_cmd->add_option("--efficiency-lo", synth.efficiency_lo, "Lowest scripted sleep efficiency")
      ->capture_default_str();
  synth_cmd->add_option("--efficiency-hi", synth.efficiency_hi, "Highest scripted sleep efficiency")
      ->capture_default_str();
  synth_cmd->add_option("--hr-jitter", synth.hr_jitter, "Per-night heart-rate offset range (bpm)")
      ->capture_default_str();
  synth_cmd->add_option("--format", synth_format, "Night file format")
      ->check(CLI::IsMember({"ndjson", "csv"}))
      ->capture_default_str();
  synth_cmd->add_option("--profile", synth_profile, "Subject profile JSON")->check(CLI::ExistingFile);

  // serve
  std::string serve_in;
  std::string serve_host = "127.0.0.1";
  std::uint16_t serve_port = 0;
  double serve_tick = 1.0;
  bool serve_discard = false;
  std::vector<std::string> serve_dropouts;
  auto* serve_cmd = app.add_subcommand("serve", "Stream a night file as a simulated sensor");
  inherit_config(serve_cmd);
  serve_cmd->add_option("--in", serve_in, "Night file to stream")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", serve_host, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", serve_port, "Listen port (0 picks a free one)")->capture_default_str();
  serve_cmd->add_option("--tick", serve_tick, "Wall seconds per sample (0 = no pacing)")->capture_default_str();
  serve_cmd->add_flag("--discard-while-disconnected", serve_discard,
                      "Drop samples that fall due while no client is connected");
  serve_cmd->add_option("--dropout", serve_dropouts, "start:length[:disconnect|gap], repeatable")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  // record
  std::string rec_endpoint;
  std::string rec_out;
  ReconnectPolicy rec_policy;
  auto* record_cmd = app.add_subcommand("record", "Record a sensor stream to a night file");
  inherit_config(record_cmd);
  record_cmd->add_option("--endpoint", rec_endpoint, "host:port of the sensor")->required();
  record_cmd->add_option("--out", rec_out, "Output night file")->required();
  record_cmd->add_option("--retry-interval", rec_policy.retry_interval, "Seconds between reconnect attempts")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  record_cmd->add_option("--deadline", rec_policy.deadline, "Seconds to keep retrying without a connection")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  // sleepwake
  SleepwakeOptions sw;
  std::string sw_summary;
  auto* sw_cmd = app.add_subcommand("sleepwake", "Per-epoch sleep/wake from heart rate");
  inherit_config(sw_cmd);
  sw_cmd->add_option("--in", sw.in, "Night file")->required()->check(CLI::ExistingFile);
  sw_cmd->add_option("--out", sw.out, "Epoch CSV")->required();
  sw_cmd->add_option("--summary", sw_summary, "Also write a JSON summary here");

  // featurize
  FeaturizeOptions feat;
  auto* feat_cmd = app.add_subcommand("featurize", "Extract labelled 10 s window features");
  inherit_config(feat_cmd);
  feat_cmd->add_option("--in", feat.in, "Night files or directories (labels alongside)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  feat_cmd->add_option("--out", feat.out, "Output directory")->required();
  feat_cmd->add_option("--stride", feat.stride, "Window stride in seconds")->capture_default_str();

  // train
  TrainOptions train;
  std::string train_model = "rf";
  std::string train_grouping = "window";
  auto* train_cmd = app.add_subcommand("train", "Train a stage classifier");
  inherit_config(train_cmd);
  train_cmd->add_option("--features", train.features, "Features files or directories")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  train_cmd->add_option("--out", train.out, "Model file")->required();
  train_cmd->add_option("--model", train_model, "dt, rf, knn or nb")
      ->check(CLI::IsMember(kModels))
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Random seed (split and forest)")->capture_default_str();
  train_cmd->add_option("--train-fraction", train.train_fraction, "Training share of the split")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--grouping", train_grouping, "Split unit: window or night")
      ->check(CLI::IsMember({"window", "night"}))
      ->capture_default_str();
  train_cmd->add_option("--max-depth", train.params.tree.max_depth, "Tree depth cap (<= 0 unlimited)")
      ->capture_default_str();
  train_cmd->add_option("--min-samples-split", train.params.tree.min_samples_split, "Smallest splittable node")
      ->capture_default_str();
  train_cmd->add_option("--trees", train.params.forest.n_trees, "Forest size")->capture_default_str();
  train_cmd->add_option("--features-per-split", train.params.forest.features_per_split,
                        "Features drawn at each forest node")
      ->capture_default_str();
  train_cmd->add_option("--k", train.params.knn.k, "Neighbours for k-NN")->capture_default_str();
  train_cmd->add_option("--var-smoothing", train.params.nb.var_smoothing,
                        "Naive Bayes variance floor, times the largest variance")
      ->capture_default_str();

  // evaluate
  EvaluateOptions ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on its held-out split");
  inherit_config(eval_cmd);
  eval_cmd->add_option("--model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--features", ev.features, "Features used for training")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  eval_cmd->add_option("--out", ev.out, "Output directory")->required();
  eval_cmd->add_option("--cv", ev.cv_folds, "Also run k-fold cross-validation (0 = off)")->capture_default_str();

  // report
  ReportOptions rep;
  auto* rep_cmd = app.add_subcommand("report", "Render figures and metrics");
  inherit_config(rep_cmd);
  rep_cmd->add_option("--nights", rep.nights, "Labelled night files or directories")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  rep_cmd->add_option("--model", rep.model, "Model file")->required()->check(CLI::ExistingFile);
  rep_cmd->add_option("--features", rep.features, "Features used for training")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  rep_cmd->add_option("--out", rep.out, "Output directory")->required();
  rep_cmd->add_option("--night", rep.hypnogram_night, "Night id for the hypnogram and trace (default first)");
  rep_cmd->add_option("--trace-start", rep.trace_start, "Threshold trace start (s)")->capture_default_str();
  rep_cmd->add_option("--trace-length", rep.trace_length, "Threshold trace length (s)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*synth_cmd) {
      synth.format = kFormats.at(synth_format);
      if (!synth_profile.empty()) synth.profile = synth_profile;
      const auto files = run_synth(synth);
      std::cout << "wrote " << files.size() << " nights to " << synth.out.string() << "\n";
    } else if (*serve_cmd) {
      StreamScript script;
      script.source = read_night_file(serve_in);
      script.tick_interval = serve_tick;
      script.hold_for_client = !serve_discard;
      for (const auto& d : serve_dropouts) script.dropouts.push_back(parse_dropout(d));
      Endpoint ep{serve_host, serve_port};
      auto server = serve_stream(std::move(script), ep);
      std::cout << "listening on " << serve_host << ":" << server->port() << std::endl;
      server->wait();
      std::cout << "served " << server->sent_times().size() << " samples over " << server->connections_served()
                << " connections\n";
    } else if (*record_cmd) {
      std::signal(SIGINT, on_sigint);
      std::signal(SIGTERM, on_sigint);
      const auto result = record_stream(Endpoint::parse(rec_endpoint), rec_policy, rec_out, &g_interrupted);
      std::cout << "recorded " << result.lines_written << " samples (" << result.record.gaps().size()
                << " gaps, " << result.connections << " connections)\n";
    } else if (*sw_cmd) {
      if (!sw_summary.empty()) sw.summary = sw_summary;
      const auto summary = run_sleepwake(sw);
      std::cout << summary.dump() << "\n";
    } else if (*feat_cmd) {
      const auto s = run_featurize(feat);
      std::cout << "kept " << s.kept << " windows, discarded " << s.discarded << ", wrote " << s.files.size()
                << " files\n";
    } else if (*train_cmd) {
      train.model = kModels.at(train_model);
      train.grouping = kGroupings.at(train_grouping);
      train.params.forest.max_depth = train.params.tree.max_depth;
      train.params.forest.min_samples_split = train.params.tree.min_samples_split;
      run_train(train);
      std::cout << "wrote " << train.out.string() << "\n";
    } else if (*eval_cmd) {
      const auto m = run_evaluate(ev);
      std::printf("accuracy %.4f macro_f1 %.4f rmse %.4f n %zu\n", m.accuracy, m.macro_f1, m.rmse, m.n);
    } else if (*rep_cmd) {
      run_report(rep);
      std::cout << "wrote report to " << rep.out.string() << "\n";
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "Io: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
