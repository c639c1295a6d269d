#include "bcgsleep/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "bcgsleep/error.hpp"
#include "bcgsleep/features.hpp"
#include "bcgsleep/preprocess.hpp"
#include "bcgsleep/report.hpp"
#include "bcgsleep/sleepwake.hpp"

namespace bcgsleep {

using nlohmann::json;

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

bool is_night_file(const fs::path& p) {
  const std::string name = p.filename().string();
  if (ends_with(name, ".labels.json") || ends_with(name, ".features.csv") || ends_with(name, ".gaps.csv")) {
    return false;
  }
  return ends_with(name, ".ndjson") || ends_with(name, ".csv");
}

std::vector<fs::path> expand_nights(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> out;
  for (const auto& p : expand_inputs(inputs, "")) {
    if (is_night_file(p)) out.push_back(p);
  }
  return out;
}

// Reference efficiency: labelled non-wake seconds over labelled seconds.
double reference_efficiency(const NightRecord& night) {
  const auto labels = align_labels(night, *night.labels());
  std::size_t labelled = 0;
  std::size_t asleep = 0;
  for (const auto& l : labels) {
    if (!l) continue;
    ++labelled;
    if (*l != Stage::Wake) ++asleep;
  }
  if (labelled == 0) throw Error(ErrorKind::MalformedLabels, night.meta().night_id + " has no labelled seconds");
  return static_cast<double>(asleep) / static_cast<double>(labelled);
}

SignalDistribution dist_from(const json& j, SignalDistribution d) {
  d.mean = j.value("mean", d.mean);
  d.sd = j.value("sd", d.sd);
  return d;
}

struct HeldOut {
  StageModel model;
  FeatureMatrix test;
  Metrics metrics;
};

HeldOut held_out(const fs::path& model_file, const std::vector<fs::path>& feature_inputs) {
  StageModel model = StageModel::deserialize(read_text_file(model_file));
  const auto files = expand_inputs(feature_inputs, ".features.csv");
  FeatureMatrix data = load_features(files);

  const json& prov = model.extra;
  if (!prov.contains("split")) throw Error(ErrorKind::MalformedModel, "model carries no split provenance");
  const json& split = prov.at("split");
  if (split.at("rows").get<std::size_t>() != static_cast<std::size_t>(data.rows())) {
    throw Error(ErrorKind::SchemaMismatch, "features have " + std::to_string(data.rows()) +
                                               " rows but the model was split over " +
                                               std::to_string(split.at("rows").get<std::size_t>()));
  }
  SplitSpec spec;
  spec.train_fraction = split.at("train_fraction").get<double>();
  spec.seed = split.at("seed").get<std::uint64_t>();
  spec.grouping = split.at("grouping").get<std::string>() == "night" ? Grouping::Night : Grouping::Window;
  const auto parts = split_train_test(static_cast<std::size_t>(data.rows()), spec, data.groups);
  FeatureMatrix test = select_rows(data, parts.test);
  const auto predicted = model.predict(test.x);
  Metrics m = evaluate(test.y, predicted);
  return {std::move(model), std::move(test), m};
}

}  // namespace

fs::path labels_path_for(const fs::path& night_file) {
  fs::path p = night_file;
  p.replace_extension(".labels.json");
  return p;
}

std::string night_id_from_features_path(const fs::path& path) {
  std::string name = path.filename().string();
  for (const std::string suffix : {".features.csv", ".csv"}) {
    if (ends_with(name, suffix)) return name.substr(0, name.size() - suffix.size());
  }
  return name;
}

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    std::error_code ec;
    if (fs::is_directory(in, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && ends_with(entry.path().filename().string(), suffix)) {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(in, ec)) {
      out.push_back(in);
    } else {
      throw Error(ErrorKind::Io, "no such file or directory: " + in.string());
    }
  }
  return out;
}

NightRecord load_night(const fs::path& night_file, bool require_labels) {
  NightRecord night = read_night_file(night_file);
  const fs::path labels = labels_path_for(night_file);
  std::error_code ec;
  if (fs::exists(labels, ec)) return night.with_labels(read_labels_file(labels).intervals);
  if (require_labels) throw Error(ErrorKind::Io, "missing label file " + labels.string());
  return night;
}

json profile_to_json(const SubjectProfile& p) {
  json vitals = json::object();
  for (Stage s : kAllStages) {
    json row = json::object();
    for (Signal sig : kAllSignals) {
      row[std::string(signal_name(sig))] = {{"mean", p.at(s, sig).mean}, {"sd", p.at(s, sig).sd}};
    }
    vitals[std::string(stage_name(s))] = std::move(row);
  }
  return {{"vitals", std::move(vitals)},
          {"motion_bursts_per_wake_hour", p.motion_bursts_per_wake_hour},
          {"burst_min", p.burst_min},
          {"burst_max", p.burst_max},
          {"dropouts_per_night", p.dropouts_per_night},
          {"dropout_min", p.dropout_min},
          {"dropout_max", p.dropout_max},
          {"mean_cycle", p.mean_cycle},
          {"rem_first", p.rem_first},
          {"rem_growth", p.rem_growth},
          {"wake_fraction", p.wake_fraction},
          {"initial_wake_mean", p.initial_wake_mean},
          {"wake_return_mean", p.wake_return_mean}};
}

SubjectProfile profile_from_json(const json& doc) {
  SubjectProfile p = SubjectProfile::default_profile();
  try {
    if (const auto it = doc.find("vitals"); it != doc.end()) {
      for (const auto& [stage_key, row] : it->items()) {
        const auto stage = stage_from_name(stage_key);
        if (!stage) throw Error(ErrorKind::InvalidProfile, "unknown stage " + stage_key);
        for (Signal sig : kAllSignals) {
          if (const auto s = row.find(std::string(signal_name(sig))); s != row.end()) {
            p.at(*stage, sig) = dist_from(*s, p.at(*stage, sig));
          }
        }
      }
    }
    p.motion_bursts_per_wake_hour = doc.value("motion_bursts_per_wake_hour", p.motion_bursts_per_wake_hour);
    p.burst_min = doc.value("burst_min", p.burst_min);
    p.burst_max = doc.value("burst_max", p.burst_max);
    p.dropouts_per_night = doc.value("dropouts_per_night", p.dropouts_per_night);
    p.dropout_min = doc.value("dropout_min", p.dropout_min);
    p.dropout_max = doc.value("dropout_max", p.dropout_max);
    p.mean_cycle = doc.value("mean_cycle", p.mean_cycle);
    p.rem_first = doc.value("rem_first", p.rem_first);
    p.rem_growth = doc.value("rem_growth", p.rem_growth);
    p.wake_fraction = doc.value("wake_fraction", p.wake_fraction);
    p.initial_wake_mean = doc.value("initial_wake_mean", p.initial_wake_mean);
    p.wake_return_mean = doc.value("wake_return_mean", p.wake_return_mean);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidProfile, e.what());
  }
  p.validate();
  return p;
}

std::vector<fs::path> run_synth(const SynthOptions& opt) {
  if (opt.nights < 1) throw Error(ErrorKind::InvalidArgument, "need at least one night");
  CohortSpec spec;
  spec.n_nights = opt.nights;
  spec.efficiency_lo = opt.efficiency_lo;
  spec.efficiency_hi = opt.efficiency_hi;
  spec.duration = static_cast<Seconds>(opt.hours * 3600.0 + 0.5);
  spec.hr_jitter = opt.hr_jitter;
  if (opt.profile) {
    const std::string text = read_text_file(*opt.profile);
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorKind::InvalidProfile, "profile is not valid JSON");
    spec.profile = profile_from_json(doc);
  }
  if (!(spec.efficiency_lo > 0.0 && spec.efficiency_lo <= spec.efficiency_hi && spec.efficiency_hi < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "efficiency range must satisfy 0 < lo <= hi < 1");
  }
  const auto cohort = generate_cohort(spec, opt.seed);

  ensure_dir(opt.out);
  const std::string ext = opt.format == NightFormat::Csv ? ".csv" : ".ndjson";
  std::vector<fs::path> files;
  json truth = json::array();
  for (const auto& night : cohort) {
    const std::string& id = night.record.meta().night_id;
    const fs::path file = opt.out / (id + ext);
    write_night_file(night.record, file);
    write_labels_file({id, night.truth}, labels_path_for(file));
    json dropouts = json::array();
    for (const auto& g : night.dropouts) dropouts.push_back({{"start_t", g.start_t}, {"length", g.length}});
    truth.push_back({{"night_id", id},
                     {"subject_id", night.record.meta().subject_id},
                     {"scripted_efficiency", night.scripted_efficiency},
                     {"dropouts", std::move(dropouts)}});
    files.push_back(file);
  }
  write_json(opt.out / "truth.json", {{"seed", opt.seed}, {"nights", std::move(truth)}});
  return files;
}

json run_sleepwake(const SleepwakeOptions& opt) {
  const NightRecord night = read_night_file(opt.in);
  const auto epochs = run_night(night);
  write_text_file(opt.out, format_epochs_csv(epochs));
  json summary{{"night_id", night.meta().night_id},
               {"epochs", epochs.size()},
               {"sleep_efficiency", sleep_efficiency(epochs)},
               {"waso_seconds", waso(epochs)}};
  const auto onset = sleep_onset_latency(epochs);
  summary["sleep_onset_latency_seconds"] = onset ? json(*onset) : json(nullptr);
  if (opt.summary) write_json(*opt.summary, summary);
  return summary;
}

FeaturizeSummary run_featurize(const FeaturizeOptions& opt) {
  if (opt.stride < 1) throw Error(ErrorKind::InvalidArgument, "stride must be positive");
  const auto nights = expand_nights(opt.in);
  if (nights.empty()) throw Error(ErrorKind::Io, "no night files found");
  ensure_dir(opt.out);
  FeaturizeSummary summary;
  for (const auto& file : nights) {
    const NightRecord night = load_night(file, true);
    const NightRecord cleaned = clean_for_features(night);
    const auto labels = align_labels(cleaned, *night.labels());
    const WindowSet windows = window_night(cleaned, labels, kWindowLength, opt.stride);
    const fs::path out = opt.out / (night.meta().night_id + ".features.csv");
    write_text_file(out, format_features_csv(windows.kept));
    summary.files.push_back(out);
    summary.kept += windows.kept.size();
    summary.discarded += windows.discarded;
  }
  return summary;
}

FeatureMatrix load_features(const std::vector<fs::path>& files) {
  std::vector<fs::path> sorted = files;
  std::sort(sorted.begin(), sorted.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  std::vector<FeatureMatrix> parts;
  for (const auto& f : sorted) parts.push_back(parse_features_csv(read_text_file(f), night_id_from_features_path(f)));
  if (parts.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no features files given");
  return concat(parts);
}

StageModel run_train(const TrainOptions& opt) {
  const auto files = expand_inputs(opt.features, ".features.csv");
  const FeatureMatrix data = load_features(files);
  SplitSpec spec;
  spec.train_fraction = opt.train_fraction;
  spec.seed = opt.seed;
  spec.grouping = opt.grouping;
  const auto parts = split_train_test(static_cast<std::size_t>(data.rows()), spec, data.groups);
  const FeatureMatrix train = select_rows(data, parts.train);

  StageModel model = train_model(opt.model, train.x, train.y, opt.params, opt.seed);
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.filename().string());
  std::sort(names.begin(), names.end());
  model.extra["split"] = {{"train_fraction", opt.train_fraction},
                          {"seed", opt.seed},
                          {"grouping", opt.grouping == Grouping::Night ? "night" : "window"},
                          {"rows", data.rows()},
                          {"train_rows", parts.train.size()},
                          {"test_rows", parts.test.size()},
                          {"inputs", names}};
  write_text_file(opt.out, model.serialize());
  return model;
}

Metrics run_evaluate(const EvaluateOptions& opt) {
  HeldOut h = held_out(opt.model, opt.features);
  json doc = metrics_json(h.metrics);
  doc["model"] = std::string(model_kind_name(h.model.kind()));
  if (opt.cv_folds > 0) {
    const FeatureMatrix data = load_features(expand_inputs(opt.features, ".features.csv"));
    const auto folds = cross_validate(h.model.kind(), h.model.params(), h.model.seed(), data, opt.cv_folds);
    json per_fold = json::array();
    double acc = 0.0;
    double f1 = 0.0;
    for (const auto& f : folds) {
      per_fold.push_back({{"fold", f.fold},
                          {"n", f.metrics.n},
                          {"accuracy", f.metrics.accuracy},
                          {"macro_f1", f.metrics.macro_f1},
                          {"rmse", f.metrics.rmse}});
      acc += f.metrics.accuracy;
      f1 += f.metrics.macro_f1;
    }
    const double n = static_cast<double>(folds.size());
    doc["cross_validation"] = {{"folds", std::move(per_fold)}, {"mean_accuracy", acc / n}, {"mean_macro_f1", f1 / n}};
  }
  ensure_dir(opt.out);
  write_json(opt.out / "metrics.json", doc);
  write_text_file(opt.out / "confusion.csv", format_confusion_csv(h.metrics.confusion));
  return h.metrics;
}

void run_report(const ReportOptions& opt) {
  const auto night_files = expand_nights(opt.nights);
  if (night_files.empty()) throw Error(ErrorKind::Io, "no night files found");
  ensure_dir(opt.out);

  HeldOut h = held_out(opt.model, opt.features);
  json doc = metrics_json(h.metrics);
  doc["model"] = std::string(model_kind_name(h.model.kind()));
  write_json(opt.out / "metrics.json", doc);
  write_text_file(opt.out / "confusion.svg",
                  render_confusion_svg(h.metrics.confusion, std::string(model_kind_name(h.model.kind())) +
                                                                " held-out confusion"));

  std::vector<NightEfficiency> effs;
  bool drew_hypnogram = false;
  for (const auto& file : night_files) {
    const NightRecord night = load_night(file, true);
    const auto raw = raw_hr_series(night);
    const auto epochs = run_night(raw);
    effs.push_back({night.meta().night_id, sleep_efficiency(epochs), reference_efficiency(night)});

    const bool chosen = opt.hypnogram_night.empty() ? !drew_hypnogram : night.meta().night_id == opt.hypnogram_night;
    if (chosen && !drew_hypnogram) {
      const auto predicted = predict_hypnogram(h.model, clean_for_features(night));
      const auto reference = align_labels(night, *night.labels());
      write_text_file(opt.out / "hypnogram.svg",
                      render_hypnogram_pair_svg(reference, predicted, night.meta().night_id + " reference vs predicted"));
      write_text_file(opt.out / "threshold_trace.svg",
                      render_threshold_trace_svg(raw, epochs, opt.trace_start, opt.trace_start + opt.trace_length));
      drew_hypnogram = true;
    }
  }
  if (!drew_hypnogram) throw Error(ErrorKind::InvalidArgument, "no night named " + opt.hypnogram_night);
  const EfficiencySummary summary = efficiency_comparison(std::move(effs));
  write_json(opt.out / "efficiency.json", efficiency_json(summary));
  write_text_file(opt.out / "efficiency.svg", render_efficiency_box_svg(summary));
}

}  // namespace bcgsleep
