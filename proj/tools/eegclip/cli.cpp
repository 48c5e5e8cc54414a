#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eegclip/error.hpp"
#include "eegclip/featurize/feature_cache.hpp"
#include "eegclip/featurize/featurize.hpp"
#include "eegclip/hash.hpp"
#include "eegclip/io/csv_interchange.hpp"
#include "eegclip/io/recording.hpp"
#include "eegclip/io/synthetic.hpp"
#include "eegclip/model/emotion_clip.hpp"
#include "eegclip/text/text_bank.hpp"
#include "eegclip/training/experiments.hpp"
#include "eegclip/training/protocols.hpp"
#include "eegclip/training/report.hpp"
#include "eegclip/training/trainer.hpp"

namespace eegclip::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"synth",      "featurize",      "train",  "eval-loso",
                                                 "eval-crosstime", "eval-nshot", "ablate", "report"};
  return names;
}

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidConfig, field + ": " + why);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

struct Resolved {
  std::string preset = "default";
  std::optional<fs::path> input;
  std::optional<fs::path> templates;
  io::SynthConfig synth;
  bool has_synth = false;
  train::RunConfig run;
  std::size_t jobs = 1;
  std::vector<json> inputs;  // manifest input records
};

json input_record(const std::string& role, const fs::path& path) {
  return {{"role", role}, {"path", path.generic_string()}, {"git_blob", git_blob_hash_file(path)}};
}

Resolved resolve_config(const Options& opts) {
  Resolved r;
  json doc = json::object();
  fs::path base = fs::current_path();
  if (opts.config) {
    base = opts.config->parent_path();
    if (base.empty()) base = ".";
    try {
      doc = json::parse(read_text(*opts.config));
    } catch (const json::parse_error& e) {
      config_error("config", e.what());
    }
    if (!doc.is_object()) config_error("config", "top level must be an object");
    r.inputs.push_back(input_record("config", *opts.config));
  }
  static const std::vector<std::string> known = {"preset", "input", "templates", "synth", "run"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) config_error(key, "unknown field");
  }
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) config_error("preset", "expected a string");
    r.preset = doc["preset"].get<std::string>();
  }
  if (r.preset == "toy") {
    r.run = train::RunConfig::toy();
  } else if (r.preset != "default") {
    config_error("preset", "expected default or toy");
  }
  if (doc.contains("input")) r.input = resolve(base, doc["input"].get<std::string>());
  if (doc.contains("templates")) r.templates = resolve(base, doc["templates"].get<std::string>());
  if (doc.contains("synth")) {
    io::from_json(doc["synth"], r.synth);
    r.has_synth = true;
  }
  if (doc.contains("run")) {
    json run = doc["run"];
    if (!run.is_object()) config_error("run", "expected an object");
    if (run.contains("featurize") && run["featurize"].contains("layout_file")) {
      run["featurize"]["layout_file"] = resolve(base, run["featurize"]["layout_file"].get<std::string>()).string();
    }
    if (run.contains("bank") && run["bank"].is_string() && run["bank"] != "stub") {
      run["bank"] = resolve(base, run["bank"].get<std::string>()).string();
    }
    train::from_json(run, r.run);
  }

  // flag > file > default
  if (opts.input) r.input = *opts.input;
  if (opts.seed) {
    if (opts.command == "synth") {
      r.synth.seed = *opts.seed;
    } else {
      r.run.seed = *opts.seed;
    }
  }
  if (opts.bank) r.run.bank = *opts.bank;
  if (opts.grid) {
    r.run.featurize.out_h = r.run.featurize.out_w = *opts.grid;
    r.run.model.input_h = r.run.model.input_w = *opts.grid;
  }
  if (opts.jobs) r.jobs = std::max<std::size_t>(1, *opts.jobs);
  r.synth.validate();
  r.run.validate();
  if (r.input) r.inputs.push_back(input_record("input", *r.input));
  if (r.templates) r.inputs.push_back(input_record("templates", *r.templates));
  if (r.run.bank != "stub") r.inputs.push_back(input_record("bank", r.run.bank));
  return r;
}

enum class InputKind { kRecording, kFeatures, kCsvIndex, kResultsCsv };

InputKind sniff(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "missing input " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const std::string m(magic, static_cast<std::size_t>(in.gcount()));
  if (m == io::kRecordingMagic) return InputKind::kRecording;
  if (m == feat::kFeatureMagic) return InputKind::kFeatures;
  if (path.extension() == ".csv") {
    std::string first;
    std::ifstream text(path);
    std::getline(text, first);
    return first.rfind("protocol,", 0) == 0 ? InputKind::kResultsCsv : InputKind::kCsvIndex;
  }
  throw Error(ErrorCode::kMalformedHeader, path.string() + ": not a recording, feature file or CSV index");
}

io::ValidationOptions recording_options() {
  io::ValidationOptions v;
  v.expected_channels = 0;
  return v;
}

io::RecordingSet load_recording_input(const Resolved& r, json& data) {
  if (!r.input) {
    data["source"] = "synthetic";
    return io::generate_synthetic(r.synth);
  }
  data["source"] = r.input->generic_string();
  switch (sniff(*r.input)) {
    case InputKind::kRecording:
      return io::load_recording(*r.input, recording_options());
    case InputKind::kCsvIndex:
      return io::load_csv_index(*r.input, recording_options());
    default:
      throw Error(ErrorCode::kInvalidArgument, r.input->string() + ": expected a recording or CSV index");
  }
}

/// Features from a feature file, or featurized from a recording / synthetic data.
feat::FeatureSet load_features(Resolved& r, json& data) {
  if (r.input && sniff(*r.input) == InputKind::kFeatures) {
    data["source"] = r.input->generic_string();
    auto features = feat::load_features(*r.input);
    // Framing comes from the file; output grid size from the run config.
    const std::size_t h = r.run.featurize.out_h, w = r.run.featurize.out_w;
    r.run.featurize = features.config;
    r.run.featurize.out_h = h;
    r.run.featurize.out_w = w;
    r.run.model.bands = r.run.featurize.band_set.size();
    features.config = r.run.featurize;
    r.run.validate();
    return features;
  }
  const auto rec = load_recording_input(r, data);
  data["trials"] = rec.trials.size();
  return feat::frame_features(rec, r.run.featurize, r.jobs);
}

text::TextBank make_bank(const Resolved& r, const std::vector<std::string>& labels) {
  const auto templates = r.templates ? text::PromptTemplateSet::load(*r.templates) : text::PromptTemplateSet::builtin();
  if (r.run.bank == "stub") return text::build_bank_stub(labels, templates, r.run.model.proj_dim, r.run.bank_seed);
  return text::build_bank_from_file(labels, templates, r.run.bank);
}

json base_manifest(const Options& opts, const Resolved& r) {
  json m;
  m["command"] = opts.command;
  m["tool_version"] = kToolVersion;
  m["preset"] = r.preset;
  json synth;
  io::to_json(synth, r.synth);
  json run;
  train::to_json(run, r.run);
  m["config"] = {{"synth", synth}, {"run", run}};
  m["seeds"] = {{"synth", r.synth.seed}, {"run", r.run.seed}, {"bank", r.run.bank_seed}};
  m["inputs"] = r.inputs;
  m["jobs"] = r.jobs;
  return m;
}

json bank_record(const text::TextBank& bank) {
  return {{"source", bank.source() == text::BankSource::kStub ? "stub" : "file"},
          {"description", bank.description()},
          {"dim", bank.dim()},
          {"labels", bank.labels()},
          {"hash", bank.content_hash()}};
}

void write_manifest(const fs::path& out, const json& manifest, std::ostream& log) {
  write_text(out / "manifest.json", dump(manifest));
  log << "wrote " << (out / "manifest.json").generic_string() << "\n";
}

int cmd_synth(const Options& opts, Resolved& r, std::ostream& log) {
  json manifest = base_manifest(opts, r);
  manifest["outputs"] = {"recording.eegc"};
  write_manifest(opts.out, manifest, log);
  const auto rec = io::generate_synthetic(r.synth);
  const auto path = opts.out / "recording.eegc";
  io::save_recording(rec, path);
  json summary = {{"trials", rec.trials.size()},
                  {"subjects", r.synth.n_subjects},
                  {"sessions", r.synth.n_sessions},
                  {"labels", rec.label_set},
                  {"channels", rec.channel_names.size()},
                  {"samples_per_trial", r.synth.samples_per_trial()},
                  {"git_blob", git_blob_hash_file(path)}};
  write_text(opts.out / "summary.json", dump(summary));
  log << "synth: " << rec.trials.size() << " trials -> " << path.generic_string() << "\n";
  return kExitOk;
}

int cmd_featurize(const Options& opts, Resolved& r, std::ostream& log) {
  json manifest = base_manifest(opts, r);
  json data;
  const auto rec = load_recording_input(r, data);
  manifest["data"] = data;
  manifest["outputs"] = {"features.eegf"};
  write_manifest(opts.out, manifest, log);
  const auto features = feat::frame_features(rec, r.run.featurize, r.jobs);
  const auto path = opts.out / "features.eegf";
  feat::save_features(features, path);
  json summary = {{"trials", rec.trials.size()},
                  {"items", features.items.size()},
                  {"labels", features.label_set},
                  {"frames_per_sample", features.config.frames_per_sample},
                  {"bands", features.config.band_set.size()},
                  {"git_blob", git_blob_hash_file(path)}};
  write_text(opts.out / "summary.json", dump(summary));
  log << "featurize: " << features.items.size() << " blocks -> " << path.generic_string() << "\n";
  return kExitOk;
}

int cmd_train(const Options& opts, Resolved& r, std::ostream& log) {
  json manifest = base_manifest(opts, r);
  json data;
  const auto features = load_features(r, data);
  manifest["config"]["run"] = r.run;
  const auto bank = make_bank(r, features.label_set);
  const std::string hash_before = bank.content_hash();
  manifest["data"] = data;
  manifest["data"]["items"] = features.items.size();
  manifest["bank"] = bank_record(bank);
  manifest["folds"] = {"train:all"};
  manifest["outputs"] = {"model.eegp", "results.csv", "summary.json"};
  write_manifest(opts.out, manifest, log);

  std::vector<std::size_t> all(features.items.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto stats = feat::compute_norm_stats(features);
  const auto samples = feat::assemble_samples(features, all, stats);
  model::EmotionClip clip(r.run.model, model::HeadKind::kMatching, features.label_set.size(),
                          seed_mix(r.run.seed, {fnv1a64("train:all")}));
  const auto result = train::train_model(clip, &bank, samples, all, r.run);
  clip.params().save(opts.out / "model.eegp");

  train::FoldResult row;
  row.protocol = "train";
  row.fold_id = "all";
  row.n_train = all.size();
  row.n_test = all.size();
  row.accuracy = train::accuracy(clip, &bank, samples, all);
  row.epochs = result.history.size();
  row.best_epoch = result.best_epoch;
  row.best_val_acc = result.best_val_acc;
  write_text(opts.out / "results.csv", train::results_csv(std::span(&row, 1)));

  json history = json::array();
  for (const auto& e : result.history) {
    history.push_back({{"epoch", e.epoch}, {"lr", e.lr}, {"train_loss", e.train_loss}, {"val_acc", e.val_acc}});
  }
  const std::string hash_after = bank.content_hash();
  json summary = {{"protocol", "train"},
                  {"train_accuracy", row.accuracy},
                  {"best_epoch", result.best_epoch},
                  {"best_val_acc", result.best_val_acc},
                  {"early_stopped", result.early_stopped},
                  {"history", history},
                  {"bank_hash_before", hash_before},
                  {"bank_hash_after", hash_after},
                  {"bank_unchanged", hash_before == hash_after}};
  write_text(opts.out / "summary.json", dump(summary));
  log << "train: accuracy " << train::format_fixed(row.accuracy) << " after " << row.epochs << " epochs\n";
  return hash_before == hash_after ? kExitOk : kExitInvariant;
}

int cmd_experiment(const Options& opts, Resolved& r, std::ostream& log, std::ostream& err) {
  json manifest = base_manifest(opts, r);
  json data;
  const auto features = load_features(r, data);
  manifest["config"]["run"] = r.run;
  const auto bank = make_bank(r, features.label_set);
  manifest["data"] = data;
  manifest["data"]["items"] = features.items.size();
  manifest["bank"] = bank_record(bank);

  const train::ExperimentInputs in{features, bank, r.run, r.jobs};
  const auto meta = train::sample_meta(features);
  std::vector<train::SplitPlan> plans;
  if (opts.command == "eval-crosstime") {
    plans = train::cross_time_folds(meta);
  } else if (opts.command == "eval-nshot") {
    plans = train::nshot_plans(in);
  } else {
    plans = train::loso_folds(meta);
  }
  json folds = json::array();
  for (const auto& p : plans) {
    folds.push_back({{"descriptor", p.descriptor()},
                     {"n_train", p.train.size()},
                     {"n_adapt", p.adapt.size()},
                     {"n_test", p.test.size()}});
  }
  manifest["folds"] = folds;
  json outputs = {"results.csv", "summary.json"};
  if (opts.command == "ablate") outputs.push_back("table.csv");
  manifest["outputs"] = outputs;
  write_manifest(opts.out, manifest, log);

  log << opts.command << ": " << plans.size() << " plans, " << features.items.size() << " blocks\n";
  train::ExperimentResult result;
  if (opts.command == "eval-loso") result = train::run_loso(in);
  else if (opts.command == "eval-crosstime") result = train::run_cross_time(in);
  else if (opts.command == "eval-nshot") result = train::run_nshot(in);
  else result = train::run_ablation(in);

  write_text(opts.out / "results.csv", train::results_csv(result.folds));
  json summary = train::summarize(result);
  summary["bank_source"] = bank_record(bank)["source"];
  write_text(opts.out / "summary.json", dump(summary));
  if (opts.command == "ablate") write_text(opts.out / "table.csv", train::ablation_table_csv(result));

  if (summary.contains("overall")) {
    log << "mean accuracy " << train::format_fixed(summary["overall"]["mean"].get<double>()) << " (std "
        << train::format_fixed(summary["overall"]["std"].get<double>()) << ")\n";
  }
  if (result.bank_hash_before != result.bank_hash_after) {
    err << "error: text bank changed during training\n";
    return kExitInvariant;
  }
  return kExitOk;
}

int cmd_report(const Options& opts, Resolved& r, std::ostream& log) {
  if (!r.input) throw Error(ErrorCode::kInvalidArgument, "report needs --input results.csv");
  json manifest = base_manifest(opts, r);
  const auto table = train::parse_csv(read_text(*r.input));
  const auto charts = train::render_report(table);
  json outputs = {"summary.json"};
  if (charts.per_subject) outputs.push_back("per_subject.svg");
  if (charts.nshot_curve) outputs.push_back("nshot_curve.svg");
  manifest["outputs"] = outputs;
  if (!charts.per_subject && !charts.nshot_curve) {
    throw Error(ErrorCode::kInvalidArgument,
                r.input->string() + ": needs subject/accuracy columns or at least two n_shot values");
  }
  write_manifest(opts.out, manifest, log);
  json summary = {{"rows", table.rows.size()}, {"charts", json::array()}};
  if (charts.per_subject) {
    write_text(opts.out / "per_subject.svg", *charts.per_subject);
    summary["charts"].push_back("per_subject.svg");
  }
  if (charts.nshot_curve) {
    write_text(opts.out / "nshot_curve.svg", *charts.nshot_curve);
    summary["charts"].push_back("nshot_curve.svg");
  }
  write_text(opts.out / "summary.json", dump(summary));
  log << "report: " << summary["charts"].size() << " chart(s) in " << opts.out.generic_string() << "\n";
  return kExitOk;
}

}  // namespace

int execute(const Options& opts, std::ostream& log, std::ostream& err) {
  try {
    const auto& names = commands();
    if (std::find(names.begin(), names.end(), opts.command) == names.end()) {
      err << "error: unknown command '" << opts.command << "'\n";
      return kExitUsage;
    }
    Resolved r = resolve_config(opts);
    fs::create_directories(opts.out);
    if (opts.command == "synth") return cmd_synth(opts, r, log);
    if (opts.command == "featurize") return cmd_featurize(opts, r, log);
    if (opts.command == "train") return cmd_train(opts, r, log);
    if (opts.command == "report") return cmd_report(opts, r, log);
    return cmd_experiment(opts, r, log, err);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidConfig ? kExitUsage : kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int main_entry(int argc, char** argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"EEG-to-text emotion matching pipeline"};
  app.require_subcommand(1);
  Options opts;
  std::string config, out = "out", input, bank;
  std::uint64_t seed = 0;
  std::size_t jobs = 1, grid = 32;

  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--input", input, "recording, feature file, CSV index or results CSV");
    sub->add_option("--seed", seed, "run seed (synth: generator seed)");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--bank", bank, "stub or an embedding file");
    sub->add_option("--grid", grid, "grid size")->check(CLI::IsMember({32, 64}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, log, err) == 0 ? kExitOk : kExitUsage;
  }
  for (auto* sub : app.get_subcommands()) {
    opts.command = sub->get_name();
    if (sub->count("--config")) opts.config = config;
    opts.out = out;
    if (sub->count("--input")) opts.input = input;
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--jobs")) opts.jobs = jobs;
    if (sub->count("--bank")) opts.bank = bank;
    if (sub->count("--grid")) opts.grid = grid;
  }
  return execute(opts, log, err);
}

}  // namespace eegclip::cli
