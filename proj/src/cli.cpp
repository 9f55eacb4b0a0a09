#include "fusion/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>

#include "fusion/checkpoint.hpp"
#include "fusion/report.hpp"
#include "fusion/synth.hpp"
#include "fusion/train.hpp"
#include "fusion/transfer.hpp"

namespace fusion::cli {
namespace fs = std::filesystem;

void to_json(Json& j, const ExperimentConfig& c) {
  j = Json{{"command", c.command},
           {"data", c.data},
           {"synth", c.synth},
           {"rpm", c.rpm},
           {"torque", c.torque},
           {"force", c.force},
           {"condition", c.condition},
           {"per-class", c.per_class},
           {"duration", c.duration},
           {"sample-rate", c.sample_rate},
           {"synth-seed", c.synth_seed},
           {"window", c.window},
           {"stride", c.stride},
           {"test-frac", c.test_frac},
           {"val-frac", c.val_frac},
           {"split-mode", c.split_mode},
           {"standardize", c.standardize},
           {"seed", c.seed},
           {"epochs", c.epochs},
           {"batch-size", c.batch_size},
           {"lr", c.lr},
           {"l2", c.l2},
           {"strategy", c.strategy},
           {"checkpoint", c.checkpoint},
           {"reinit-seed", c.reinit_seed},
           {"folds", c.folds},
           {"input", c.input},
           {"formats", c.formats},
           {"out", c.out},
           {"quiet", c.quiet}};
}

void from_json(const Json& j, ExperimentConfig& c) {
  c = ExperimentConfig{};
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("command", c.command);
  get("data", c.data);
  get("synth", c.synth);
  get("rpm", c.rpm);
  get("torque", c.torque);
  get("force", c.force);
  get("condition", c.condition);
  get("per-class", c.per_class);
  get("duration", c.duration);
  get("sample-rate", c.sample_rate);
  get("synth-seed", c.synth_seed);
  get("window", c.window);
  get("stride", c.stride);
  get("test-frac", c.test_frac);
  get("val-frac", c.val_frac);
  get("split-mode", c.split_mode);
  get("standardize", c.standardize);
  get("seed", c.seed);
  get("epochs", c.epochs);
  get("batch-size", c.batch_size);
  get("lr", c.lr);
  get("l2", c.l2);
  get("strategy", c.strategy);
  get("checkpoint", c.checkpoint);
  get("reinit-seed", c.reinit_seed);
  get("folds", c.folds);
  get("input", c.input);
  get("formats", c.formats);
  get("out", c.out);
  get("quiet", c.quiet);
}

std::string condition_name(double rpm, double torque, double force) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "N%02ld_M%02ld_F%02ld", std::lround(rpm / 100.0),
                std::lround(torque * 10.0), std::lround(force / 100.0));
  return buf;
}

int exit_code(const std::string& category) {
  if (category == "config") return 2;
  if (category == "data") return 3;
  if (category == "io") return 4;
  if (category == "numeric") return 5;
  if (category == "shape") return 6;
  return 1;
}

namespace {

struct Context {
  ExperimentConfig cfg;
  std::ostream& out;
  fs::path dir;

  void say(const std::string& line) const {
    if (!cfg.quiet) out << line << '\n';
  }
};

OperatingCondition synth_condition(const ExperimentConfig& c) {
  OperatingCondition oc{c.rpm, c.torque, c.force,
                        c.condition.empty() ? condition_name(c.rpm, c.torque, c.force) : c.condition};
  validate(oc);
  return oc;
}

SynthSpec synth_base(const ExperimentConfig& c) {
  SynthSpec base;
  base.duration_s = c.duration;
  base.sample_rate = c.sample_rate;
  return base;
}

const std::vector<FaultClass> kAllClasses{FaultClass::Healthy, FaultClass::InnerFault,
                                          FaultClass::OuterFault};

std::vector<Recording> load_data(const ExperimentConfig& c) {
  if (c.synth) {
    if (!c.data.empty()) throw ConfigError("--synth and --data are mutually exclusive");
    if (c.per_class < 1) throw ConfigError("--per-class must be >= 1");
    return gen_recordings(kAllClasses, std::vector<int>(kAllClasses.size(), c.per_class),
                          synth_condition(c), c.synth_seed, synth_base(c));
  }
  if (c.data.empty()) throw ConfigError("no dataset: pass --data PATH or --synth");
  std::vector<Recording> recs;
  for (const auto& item : c.data) {
    fs::path p(item);
    if (fs::is_directory(p)) p /= "manifest.json";
    if (p.extension() == ".json") {
      auto more = load_manifest_recordings(p);
      for (auto& r : more) recs.push_back(std::move(r));
    } else {
      recs.push_back(load_recording(p));
    }
  }
  if (recs.empty()) throw DataError("dataset holds no recordings");
  return recs;
}

PipelineConfig pipeline(const ExperimentConfig& c) {
  PipelineConfig p;
  p.window_len = c.window;
  p.stride = c.stride;
  p.test_fraction = c.test_frac;
  p.validation_fraction = c.val_frac;
  p.all_test = c.test_frac == 0.0 && c.val_frac == 0.0;
  p.seed = c.seed;
  p.mode = parse_split_mode(c.split_mode);
  p.scope = parse_standardize_scope(c.standardize);
  return p;
}

Hyperparams hyperparams(const ExperimentConfig& c) {
  Hyperparams hp;
  hp.learning_rate = c.lr;
  hp.batch_size = c.batch_size;
  hp.epochs = c.epochs;
  hp.l2.lambda = c.l2;
  hp.seed = c.seed;
  validate(hp);
  return hp;
}

ArchitectureConfig architecture(const ExperimentConfig& c) {
  ArchitectureConfig a;
  a.window_len = c.window;
  validate(a);
  return a;
}

RenderFormats parse_formats(const std::string& list) {
  RenderFormats f{false, false, false};
  std::stringstream s(list);
  std::string item;
  while (std::getline(s, item, ',')) {
    if (item == "json") {
      f.json = true;
    } else if (item == "csv") {
      f.csv = true;
    } else if (item == "svg") {
      f.svg = true;
    } else {
      throw ConfigError("unknown report format '" + item + "' (expected json, csv, svg)");
    }
  }
  return f;
}

std::string condition_of(const std::vector<Recording>& recs) {
  return recs.front().condition.name;
}

TrainingMetadata metadata_for(const ExperimentConfig& c, const std::vector<Recording>& recs,
                              const PreparedData& prep) {
  TrainingMetadata m;
  m.seed = c.seed;
  m.epochs = c.epochs;
  m.learning_rate = c.lr;
  m.l2_lambda = c.l2;
  m.dataset_fingerprint = fingerprint(recs);
  m.condition = condition_of(recs);
  if (prep.standardizer) store_standardizer(*prep.standardizer, m);
  return m;
}

void write_history(const fs::path& dir, const TrainHistory& h, const std::string& stem = "history") {
  write_text(dir / (stem + ".csv"), history_csv(h));
  write_text(dir / (stem + ".json"), Json(h).dump(2) + "\n");
  std::vector<double> train_loss, val_loss, train_acc, val_acc;
  for (const auto& e : h.epochs) {
    train_loss.push_back(e.train_loss);
    train_acc.push_back(e.train_acc);
    if (e.has_validation) {
      val_loss.push_back(e.val_loss);
      val_acc.push_back(e.val_acc);
    }
  }
  write_text(dir / (stem + "_loss.svg"),
             curves_svg("loss", {{"train", train_loss}, {"validation", val_loss}}));
  write_text(dir / (stem + "_accuracy.svg"),
             curves_svg("accuracy", {{"train", train_acc}, {"validation", val_acc}}));
}

EpochCallback progress(const Context& ctx) {
  return [&ctx](const EpochRecord& e) {
    char buf[160];
    if (e.has_validation) {
      std::snprintf(buf, sizeof buf, "epoch %3d  loss %.5f  acc %.4f  val_loss %.5f  val_acc %.4f",
                    e.epoch, e.train_loss, e.train_acc, e.val_loss, e.val_acc);
    } else {
      std::snprintf(buf, sizeof buf, "epoch %3d  loss %.5f  acc %.4f", e.epoch, e.train_loss,
                    e.train_acc);
    }
    ctx.say(buf);
    return true;
  };
}

std::string accuracy_line(const std::string& what, const MetricsReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s accuracy %.5f +/- %.5f (n=%lld)", what.c_str(), r.accuracy,
                r.ci.half_width, static_cast<long long>(r.ci.n));
  return buf;
}

// --- subcommands -----------------------------------------------------------

void cmd_synth(const Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.per_class < 1) throw ConfigError("--per-class must be >= 1");
  const auto m = gen_dataset(kAllClasses, std::vector<int>(kAllClasses.size(), c.per_class),
                             synth_condition(c), c.synth_seed, ctx.dir, synth_base(c));
  ctx.say("wrote " + std::to_string(m.entries.size()) + " recordings to " + ctx.dir.string());
}

void cmd_segment(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto prep = prepare(load_data(c), pipeline(c));
  std::vector<std::string> part(prep.windows.size(), "");
  for (auto i : prep.plan.train) part[i] = "train";
  for (auto i : prep.plan.validation) part[i] = "validation";
  for (auto i : prep.plan.test) part[i] = "test";
  std::ostringstream csv;
  csv << "index,recording_id,label,start,partition\n";
  for (std::size_t i = 0; i < prep.windows.size(); ++i) {
    const auto& w = prep.windows.windows[i];
    csv << i << ',' << w.recording_id << ',' << to_string(w.label) << ',' << w.start << ','
        << part[i] << '\n';
  }
  write_text(ctx.dir / "windows.csv", csv.str());
  const auto counts = prep.windows.class_counts();
  Json summary{{"windows", prep.windows.size()},
               {"class_counts", counts},
               {"train", prep.plan.train.size()},
               {"validation", prep.plan.validation.size()},
               {"test", prep.plan.test.size()}};
  write_text(ctx.dir / "split.json", summary.dump(2) + "\n");
  ctx.say(std::to_string(prep.windows.size()) + " windows: train " +
          std::to_string(prep.plan.train.size()) + ", validation " +
          std::to_string(prep.plan.validation.size()) + ", test " +
          std::to_string(prep.plan.test.size()));
}

void cmd_train(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto hp = hyperparams(c);
  const auto arch = architecture(c);
  const auto recs = load_data(c);
  const auto prep = prepare(recs, pipeline(c));
  if (prep.plan.test.empty()) throw ConfigError("train needs a test partition (--test-frac > 0)");
  auto model = build_model<float>(arch, c.seed);
  ctx.say("trainable parameters: " + std::to_string(count_trainable(model)));
  const auto history = train(model, prep.windows, prep.plan.train, prep.plan.validation, hp,
                             progress(ctx));
  save_checkpoint(model, metadata_for(c, recs, prep), ctx.dir / "model.ckpt");
  write_history(ctx.dir, history);
  auto report = evaluate(model, prep.windows, prep.plan.test);
  report.source_condition = report.target_condition = condition_of(recs);
  report.wall_seconds += history.total_seconds;
  render_report(report, ctx.dir, parse_formats(c.formats));
  ctx.say(accuracy_line("test", report));
}

void cmd_crossval(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto hp = hyperparams(c);
  const auto arch = architecture(c);
  const auto prep = prepare(load_data(c), pipeline(c));
  // With no held-out test set every window takes part in the folds.
  const auto& partition = pipeline(c).all_test ? prep.plan.test : prep.plan.train;
  const auto result = crossval([&] { return build_model<float>(arch, c.seed); }, prep.windows,
                               partition, c.folds, hp);
  for (std::size_t f = 0; f < result.histories.size(); ++f) {
    write_history(ctx.dir, result.histories[f], "fold" + std::to_string(f + 1));
  }
  Json summary{{"folds", c.folds},
               {"final_val_accuracy", result.final_val_accuracy},
               {"mean_val_accuracy", result.mean_val_accuracy},
               {"std_val_accuracy", result.std_val_accuracy}};
  write_text(ctx.dir / "crossval.json", summary.dump(2) + "\n");
  char buf[128];
  std::snprintf(buf, sizeof buf, "cross-validation accuracy %.5f +/- %.5f over %d folds",
                result.mean_val_accuracy, result.std_val_accuracy, c.folds);
  ctx.say(buf);
}

void cmd_transfer(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto strategy = parse_strategy(c.strategy);
  const auto hp = hyperparams(c);
  const auto ckpt = load_checkpoint(c.checkpoint);
  if (ckpt.model.config().window_len != c.window) {
    throw ConfigError("--window " + std::to_string(c.window) + " does not match the checkpoint's " +
                      std::to_string(ckpt.model.config().window_len));
  }
  const auto recs = load_data(c);
  const auto fixed = stored_standardizer(ckpt.metadata);
  const auto prep = prepare(recs, pipeline(c), fixed ? &*fixed : nullptr);
  if (prep.plan.test.empty()) throw ConfigError("transfer needs a test partition (--test-frac > 0)");
  const auto target = condition_of(recs);

  auto direct = cross_condition_eval(ckpt, prep.windows, prep.plan.test, ckpt.metadata.condition,
                                     target);
  render_report(direct, ctx.dir, parse_formats(c.formats), "direct");
  ctx.say(accuracy_line("direct", direct));

  auto model = apply_strategy(ckpt, strategy, c.reinit_seed, architecture(c));
  ctx.say(to_string(strategy) + " trainable parameters: " + std::to_string(count_trainable(model)));
  const auto history = train(model, prep.windows, prep.plan.train, prep.plan.validation, hp,
                             progress(ctx));
  auto report = evaluate(model, prep.windows, prep.plan.test);
  report.wall_seconds += history.total_seconds;
  report.source_condition = ckpt.metadata.condition;
  report.target_condition = target;
  if (strategy == Strategy::Model2) {
    report.notes.push_back(
        "model2 trainable count is the full total minus the three conv1 layers (" +
        std::to_string(count_parameters(model) - count_trainable(model)) +
        " parameters); a figure equal to the full total would mean nothing was frozen");
  }
  auto meta = metadata_for(c, recs, prep);
  meta.strategy = to_string(strategy);
  meta.condition = target;
  save_checkpoint(model, meta, ctx.dir / "model.ckpt");
  write_history(ctx.dir, history);
  render_report(report, ctx.dir, parse_formats(c.formats));
  ctx.say(accuracy_line(to_string(strategy), report));
}

void cmd_evaluate(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto ckpt = load_checkpoint(c.checkpoint);
  auto cfg = c;
  cfg.window = ckpt.model.config().window_len;
  const auto recs = load_data(cfg);
  const auto fixed = stored_standardizer(ckpt.metadata);
  const auto prep = prepare(recs, pipeline(cfg), fixed ? &*fixed : nullptr);
  if (prep.plan.test.empty()) throw DataError("no test windows to evaluate");
  const auto report = cross_condition_eval(ckpt, prep.windows, prep.plan.test,
                                           ckpt.metadata.condition, condition_of(recs));
  render_report(report, ctx.dir, parse_formats(c.formats));
  ctx.say(accuracy_line("evaluation", report));
}

void cmd_report(const Context& ctx) {
  const auto& c = ctx.cfg;
  const fs::path input(c.input);
  const auto report = load_report(input);
  const auto written = render_report(report, ctx.dir, parse_formats(c.formats),
                                     input.stem().string());
  for (const auto& p : written) ctx.say("wrote " + p.string());
}

// --- parsing ---------------------------------------------------------------

void add_data_options(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--data", c.data, "manifest.json, dataset directory or recording file(s)");
  sub->add_flag("--synth", c.synth, "generate a synthetic dataset in memory");
  sub->add_option("--rpm", c.rpm, "synthetic rotational speed")->capture_default_str();
  sub->add_option("--torque", c.torque, "synthetic load torque (Nm)")->capture_default_str();
  sub->add_option("--force", c.force, "synthetic radial force (N)")->capture_default_str();
  sub->add_option("--condition", c.condition, "condition name (default derived from rpm/torque/force)");
  sub->add_option("--per-class", c.per_class, "synthetic recordings per class")->capture_default_str();
  sub->add_option("--duration", c.duration, "synthetic recording length (s)")->capture_default_str();
  sub->add_option("--sample-rate", c.sample_rate, "synthetic sample rate (Hz)")->capture_default_str();
  sub->add_option("--synth-seed", c.synth_seed, "synthetic dataset seed")->capture_default_str();
}

void add_split_options(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--window", c.window, "window length")->capture_default_str();
  sub->add_option("--stride", c.stride, "window stride")->capture_default_str();
  sub->add_option("--test-frac", c.test_frac, "test fraction")->capture_default_str();
  sub->add_option("--val-frac", c.val_frac, "validation fraction")->capture_default_str();
  sub->add_option("--split-mode", c.split_mode, "window | recording")->capture_default_str();
  sub->add_option("--standardize", c.standardize, "train | recording")->capture_default_str();
  sub->add_option("--seed", c.seed, "split, init and shuffle seed")->capture_default_str();
}

void add_train_options(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--epochs", c.epochs, "epochs")->capture_default_str();
  sub->add_option("--batch-size", c.batch_size, "mini-batch size")->capture_default_str();
  sub->add_option("--lr", c.lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--l2", c.l2, "L2 coefficient")->capture_default_str();
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// Replays an archived config: its entries become flags placed before the
// user's own, so explicit flags win. Keys the subcommand does not accept are
// skipped: a train config can seed a transfer run and vice versa.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::function<bool(const std::string&)>& accepts) {
  std::vector<std::string> out;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (path.empty()) return out;
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": malformed config: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path + ": config must be a JSON object");
  std::vector<std::string> replay;
  for (const auto& [key, value] : j.items()) {
    if (key == "command" || !accepts(key)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) replay.push_back("--" + key);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        replay.push_back("--" + key);
        replay.push_back(v.get<std::string>());
      }
    } else if (value.is_string()) {
      if (value.get<std::string>().empty()) continue;
      replay.push_back("--" + key);
      replay.push_back(value.get<std::string>());
    } else {
      replay.push_back("--" + key);
      replay.push_back(value.dump());
    }
  }
  // argv[0] and the subcommand come first.
  const std::size_t head = std::min<std::size_t>(2, out.size());
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(head), replay.begin(), replay.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::string category = "config";
  try {
    ExperimentConfig c;
    CLI::App app{"Late-fusion 1D CNN bearing-fault toolkit", "fusion_cli"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;

    auto common = [&](CLI::App* sub) {
      sub->add_option("--out", c.out, "output directory")->envname(kOutDirEnv);
      sub->add_option("--config", config_path, "replay an archived config.json");
      sub->add_flag("--quiet", c.quiet, "suppress progress output");
    };
    auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
    add_data_options(synth, c);
    common(synth);

    auto* segment = app.add_subcommand("segment", "segment, split and list windows");
    add_data_options(segment, c);
    add_split_options(segment, c);
    common(segment);

    auto* train_cmd = app.add_subcommand("train", "train a fresh model and evaluate it");
    add_data_options(train_cmd, c);
    add_split_options(train_cmd, c);
    add_train_options(train_cmd, c);
    train_cmd->add_option("--formats", c.formats, "report formats")->capture_default_str();
    common(train_cmd);

    auto* cv = app.add_subcommand("crossval", "k-fold cross-validation on the training partition");
    add_data_options(cv, c);
    add_split_options(cv, c);
    add_train_options(cv, c);
    cv->add_option("--folds", c.folds, "number of folds")->capture_default_str();
    common(cv);

    auto* transfer = app.add_subcommand("transfer", "fine-tune a checkpoint on a target condition");
    add_data_options(transfer, c);
    add_split_options(transfer, c);
    add_train_options(transfer, c);
    transfer->add_option("--strategy", c.strategy, "model1 | model2 | model3")->required();
    transfer->add_option("--checkpoint", c.checkpoint, "source checkpoint")->required();
    transfer->add_option("--reinit-seed", c.reinit_seed, "seed for model3's new head")
        ->capture_default_str();
    transfer->add_option("--formats", c.formats, "report formats")->capture_default_str();
    common(transfer);

    auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint without training");
    add_data_options(eval, c);
    add_split_options(eval, c);
    eval->add_option("--checkpoint", c.checkpoint, "checkpoint")->required();
    eval->add_option("--formats", c.formats, "report formats")->capture_default_str();
    common(eval);

    auto* report = app.add_subcommand("report", "re-render a report.json");
    report->add_option("--input", c.input, "report.json")->required();
    report->add_option("--formats", c.formats, "report formats")->capture_default_str();
    common(report);

    const std::string sub_name = raw_args.size() > 1 ? raw_args[1] : "";
    const auto args = expand_config(raw_args, [&](const std::string& key) {
      const auto* sub = app.get_subcommand_no_throw(sub_name);
      return sub != nullptr && sub->get_option_no_throw("--" + key) != nullptr;
    });
    // Per-command defaults that differ from the baseline.
    if (sub_name == "transfer") {
      c.lr = 1e-5;
      c.val_frac = 0.2;
    } else if (sub_name == "evaluate") {
      c.test_frac = 0.0;
    }

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      throw ConfigError(e.what());
    }

    CLI::App* chosen = app.get_subcommands().front();
    c.command = chosen->get_name();
    if (c.out.empty()) c.out = "runs/" + c.command;
    Context ctx{c, out, fs::path(c.out)};
    std::error_code ec;
    fs::create_directories(ctx.dir, ec);
    if (ec) throw IoError("cannot create output directory " + c.out + ": " + ec.message());
    write_text(ctx.dir / "config.json", Json(c).dump(2) + "\n");

    if (c.command == "synth") cmd_synth(ctx);
    else if (c.command == "segment") cmd_segment(ctx);
    else if (c.command == "train") cmd_train(ctx);
    else if (c.command == "crossval") cmd_crossval(ctx);
    else if (c.command == "transfer") cmd_transfer(ctx);
    else if (c.command == "evaluate") cmd_evaluate(ctx);
    else if (c.command == "report") cmd_report(ctx);
    return 0;
  } catch (const Error& e) {
    category = e.category();
    err << "error: " << category << ": " << one_line(e.what()) << '\n';
  } catch (const Json::exception& e) {
    category = "data";
    err << "error: data: " << one_line(e.what()) << '\n';
  } catch (const std::exception& e) {
    category = "internal";
    err << "error: internal: " << one_line(e.what()) << '\n';
  }
  return exit_code(category);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace fusion::cli
