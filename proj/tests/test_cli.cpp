#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "fusion/checkpoint.hpp"
#include "fusion/cli.hpp"
#include "fusion/report.hpp"

using namespace fusion;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fusion_cli");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fusion_tests" / "cli" / name;
  fs::remove_all(dir);
  return dir;
}

const std::vector<std::string> kSmallSynth{"--synth",       "--per-class", "1",   "--duration",
                                           "0.5",           "--sample-rate", "8000", "--window",
                                           "512",           "--stride",    "256", "--quiet"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

TEST_CASE("experiment config round trips through json") {
  cli::ExperimentConfig c;
  c.command = "transfer";
  c.data = {"a", "b"};
  c.strategy = "model2";
  c.lr = 1e-5;
  c.seed = 7;
  const Json j = c;
  CHECK(j.get<cli::ExperimentConfig>() == c);
  CHECK(j.contains("batch-size"));
}

TEST_CASE("condition names") {
  CHECK(cli::condition_name(1500, 0.7, 1000) == "N15_M07_F10");
  CHECK(cli::condition_name(900, 0.1, 400) == "N09_M01_F04");
}

TEST_CASE("train writes a complete run directory and replays bit-identically") {
  const auto dir = fresh_dir("train");
  auto r = run_cli(with({"train", "--epochs", "1", "--out", dir.string()}, kSmallSynth));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"config.json", "model.ckpt", "history.csv", "history.json", "report.json", "report.csv",
                        "report_roc.svg"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto report = load_report(dir / "report.json");
  CHECK(report.source_condition == "N15_M07_F10");
  const auto ckpt = load_checkpoint(dir / "model.ckpt");
  CHECK(ckpt.metadata.standardization_mean.size() == 3);
  CHECK(ckpt.model.config().window_len == 512);

  const auto replay = fresh_dir("replay");
  r = run_cli({"train", "--config", (dir / "config.json").string(), "--out", replay.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(read_text(replay / "model.ckpt") == read_text(dir / "model.ckpt"));
  CHECK(read_text(replay / "history.csv").size() > 0);
}

TEST_CASE("transfer and evaluate from a checkpoint") {
  const auto base = fresh_dir("base");
  auto r = run_cli(with({"train", "--epochs", "1", "--out", base.string()}, kSmallSynth));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto ckpt = (base / "model.ckpt").string();

  const auto tl = fresh_dir("transfer");
  r = run_cli(with({"transfer", "--strategy", "model2", "--checkpoint", ckpt, "--epochs", "1", "--rpm", "900",
                    "--out", tl.string()},
                   kSmallSynth));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = load_report(tl / "report.json");
  CHECK(report.source_condition == "N15_M07_F10");
  CHECK(report.target_condition == "N09_M07_F10");
  CHECK(report.trainable_params == 2438611 - 384);
  CHECK(!report.notes.empty());
  CHECK(fs::exists(tl / "direct.json"));
  const auto config = Json::parse(read_text(tl / "config.json"));
  CHECK(config.at("lr").get<double>() == 1e-5);
  CHECK(config.at("val-frac").get<double>() == 0.2);
  CHECK(load_checkpoint(tl / "model.ckpt").metadata.strategy == "model2");

  const auto ev = fresh_dir("evaluate");
  r = run_cli(with({"evaluate", "--checkpoint", ckpt, "--out", ev.string()}, kSmallSynth));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(load_report(ev / "report.json").confusion.total() == 3 * 14);

  const auto rr = fresh_dir("rerender");
  r = run_cli({"report", "--input", (ev / "report.json").string(), "--formats", "svg", "--out", rr.string(),
               "--quiet"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(rr / "report_roc.svg"));
}

TEST_CASE("synth then segment from disk") {
  const auto data = fresh_dir("data");
  auto r = run_cli({"synth", "--per-class", "2", "--duration", "0.25", "--sample-rate", "8000", "--out",
                    data.string(), "--quiet"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(data / "manifest.json"));
  const auto seg = fresh_dir("segment");
  r = run_cli({"segment", "--data", data.string(), "--window", "512", "--stride", "512", "--out",
               seg.string(), "--quiet"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto split = Json::parse(read_text(seg / "split.json"));
  CHECK(split.at("windows").get<int>() == 6 * 3);
  CHECK(split.at("test").get<int>() == 4);
}

TEST_CASE("failures print one categorized line") {
  auto r = run_cli({"transfer", "--strategy", "model2", "--synth"});
  CHECK(r.code != 0);
  CHECK(r.err.rfind("error: config: ", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  const auto dir = fresh_dir("bad_strategy");
  r = run_cli({"transfer", "--strategy", "model9", "--checkpoint", "x.ckpt", "--synth", "--out", dir.string()});
  CHECK(r.code == cli::exit_code("config"));
  CHECK(r.err.rfind("error: config: unknown strategy", 0) == 0);

  r = run_cli({"train", "--no-such-flag"});
  CHECK(r.code == cli::exit_code("config"));
  r = run_cli({"frobnicate"});
  CHECK(r.code == cli::exit_code("config"));

  r = run_cli({"evaluate", "--checkpoint", "/nonexistent/model.ckpt", "--synth", "--out", dir.string()});
  CHECK(r.code == cli::exit_code("io"));
  CHECK(r.err.rfind("error: io: ", 0) == 0);

  r = run_cli({"train", "--out", dir.string()});
  CHECK(r.err.rfind("error: config: no dataset", 0) == 0);
}

TEST_CASE("output directory can come from the environment") {
  const auto dir = fresh_dir("from_env");
  ::setenv(cli::kOutDirEnv, dir.string().c_str(), 1);
  const auto r = run_cli({"synth", "--per-class", "1", "--duration", "0.1", "--sample-rate", "8000", "--quiet"});
  ::unsetenv(cli::kOutDirEnv);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "config.json"));
}
