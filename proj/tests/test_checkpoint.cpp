#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fusion/checkpoint.hpp"
#include "fusion/json_io.hpp"

using namespace fusion;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "fusion_tests";
  fs::create_directories(dir);
  return dir / name;
}

TrainingMetadata sample_metadata() {
  TrainingMetadata m;
  m.seed = 42;
  m.epochs = 3;
  m.learning_rate = 0.001;
  m.l2_lambda = 0.01;
  m.dataset_fingerprint = "abc123";
  m.condition = "N15_M07_F10";
  m.standardization_mean = {0.1, -0.2, 0.3};
  m.standardization_std = {1.5, 2.5, 0.5};
  return m;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
  ArchitectureConfig cfg;
  cfg.window_len = 128;
  auto model = build_model<float>(cfg, 77);
  model.group(kDenseBias).value.setConstant(0.125f);
  model.group(0).trainable = false;
  const auto path = scratch("roundtrip.ckpt");
  save_checkpoint(model, sample_metadata(), path);
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.metadata == sample_metadata());
  CHECK(loaded.model.config() == cfg);
  CHECK(loaded.model.provenance() == Provenance::Checkpoint);
  for (int i = 0; i < kGroupCount; ++i) {
    CHECK(loaded.model.value(i) == model.value(i));
  }
  // Trainability is a property of a run, not of the weights.
  CHECK(loaded.model.group(0).trainable);

  const auto again = scratch("roundtrip2.ckpt");
  save_checkpoint(loaded.model, loaded.metadata, again);
  std::ifstream a(path, std::ios::binary), b(again, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("checkpoint header declares the parameter count") {
  const auto model = build_model<float>(ArchitectureConfig{}, 1);
  const auto path = scratch("full.ckpt");
  save_checkpoint(model, {}, path);
  const auto header = Json::parse(read_checkpoint_header(path));
  CHECK(header.at("parameter_count").get<Index>() == 47981011);
  CHECK(header.at("groups").size() == kGroupCount);
  CHECK(fs::file_size(path) > 47981011u * 4u);
  const auto loaded = load_checkpoint(path);
  CHECK(count_parameters(loaded.model) == 47981011);
  fs::remove(path);
}

TEST_CASE("corrupted checkpoints are rejected") {
  ArchitectureConfig cfg;
  cfg.window_len = 64;
  const auto model = build_model<float>(cfg, 2);
  const auto path = scratch("corrupt.ckpt");
  save_checkpoint(model, {}, path);
  const auto size = fs::file_size(path);

  SUBCASE("truncated payload") {
    fs::resize_file(path, size - 4);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("trailing bytes") {
    std::ofstream(path, std::ios::binary | std::ios::app) << "x";
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("bad magic") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(0);
    f.write("XXXXXXXX", 8);
    f.close();
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("future version") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(8);
    const char v[4] = {9, 0, 0, 0};
    f.write(v, 4);
    f.close();
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(scratch("does_not_exist.ckpt")), IoError);
  }
}

TEST_CASE("non-finite parameters are not saved") {
  ArchitectureConfig cfg;
  cfg.window_len = 64;
  auto model = build_model<float>(cfg, 2);
  model.group(kOutputBias).value(0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(save_checkpoint(model, {}, scratch("nan.ckpt")), NumericError);
}
