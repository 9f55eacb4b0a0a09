#include "fusion/checkpoint.hpp"

#include <fstream>
#include <bit>

#include "binary_io.hpp"
#include "fusion/json_io.hpp"

namespace fusion {

void to_json(Json& j, const ArchitectureConfig& cfg) {
  j = Json{{"window_len", cfg.window_len},   {"conv1_filters", cfg.conv1_filters},
           {"conv2_filters", cfg.conv2_filters}, {"kernel", cfg.kernel},
           {"pool", cfg.pool},               {"dense_units", cfg.dense_units},
           {"classes", cfg.classes},         {"branches", kBranches}};
}

void from_json(const Json& j, ArchitectureConfig& cfg) {
  if (j.contains("branches") && j.at("branches").get<int>() != kBranches) {
    throw ConfigError("only three-branch architectures are supported");
  }
  j.at("window_len").get_to(cfg.window_len);
  j.at("conv1_filters").get_to(cfg.conv1_filters);
  j.at("conv2_filters").get_to(cfg.conv2_filters);
  j.at("kernel").get_to(cfg.kernel);
  j.at("pool").get_to(cfg.pool);
  j.at("dense_units").get_to(cfg.dense_units);
  j.at("classes").get_to(cfg.classes);
}

void to_json(Json& j, const TrainingMetadata& m) {
  j = Json{{"seed", m.seed},
           {"epochs", m.epochs},
           {"learning_rate", m.learning_rate},
           {"l2_lambda", m.l2_lambda},
           {"dataset_fingerprint", m.dataset_fingerprint},
           {"condition", m.condition},
           {"strategy", m.strategy},
           {"standardization_mean", m.standardization_mean},
           {"standardization_std", m.standardization_std}};
}

void from_json(const Json& j, TrainingMetadata& m) {
  j.at("seed").get_to(m.seed);
  j.at("epochs").get_to(m.epochs);
  j.at("learning_rate").get_to(m.learning_rate);
  j.at("l2_lambda").get_to(m.l2_lambda);
  j.at("dataset_fingerprint").get_to(m.dataset_fingerprint);
  j.at("condition").get_to(m.condition);
  j.at("strategy").get_to(m.strategy);
  j.at("standardization_mean").get_to(m.standardization_mean);
  j.at("standardization_std").get_to(m.standardization_std);
}

void save_checkpoint(const FusionModel<float>& model, const TrainingMetadata& metadata,
                     const std::filesystem::path& path) {
  Json groups = Json::array();
  for (const auto& g : model.groups()) {
    check_finite(g.value, "checkpoint group " + g.spec.name);
    groups.push_back({{"name", g.spec.name}, {"shape", {g.value.rows(), g.value.cols()}}});
  }
  const Json header{{"config", model.config()},
                    {"metadata", metadata},
                    {"parameter_count", count_parameters(model)},
                    {"groups", groups}};
  const std::string text = canonical(header);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write(kCheckpointMagic, 8);
  detail::write_u32_le(out, kCheckpointVersion);
  detail::write_u32_le(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  std::vector<char> buffer;
  for (const auto& g : model.groups()) {
    buffer.resize(static_cast<std::size_t>(g.size()) * 4);
    std::size_t pos = 0;
    for (Index r = 0; r < g.value.rows(); ++r) {
      for (Index c = 0; c < g.value.cols(); ++c) {
        const auto bits = std::bit_cast<std::uint32_t>(g.value(r, c));
        buffer[pos++] = static_cast<char>(bits & 0xFF);
        buffer[pos++] = static_cast<char>((bits >> 8) & 0xFF);
        buffer[pos++] = static_cast<char>((bits >> 16) & 0xFF);
        buffer[pos++] = static_cast<char>((bits >> 24) & 0xFF);
      }
    }
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

namespace {

struct RawHeader {
  std::string text;
  std::streamoff payload_offset;
};

RawHeader read_raw_header(std::istream& in, const std::string& where) {
  char magic[8];
  if (!in.read(magic, 8)) throw DataError("checkpoint " + where + ": truncated magic");
  if (std::string(magic, 8) != std::string(kCheckpointMagic, 8)) {
    throw DataError("checkpoint " + where + ": bad magic");
  }
  const auto version = detail::read_u32_le(in, "checkpoint " + where);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint " + where + ": version " + std::to_string(version) +
                    " not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto length = detail::read_u32_le(in, "checkpoint " + where);
  std::string text(length, '\0');
  if (!in.read(text.data(), length)) throw DataError("checkpoint " + where + ": truncated header");
  return {std::move(text), static_cast<std::streamoff>(16 + length)};
}

}  // namespace

std::string read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  return read_raw_header(in, path.string()).text;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  const std::string where = path.string();
  const RawHeader raw = read_raw_header(in, where);

  Json header;
  ArchitectureConfig cfg;
  TrainingMetadata meta;
  Index declared = 0;
  try {
    header = Json::parse(raw.text);
    header.at("config").get_to(cfg);
    header.at("metadata").get_to(meta);
    header.at("parameter_count").get_to(declared);
  } catch (const Json::exception& e) {
    throw DataError("checkpoint " + where + ": malformed header: " + e.what());
  }

  const Index expected = parameter_count(cfg);
  if (declared != expected) {
    throw DataError("checkpoint " + where + ": header declares " + std::to_string(declared) +
                    " parameters but config implies " + std::to_string(expected));
  }

  const auto file_bytes = std::filesystem::file_size(path);
  const auto payload_bytes = file_bytes - static_cast<std::uintmax_t>(raw.payload_offset);
  const auto expected_bytes = static_cast<std::uintmax_t>(expected) * 4;
  if (payload_bytes != expected_bytes) {
    throw DataError("checkpoint " + where + ": payload is " + std::to_string(payload_bytes) +
                    " bytes, expected " + std::to_string(expected_bytes));
  }
  std::vector<char> payload(static_cast<std::size_t>(expected_bytes));
  if (!in.read(payload.data(), static_cast<std::streamsize>(payload.size()))) {
    throw DataError("checkpoint " + where + ": truncated payload");
  }

  const auto specs = group_specs(cfg);
  std::vector<ParamGroup<float>> groups;
  groups.reserve(specs.size());
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (const auto& spec : specs) {
    Matrix<float> v(spec.rows, spec.cols);
    for (Index r = 0; r < spec.rows; ++r) {
      for (Index c = 0; c < spec.cols; ++c) {
        v(r, c) = detail::decode_f32_le(p);
        p += 4;
      }
    }
    groups.push_back({spec, std::move(v), true});
  }
  return Checkpoint{std::move(meta), FusionModel<float>(cfg, std::move(groups), Provenance::Checkpoint)};
}

}  // namespace fusion
