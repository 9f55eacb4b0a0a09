#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "fusion/data.hpp"
#include "fusion/json_io.hpp"

namespace fusion {
namespace {

Json metadata_json(const Recording& rec) {
  return Json{{"id", rec.id},
              {"label", to_string(rec.label)},
              {"operating_condition",
               {{"rpm", rec.condition.rotational_speed},
                {"Nm", rec.condition.load_torque},
                {"N", rec.condition.radial_force},
                {"name", rec.condition.name}}},
              {"sample_rate", rec.sample_rate},
              {"channel_count", 3},
              {"samples_per_channel", rec.samples.rows()}};
}

// Fills everything but the samples; returns samples_per_channel when present.
Index parse_metadata(const Json& j, Recording& rec, const std::string& where) {
  try {
    if (j.contains("channel_count") && j.at("channel_count").get<int>() != 3) {
      throw DataError(where + ": channel count must be 3, header says " +
                      std::to_string(j.at("channel_count").get<int>()));
    }
    j.at("id").get_to(rec.id);
    rec.label = parse_fault_class(j.at("label").get<std::string>());
    const auto& oc = j.at("operating_condition");
    rec.condition.rotational_speed = oc.at("rpm").get<double>();
    rec.condition.load_torque = oc.at("Nm").get<double>();
    rec.condition.radial_force = oc.at("N").get<double>();
    rec.condition.name = oc.at("name").get<std::string>();
    rec.sample_rate = j.at("sample_rate").get<double>();
    return j.contains("samples_per_channel") ? j.at("samples_per_channel").get<Index>() : -1;
  } catch (const Json::exception& e) {
    throw DataError(where + ": malformed header: " + e.what());
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

Recording load_csv(const std::filesystem::path& path) {
  const std::string where = path.string();
  auto sidecar = path;
  sidecar.replace_extension(".json");
  std::ifstream meta_in(sidecar);
  if (!meta_in) throw IoError("cannot open sidecar metadata: " + sidecar.string());
  Recording rec;
  Json meta;
  try {
    meta = Json::parse(meta_in);
  } catch (const Json::exception& e) {
    throw DataError(sidecar.string() + ": malformed header: " + e.what());
  }
  const Index declared = parse_metadata(meta, rec, sidecar.string());

  std::ifstream in(path);
  if (!in) throw IoError("cannot open recording: " + where);
  std::string line;
  if (!std::getline(in, line)) throw DataError(where + ": missing header row");
  const auto header = split_csv_line(trim(line));
  if (header.size() != 3) {
    throw DataError(where + ": channel count must be 3, header row has " +
                    std::to_string(header.size()) + " columns");
  }
  std::array<std::vector<float>, 3> cols;
  Index row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() > 3) {
      throw DataError(where + ": channel count must be 3, row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " fields");
    }
    for (std::size_t c = 0; c < 3; ++c) {
      const std::string f = c < fields.size() ? trim(fields[c]) : std::string();
      if (f.empty()) continue;
      if (cols[c].size() != static_cast<std::size_t>(row - 2)) {
        throw DataError(where + ": unequal channel lengths (gap in column " + std::to_string(c + 1) + ")");
      }
      try {
        cols[c].push_back(std::stof(f));
      } catch (const std::exception&) {
        throw DataError(where + ": row " + std::to_string(row) + ": not a number: '" + f + "'");
      }
    }
  }
  if (cols[0].size() != cols[1].size() || cols[1].size() != cols[2].size()) {
    throw DataError(where + ": unequal channel lengths (" + std::to_string(cols[0].size()) + ", " +
                    std::to_string(cols[1].size()) + ", " + std::to_string(cols[2].size()) + ")");
  }
  const auto n = static_cast<Index>(cols[0].size());
  if (declared >= 0 && declared != n) {
    throw DataError(where + ": sidecar declares " + std::to_string(declared) +
                    " samples per channel, file has " + std::to_string(n));
  }
  rec.samples.resize(n, 3);
  for (Index c = 0; c < 3; ++c) {
    rec.samples.col(c) = Eigen::Map<const Eigen::VectorXf>(cols[static_cast<std::size_t>(c)].data(), n);
  }
  validate(rec);
  return rec;
}

}  // namespace

Recording load_recording(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_csv(path);
  const std::string where = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open recording: " + where);
  std::string line;
  if (!std::getline(in, line)) throw DataError(where + ": missing header line");
  Json header;
  try {
    header = Json::parse(line);
  } catch (const Json::exception& e) {
    throw DataError(where + ": malformed header: " + e.what());
  }
  Recording rec;
  const Index n = parse_metadata(header, rec, where);
  if (n < 0) throw DataError(where + ": malformed header: samples_per_channel missing");

  const auto offset = static_cast<std::uintmax_t>(line.size() + 1);
  const auto payload = std::filesystem::file_size(path) - offset;
  const auto expected = static_cast<std::uintmax_t>(n) * 3 * 4;
  if (payload != expected) {
    throw DataError(where + ": unequal channel lengths or truncated payload: " +
                    std::to_string(payload) + " bytes, expected " + std::to_string(expected));
  }
  std::vector<unsigned char> bytes(static_cast<std::size_t>(expected));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  rec.samples.resize(n, 3);
  const unsigned char* p = bytes.data();
  for (Index c = 0; c < 3; ++c) {
    for (Index i = 0; i < n; ++i, p += 4) rec.samples(i, c) = detail::decode_f32_le(p);
  }
  validate(rec);
  return rec;
}

void save_recording(const Recording& rec, const std::filesystem::path& path) {
  validate(rec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open recording for writing: " + path.string());
  const std::string header = canonical(metadata_json(rec));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.put('\n');
  for (Index c = 0; c < 3; ++c) {
    for (Index i = 0; i < rec.samples.rows(); ++i) detail::write_f32_le(out, rec.samples(i, c));
  }
  if (!out) throw IoError("failed writing recording: " + path.string());
}

void save_recording_csv(const Recording& rec, const std::filesystem::path& path) {
  validate(rec);
  auto sidecar = path;
  sidecar.replace_extension(".json");
  std::ofstream meta(sidecar, std::ios::trunc);
  if (!meta) throw IoError("cannot open sidecar for writing: " + sidecar.string());
  meta << canonical(metadata_json(rec)) << '\n';
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open recording for writing: " + path.string());
  out << "phase_current_1,phase_current_2,vibration\n";
  out.precision(9);
  for (Index i = 0; i < rec.samples.rows(); ++i) {
    out << rec.samples(i, 0) << ',' << rec.samples(i, 1) << ',' << rec.samples(i, 2) << '\n';
  }
  if (!out || !meta) throw IoError("failed writing recording: " + path.string());
}

std::string fingerprint(const std::vector<Recording>& recordings) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& r : recordings) {
    feed(r.id.data(), r.id.size());
    const int label = static_cast<int>(r.label);
    feed(&label, sizeof label);
    feed(r.samples.data(), static_cast<std::size_t>(r.samples.size()) * sizeof(float));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fusion
