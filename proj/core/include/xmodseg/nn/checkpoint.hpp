#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "xmodseg/core/error.hpp"
#include "xmodseg/nn/parameter.hpp"

namespace xmodseg::nn {

// Single-file checkpoint archive: magic, JSON header (tensor directory,
// iteration counter, config hash, free-form metadata), then raw
// little-endian tensor data. Adam moments are stored next to each value so
// training resumes exactly.
inline constexpr char kCheckpointMagic[8] = {'X', 'M', 'S', 'E', 'G', 'C', 'K', '1'};

struct CheckpointMeta {
  std::int64_t iteration = 0;
  std::string config_hash;
  nlohmann::json extra = nlohmann::json::object();
};

namespace detail {

template <typename T>
constexpr const char* scalar_tag() {
  if constexpr (sizeof(T) == 4) {
    return "f32";
  } else {
    return "f64";
  }
}

}  // namespace detail

template <typename T>
void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<Parameter<T>*>& params,
                     const CheckpointMeta& meta) {
  nlohmann::json header;
  header["format_version"] = 1;
  header["scalar"] = detail::scalar_tag<T>();
  header["iteration"] = meta.iteration;
  header["config_hash"] = meta.config_hash;
  header["meta"] = meta.extra;

  nlohmann::json dir = nlohmann::json::array();
  std::int64_t offset = 0;
  const auto add_entry = [&](const std::string& name, const Tensor<T>& t) {
    dir.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.numel();
  };
  for (const auto* p : params) {
    add_entry(p->name, p->value);
    add_entry(p->name + "#m1", p->moment1);
    add_entry(p->name + "#m2", p->moment2);
  }
  header["tensors"] = dir;

  const std::string hjson = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  check_io(out.good(), "checkpoint: cannot write " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint64_t hlen = hjson.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hjson.data(), static_cast<std::streamsize>(hjson.size()));
  const auto write_tensor = [&](const Tensor<T>& t) {
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.numel() * sizeof(T)));
  };
  for (const auto* p : params) {
    write_tensor(p->value);
    write_tensor(p->moment1);
    write_tensor(p->moment2);
  }
  check_io(out.good(), "checkpoint: write failed " + path.string());
}

// Loads into an existing parameter set (shapes must match); returns the
// stored metadata. Every parameter must be present in the archive.
template <typename T>
CheckpointMeta load_checkpoint(const std::filesystem::path& path,
                               const std::vector<Parameter<T>*>& params) {
  std::ifstream in(path, std::ios::binary);
  check_io(in.good(), "checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  check_io(in.good() && std::equal(magic, magic + 8, kCheckpointMagic),
           "checkpoint: bad magic in " + path.string());
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hjson(hlen, '\0');
  in.read(hjson.data(), static_cast<std::streamsize>(hlen));
  check_io(in.good(), "checkpoint: truncated header in " + path.string());
  const nlohmann::json header = nlohmann::json::parse(hjson);
  check_io(header.at("scalar").get<std::string>() == detail::scalar_tag<T>(),
           "checkpoint: scalar type mismatch in " + path.string());

  struct Entry {
    std::vector<std::int64_t> shape;
    std::int64_t offset;
  };
  std::unordered_map<std::string, Entry> directory;
  for (const auto& e : header.at("tensors")) {
    directory[e.at("name").get<std::string>()] = {
        e.at("shape").get<std::vector<std::int64_t>>(),
        e.at("offset").get<std::int64_t>()};
  }

  const std::streampos data_start = in.tellg();
  const auto read_tensor = [&](const std::string& name, Tensor<T>& t) {
    const auto it = directory.find(name);
    check_io(it != directory.end(), "checkpoint: missing tensor " + name);
    check_io(it->second.shape == t.shape(), "checkpoint: shape mismatch for " + name);
    in.seekg(data_start + static_cast<std::streamoff>(it->second.offset * sizeof(T)));
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(T)));
    check_io(in.good(), "checkpoint: truncated data for " + name);
  };
  for (auto* p : params) {
    read_tensor(p->name, p->value);
    read_tensor(p->name + "#m1", p->moment1);
    read_tensor(p->name + "#m2", p->moment2);
  }

  CheckpointMeta meta;
  meta.iteration = header.at("iteration").get<std::int64_t>();
  meta.config_hash = header.at("config_hash").get<std::string>();
  meta.extra = header.value("meta", nlohmann::json::object());
  return meta;
}

}  // namespace xmodseg::nn
