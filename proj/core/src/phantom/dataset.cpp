#include "xmodseg/phantom/dataset.hpp"

#include <nlohmann/json.hpp>

#include <set>

#include "xmodseg/core/error.hpp"

namespace xmodseg::phantom {

using nlohmann::json;

std::string to_string(Domain d) { return d == Domain::A ? "A" : "B"; }
std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Domain domain_from_string(const std::string& s) {
  if (s == "A") return Domain::A;
  if (s == "B") return Domain::B;
  throw ContractError("unknown domain: " + s);
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw ContractError("unknown split: " + s);
}

std::vector<const ManifestEntry*> DatasetManifest::select(Domain d) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.domain == d) out.push_back(&e);
  }
  return out;
}

std::vector<const ManifestEntry*> DatasetManifest::select(Domain d, Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.domain == d && e.split == s) out.push_back(&e);
  }
  return out;
}

const ManifestEntry* DatasetManifest::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

void validate_manifest(const DatasetManifest& manifest,
                       const std::filesystem::path& dir) {
  std::set<std::string> ids;
  for (const auto& e : manifest.entries) {
    check(ids.insert(e.id).second, "manifest: duplicate sample id " + e.id);
    check(e.spacing.row_mm > 0 && e.spacing.col_mm > 0,
          "manifest: non-positive spacing for " + e.id);
    check_io(std::filesystem::exists(dir / e.image_path),
             "manifest: missing image file " + e.image_path);
    if (!e.mask_path.empty()) {
      check_io(std::filesystem::exists(dir / e.mask_path),
               "manifest: missing mask file " + e.mask_path);
    }
    // Unpaired training: domain-B training samples may lack masks, the
    // expert-segmented domain-A training samples may not.
    if (e.domain == Domain::A && e.split == Split::train && !e.pseudo) {
      check(!e.mask_path.empty(), "manifest: domain-A training sample without mask: " + e.id);
    }
  }
}

namespace {

json entry_to_json(const ManifestEntry& e) {
  json j;
  j["id"] = e.id;
  j["subject_id"] = e.subject_id;
  if (e.timepoint >= 0) j["timepoint"] = e.timepoint;
  j["domain"] = to_string(e.domain);
  j["split"] = to_string(e.split);
  j["image"] = e.image_path;
  if (!e.mask_path.empty()) j["mask"] = e.mask_path;
  j["spacing"] = {e.spacing.row_mm, e.spacing.col_mm};
  j["rescale"] = {e.rescale.lo, e.rescale.hi};
  j["preprocessed"] = e.preprocessed;
  if (e.pseudo) {
    j["pseudo"] = true;
    j["source_id"] = e.source_id;
  }
  return j;
}

ManifestEntry entry_from_json(const json& j) {
  ManifestEntry e;
  e.id = j.at("id").get<std::string>();
  e.subject_id = j.at("subject_id").get<std::string>();
  e.timepoint = j.value("timepoint", -1);
  e.domain = domain_from_string(j.at("domain").get<std::string>());
  e.split = split_from_string(j.at("split").get<std::string>());
  e.image_path = j.at("image").get<std::string>();
  e.mask_path = j.value("mask", std::string());
  e.spacing = {j.at("spacing")[0].get<double>(), j.at("spacing")[1].get<double>()};
  e.rescale = {j.at("rescale")[0].get<double>(), j.at("rescale")[1].get<double>()};
  e.preprocessed = j.value("preprocessed", false);
  e.pseudo = j.value("pseudo", false);
  e.source_id = j.value("source_id", std::string());
  return e;
}

}  // namespace

void save_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest) {
  json j;
  j["schema_version"] = manifest.schema_version;
  if (manifest.generation_seed) j["generation_seed"] = *manifest.generation_seed;
  if (!manifest.checkpoint_hash.empty()) j["checkpoint_hash"] = manifest.checkpoint_hash;
  if (!manifest.config_hash.empty()) j["config_hash"] = manifest.config_hash;
  json samples = json::array();
  for (const auto& e : manifest.entries) samples.push_back(entry_to_json(e));
  j["samples"] = samples;
  write_text_file(dir / kManifestFilename, j.dump(2) + "\n");
}

DatasetManifest load_manifest(const std::filesystem::path& dir) {
  const json j = json::parse(read_text_file(dir / kManifestFilename));
  DatasetManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  check(m.schema_version == 1, "manifest: unsupported schema_version");
  if (j.contains("generation_seed")) {
    m.generation_seed = j.at("generation_seed").get<std::uint64_t>();
  }
  m.checkpoint_hash = j.value("checkpoint_hash", std::string());
  m.config_hash = j.value("config_hash", std::string());
  for (const auto& e : j.at("samples")) m.entries.push_back(entry_from_json(e));
  validate_manifest(m, dir);
  return m;
}

Sample load_sample(const std::filesystem::path& dir, const ManifestEntry& entry) {
  Sample s;
  s.id = entry.id;
  s.subject_id = entry.subject_id;
  s.timepoint = entry.timepoint;
  s.domain = entry.domain;
  s.spacing = entry.spacing;
  const auto img16 = read_png16(dir / entry.image_path);
  const auto img = dequantize16(img16, entry.rescale);
  s.image = Image2d(img.rows(), img.cols());
  s.image.raw() = img.raw();
  if (!entry.mask_path.empty()) {
    s.mask = read_mask(dir / entry.mask_path);
    check(s.mask->same_shape(s.image), "sample: mask shape differs from image: " + s.id);
  }
  return s;
}

ManifestEntry save_sample(const std::filesystem::path& dir, const Sample& sample,
                          Split split, bool preprocessed, bool pseudo,
                          const std::string& source_id) {
  check(!sample.id.empty(), "save_sample: empty id");
  check(sample.spacing.row_mm > 0 && sample.spacing.col_mm > 0,
        "save_sample: non-positive spacing");
  if (sample.mask) {
    check(sample.mask->same_shape(sample.image),
          "save_sample: mask shape differs from image: " + sample.id);
  }
  std::filesystem::create_directories(dir / "images");
  ManifestEntry e;
  e.id = sample.id;
  e.subject_id = sample.subject_id;
  e.timepoint = sample.timepoint;
  e.domain = sample.domain;
  e.split = split;
  e.spacing = sample.spacing;
  e.preprocessed = preprocessed;
  e.pseudo = pseudo;
  e.source_id = source_id;
  e.rescale = rescale_of(sample.image);
  e.image_path = "images/" + sample.id + ".png";
  write_image16(dir / e.image_path, sample.image, e.rescale);
  if (sample.mask) {
    std::filesystem::create_directories(dir / "masks");
    e.mask_path = "masks/" + sample.id + ".png";
    write_mask(dir / e.mask_path, *sample.mask);
  }
  return e;
}

std::vector<Sample> load_samples(const std::filesystem::path& dir,
                                 const std::vector<const ManifestEntry*>& entries) {
  std::vector<Sample> out;
  out.reserve(entries.size());
  for (const auto* e : entries) out.push_back(load_sample(dir, *e));
  return out;
}

}  // namespace xmodseg::phantom
