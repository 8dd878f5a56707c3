#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xmodseg/core/image.hpp"
#include "xmodseg/core/io.hpp"

namespace xmodseg::phantom {

enum class Domain { A, B };
enum class Split { train, val, test };

std::string to_string(Domain d);
std::string to_string(Split s);
Domain domain_from_string(const std::string& s);
Split split_from_string(const std::string& s);

// One 2D grayscale image with optional binary mask and physical spacing;
// the unit every dataset is made of.
struct Sample {
  std::string id;
  std::string subject_id;
  int timepoint = -1;  // weeks; -1 when not longitudinal
  Domain domain = Domain::A;
  Image2d image;
  std::optional<Mask2d> mask;
  Spacing spacing;
};

struct ManifestEntry {
  std::string id;
  std::string subject_id;
  int timepoint = -1;
  Domain domain = Domain::A;
  Split split = Split::train;
  std::string image_path;  // relative to the dataset directory
  std::string mask_path;   // empty when the sample has no mask
  Spacing spacing;
  Rescale rescale;
  bool preprocessed = false;  // intensities already normalized to [-1, 1]
  bool pseudo = false;        // synthesized pseudo-domain-B sample
  std::string source_id;      // originating sample for pseudo entries
};

// Declarative dataset listing persisted as manifest.json next to
// images/*.png and masks/*.png.
struct DatasetManifest {
  int schema_version = 1;
  std::optional<std::uint64_t> generation_seed;
  std::string checkpoint_hash;  // provenance when produced by a model
  std::string config_hash;
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> select(Domain d) const;
  std::vector<const ManifestEntry*> select(Domain d, Split s) const;
  const ManifestEntry* find(const std::string& id) const;
};

inline constexpr const char* kManifestFilename = "manifest.json";

void validate_manifest(const DatasetManifest& manifest,
                       const std::filesystem::path& dir);

void save_manifest(const std::filesystem::path& dir, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& dir);

Sample load_sample(const std::filesystem::path& dir, const ManifestEntry& entry);

// Writes image (and mask, if any) under dir and returns the completed entry.
ManifestEntry save_sample(const std::filesystem::path& dir, const Sample& sample,
                          Split split, bool preprocessed = false, bool pseudo = false,
                          const std::string& source_id = "");

std::vector<Sample> load_samples(const std::filesystem::path& dir,
                                 const std::vector<const ManifestEntry*>& entries);

}  // namespace xmodseg::phantom
