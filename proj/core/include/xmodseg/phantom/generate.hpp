#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>

#include "xmodseg/phantom/dataset.hpp"

namespace xmodseg::phantom {

// Raw intensity assignments per tissue class in each domain's native units
// (domain A is CT-like in HU, domain B is MR-like in arbitrary units).
// Jitters are per-subject; the tumor intensity is drawn per subject from
// [tumor_lo, tumor_hi].
struct TissuePalette {
  double background = 0.0;
  double body = 0.0;
  double body_jitter = 0.0;
  double lung = 0.0;
  double lung_jitter = 0.0;
  double tumor_lo = 0.0;
  double tumor_hi = 0.0;
};

struct PhantomConfig {
  int image_size = 256;
  Spacing spacing{1.0, 1.0};

  int subjects_a = 24;          // domain A, all train (synthesis source)
  int subjects_b_train = 6;
  int subjects_b_val = 4;
  int subjects_b_test = 10;
  int longitudinal_subjects = 3;  // leading test subjects get serial scans
  int timepoints = 5;             // weekly scans per longitudinal subject

  std::array<double, 2> tumor_radius_px{8.0, 16.0};
  double tumor_growth_lo = 0.10;  // fractional area increase per week
  double tumor_growth_hi = 0.30;

  TissuePalette palette_a{-1000.0, 50.0, 10.0, -800.0, 30.0, 15.0, 45.0};
  TissuePalette palette_b{10.0, 250.0, 25.0, 60.0, 15.0, 400.0, 620.0};
  double noise_sigma_a = 15.0;
  double noise_sigma_b = 12.0;
  double bias_amplitude_b = 0.2;  // multiplicative low-order polynomial field

  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const PhantomConfig& cfg);
PhantomConfig phantom_config_from_json(const nlohmann::json& j);

// Generates the two-domain corpus with exact tumor masks under out_dir and
// returns the saved manifest. Deterministic: each sample's stream is derived
// from (seed, sample id), so the corpus is byte-identical given (cfg, seed).
DatasetManifest generate_phantoms(const PhantomConfig& cfg,
                                  const std::filesystem::path& out_dir);

}  // namespace xmodseg::phantom
