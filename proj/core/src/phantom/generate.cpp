#include "xmodseg/phantom/generate.hpp"

#include <cmath>
#include <string>

#include "xmodseg/core/error.hpp"
#include "xmodseg/core/rng.hpp"

namespace xmodseg::phantom {

using nlohmann::json;

void PhantomConfig::validate() const {
  check(image_size >= 64, "phantom: image_size must be >= 64");
  check(spacing.row_mm > 0 && spacing.col_mm > 0, "phantom: spacing must be positive");
  check(subjects_a >= 1 && subjects_b_train >= 1, "phantom: need training subjects");
  check(subjects_b_val >= 0 && subjects_b_test >= 0, "phantom: negative subject count");
  check(longitudinal_subjects <= subjects_b_test,
        "phantom: longitudinal subjects must be test subjects");
  check(longitudinal_subjects == 0 || timepoints >= 2,
        "phantom: longitudinal subjects need >= 2 timepoints");
  check(tumor_radius_px[0] > 0,
        "phantom: degenerate geometry (tumor radius must be positive)");
  check(tumor_radius_px[1] >= tumor_radius_px[0], "phantom: radius range inverted");
  check(tumor_radius_px[1] * 3.0 <= image_size,
        "phantom: tumor radius range too large for image size");
  check(bias_amplitude_b >= 0 && bias_amplitude_b < 1, "phantom: bias amplitude in [0,1)");
  check(noise_sigma_a >= 0 && noise_sigma_b >= 0, "phantom: negative noise sigma");
}

namespace {

json palette_to_json(const TissuePalette& p) {
  return json{{"background", p.background}, {"body", p.body},
              {"body_jitter", p.body_jitter}, {"lung", p.lung},
              {"lung_jitter", p.lung_jitter}, {"tumor_lo", p.tumor_lo},
              {"tumor_hi", p.tumor_hi}};
}

TissuePalette palette_from_json(const json& j, const TissuePalette& defaults) {
  TissuePalette p = defaults;
  p.background = j.value("background", p.background);
  p.body = j.value("body", p.body);
  p.body_jitter = j.value("body_jitter", p.body_jitter);
  p.lung = j.value("lung", p.lung);
  p.lung_jitter = j.value("lung_jitter", p.lung_jitter);
  p.tumor_lo = j.value("tumor_lo", p.tumor_lo);
  p.tumor_hi = j.value("tumor_hi", p.tumor_hi);
  return p;
}

struct Ellipse {
  double cy, cx;     // center, pixels
  double ay, ax;     // semi-axes, pixels
  double angle;      // radians
  bool contains(double y, double x) const {
    const double dy = y - cy, dx = x - cx;
    const double c = std::cos(angle), s = std::sin(angle);
    const double u = (c * dy + s * dx) / ay;
    const double v = (-s * dy + c * dx) / ax;
    return u * u + v * v <= 1.0;
  }
};

// One subject's anatomy: body outline, two lungs, one tumor seated on a
// lung border so the lung silhouette carries a shape cue.
struct SubjectGeometry {
  Ellipse body;
  Ellipse lungs[2];
  double tumor_cy, tumor_cx;
  double tumor_ecc;    // axis asymmetry
  double tumor_angle;
  double base_radius;  // week-0 equivalent radius
  double growth;       // fractional area increase per week
};

SubjectGeometry sample_geometry(const PhantomConfig& cfg, Rng& rng) {
  const double n = cfg.image_size;
  SubjectGeometry g;
  g.body = {n * rng.uniform(0.47, 0.53), n * rng.uniform(0.47, 0.53),
            n * rng.uniform(0.36, 0.44), n * rng.uniform(0.30, 0.38),
            rng.uniform(-0.15, 0.15)};
  for (int i = 0; i < 2; ++i) {
    const double side = i == 0 ? -1.0 : 1.0;
    g.lungs[i] = {g.body.cy + n * rng.uniform(-0.04, 0.04),
                  g.body.cx + side * n * rng.uniform(0.13, 0.18),
                  n * rng.uniform(0.17, 0.23), n * rng.uniform(0.09, 0.13),
                  rng.uniform(-0.25, 0.25)};
  }
  const Ellipse& host = g.lungs[rng.uniform_int(0, 1)];
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  // Boundary point of the host lung in image coordinates.
  const double bc = std::cos(host.angle), bs = std::sin(host.angle);
  const double ly = host.ay * std::cos(phi), lx = host.ax * std::sin(phi);
  g.tumor_cy = host.cy + bc * ly - bs * lx;
  g.tumor_cx = host.cx + bs * ly + bc * lx;
  g.base_radius = rng.uniform(cfg.tumor_radius_px[0], cfg.tumor_radius_px[1]);
  g.tumor_ecc = rng.uniform(0.0, 0.25);
  g.tumor_angle = rng.uniform(0.0, M_PI);
  g.growth = rng.uniform(cfg.tumor_growth_lo, cfg.tumor_growth_hi);
  // Keep the tumor inside the frame across all timepoints.
  const double max_r = g.base_radius *
                       std::sqrt(1.0 + g.growth * std::max(0, cfg.timepoints - 1)) *
                       (1.0 + g.tumor_ecc) + 2.0;
  g.tumor_cy = std::clamp(g.tumor_cy, max_r, n - 1.0 - max_r);
  g.tumor_cx = std::clamp(g.tumor_cx, max_r, n - 1.0 - max_r);
  return g;
}

struct SubjectIntensities {
  double body, lung, tumor;
};

SubjectIntensities sample_intensities(const TissuePalette& p, Rng& rng) {
  return {p.body + rng.uniform(-p.body_jitter, p.body_jitter),
          p.lung + rng.uniform(-p.lung_jitter, p.lung_jitter),
          rng.uniform(p.tumor_lo, p.tumor_hi)};
}

// Low-order polynomial multiplicative field normalized to |field - 1| <= amp.
struct BiasField {
  double c[5];
  double amp;
  double norm;
  static BiasField sample(double amp, Rng& rng) {
    BiasField f{};
    f.amp = amp;
    double m = 0.0;
    for (auto& ci : f.c) ci = rng.uniform(-1.0, 1.0);
    // Max of |poly| over the corners bounds the interior for this basis.
    for (const double y : {-1.0, 0.0, 1.0}) {
      for (const double x : {-1.0, 0.0, 1.0}) {
        m = std::max(m, std::abs(f.eval_raw(y, x)));
      }
    }
    f.norm = m > 0 ? m : 1.0;
    return f;
  }
  double eval_raw(double y, double x) const {
    return c[0] * y + c[1] * x + c[2] * y * x + c[3] * y * y + c[4] * x * x;
  }
  double operator()(double y, double x) const {
    return 1.0 + amp * eval_raw(y, x) / norm;
  }
};

Sample render_subject(const PhantomConfig& cfg, Domain domain,
                      const SubjectGeometry& geo, const SubjectIntensities& tissue,
                      const TissuePalette& palette, double noise_sigma,
                      const BiasField* bias, int timepoint, const std::string& id,
                      const std::string& subject_id, Rng& noise_rng) {
  const int n = cfg.image_size;
  const double t = std::max(0, timepoint);
  const double radius = geo.base_radius * std::sqrt(1.0 + geo.growth * t);
  const Ellipse tumor{geo.tumor_cy, geo.tumor_cx, radius * (1.0 + geo.tumor_ecc),
                      radius * (1.0 - geo.tumor_ecc), geo.tumor_angle};

  Sample s;
  s.id = id;
  s.subject_id = subject_id;
  s.timepoint = timepoint;
  s.domain = domain;
  s.spacing = cfg.spacing;
  s.image = Image2d(n, n);
  Mask2d mask(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double y = r + 0.5, x = c + 0.5;
      double v = palette.background;
      if (geo.body.contains(y, x)) {
        v = tissue.body;
        for (const auto& lung : geo.lungs) {
          if (lung.contains(y, x)) v = tissue.lung;
        }
      }
      if (tumor.contains(y, x)) {
        v = tissue.tumor;
        mask(r, c) = 1;
      }
      if (bias) {
        v *= (*bias)(2.0 * y / n - 1.0, 2.0 * x / n - 1.0);
      }
      s.image(r, c) = v + noise_rng.normal(0.0, noise_sigma);
    }
  }
  s.mask = std::move(mask);
  return s;
}

}  // namespace

json to_json(const PhantomConfig& cfg) {
  json j;
  j["image_size"] = cfg.image_size;
  j["spacing"] = {cfg.spacing.row_mm, cfg.spacing.col_mm};
  j["subjects_a"] = cfg.subjects_a;
  j["subjects_b_train"] = cfg.subjects_b_train;
  j["subjects_b_val"] = cfg.subjects_b_val;
  j["subjects_b_test"] = cfg.subjects_b_test;
  j["longitudinal_subjects"] = cfg.longitudinal_subjects;
  j["timepoints"] = cfg.timepoints;
  j["tumor_radius_px"] = {cfg.tumor_radius_px[0], cfg.tumor_radius_px[1]};
  j["tumor_growth"] = {cfg.tumor_growth_lo, cfg.tumor_growth_hi};
  j["palette_a"] = palette_to_json(cfg.palette_a);
  j["palette_b"] = palette_to_json(cfg.palette_b);
  j["noise_sigma_a"] = cfg.noise_sigma_a;
  j["noise_sigma_b"] = cfg.noise_sigma_b;
  j["bias_amplitude_b"] = cfg.bias_amplitude_b;
  j["seed"] = cfg.seed;
  return j;
}

PhantomConfig phantom_config_from_json(const json& j) {
  PhantomConfig cfg;
  cfg.image_size = j.value("image_size", cfg.image_size);
  if (j.contains("spacing")) {
    cfg.spacing = {j["spacing"][0].get<double>(), j["spacing"][1].get<double>()};
  }
  cfg.subjects_a = j.value("subjects_a", cfg.subjects_a);
  cfg.subjects_b_train = j.value("subjects_b_train", cfg.subjects_b_train);
  cfg.subjects_b_val = j.value("subjects_b_val", cfg.subjects_b_val);
  cfg.subjects_b_test = j.value("subjects_b_test", cfg.subjects_b_test);
  cfg.longitudinal_subjects = j.value("longitudinal_subjects", cfg.longitudinal_subjects);
  cfg.timepoints = j.value("timepoints", cfg.timepoints);
  if (j.contains("tumor_radius_px")) {
    cfg.tumor_radius_px = {j["tumor_radius_px"][0].get<double>(),
                           j["tumor_radius_px"][1].get<double>()};
  }
  if (j.contains("tumor_growth")) {
    cfg.tumor_growth_lo = j["tumor_growth"][0].get<double>();
    cfg.tumor_growth_hi = j["tumor_growth"][1].get<double>();
  }
  if (j.contains("palette_a")) cfg.palette_a = palette_from_json(j["palette_a"], cfg.palette_a);
  if (j.contains("palette_b")) cfg.palette_b = palette_from_json(j["palette_b"], cfg.palette_b);
  cfg.noise_sigma_a = j.value("noise_sigma_a", cfg.noise_sigma_a);
  cfg.noise_sigma_b = j.value("noise_sigma_b", cfg.noise_sigma_b);
  cfg.bias_amplitude_b = j.value("bias_amplitude_b", cfg.bias_amplitude_b);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

DatasetManifest generate_phantoms(const PhantomConfig& cfg,
                                  const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  check_io(!ec && std::filesystem::is_directory(out_dir),
           "generate_phantoms: cannot create output directory " + out_dir.string());

  DatasetManifest manifest;
  manifest.generation_seed = cfg.seed;

  const auto subject_tag = [](Domain d, int idx) {
    return (d == Domain::A ? std::string("a_s") : std::string("b_s")) +
           (idx < 10 ? "0" : "") + std::to_string(idx);
  };

  const auto emit_subject = [&](Domain domain, int idx, Split split, int timepoints) {
    const std::string sid = subject_tag(domain, idx);
    Rng subject_rng(Rng::derive(cfg.seed, "geom/" + sid));
    const SubjectGeometry geo = sample_geometry(cfg, subject_rng);
    const TissuePalette& palette = domain == Domain::A ? cfg.palette_a : cfg.palette_b;
    const SubjectIntensities tissue = sample_intensities(palette, subject_rng);
    BiasField bias{};
    const bool use_bias = domain == Domain::B && cfg.bias_amplitude_b > 0;
    if (use_bias) bias = BiasField::sample(cfg.bias_amplitude_b, subject_rng);

    for (int t = 0; t < timepoints; ++t) {
      const std::string id = sid + "_t" + std::to_string(t);
      Rng noise_rng(Rng::derive(cfg.seed, "noise/" + id));
      const double sigma = domain == Domain::A ? cfg.noise_sigma_a : cfg.noise_sigma_b;
      Sample s = render_subject(cfg, domain, geo, tissue, palette, sigma,
                                use_bias ? &bias : nullptr, t, id, sid, noise_rng);
      manifest.entries.push_back(save_sample(out_dir, s, split));
    }
  };

  for (int i = 0; i < cfg.subjects_a; ++i) emit_subject(Domain::A, i, Split::train, 1);
  int b_idx = 0;
  for (int i = 0; i < cfg.subjects_b_train; ++i) emit_subject(Domain::B, b_idx++, Split::train, 1);
  for (int i = 0; i < cfg.subjects_b_val; ++i) emit_subject(Domain::B, b_idx++, Split::val, 1);
  for (int i = 0; i < cfg.subjects_b_test; ++i) {
    const bool longitudinal = i < cfg.longitudinal_subjects;
    emit_subject(Domain::B, b_idx++, Split::test, longitudinal ? cfg.timepoints : 1);
  }

  save_manifest(out_dir, manifest);
  validate_manifest(manifest, out_dir);
  return manifest;
}

}  // namespace xmodseg::phantom
