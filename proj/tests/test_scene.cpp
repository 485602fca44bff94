#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "arreg/csv_io.hpp"
#include "arreg/report.hpp"
#include "arreg/scene.hpp"
#include "test_support.hpp"

using namespace arreg;
using arreg::test::expect_error;
using nlohmann::json;

namespace {

std::string fixture_text() { return read_text_file(ARREG_SCENE_FILE); }

json fixture_json() { return json::parse(fixture_text()); }

/// Recursive approximate equality for JSON trees (numbers within 1e-12
/// relative, everything else exact).
bool approx_json(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>();
    const double y = b.get<double>();
    return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
  }
  if (a.type() != b.type()) return false;
  if (a.is_object()) {
    if (a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key()) || !approx_json(it.value(), b[it.key()])) {
        return false;
      }
    }
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!approx_json(a[i], b[i])) return false;
    }
    return true;
  }
  return a == b;
}

class TempFile {
 public:
  explicit TempFile(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / name) {}
  ~TempFile() { std::filesystem::remove(path_); }
  const std::string path() const { return path_.string(); }
  void write(const std::string& content) const {
    std::ofstream out(path_, std::ios::binary);
    out << content;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace

TEST_SUITE_BEGIN("scene");

TEST_CASE("the bundled scene loads with the expected warnings") {
  const SceneLoadResult loaded = load_scene(ARREG_SCENE_FILE);
  const SceneConfig& cfg = loaded.config;

  CHECK(cfg.rig.camera.fx_px == 3676.462);
  CHECK(cfg.rig.camera.fy_px == 3676.478);
  CHECK(cfg.rig.camera.skew_r == 0.263);
  CHECK(cfg.rig.camera.u0_px == 645.342);
  CHECK(cfg.rig.camera.v0_px == 508.259);
  CHECK(cfg.rig.camera.k1 == 1.30);
  CHECK(cfg.rig.camera.k2 == 1.88);
  CHECK(cfg.rig.track.length_mm == 6000.0);
  CHECK(cfg.rig.track.width_mm == 3000.0);
  CHECK(cfg.rig.track.corner_radius_mm == 1000.0);
  CHECK(cfg.rig.track.height_mm == 4000.0);
  CHECK(cfg.rig.encoder.pulses_per_rev == 1000);
  CHECK(cfg.rig.heading == HeadingMode::TangentFollowing);
  CHECK(cfg.experiment.static_points_mm == std::vector<double>{0.0, 300.0, 1500.0});
  CHECK(cfg.experiment.static_trials == 30);
  CHECK(cfg.noise.seed == 42);

  // The mounting rotation is only approximately orthonormal as published;
  // the loader projects it and records the residual.
  CHECK(loaded.m_cr_orthonormality_residual > 1e-4);
  CHECK(loaded.m_cr_orthonormality_residual < 0.05);
  const Mat3& r = cfg.rig.m_cr.rotation();
  CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
  CHECK(cfg.rig.m_cr.translation_mm() == Vec3{50.843, 47.094, 76.177});

  bool mount_warning = false, principal_warning = false, k_warning = false;
  for (const std::string& w : loaded.warnings) {
    if (w.find("nearest rotation") != std::string::npos) mount_warning = true;
    if (w.find("principal point") != std::string::npos) principal_warning = true;
    if (w.find("k1/k2") != std::string::npos) k_warning = true;
  }
  CHECK(mount_warning);
  CHECK(principal_warning);
  CHECK(k_warning);
}

TEST_CASE("a negative focal length is a named validation failure") {
  json j = fixture_json();
  j["camera"]["fx"] = -1.0;
  try {
    parse_scene(j.dump(), "test");
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(std::string(e.what()).find("fx > 0") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected with their location") {
  json top = fixture_json();
  top["surprise"] = 1;
  try {
    parse_scene(top.dump(), "test");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("surprise") != std::string::npos);
  }

  json nested = fixture_json();
  nested["track"]["bank_angle"] = 3.0;
  try {
    parse_scene(nested.dump(), "test");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("bank_angle") != std::string::npos);
    CHECK(std::string(e.what()).find("track") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_scene("{\n  \"camera\": oops\n}", "broken.json");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("broken.json:2:") != std::string::npos);
  }
}

TEST_CASE("missing keys are reported") {
  json j = fixture_json();
  j.erase("encoder");
  expect_error(ErrorCode::ParseError, [&] { parse_scene(j.dump(), "test"); });
  json cam = fixture_json();
  cam["camera"].erase("fy");
  expect_error(ErrorCode::ParseError, [&] { parse_scene(cam.dump(), "test"); });
}

TEST_CASE("the mounting matrix must be homogeneous and near-orthonormal") {
  json bad_row = fixture_json();
  bad_row["m_cr"][3] = {0.0, 0.0, 0.1, 1.0};
  expect_error(ErrorCode::ValidationError,
               [&] { parse_scene(bad_row.dump(), "test"); });

  json far = fixture_json();
  far["m_cr"][0] = {2.0, 0.0, 0.0, 0.0};
  expect_error(ErrorCode::ValidationError,
               [&] { parse_scene(far.dump(), "test"); });
}

TEST_CASE("collinear workpiece feature points fail at load time") {
  json j = fixture_json();
  j["workpiece"]["p3_mm"] = {1750.0, 0.0, 1100.0};
  expect_error(ErrorCode::DegenerateFeaturePoints,
               [&] { parse_scene(j.dump(), "test"); });
}

TEST_CASE("undersized trial counts are rejected") {
  json j = fixture_json();
  j["experiment"]["static_trials"] = 1;
  expect_error(ErrorCode::ValidationError, [&] { parse_scene(j.dump(), "test"); });
}

TEST_CASE("emit and reload reproduces the configuration") {
  const SceneLoadResult first = load_scene(ARREG_SCENE_FILE);
  const std::string emitted = emit_scene(first.config);
  const SceneLoadResult second = parse_scene(emitted, "emitted");
  CHECK(approx_json(scene_to_json(first.config), scene_to_json(second.config)));
  // The re-emitted mounting matrix is already orthonormal.
  CHECK(second.m_cr_orthonormality_residual < 1e-12);

  // Same property for a config that exercises the non-default knobs.
  SceneConfig mutated = first.config;
  mutated.rig.heading = HeadingMode::WorldFixed;
  mutated.rig.turntable_rest = {0.02, -0.33, 0.0};
  mutated.rig.tracking_start_arclength_mm = 275.5;
  mutated.rig.encoder.pulses_per_rev = 2048;
  mutated.uncertainty.sigma_beta_rad = 0.0123;
  mutated.noise.pixel_sigma_px = 1.75;
  mutated.noise.encoder_quantization = false;
  mutated.experiment.static_points_mm = {12.5, 800.0};
  mutated.experiment.static_trials = 7;
  const SceneLoadResult reparsed = parse_scene(emit_scene(mutated), "mutated");
  CHECK(approx_json(scene_to_json(mutated), scene_to_json(reparsed.config)));
  CHECK(reparsed.config.rig.heading == HeadingMode::WorldFixed);
  CHECK(reparsed.config.experiment.static_trials == 7);
}

TEST_CASE("serialization is byte-stable") {
  const SceneLoadResult loaded = load_scene(ARREG_SCENE_FILE);
  CHECK(emit_scene(loaded.config) == emit_scene(loaded.config));
  CHECK(scene_content_hash(loaded.config) == scene_content_hash(loaded.config));

  SceneConfig changed = loaded.config;
  changed.noise.seed += 1;
  CHECK(scene_content_hash(changed) != scene_content_hash(loaded.config));
}

TEST_CASE("sha1 matches the published test vectors") {
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(sha1_hex("The quick brown fox jumps over the lazy dog") ==
        "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
}

TEST_CASE("reports embed provenance-labelled reference values") {
  const SceneLoadResult loaded = load_scene(ARREG_SCENE_FILE);
  StaticExperimentReport report;
  report.expected_offset_mm = 300.0;
  report.points.push_back({0.0, 300.0, 0.0, 30, 0});
  const json j = static_report_json(report, loaded.config);
  CHECK(j["references"]["static_measuring_result"]["label"] == "paper-table-2");
  CHECK(j["references"]["static_measuring_result"]["rows"].size() == 3);

  TrackingExperimentResult tracking;
  tracking.rms_mm = 0.1;
  tracking.rms_window_mm = 1500.0;
  const json t = tracking_report_json(tracking, loaded.config);
  CHECK(t["references"]["tracking_rms"]["label"] == "paper-sec-5-3");
  CHECK(t["references"]["tracking_rms"]["rms_percent"] == 0.5);

  const json b = budget_report_json({}, ChainParameters{}, Vec3{100, 100, 3000},
                                    loaded.config);
  CHECK(b["references"]["published_budget"]["label"] == "paper-sec-5-1");
  CHECK(b["references"]["published_budget"]["sigma_xw0_mm"] == 1.51);
  CHECK(b["references"]["published_budget"]["sigma_yw0_mm"] == 1.55);
  CHECK(b["references"]["published_budget"]["sigma_zw0_mm"] == 1.13);

  const json h = reference_hand_eye();
  CHECK(h["label"] == "paper-eq-14");
  CHECK(h["matrix"][0][3] == 50.843);

  // Reports serialize deterministically.
  CHECK(static_report_json(report, loaded.config).dump() == j.dump());
}

TEST_CASE("correspondence CSV accepts an optional header") {
  const std::string body = "100,200,300,400.5,500.5\n-1,-2,-3,10,20\n";
  TempFile with_header("arreg_corr_header.csv");
  with_header.write("X,Y,Z,u,v\n" + body);
  TempFile without_header("arreg_corr_plain.csv");
  without_header.write(body);

  for (const std::string& path : {with_header.path(), without_header.path()}) {
    const std::vector<Correspondence> points = read_correspondences_csv(path);
    REQUIRE(points.size() == 2);
    CHECK(points[0].world.coords_mm == Vec3{100.0, 200.0, 300.0});
    CHECK(points[0].pixel.u_px == 400.5);
    CHECK(points[1].pixel.v_px == 20.0);
    CHECK(points[0].world.frame == frames::world());
  }
}

TEST_CASE("malformed CSV rows are rejected with their line number") {
  TempFile bad("arreg_corr_bad.csv");
  bad.write("X,Y,Z,u,v\n1,2,3,4,5\n1,2,three,4,5\n");
  try {
    read_correspondences_csv(bad.path());
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }

  TempFile short_row("arreg_corr_short.csv");
  short_row.write("1,2,3,4\n");
  expect_error(ErrorCode::ParseError,
               [&] { read_correspondences_csv(short_row.path()); });

  expect_error(ErrorCode::IoError,
               [] { read_correspondences_csv("/nonexistent/file.csv"); });
}

TEST_CASE("trajectory CSV enforces monotone timestamps") {
  TempFile good("arreg_traj_good.csv");
  good.write("t_s,encoder_counts,alpha_rad,beta_rad\n0,0,0,0\n0.1,50,0.01,0.02\n");
  const std::vector<TrajectoryRow> rows = read_trajectory_csv(good.path());
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].encoder_counts == 50);
  CHECK(rows[1].beta_rad == 0.02);

  TempFile bad("arreg_traj_bad.csv");
  bad.write("0.5,0,0,0\n0.1,50,0,0\n");
  expect_error(ErrorCode::ParseError, [&] { read_trajectory_csv(bad.path()); });
}

TEST_CASE("tabular writers emit stable headers and rows") {
  std::vector<TrackingSample> samples;
  samples.push_back({0.1, 300.0, 300.25, 0.25});
  const std::string csv = tracking_samples_csv(samples);
  CHECK(csv == "t_s,expected_mm,measured_mm,error_mm\n0.1,300,300.25,0.25\n");

  std::vector<SweepRow> rows;
  rows.push_back({0.0, 500.0, {1.5, 2.5, 3.5}});
  const std::string sweep = sweep_csv(rows);
  CHECK(sweep == "beta_deg,s_mm,sigma_x,sigma_y,sigma_z\n0,500,1.5,2.5,3.5\n");
}

TEST_SUITE_END();
