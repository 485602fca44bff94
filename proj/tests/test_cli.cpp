#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "arreg/csv_io.hpp"
#include "arreg/geometry.hpp"
#include "arreg/rng.hpp"
#include "arreg/scene.hpp"
#include "test_support.hpp"

using namespace arreg;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

const std::string kCli = ARREG_CLI_PATH;
const std::string kScene = ARREG_SCENE_FILE;

struct RunResult {
  int exit_code;
};

RunResult run_cli(const std::string& args) {
  const std::string command = kCli + " " + args + " > /dev/null 2> /dev/null";
  const int status = std::system(command.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1};
}

std::string run_cli_stdout(const std::string& args, int& exit_code) {
  const std::string command = kCli + " " + args + " 2> /dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buffer[256];
  while (fgets(buffer, sizeof buffer, pipe) != nullptr) out += buffer;
  const int status = pclose(pipe);
  exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string str() const { return path_.string(); }
  fs::path file(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) { return read_text_file(p.string()); }

/// Writes a noiseless 6+ point correspondence fixture through a known
/// pose, full precision.
void write_fixture_csv(const fs::path& path, int n_points) {
  SeededRng rng(2024);
  const CameraIntrinsics cam = arreg::test::z100_camera();
  const RigidTransform pose =
      arreg::test::random_transform(rng, frames::world(), frames::camera());
  std::ofstream out(path);
  out << "X,Y,Z,u,v\n";
  char line[256];
  for (int i = 0; i < n_points; ++i) {
    const double zc = rng.uniform(500.0, 5000.0);
    const Vec3 cam_pt{zc * rng.uniform(-0.2, 0.2), zc * rng.uniform(-0.2, 0.2), zc};
    const Vec3 world =
        pose.rotation().transpose() * (cam_pt - pose.translation_mm());
    const double u =
        (cam.fx_px * cam_pt.x() + cam.skew_r * cam_pt.y()) / cam_pt.z() + cam.u0_px;
    const double v = cam.fy_px * cam_pt.y() / cam_pt.z() + cam.v0_px;
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  world.x(), world.y(), world.z(), u, v);
    out << line;
  }
}

void write_coplanar_csv(const fs::path& path, int n_points) {
  SeededRng rng(2025);
  const CameraIntrinsics cam = arreg::test::z100_camera();
  std::ofstream out(path);
  out << "X,Y,Z,u,v\n";
  char line[256];
  for (int i = 0; i < n_points; ++i) {
    const double x = rng.uniform(-800.0, 800.0);
    const double y = rng.uniform(-800.0, 800.0);
    // Camera 2 m above the plane looking straight down.
    const double zc = 2000.0;
    const double u = (cam.fx_px * x + cam.skew_r * -y) / zc + cam.u0_px;
    const double v = cam.fy_px * -y / zc + cam.v0_px;
    std::snprintf(line, sizeof line, "%.17g,%.17g,0,%.17g,%.17g\n", x, y, u, v);
    out << line;
  }
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("no-such-command").exit_code == 2);
  CHECK(run_cli("simulate").exit_code == 2);
  CHECK(run_cli("solve-pose").exit_code == 2);  // missing --points
  TempDir dir("arreg_cli_usage");
  CHECK(run_cli("validate-scene --out " + dir.str()).exit_code == 2);  // no scene
}

TEST_CASE("help exits cleanly") {
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("validate-scene accepts the bundled scene") {
  TempDir dir("arreg_cli_validate");
  CHECK(run_cli("validate-scene --scene " + kScene + " --out " + dir.str())
            .exit_code == 0);
  const json report = json::parse(slurp(dir.file("scene_report.json")));
  CHECK(report["command"] == "validate-scene");
  CHECK(report["references"]["hand_eye_calibration"]["label"] == "paper-eq-14");
  CHECK(report["m_cr_orthonormality_residual"].get<double>() > 1e-4);
}

TEST_CASE("validation failures exit with code 3") {
  TempDir dir("arreg_cli_badscene");
  json bad = json::parse(slurp(kScene));
  bad["camera"]["fx"] = -1.0;
  write_text_file(dir.file("bad.json").string(), bad.dump());
  CHECK(run_cli("validate-scene --scene " + dir.file("bad.json").string())
            .exit_code == 3);
  CHECK(run_cli("validate-scene --scene /nonexistent.json").exit_code == 3);
}

TEST_CASE("solve-pose recovers a synthetic fixture to numerical precision") {
  TempDir dir("arreg_cli_solve");
  write_fixture_csv(dir.file("pts.csv"), 6);
  const int code = run_cli("solve-pose --points " + dir.file("pts.csv").string() +
                           " --scene " + kScene + " --out " + dir.str())
                       .exit_code;
  CHECK(code == 0);
  const json report = json::parse(slurp(dir.file("pose_solution.json")));
  CHECK(report["rms_reprojection_px"].get<double>() <= 1e-9);
  CHECK(report["point_count"] == 6);
  CHECK(fs::exists(dir.file("residuals.csv")));
}

TEST_CASE("too few points exit with code 3, degenerate points with 4") {
  TempDir dir("arreg_cli_degenerate");
  write_fixture_csv(dir.file("five.csv"), 5);
  CHECK(run_cli("solve-pose --points " + dir.file("five.csv").string() +
                " --scene " + kScene + " --out " + dir.str())
            .exit_code == 3);

  write_coplanar_csv(dir.file("coplanar.csv"), 20);
  CHECK(run_cli("solve-pose --points " + dir.file("coplanar.csv").string() +
                " --scene " + kScene + " --out " + dir.str())
            .exit_code == 4);
}

TEST_CASE("same seed gives byte-identical tracking outputs") {
  TempDir a("arreg_cli_track_a");
  TempDir b("arreg_cli_track_b");
  const std::string args = " tracking --speed 100 --duration 15 --scene " +
                           kScene + " --seed 42 --out ";
  CHECK(run_cli("simulate" + args + a.str()).exit_code == 0);
  CHECK(run_cli("simulate" + args + b.str()).exit_code == 0);
  CHECK(slurp(a.file("tracking.csv")) == slurp(b.file("tracking.csv")));
  CHECK(slurp(a.file("tracking_report.json")) ==
        slurp(b.file("tracking_report.json")));

  TempDir c("arreg_cli_track_c");
  CHECK(run_cli("simulate tracking --speed 100 --duration 15 --scene " + kScene +
                " --seed 43 --out " + c.str())
            .exit_code == 0);
  // Different seed still identical here because the scene has no random
  // noise enabled; the seed is echoed in the report though.
  const json ra = json::parse(slurp(a.file("tracking_report.json")));
  const json rc = json::parse(slurp(c.file("tracking_report.json")));
  CHECK(ra["seed"] == 42);
  CHECK(rc["seed"] == 43);
  CHECK(ra["references"]["tracking_rms"]["label"] == "paper-sec-5-3");
}

TEST_CASE("an unobservable scene makes tracking exit with code 4") {
  TempDir dir("arreg_cli_empty_tracking");
  json scene = json::parse(slurp(kScene));
  // Workpiece above the rail: every overlay measurement fails.
  scene["workpiece"]["p1_mm"] = {1750.0, 0.0, 5000.0};
  scene["workpiece"]["p3_mm"] = {1750.0, 150.0, 5100.0};
  scene["workpiece"]["p5_mm"] = {1750.0, 0.0, 5200.0};
  write_text_file(dir.file("high.json").string(), scene.dump());
  CHECK(run_cli("simulate tracking --speed 100 --duration 2 --scene " +
                dir.file("high.json").string() + " --out " + dir.str())
            .exit_code == 4);
}

TEST_CASE("static run report has the published-table shape") {
  TempDir dir("arreg_cli_static");
  CHECK(run_cli("simulate static --scene " + kScene + " --out " + dir.str())
            .exit_code == 0);
  const json report = json::parse(slurp(dir.file("static_report.json")));
  REQUIRE(report["points"].size() == 3);
  for (const json& row : report["points"]) {
    CHECK(row.contains("position_mm"));
    CHECK(row.contains("mean_mm"));
    CHECK(row.contains("std_mm"));
  }
  CHECK(report["references"]["static_measuring_result"]["label"] ==
        "paper-table-2");
}

TEST_CASE("error-budget emits the sweep table") {
  TempDir dir("arreg_cli_budget");
  CHECK(run_cli("error-budget --beta-max 45 --z 3000 --x 100 --y 100 --scene " +
                kScene + " --out " + dir.str())
            .exit_code == 0);
  const std::string csv = slurp(dir.file("error_budget_sweep.csv"));
  CHECK(csv.rfind("beta_deg,s_mm,sigma_x,sigma_y,sigma_z\n", 0) == 0);
  const json report = json::parse(slurp(dir.file("error_budget.json")));
  CHECK(report["references"]["published_budget"]["label"] == "paper-sec-5-1");
  CHECK(report["rows"].size() == 40);  // 10 pitch steps x 4 track positions
}

TEST_CASE("json format switches the tabular artifact") {
  TempDir dir("arreg_cli_json");
  CHECK(run_cli("simulate tracking --speed 100 --duration 2 --format json "
                "--scene " + kScene + " --out " + dir.str())
            .exit_code == 0);
  CHECK(fs::exists(dir.file("tracking.json")));
  CHECK_FALSE(fs::exists(dir.file("tracking.csv")));
}

TEST_CASE("project prints the pixel of a world point") {
  int code = 0;
  const std::string out = run_cli_stdout(
      "project --scene " + kScene + " --arclength 750 --point 1750 0 1000",
      code);
  CHECK(code == 0);

  // Cross-check against the library through the same scene.
  const SceneConfig cfg = load_scene(kScene).config;
  const RigidTransform pose = camera_pose_at(
      cfg.rig.track, 750.0, cfg.rig.turntable_rest, cfg.rig.m_cr, cfg.rig.heading);
  const PixelPoint expected = overlay_pixel(
      cfg.rig.camera, pose, {frames::world(), {1750.0, 0.0, 1000.0}});

  double u = 0.0, v = 0.0;
  REQUIRE(std::sscanf(out.c_str(), "%lf,%lf", &u, &v) == 2);
  CHECK(u == doctest::Approx(expected.u_px).epsilon(1e-9));
  CHECK(v == doctest::Approx(expected.v_px).epsilon(1e-9));
}

TEST_CASE("project replays a trajectory file") {
  TempDir dir("arreg_cli_project");
  write_text_file(dir.file("traj.csv").string(),
                  "t_s,encoder_counts,alpha_rad,beta_rad\n"
                  "0,0,0,0\n0.1,50,0,0\n0.2,100,0,0\n");
  CHECK(run_cli("project --trajectory " + dir.file("traj.csv").string() +
                " --scene " + kScene + " --out " + dir.str())
            .exit_code == 0);
  const std::string csv = slurp(dir.file("overlay_track.csv"));
  CHECK(csv.rfind("t_s,u_px,v_px\n", 0) == 0);
  // Three rows plus header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("core modules perform no file or console I/O") {
  const std::vector<std::string> core = {
      "src/geometry.cpp",    "src/camera.cpp",   "src/pose_solver.cpp",
      "src/error_model.cpp", "src/rig_sim.cpp",  "include/arreg/geometry.hpp",
      "include/arreg/camera.hpp", "include/arreg/pose_solver.hpp",
      "include/arreg/error_model.hpp", "include/arreg/rig_sim.hpp",
      "include/arreg/rng.hpp", "include/arreg/error.hpp"};
  const std::vector<std::string> forbidden = {
      "<iostream>", "<fstream>", "<cstdio>", "<stdio.h>", "json.hpp", "printf"};
  for (const std::string& rel : core) {
    const std::string text =
        read_text_file(std::string(ARREG_SOURCE_DIR) + "/" + rel);
    for (const std::string& needle : forbidden) {
      CHECK_MESSAGE(text.find(needle) == std::string::npos,
                    rel << " must not reference " << needle);
    }
  }
}

TEST_SUITE_END();
