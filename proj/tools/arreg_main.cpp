#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "arreg/csv_io.hpp"
#include "arreg/report.hpp"
#include "arreg/rng.hpp"

namespace {

using namespace arreg;

double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::IoError:
    case ErrorCode::TooFewPoints:
      return 3;
    default:
      return 4;
  }
}

struct GlobalOptions {
  std::string scene_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "csv";
  bool verbose = false;
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 1) {
    out.push_back(hi);
    return out;
  }
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  }
  return out;
}

SceneLoadResult load_and_report(const GlobalOptions& g) {
  if (g.scene_path.empty()) {
    throw CLI::RequiredError("--scene");
  }
  SceneLoadResult loaded = load_scene(g.scene_path);
  for (const std::string& w : loaded.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (g.seed) {
    loaded.config.noise.seed = *g.seed;
  }
  if (g.verbose) {
    std::cerr << "scene " << g.scene_path << " hash "
              << scene_content_hash(loaded.config) << " seed "
              << loaded.config.noise.seed << "\n";
  }
  return loaded;
}

std::filesystem::path out_file(const GlobalOptions& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return std::filesystem::path(g.out_dir) / name;
}

void write_report(const GlobalOptions& g, const std::string& name,
                  const nlohmann::json& j) {
  const auto path = out_file(g, name);
  write_text_file(path.string(), j.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

void write_table(const GlobalOptions& g, const std::string& stem,
                 const std::string& csv, const nlohmann::json& rows) {
  if (g.format == "csv") {
    const auto path = out_file(g, stem + ".csv");
    write_text_file(path.string(), csv);
    std::cout << "wrote " << path.string() << "\n";
  } else {
    const auto path = out_file(g, stem + ".json");
    write_text_file(path.string(), rows.dump(2) + "\n");
    std::cout << "wrote " << path.string() << "\n";
  }
}

int run_validate(const GlobalOptions& g) {
  const SceneLoadResult loaded = load_and_report(g);
  const SceneConfig& cfg = loaded.config;
  nlohmann::json j = report_envelope("validate-scene", cfg, cfg.noise.seed);
  j["warnings"] = loaded.warnings;
  j["m_cr_orthonormality_residual"] = loaded.m_cr_orthonormality_residual;
  j["track_perimeter_mm"] = cfg.rig.track.perimeter_mm();
  j["references"] = {{"hand_eye_calibration", reference_hand_eye()}};
  write_report(g, "scene_report.json", j);
  std::cout << "scene ok: hash " << scene_content_hash(cfg) << ", "
            << loaded.warnings.size() << " warning(s)\n";
  return 0;
}

struct ProjectArgs {
  std::vector<double> point;
  double arclength_mm = 0.0;
  std::optional<std::int64_t> counts;
  std::optional<double> alpha_deg;
  std::optional<double> beta_deg;
  bool apply_dist = false;
  std::string trajectory_path;
};

int run_project(const GlobalOptions& g, const ProjectArgs& a) {
  const SceneLoadResult loaded = load_and_report(g);
  const SceneConfig& cfg = loaded.config;
  const RigScene& rig = cfg.rig;

  EulerAngles angles = rig.turntable_rest;
  if (a.alpha_deg) angles.alpha_rad = deg_to_rad(*a.alpha_deg);
  if (a.beta_deg) angles.beta_rad = deg_to_rad(*a.beta_deg);

  const FramedPoint target =
      a.point.empty()
          ? scene_anchor(rig)
          : FramedPoint{frames::world(), Vec3{a.point[0], a.point[1], a.point[2]}};

  if (!a.trajectory_path.empty()) {
    const std::vector<TrajectoryRow> trajectory =
        read_trajectory_csv(a.trajectory_path);
    std::vector<PixelPoint> pixels;
    pixels.reserve(trajectory.size());
    for (const TrajectoryRow& row : trajectory) {
      const RigState state{row.encoder_counts,
                           {row.alpha_rad, row.beta_rad, 0.0},
                           row.t_s};
      const RigidTransform pose =
          camera_pose(rig.track, rig.encoder, rig.m_cr, state, rig.heading);
      PixelPoint px = overlay_pixel(rig.camera, pose, target);
      if (a.apply_dist) px = apply_distortion(rig.camera, px);
      pixels.push_back(px);
    }
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
      rows.push_back({{"t_s", trajectory[i].t_s},
                      {"u_px", pixels[i].u_px},
                      {"v_px", pixels[i].v_px}});
    }
    write_table(g, "overlay_track", overlay_track_csv(trajectory, pixels), rows);
    return 0;
  }

  const double s = a.counts
                       ? encoder_to_arclength(rig.encoder, *a.counts)
                       : a.arclength_mm;
  const RigidTransform pose =
      camera_pose_at(rig.track, s, angles, rig.m_cr, rig.heading);
  PixelPoint px = overlay_pixel(rig.camera, pose, target);
  if (a.apply_dist) px = apply_distortion(rig.camera, px);

  std::cout << format_number(px.u_px) << "," << format_number(px.v_px) << "\n";
  if (!pixel_in_image(px, rig.camera)) {
    std::cerr << "warning: projected pixel lies outside the image bounds\n";
  }
  return 0;
}

int run_solve_pose(const GlobalOptions& g, const std::string& points_path) {
  const SceneLoadResult loaded = load_and_report(g);
  const SceneConfig& cfg = loaded.config;

  const std::vector<Correspondence> points =
      read_correspondences_csv(points_path);
  const PoseSolution solution = solve_pose(points, cfg.rig.camera);
  const ResidualReport residuals =
      reprojection_residual(solution.projection, points);

  nlohmann::json j = pose_report_json(solution, cfg);
  j["points_file"] = points_path;
  j["point_count"] = points.size();
  j["behind_camera_count"] = residuals.behind_camera_count;
  write_report(g, "pose_solution.json", j);

  std::string csv = "index,error_px\n";
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < residuals.per_point_px.size(); ++i) {
    csv += std::to_string(i) + "," + format_number(residuals.per_point_px[i]) + "\n";
    rows.push_back({{"index", i}, {"error_px", residuals.per_point_px[i]}});
  }
  write_table(g, "residuals", csv, rows);

  std::cout << "rms_reprojection_px " << format_number(solution.rms_reprojection_px)
            << "\n";
  return 0;
}

struct BudgetArgs {
  double beta_max_deg = 45.0;
  int beta_steps = 10;
  double s_max_mm = 1500.0;
  int s_steps = 4;
  double alpha_deg = 0.0;
  double x_mm = 100.0;
  double y_mm = 100.0;
  double z_mm = 3000.0;
};

int run_budget(const GlobalOptions& g, const BudgetArgs& a) {
  const SceneLoadResult loaded = load_and_report(g);
  const SceneConfig& cfg = loaded.config;

  ChainParameters base;
  base.alpha_rad = deg_to_rad(a.alpha_deg);

  SweepGrid grid;
  for (double b : linspace(0.0, deg_to_rad(a.beta_max_deg), a.beta_steps)) {
    grid.betas_rad.push_back(b);
  }
  grid.track_positions_mm = linspace(0.0, a.s_max_mm, a.s_steps);

  const Vec3 pc{a.x_mm, a.y_mm, a.z_mm};
  const std::vector<SweepRow> rows =
      sensitivity_sweep(base, grid, pc, cfg.uncertainty);

  nlohmann::json report = budget_report_json(rows, base, pc, cfg);
  write_table(g, "error_budget_sweep", sweep_csv(rows), report["rows"]);
  write_report(g, "error_budget.json", report);
  return 0;
}

struct StaticArgs {
  std::vector<double> points_mm;
  int trials = 0;
};

int run_static(const GlobalOptions& g, const StaticArgs& a) {
  const SceneLoadResult loaded = load_and_report(g);
  const SceneConfig& cfg = loaded.config;

  const std::vector<double>& points =
      a.points_mm.empty() ? cfg.experiment.static_points_mm : a.points_mm;
  const int trials = a.trials > 0 ? a.trials : cfg.experiment.static_trials;

  const StaticExperimentReport report =
      run_static_experiment(cfg.rig, points, trials, cfg.noise);
  nlohmann::json j = static_report_json(report, cfg);
  write_report(g, "static_report.json", j);

  std::string csv = "position_mm,mean_mm,std_mm\n";
  for (const StaticPointResult& p : report.points) {
    csv += format_number(p.position_mm) + "," + format_number(p.mean_offset_mm) +
           "," + format_number(p.std_offset_mm) + "\n";
  }
  write_table(g, "static_points", csv, j["points"]);
  return 0;
}

struct TrackingArgs {
  double speed_mm_s = 100.0;
  double duration_s = 15.0;
  double dt_s = 0.1;
};

int run_tracking(const GlobalOptions& g, const TrackingArgs& a) {
  const SceneLoadResult loaded = load_and_report(g);
  const SceneConfig& cfg = loaded.config;

  const TrackingExperimentResult result = run_tracking_experiment(
      cfg.rig, a.speed_mm_s, a.duration_s, a.dt_s, cfg.noise);

  nlohmann::json rows = nlohmann::json::array();
  for (const TrackingSample& s : result.samples) {
    rows.push_back({{"t_s", s.t_s},
                    {"expected_mm", s.expected_offset_mm},
                    {"measured_mm", s.measured_offset_mm},
                    {"error_mm", s.error_mm}});
  }
  write_table(g, "tracking", tracking_samples_csv(result.samples), rows);
  write_report(g, "tracking_report.json", tracking_report_json(result, cfg));

  std::cout << "rms_mm " << format_number(result.rms_mm) << " over first "
            << format_number(result.rms_window_mm) << " mm ("
            << format_number(result.rms_percent_of_window) << "%)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinematic AR registration toolkit: encoder-tracked rail "
               "camera simulation, pose resection, and error budgets"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--scene", g.scene_path, "Scene configuration file (JSON)");
  app.add_option("--seed", g.seed, "Override the scene noise seed");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Tabular output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_flag("--verbose", g.verbose, "Chatty diagnostics");

  app.add_subcommand("validate-scene", "Load and validate a scene file");

  auto* project = app.add_subcommand(
      "project", "Project a world point through the rig camera");
  ProjectArgs project_args;
  project->add_option("--point", project_args.point,
                      "World point X Y Z in mm (default: the scene anchor)")
      ->expected(3);
  project->add_option("--arclength", project_args.arclength_mm,
                      "Track position in mm");
  project->add_option("--counts", project_args.counts, "Encoder counts");
  project->add_option("--alpha", project_args.alpha_deg,
                      "Turntable roll in degrees");
  project->add_option("--beta", project_args.beta_deg,
                      "Turntable pitch in degrees");
  project->add_flag("--apply-distortion", project_args.apply_dist,
                    "Apply radial distortion to the result");
  project->add_option("--trajectory", project_args.trajectory_path,
                      "Trajectory CSV (t_s,encoder_counts,alpha_rad,beta_rad)");

  auto* solve = app.add_subcommand(
      "solve-pose", "Solve the camera pose from world/pixel correspondences");
  std::string points_path;
  solve->add_option("--points", points_path, "Correspondence CSV (X,Y,Z,u,v)")
      ->required();

  auto* budget = app.add_subcommand(
      "error-budget", "Sweep the registration error budget");
  BudgetArgs budget_args;
  budget->add_option("--beta-max", budget_args.beta_max_deg,
                     "Largest turntable pitch in degrees")
      ->capture_default_str();
  budget->add_option("--beta-steps", budget_args.beta_steps,
                     "Grid points along the pitch axis")
      ->capture_default_str();
  budget->add_option("--s-max", budget_args.s_max_mm,
                     "Largest track position in mm")
      ->capture_default_str();
  budget->add_option("--s-steps", budget_args.s_steps,
                     "Grid points along the track axis")
      ->capture_default_str();
  budget->add_option("--alpha", budget_args.alpha_deg,
                     "Fixed turntable roll in degrees")
      ->capture_default_str();
  budget->add_option("--x", budget_args.x_mm, "Observed point X (camera frame, mm)")
      ->capture_default_str();
  budget->add_option("--y", budget_args.y_mm, "Observed point Y (camera frame, mm)")
      ->capture_default_str();
  budget->add_option("--z", budget_args.z_mm, "Observed point Z (camera frame, mm)")
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Run a rig experiment");
  simulate->require_subcommand(1);
  simulate->fallthrough();

  auto* sim_static = simulate->add_subcommand(
      "static", "Repeated offset observations at fixed track positions");
  StaticArgs static_args;
  sim_static->add_option("--points", static_args.points_mm,
                         "Observation track positions in mm");
  sim_static->add_option("--trials", static_args.trials,
                         "Observations per point");

  auto* sim_tracking = simulate->add_subcommand(
      "tracking", "Camera follows a target moving along world X");
  TrackingArgs tracking_args;
  sim_tracking->add_option("--speed", tracking_args.speed_mm_s,
                           "Target speed in mm/s")
      ->capture_default_str();
  sim_tracking->add_option("--duration", tracking_args.duration_s,
                           "Run length in seconds")
      ->capture_default_str();
  sim_tracking->add_option("--dt", tracking_args.dt_s, "Sample period in seconds")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("validate-scene")) return run_validate(g);
    if (app.got_subcommand(project)) return run_project(g, project_args);
    if (app.got_subcommand(solve)) return run_solve_pose(g, points_path);
    if (app.got_subcommand(budget)) return run_budget(g, budget_args);
    if (app.got_subcommand(simulate)) {
      if (simulate->got_subcommand(sim_static)) return run_static(g, static_args);
      if (simulate->got_subcommand(sim_tracking)) {
        return run_tracking(g, tracking_args);
      }
    }
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const CLI::RequiredError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
