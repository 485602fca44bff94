#include "arreg/rig_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "arreg/rng.hpp"

namespace arreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct PathPoint {
  Vec3 position;
  Vec3 tangent;
};

PathPoint stadium_point(const TrackGeometry& g, double s) {
  const double r = g.corner_radius_mm;
  const double lx = g.length_mm - 2.0 * r;  // straight run along X
  const double ly = g.width_mm - 2.0 * r;   // straight run along Y
  const double arc = 0.5 * kPi * r;
  const double z = g.height_mm;

  if (s < lx) {
    return {{r + s, 0.0, z}, {1.0, 0.0, 0.0}};
  }
  s -= lx;
  if (s < arc) {
    const double th = -0.5 * kPi + s / r;
    return {{g.length_mm - r + r * std::cos(th), r + r * std::sin(th), z},
            {-std::sin(th), std::cos(th), 0.0}};
  }
  s -= arc;
  if (s < ly) {
    return {{g.length_mm, r + s, z}, {0.0, 1.0, 0.0}};
  }
  s -= ly;
  if (s < arc) {
    const double th = s / r;
    return {{g.length_mm - r + r * std::cos(th), g.width_mm - r + r * std::sin(th), z},
            {-std::sin(th), std::cos(th), 0.0}};
  }
  s -= arc;
  if (s < lx) {
    return {{g.length_mm - r - s, g.width_mm, z}, {-1.0, 0.0, 0.0}};
  }
  s -= lx;
  if (s < arc) {
    const double th = 0.5 * kPi + s / r;
    return {{r + r * std::cos(th), g.width_mm - r + r * std::sin(th), z},
            {-std::sin(th), std::cos(th), 0.0}};
  }
  s -= arc;
  if (s < ly) {
    return {{0.0, g.width_mm - r - s, z}, {0.0, -1.0, 0.0}};
  }
  s -= ly;
  const double th = kPi + s / r;
  return {{r + r * std::cos(th), r + r * std::sin(th), z},
          {-std::sin(th), std::cos(th), 0.0}};
}

}  // namespace

void TrackGeometry::validate() const {
  if (!(corner_radius_mm > 0.0)) {
    throw Error(ErrorCode::ValidationError, "corner radius must be positive");
  }
  if (2.0 * corner_radius_mm > std::min(length_mm, width_mm)) {
    throw Error(ErrorCode::ValidationError,
                "corner radius too large for the track bounding box");
  }
  if (!(height_mm > 0.0)) {
    throw Error(ErrorCode::ValidationError, "track height must be positive");
  }
}

double TrackGeometry::perimeter_mm() const {
  return 2.0 * (length_mm - 2.0 * corner_radius_mm) +
         2.0 * (width_mm - 2.0 * corner_radius_mm) +
         2.0 * kPi * corner_radius_mm;
}

void EncoderModel::validate() const {
  if (pulses_per_rev < 1) {
    throw Error(ErrorCode::ValidationError, "pulses_per_rev must be >= 1");
  }
  if (!(wheel_circumference_mm > 0.0)) {
    throw Error(ErrorCode::ValidationError,
                "wheel circumference must be positive");
  }
}

void NoiseSpec::validate() const {
  if (!(turntable_sigma_rad >= 0.0) || !(pixel_sigma_px >= 0.0)) {
    throw Error(ErrorCode::ValidationError, "noise sigmas must be >= 0");
  }
}

double encoder_to_arclength(const EncoderModel& e, std::int64_t counts) {
  return static_cast<double>(counts) / e.pulses_per_rev * e.wheel_circumference_mm;
}

std::int64_t arclength_to_counts(const EncoderModel& e, double arclength_mm) {
  // Floor with a one-part-in-1e9 guard so that a pulse boundary reached
  // through rounded arithmetic still lands on its own pulse.
  const double pulses = arclength_mm / e.wheel_circumference_mm * e.pulses_per_rev;
  return static_cast<std::int64_t>(std::floor(pulses + 1e-9));
}

RigidTransform track_pose_at(const TrackGeometry& g, double arclength_mm,
                             HeadingMode mode) {
  const double perimeter = g.perimeter_mm();
  double s = std::fmod(arclength_mm, perimeter);
  if (s < 0.0) s += perimeter;

  const PathPoint p = stadium_point(g, s);
  const Vec3 x_axis = mode == HeadingMode::TangentFollowing
                          ? p.tangent
                          : Vec3{1.0, 0.0, 0.0};
  const Vec3 z_axis{0.0, 0.0, -1.0};  // overhead camera base looks down
  const Vec3 y_axis = z_axis.cross(x_axis);

  Mat3 axes;  // base axes as world columns
  axes.col(0) = x_axis;
  axes.col(1) = y_axis;
  axes.col(2) = z_axis;

  const Mat3 rot = axes.transpose();
  return RigidTransform(rot, -(rot * p.position), frames::world(),
                        frames::track_base());
}

RigidTransform camera_pose_at(const TrackGeometry& g, double arclength_mm,
                              const EulerAngles& turntable,
                              const RigidTransform& m_cr, HeadingMode mode) {
  const RigidTransform world_to_base = track_pose_at(g, arclength_mm, mode);
  const RigidTransform turntable_to_base(
      euler_to_rotation({turntable.alpha_rad, turntable.beta_rad, 0.0}),
      Vec3::Zero(), frames::turntable(), frames::track_base());
  return compose(invert(m_cr), compose(invert(turntable_to_base), world_to_base));
}

RigidTransform camera_pose(const TrackGeometry& g, const EncoderModel& e,
                           const RigidTransform& m_cr, const RigState& state,
                           HeadingMode mode) {
  return camera_pose_at(g, encoder_to_arclength(e, state.encoder_counts),
                        state.turntable, m_cr, mode);
}

PixelPoint overlay_pixel(const CameraIntrinsics& c,
                         const RigidTransform& world_to_camera,
                         const FramedPoint& anchor_world) {
  return project_point(c, world_to_camera, anchor_world);
}

FramedPoint backproject_to_plane(const CameraIntrinsics& c,
                                 const RigidTransform& world_to_camera,
                                 const PixelPoint& pixel, double plane_z_mm) {
  const Mat3& rot = world_to_camera.rotation();
  const Vec3 center = -(rot.transpose() * world_to_camera.translation_mm());

  const double yn = (pixel.v_px - c.v0_px) / c.fy_px;
  const double xn = (pixel.u_px - c.u0_px - c.skew_r * yn) / c.fx_px;
  const Vec3 dir_world = rot.transpose() * Vec3{xn, yn, 1.0};

  if (std::abs(dir_world.z()) < 1e-15) {
    throw Error(ErrorCode::BehindCamera, "viewing ray is parallel to the plane");
  }
  const double lambda = (plane_z_mm - center.z()) / dir_world.z();
  if (lambda <= 0.0) {
    throw Error(ErrorCode::BehindCamera, "plane lies behind the camera");
  }
  return {world_to_camera.from_frame(), center + lambda * dir_world};
}

namespace {

/// One simulated measurement of the virtual-to-real X-axis offset.
/// Renders the virtual anchor through the pose the rig believes it has
/// (quantized encoder, noisy turntable readout), observes the real
/// reference through the true pose, perturbs both image measurements,
/// and converts back to workpiece-plane millimetres through the true
/// pose. Consumes a fixed number of rng draws per call.
double measure_offset(const RigScene& scene, double s_true,
                      const FramedPoint& reference, const FramedPoint& anchor,
                      const NoiseSpec& noise, SeededRng& rng) {
  const double d_alpha = rng.gaussian(0.0, noise.turntable_sigma_rad);
  const double d_beta = rng.gaussian(0.0, noise.turntable_sigma_rad);
  const double n_virt_u = rng.gaussian(0.0, noise.pixel_sigma_px);
  const double n_virt_v = rng.gaussian(0.0, noise.pixel_sigma_px);
  const double n_real_u = rng.gaussian(0.0, noise.pixel_sigma_px);
  const double n_real_v = rng.gaussian(0.0, noise.pixel_sigma_px);

  const RigidTransform pose_true = camera_pose_at(
      scene.track, s_true, scene.turntable_rest, scene.m_cr, scene.heading);

  const double s_est =
      noise.encoder_quantization
          ? encoder_to_arclength(scene.encoder,
                                 arclength_to_counts(scene.encoder, s_true))
          : s_true;
  const EulerAngles angles_est{scene.turntable_rest.alpha_rad + d_alpha,
                               scene.turntable_rest.beta_rad + d_beta,
                               scene.turntable_rest.gamma_rad};
  const RigidTransform pose_est = camera_pose_at(
      scene.track, s_est, angles_est, scene.m_cr, scene.heading);

  PixelPoint virt = overlay_pixel(scene.camera, pose_est, anchor);
  PixelPoint real = overlay_pixel(scene.camera, pose_true, reference);
  virt.u_px += n_virt_u;
  virt.v_px += n_virt_v;
  real.u_px += n_real_u;
  real.v_px += n_real_v;

  const FramedPoint virt_world =
      backproject_to_plane(scene.camera, pose_true, virt, anchor.coords_mm.z());
  const FramedPoint real_world = backproject_to_plane(
      scene.camera, pose_true, real, reference.coords_mm.z());
  return virt_world.coords_mm.x() - real_world.coords_mm.x();
}

/// Mean and sample standard deviation computed against the first value,
/// so a run of identical measurements yields an exactly zero deviation.
void mean_and_std(const std::vector<double>& values, double& mean, double& std) {
  if (values.empty()) {
    mean = std::numeric_limits<double>::quiet_NaN();
    std = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  const double pivot = values.front();
  double dev_sum = 0.0;
  for (double v : values) dev_sum += v - pivot;
  const double dev_mean = dev_sum / static_cast<double>(values.size());
  mean = pivot + dev_mean;

  if (values.size() < 2) {
    std = 0.0;
    return;
  }
  double sq = 0.0;
  for (double v : values) {
    const double d = (v - pivot) - dev_mean;
    sq += d * d;
  }
  std = std::sqrt(sq / (static_cast<double>(values.size()) - 1.0));
}

}  // namespace

RigidTransform workpiece_frame(const RigScene& scene) {
  return build_workpiece_frame(scene.workpiece_p1, scene.workpiece_p3,
                               scene.workpiece_p5);
}

FramedPoint scene_anchor(const RigScene& scene) {
  // Rotate the workpiece-axis offset out into world axes.
  const Mat3 wp_to_world = workpiece_frame(scene).rotation().transpose();
  return {scene.workpiece_p1.frame,
          scene.workpiece_p1.coords_mm + wp_to_world * scene.anchor_offset_mm};
}

StaticExperimentReport run_static_experiment(
    const RigScene& scene, std::span<const double> observation_points_mm,
    int trials, const NoiseSpec& noise) {
  if (trials < 2) {
    throw Error(ErrorCode::ValidationError,
                "static experiment needs at least 2 trials");
  }
  if (observation_points_mm.empty()) {
    throw Error(ErrorCode::EmptyInput, "no observation points");
  }
  noise.validate();

  const FramedPoint& reference = scene.workpiece_p1;
  const FramedPoint anchor = scene_anchor(scene);

  StaticExperimentReport report;
  report.expected_offset_mm = anchor.coords_mm.x() - reference.coords_mm.x();
  report.seed = noise.seed;
  for (std::size_t i = 0; i < observation_points_mm.size(); ++i) {
    const std::uint64_t point_seed = SeededRng::substream(noise.seed, i);
    StaticPointResult result;
    result.position_mm = observation_points_mm[i];
    result.trials = trials;

    std::vector<double> measured;
    measured.reserve(static_cast<std::size_t>(trials));
    for (int k = 0; k < trials; ++k) {
      SeededRng rng(SeededRng::substream(point_seed, static_cast<std::uint64_t>(k)));
      try {
        measured.push_back(measure_offset(scene, observation_points_mm[i],
                                          reference, anchor, noise, rng));
      } catch (const Error&) {
        ++result.failed_trials;
      }
    }
    mean_and_std(measured, result.mean_offset_mm, result.std_offset_mm);
    report.points.push_back(result);
  }
  return report;
}

TrackingExperimentResult run_tracking_experiment(const RigScene& scene,
                                                 double target_speed_mm_s,
                                                 double duration_s, double dt_s,
                                                 const NoiseSpec& noise) {
  if (!(dt_s > 0.0) || !(duration_s > 0.0)) {
    throw Error(ErrorCode::ValidationError,
                "tracking experiment needs dt > 0 and duration > 0");
  }
  noise.validate();

  TrackingExperimentResult result;
  result.seed = noise.seed;
  SeededRng rng(SeededRng::substream(noise.seed, 0));

  const Vec3 offset_world =
      scene_anchor(scene).coords_mm - scene.workpiece_p1.coords_mm;
  const double expected = offset_world.x();
  const auto steps = static_cast<std::int64_t>(std::floor(duration_s / dt_s));
  for (std::int64_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt_s;
    const double travel = target_speed_mm_s * t;
    const double s_true = scene.tracking_start_arclength_mm + travel;

    FramedPoint reference = scene.workpiece_p1;
    reference.coords_mm.x() += travel;
    const FramedPoint anchor{reference.frame,
                             reference.coords_mm + offset_world};

    try {
      const double measured =
          measure_offset(scene, s_true, reference, anchor, noise, rng);
      result.samples.push_back({t, expected, measured, measured - expected});
    } catch (const Error&) {
      ++result.failed_steps;
    }
  }
  if (result.samples.empty()) {
    throw Error(ErrorCode::EmptyInput, "all " +
                                           std::to_string(result.failed_steps) +
                                           " tracking steps failed");
  }

  // Summary RMS: 30 uniformly spaced samples over the first 1500 mm of
  // travel (or the whole run when shorter).
  const double total_travel =
      target_speed_mm_s * static_cast<double>(steps) * dt_s;
  result.rms_window_mm = std::min(1500.0, total_travel);
  result.rms_sample_count = 30;
  std::vector<double> selected;
  selected.reserve(30);
  for (int j = 1; j <= result.rms_sample_count; ++j) {
    const double want =
        result.rms_window_mm * static_cast<double>(j) / result.rms_sample_count;
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < result.samples.size(); ++k) {
      const double travel = target_speed_mm_s * result.samples[k].t_s;
      const double dist = std::abs(travel - want);
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    selected.push_back(result.samples[best].error_mm);
  }
  result.rms_mm = rms_error_values(selected);
  result.rms_percent_of_window =
      result.rms_window_mm > 0.0 ? 100.0 * result.rms_mm / result.rms_window_mm
                                 : 0.0;
  return result;
}

double rms_error_values(std::span<const double> errors) {
  if (errors.empty()) {
    throw Error(ErrorCode::EmptyInput, "no samples for the RMS");
  }
  double sum_sq = 0.0;
  for (double e : errors) sum_sq += e * e;
  return std::sqrt(sum_sq / static_cast<double>(errors.size()));
}

double rms_error(std::span<const TrackingSample> samples) {
  if (samples.empty()) {
    throw Error(ErrorCode::EmptyInput, "no samples for the RMS");
  }
  std::vector<double> errors;
  errors.reserve(samples.size());
  for (const TrackingSample& s : samples) errors.push_back(s.error_mm);
  return rms_error_values(errors);
}

}  // namespace arreg
