#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "arreg/camera.hpp"
#include "arreg/geometry.hpp"

namespace arreg {

/// Closed rail path: a rounded rectangle (two straights per side, four
/// quarter-circle corners) in the z = height_mm plane. length/width are
/// the bounding dimensions.
struct TrackGeometry {
  double length_mm = 6000.0;
  double width_mm = 3000.0;
  double corner_radius_mm = 1000.0;
  double height_mm = 4000.0;

  void validate() const;
  double perimeter_mm() const;
};

/// Orientation of the carried turntable base along the rail.
enum class HeadingMode {
  TangentFollowing,  // base X tracks the path tangent
  WorldFixed,        // base axes stay aligned with the start-of-track pose
};

/// Incremental rotary encoder on the drive sprocket.
struct EncoderModel {
  int pulses_per_rev = 1000;
  double wheel_circumference_mm = 200.0;

  void validate() const;
  double mm_per_pulse() const {
    return wheel_circumference_mm / pulses_per_rev;
  }
};

double encoder_to_arclength(const EncoderModel& e, std::int64_t counts);

/// Floor quantization; inverse of encoder_to_arclength up to one pulse.
std::int64_t arclength_to_counts(const EncoderModel& e, double arclength_mm);

struct RigState {
  std::int64_t encoder_counts = 0;
  EulerAngles turntable;  // gamma unused by the kinematic chain
  double timestamp_s = 0.0;
};

struct NoiseSpec {
  bool encoder_quantization = true;
  double turntable_sigma_rad = 0.0;
  double pixel_sigma_px = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// World -> turntable-base transform at arclength s (taken modulo the
/// perimeter). Base X follows the path tangent, base Z points down at
/// the floor, Y completes the right-handed set.
RigidTransform track_pose_at(const TrackGeometry& g, double arclength_mm,
                             HeadingMode mode = HeadingMode::TangentFollowing);

/// World -> camera pose for a continuous arclength and turntable angles.
RigidTransform camera_pose_at(const TrackGeometry& g, double arclength_mm,
                              const EulerAngles& turntable,
                              const RigidTransform& m_cr,
                              HeadingMode mode = HeadingMode::TangentFollowing);

/// World -> camera pose for an encoder-quantized rig state; the chain is
/// track base, then the two-axis turntable rotation, then the mounting
/// transform m_cr (camera -> turntable).
RigidTransform camera_pose(const TrackGeometry& g, const EncoderModel& e,
                           const RigidTransform& m_cr, const RigState& state,
                           HeadingMode mode = HeadingMode::TangentFollowing);

/// Screen location where the virtual image anchored at anchor_world must
/// render for the given camera pose.
PixelPoint overlay_pixel(const CameraIntrinsics& c,
                         const RigidTransform& world_to_camera,
                         const FramedPoint& anchor_world);

/// Intersects the viewing ray of a pixel with the horizontal world plane
/// z = plane_z_mm. Throws BehindCamera when the plane is not in front of
/// the camera along the ray.
FramedPoint backproject_to_plane(const CameraIntrinsics& c,
                                 const RigidTransform& world_to_camera,
                                 const PixelPoint& pixel, double plane_z_mm);

/// Everything the experiments need to run: rig hardware plus the scene
/// content (workpiece feature points and the virtual-image offset).
struct RigScene {
  CameraIntrinsics camera;
  RigidTransform m_cr =
      RigidTransform::identity(frames::camera(), frames::turntable());
  TrackGeometry track;
  EncoderModel encoder;
  HeadingMode heading = HeadingMode::TangentFollowing;
  FramedPoint workpiece_p1{frames::world(), Vec3::Zero()};
  FramedPoint workpiece_p3{frames::world(), Vec3::Zero()};
  FramedPoint workpiece_p5{frames::world(), Vec3::Zero()};
  Vec3 anchor_offset_mm = Vec3::Zero();
  EulerAngles turntable_rest;
  double tracking_start_arclength_mm = 0.0;
};

/// World -> workpiece transform built from the scene's feature points.
RigidTransform workpiece_frame(const RigScene& scene);

/// World position of the virtual-image anchor: workpiece origin plus the
/// configured offset expressed in workpiece axes.
FramedPoint scene_anchor(const RigScene& scene);

struct StaticPointResult {
  double position_mm = 0.0;
  double mean_offset_mm = 0.0;
  double std_offset_mm = 0.0;
  int trials = 0;
  int failed_trials = 0;
};

struct StaticExperimentReport {
  std::vector<StaticPointResult> points;
  double expected_offset_mm = 0.0;
  std::uint64_t seed = 0;
};

/// Repeatedly measures the virtual-to-real X-axis offset at each track
/// observation point. One measurement renders the virtual anchor through
/// the encoder/turntable-estimated camera pose, observes the real
/// reference through the true pose, adds pixel measurement noise, and
/// back-projects both image points onto the workpiece plane. Per-trial
/// failures are counted, not fatal. Requires trials >= 2.
StaticExperimentReport run_static_experiment(
    const RigScene& scene, std::span<const double> observation_points_mm,
    int trials, const NoiseSpec& noise);

struct TrackingSample {
  double t_s = 0.0;
  double expected_offset_mm = 0.0;
  double measured_offset_mm = 0.0;
  double error_mm = 0.0;  // measured - expected
};

struct TrackingExperimentResult {
  std::vector<TrackingSample> samples;
  int failed_steps = 0;
  /// Root mean square of the offset error over rms_sample_count samples
  /// uniformly spaced across the first rms_window_mm of travel.
  double rms_mm = 0.0;
  double rms_window_mm = 0.0;
  int rms_sample_count = 0;
  double rms_percent_of_window = 0.0;
  std::uint64_t seed = 0;
};

/// Target moves at target_speed along world X; the camera is commanded at
/// the same speed and reports its position through the (optionally
/// quantized) encoder. The per-step offset measurement matches the static
/// experiment; failed steps are counted and skipped. The summary RMS uses
/// 30 uniformly spaced samples over the first 1500 mm of travel (or the
/// whole run if shorter). Throws EmptyInput when no step yields a sample.
TrackingExperimentResult run_tracking_experiment(const RigScene& scene,
                                                 double target_speed_mm_s,
                                                 double duration_s, double dt_s,
                                                 const NoiseSpec& noise);

/// sqrt(mean(error^2)) of the sample errors. Throws EmptyInput.
double rms_error(std::span<const TrackingSample> samples);
double rms_error_values(std::span<const double> errors);

}  // namespace arreg
