#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "arreg/error.hpp"

namespace arreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Symbolic label of a coordinate frame. Compared by name.
struct FrameId {
  std::string name;

  friend bool operator==(const FrameId& a, const FrameId& b) { return a.name == b.name; }
  friend bool operator!=(const FrameId& a, const FrameId& b) { return a.name != b.name; }
  friend bool operator<(const FrameId& a, const FrameId& b) { return a.name < b.name; }
};

namespace frames {
inline FrameId world() { return {"world"}; }
inline FrameId workpiece() { return {"workpiece"}; }
inline FrameId camera() { return {"camera"}; }
inline FrameId turntable() { return {"turntable"}; }
inline FrameId track_base() { return {"track_base"}; }
}  // namespace frames

/// A 3-D point tagged with the frame its coordinates live in. Millimetres.
struct FramedPoint {
  FrameId frame;
  Vec3 coords_mm = Vec3::Zero();
};

/// Roll (about X), pitch (about Y), yaw (about Z), radians.
struct EulerAngles {
  double alpha_rad = 0.0;
  double beta_rad = 0.0;
  double gamma_rad = 0.0;
};

/// rotation_to_euler output: the angles plus a pitch-singularity flag.
/// When the flag is set the yaw/roll split is not unique; the returned
/// solution uses the gamma = 0 convention.
struct EulerDecomposition {
  EulerAngles angles;
  bool gimbal_lock = false;
};

/// Yaw-pitch-roll rotation: R = Rz(gamma) * Ry(beta) * Rx(alpha).
Mat3 euler_to_rotation(const EulerAngles& angles);

/// Inverse of euler_to_rotation with beta = asin(-r31).
/// Near |beta| = pi/2 (|cos beta| < 1e-9) the decomposition degenerates;
/// the result carries gamma = 0 and gimbal_lock = true instead of failing.
EulerDecomposition rotation_to_euler(const Mat3& rotation);

/// Projects an arbitrary 3x3 matrix to the nearest rotation (orthogonal
/// Procrustes, det +1).
Mat3 nearest_rotation(const Mat3& m);

inline constexpr double kRotationOrthonormalityTol = 1e-9;

/// Rigid motion between two named frames: p_to = R * p_from + T.
/// The rotation is checked against RtR = I and det R = +1 (1e-9) on
/// construction.
class RigidTransform {
 public:
  RigidTransform(const Mat3& rotation, const Vec3& translation_mm,
                 FrameId from_frame, FrameId to_frame);

  static RigidTransform identity(FrameId frame) {
    return identity(frame, frame);
  }
  static RigidTransform identity(FrameId from_frame, FrameId to_frame) {
    return RigidTransform(Mat3::Identity(), Vec3::Zero(), std::move(from_frame),
                          std::move(to_frame));
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation_mm() const { return translation_mm_; }
  const FrameId& from_frame() const { return from_frame_; }
  const FrameId& to_frame() const { return to_frame_; }

  /// 4x4 homogeneous form; the bottom row is exactly (0, 0, 0, 1).
  Mat4 homogeneous() const;

 private:
  Mat3 rotation_;
  Vec3 translation_mm_;
  FrameId from_frame_;
  FrameId to_frame_;
};

/// Applies t to p. Throws FrameMismatch unless p.frame == t.from_frame().
FramedPoint transform_point(const RigidTransform& t, const FramedPoint& p);

/// a after b: maps b.from_frame -> a.to_frame. Requires b.to == a.from.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Inverse motion, frames swapped.
RigidTransform invert(const RigidTransform& t);

/// Builds the workpiece frame from three measured feature points (all in
/// the world frame):
///   origin  = p1
///   Z axis  = direction p1 -> p5
///   Y axis  = component of (p3 - p1) orthogonal to Z
///   X axis  = Y x Z
/// Returns the world -> workpiece transform. Throws
/// DegenerateFeaturePoints when the points are collinear or coincident
/// (orthogonal component below 1e-6 mm).
RigidTransform build_workpiece_frame(const FramedPoint& p1,
                                     const FramedPoint& p3,
                                     const FramedPoint& p5);

/// Directed set of rigid-transform edges between named frames.
/// Built once, then queried; edges are usable in either direction.
class FrameGraph {
 public:
  /// Throws ValidationError on a duplicate ordered pair, or when a stored
  /// reverse edge disagrees with the inverse of the new edge.
  void add_edge(const RigidTransform& t);

  /// Composes edges along a path from -> to. Throws NoPath when the
  /// frames are disconnected and InconsistentGraph when two paths through
  /// the component disagree by more than 1e-6 mm at a 1 m lever arm.
  RigidTransform resolve(const FrameId& from, const FrameId& to) const;

  bool has_frame(const FrameId& frame) const;
  std::size_t edge_count() const { return edges_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, RigidTransform> edges_;
};

}  // namespace arreg
