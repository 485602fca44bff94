#pragma once

#include "arreg/geometry.hpp"

namespace arreg {

/// Minimum camera-frame depth accepted by the projection, in mm.
inline constexpr double kDepthEpsilonMm = 1e-6;

/// Pinhole intrinsics. skew_r is the off-diagonal term of the intrinsic
/// matrix; k1/k2 are radial distortion coefficients on normalized
/// coordinates.
struct CameraIntrinsics {
  double fx_px = 1.0;
  double fy_px = 1.0;
  double skew_r = 0.0;
  double u0_px = 0.0;
  double v0_px = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  int image_width_px = 0;
  int image_height_px = 0;

  /// Throws ValidationError on fx <= 0 / fy <= 0 or non-finite fields.
  void validate() const;

  bool principal_point_in_image() const {
    return u0_px >= 0.0 && u0_px < image_width_px && v0_px >= 0.0 &&
           v0_px < image_height_px;
  }
};

struct PixelPoint {
  double u_px = 0.0;
  double v_px = 0.0;
};

inline bool pixel_in_image(const PixelPoint& p, const CameraIntrinsics& c) {
  return p.u_px >= 0.0 && p.u_px < c.image_width_px && p.v_px >= 0.0 &&
         p.v_px < c.image_height_px;
}

/// 3x4 projection: pixel_h = m * (X, Y, Z, 1)^T for points expressed in
/// source_frame.
struct ProjectionMatrix {
  Mat34 m = Mat34::Zero();
  FrameId source_frame;
};

/// [[fx, skew, u0], [0, fy, v0], [0, 0, 1]]
Mat3 intrinsic_matrix(const CameraIntrinsics& c);

/// K * [R | T] from the world -> camera extrinsic. The extrinsic must end
/// in the camera frame.
ProjectionMatrix build_projection(const CameraIntrinsics& c,
                                  const RigidTransform& world_to_camera);

/// Perspective projection of a world point (no distortion applied).
/// Throws BehindCamera when the camera-frame depth is <= kDepthEpsilonMm.
PixelPoint project_point(const CameraIntrinsics& c,
                         const RigidTransform& world_to_camera,
                         const FramedPoint& p);

/// Radial distortion on normalized coordinates:
/// (x, y) -> (1 + k1 r^2 + k2 r^4) (x, y).
PixelPoint apply_distortion(const CameraIntrinsics& c, const PixelPoint& ideal);

/// Inverts apply_distortion by fixed-point iteration (1e-10 in normalized
/// units, at most 50 iterations). Throws NoConvergence with the residual
/// when the iteration does not settle.
PixelPoint undistort(const CameraIntrinsics& c, const PixelPoint& observed);

}  // namespace arreg
