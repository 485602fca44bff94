#include "arreg/camera.hpp"

#include <cmath>
#include <string>

namespace arreg {

void CameraIntrinsics::validate() const {
  for (double v : {fx_px, fy_px, skew_r, u0_px, v0_px, k1, k2}) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::ValidationError, "intrinsics contain a non-finite value");
    }
  }
  if (!(fx_px > 0.0)) {
    throw Error(ErrorCode::ValidationError, "fx > 0 violated (fx = " + std::to_string(fx_px) + ")");
  }
  if (!(fy_px > 0.0)) {
    throw Error(ErrorCode::ValidationError, "fy > 0 violated (fy = " + std::to_string(fy_px) + ")");
  }
  if (image_width_px <= 0 || image_height_px <= 0) {
    throw Error(ErrorCode::ValidationError, "image dimensions must be positive");
  }
}

Mat3 intrinsic_matrix(const CameraIntrinsics& c) {
  Mat3 k;
  k << c.fx_px, c.skew_r, c.u0_px,
       0.0,     c.fy_px,  c.v0_px,
       0.0,     0.0,      1.0;
  return k;
}

ProjectionMatrix build_projection(const CameraIntrinsics& c,
                                  const RigidTransform& world_to_camera) {
  if (world_to_camera.to_frame() != frames::camera()) {
    throw Error(ErrorCode::FrameMismatch,
                "extrinsic must end in the camera frame, ends in '" +
                    world_to_camera.to_frame().name + "'");
  }
  Mat34 rt;
  rt.leftCols<3>() = world_to_camera.rotation();
  rt.col(3) = world_to_camera.translation_mm();
  return {intrinsic_matrix(c) * rt, world_to_camera.from_frame()};
}

PixelPoint project_point(const CameraIntrinsics& c,
                         const RigidTransform& world_to_camera,
                         const FramedPoint& p) {
  if (world_to_camera.to_frame() != frames::camera()) {
    throw Error(ErrorCode::FrameMismatch,
                "extrinsic must end in the camera frame, ends in '" +
                    world_to_camera.to_frame().name + "'");
  }
  const FramedPoint in_camera = transform_point(world_to_camera, p);
  const Vec3& x = in_camera.coords_mm;
  if (x.z() <= kDepthEpsilonMm) {
    throw Error(ErrorCode::BehindCamera,
                "camera-frame depth " + std::to_string(x.z()) + " mm");
  }
  return {(c.fx_px * x.x() + c.skew_r * x.y()) / x.z() + c.u0_px,
          c.fy_px * x.y() / x.z() + c.v0_px};
}

PixelPoint apply_distortion(const CameraIntrinsics& c, const PixelPoint& ideal) {
  const double xn = (ideal.u_px - c.u0_px) / c.fx_px;
  const double yn = (ideal.v_px - c.v0_px) / c.fy_px;
  const double r2 = xn * xn + yn * yn;
  const double scale = 1.0 + c.k1 * r2 + c.k2 * r2 * r2;
  return {c.u0_px + c.fx_px * xn * scale, c.v0_px + c.fy_px * yn * scale};
}

PixelPoint undistort(const CameraIntrinsics& c, const PixelPoint& observed) {
  const double xd = (observed.u_px - c.u0_px) / c.fx_px;
  const double yd = (observed.v_px - c.v0_px) / c.fy_px;

  double x = xd, y = yd;
  double step = 0.0;
  for (int iter = 0; iter < 50; ++iter) {
    const double r2 = x * x + y * y;
    const double scale = 1.0 + c.k1 * r2 + c.k2 * r2 * r2;
    if (!(std::abs(scale) > 1e-12) || !std::isfinite(scale)) {
      throw Error(ErrorCode::NoConvergence,
                  "distortion scale vanished during undistortion");
    }
    const double x_next = xd / scale;
    const double y_next = yd / scale;
    step = std::max(std::abs(x_next - x), std::abs(y_next - y));
    x = x_next;
    y = y_next;
    // Stop well below the 1e-10 contract; the remaining fixed-point error
    // is a fraction of the last step.
    if (step < 1e-13) {
      return {c.u0_px + c.fx_px * x, c.v0_px + c.fy_px * y};
    }
  }
  throw Error(ErrorCode::NoConvergence,
              "undistortion did not converge (last step " + std::to_string(step) +
                  " normalized units)");
}

}  // namespace arreg
