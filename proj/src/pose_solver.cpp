#include "arreg/pose_solver.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace arreg {

namespace {

Eigen::Vector4d homogeneous(const Vec3& p) {
  return {p.x(), p.y(), p.z(), 1.0};
}

void check_common_frame(std::span<const Correspondence> points) {
  for (const Correspondence& c : points) {
    if (c.world.frame != points.front().world.frame) {
      throw Error(ErrorCode::FrameMismatch,
                  "correspondences mix world frames '" +
                      points.front().world.frame.name + "' and '" +
                      c.world.frame.name + "'");
    }
  }
}

struct PixelNormalization {
  Mat3 t = Mat3::Identity();        // raw -> conditioned
  Mat3 t_inv = Mat3::Identity();    // conditioned -> raw
};

struct WorldNormalization {
  Mat4 t = Mat4::Identity();
};

PixelNormalization normalize_pixels(std::span<const Correspondence> points) {
  double cu = 0.0, cv = 0.0;
  for (const auto& p : points) {
    cu += p.pixel.u_px;
    cv += p.pixel.v_px;
  }
  cu /= static_cast<double>(points.size());
  cv /= static_cast<double>(points.size());
  double mean_dist = 0.0;
  for (const auto& p : points) {
    mean_dist += std::hypot(p.pixel.u_px - cu, p.pixel.v_px - cv);
  }
  mean_dist /= static_cast<double>(points.size());
  if (mean_dist < 1e-12) {
    throw Error(ErrorCode::DegenerateConfiguration, "all image points coincide");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  PixelNormalization n;
  n.t << s, 0, -s * cu, 0, s, -s * cv, 0, 0, 1;
  n.t_inv << 1.0 / s, 0, cu, 0, 1.0 / s, cv, 0, 0, 1;
  return n;
}

WorldNormalization normalize_world(std::span<const Correspondence> points) {
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p.world.coords_mm;
  centroid /= static_cast<double>(points.size());
  double mean_dist = 0.0;
  for (const auto& p : points) {
    mean_dist += (p.world.coords_mm - centroid).norm();
  }
  mean_dist /= static_cast<double>(points.size());
  if (mean_dist < 1e-12) {
    throw Error(ErrorCode::DegenerateConfiguration, "all world points coincide");
  }
  const double s = std::sqrt(3.0) / mean_dist;
  WorldNormalization n;
  n.t.topLeftCorner<3, 3>() = s * Mat3::Identity();
  n.t.topRightCorner<3, 1>() = -s * centroid;
  return n;
}

}  // namespace

DltResult solve_dlt(std::span<const Correspondence> points,
                    const DltOptions& options) {
  if (points.size() < 6) {
    throw Error(ErrorCode::TooFewPoints,
                "pose solve needs at least 6 correspondences, got " +
                    std::to_string(points.size()));
  }
  check_common_frame(points);

  PixelNormalization pix;
  WorldNormalization wrl;
  if (options.normalize) {
    pix = normalize_pixels(points);
    wrl = normalize_world(points);
  }

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(2 * n, 12);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector4d xw = wrl.t * homogeneous(points[i].world.coords_mm);
    const Eigen::Vector3d px =
        pix.t * Eigen::Vector3d(points[i].pixel.u_px, points[i].pixel.v_px, 1.0);
    const double u = px.x() / px.z();
    const double v = px.y() / px.z();
    design.row(2 * i) << xw.transpose(), 0, 0, 0, 0, -u * xw.transpose();
    design.row(2 * i + 1) << 0, 0, 0, 0, xw.transpose(), -v * xw.transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double indicator = sv(10) / sv(0);
  if (indicator < kDltDegeneracyThreshold) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "design matrix is rank deficient (condition indicator " +
                    std::to_string(indicator) +
                    "); world points are coplanar or collinear");
  }

  const Eigen::VectorXd p = svd.matrixV().col(11);
  Mat34 conditioned;
  conditioned.row(0) = p.segment<4>(0).transpose();
  conditioned.row(1) = p.segment<4>(4).transpose();
  conditioned.row(2) = p.segment<4>(8).transpose();

  Mat34 m = pix.t_inv * conditioned * wrl.t;
  m /= m.norm();

  int positive_depths = 0;
  for (const auto& point : points) {
    if (m.row(2).dot(homogeneous(point.world.coords_mm)) > 0.0) {
      ++positive_depths;
    }
  }
  if (2 * positive_depths < static_cast<int>(points.size())) {
    m = -m;
  }

  return {ProjectionMatrix{m, points.front().world.frame}, indicator};
}

ExtrinsicDecomposition extract_extrinsics(const ProjectionMatrix& projection,
                                          const CameraIntrinsics& c) {
  const Mat3 k = intrinsic_matrix(c);
  // K is upper triangular, so the determinant is just fx * fy.
  if (std::abs(c.fx_px) < 1e-12 || std::abs(c.fy_px) < 1e-12) {
    throw Error(ErrorCode::SingularIntrinsics,
                "intrinsic matrix is not invertible (fx or fy ~ 0)");
  }

  Mat34 rt = k.inverse() * projection.m;
  const double scale = rt.row(2).head<3>().norm();
  if (scale < 1e-15) {
    throw Error(ErrorCode::NonPhysical,
                "third rotation row of K^-1 P vanished");
  }
  rt /= scale;
  if (rt.leftCols<3>().determinant() < 0.0) {
    rt = -rt;
  }

  const Mat3 raw_rotation = rt.leftCols<3>();
  const double residual =
      (raw_rotation.transpose() * raw_rotation - Mat3::Identity()).norm();
  if (residual > 0.1) {
    throw Error(ErrorCode::NonPhysical,
                "rotation block is far from orthonormal (||RtR - I|| = " +
                    std::to_string(residual) + ")");
  }

  const Mat3 rotation = nearest_rotation(raw_rotation);
  const EulerDecomposition euler = rotation_to_euler(rotation);
  return {RigidTransform(rotation, rt.col(3), projection.source_frame,
                         frames::camera()),
          euler.angles, euler.gimbal_lock, residual};
}

ResidualReport reprojection_residual(const ProjectionMatrix& projection,
                                     std::span<const Correspondence> points) {
  if (points.empty()) {
    throw Error(ErrorCode::EmptyInput, "no correspondences to evaluate");
  }
  check_common_frame(points);
  if (points.front().world.frame != projection.source_frame) {
    throw Error(ErrorCode::FrameMismatch,
                "points are in frame '" + points.front().world.frame.name +
                    "' but the projection expects '" +
                    projection.source_frame.name + "'");
  }

  ResidualReport report;
  report.per_point_px.reserve(points.size());
  const double row3_norm = projection.m.row(2).norm();
  double sum_sq = 0.0;
  int valid = 0;
  for (const auto& point : points) {
    const Eigen::Vector4d xw = homogeneous(point.world.coords_mm);
    const Eigen::Vector3d h = projection.m * xw;
    if (h.z() <= 1e-12 * row3_norm * xw.norm()) {
      report.per_point_px.push_back(std::numeric_limits<double>::quiet_NaN());
      ++report.behind_camera_count;
      continue;
    }
    const double du = h.x() / h.z() - point.pixel.u_px;
    const double dv = h.y() / h.z() - point.pixel.v_px;
    report.per_point_px.push_back(std::hypot(du, dv));
    sum_sq += du * du + dv * dv;
    ++valid;
  }
  if (valid == 0) {
    throw Error(ErrorCode::EmptyInput, "every point projects behind the camera");
  }
  report.rms_px = std::sqrt(sum_sq / (2.0 * valid));
  return report;
}

PoseSolution solve_pose(std::span<const Correspondence> points,
                        const CameraIntrinsics& c, const DltOptions& options) {
  DltResult dlt = solve_dlt(points, options);
  ExtrinsicDecomposition pose = extract_extrinsics(dlt.projection, c);
  const ResidualReport residual = reprojection_residual(dlt.projection, points);
  return {std::move(dlt.projection), std::move(pose.extrinsic), pose.euler,
          residual.rms_px, dlt.condition_indicator};
}

}  // namespace arreg
