#include "arreg/geometry.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <deque>

namespace arreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_rotation(const Mat3& r) {
  if (!r.allFinite()) {
    throw Error(ErrorCode::ValidationError, "rotation has non-finite entries");
  }
  const double orth = (r.transpose() * r - Mat3::Identity()).norm();
  if (orth > kRotationOrthonormalityTol) {
    throw Error(ErrorCode::ValidationError,
                "rotation is not orthonormal (||RtR - I|| = " +
                    std::to_string(orth) + ")");
  }
  const double det = r.determinant();
  if (std::abs(det - 1.0) > kRotationOrthonormalityTol) {
    throw Error(ErrorCode::ValidationError,
                "rotation determinant is " + std::to_string(det) +
                    ", expected +1");
  }
}

/// Maps an exact -pi from atan2 into the canonical (-pi, pi] range.
double canonical_angle(double a) { return a == -kPi ? kPi : a; }

}  // namespace

Mat3 euler_to_rotation(const EulerAngles& angles) {
  const double ca = std::cos(angles.alpha_rad), sa = std::sin(angles.alpha_rad);
  const double cb = std::cos(angles.beta_rad), sb = std::sin(angles.beta_rad);
  const double cg = std::cos(angles.gamma_rad), sg = std::sin(angles.gamma_rad);
  Mat3 r;
  r << cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg,
       cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg,
       -sb,     sa * cb,               ca * cb;
  return r;
}

EulerDecomposition rotation_to_euler(const Mat3& r) {
  EulerDecomposition out;
  const double sb = std::clamp(-r(2, 0), -1.0, 1.0);
  // |cos beta| read off the bottom row; equal to sqrt(1 - sb^2) for an
  // exact rotation but robust to roundoff when beta sits at +-pi/2.
  const double cb = std::hypot(r(2, 1), r(2, 2));
  out.angles.beta_rad = std::atan2(sb, cb);
  if (cb < 1e-9) {
    // Pitch singularity: only alpha -/+ gamma is determined. Convention:
    // gamma = 0, alpha carries the whole twist.
    out.gimbal_lock = true;
    out.angles.gamma_rad = 0.0;
    out.angles.alpha_rad = canonical_angle(std::atan2(-r(1, 2), r(1, 1)));
  } else {
    out.angles.alpha_rad = canonical_angle(std::atan2(r(2, 1), r(2, 2)));
    out.angles.gamma_rad = canonical_angle(std::atan2(r(1, 0), r(0, 0)));
  }
  return out;
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) *= -1.0;
  }
  return u * v.transpose();
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation_mm,
                               FrameId from_frame, FrameId to_frame)
    : rotation_(rotation),
      translation_mm_(translation_mm),
      from_frame_(std::move(from_frame)),
      to_frame_(std::move(to_frame)) {
  check_rotation(rotation_);
  if (!translation_mm_.allFinite()) {
    throw Error(ErrorCode::ValidationError, "translation has non-finite entries");
  }
}

Mat4 RigidTransform::homogeneous() const {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_mm_;
  m(3, 3) = 1.0;
  return m;
}

FramedPoint transform_point(const RigidTransform& t, const FramedPoint& p) {
  if (p.frame != t.from_frame()) {
    throw Error(ErrorCode::FrameMismatch,
                "point is in frame '" + p.frame.name +
                    "' but the transform maps from '" + t.from_frame().name + "'");
  }
  // Spelled-out row sums: left-associated products, translation added
  // last. Keeps this path bit-identical to the scalar chain formulas
  // regardless of how the matrix kernels reduce.
  const Mat3& r = t.rotation();
  const Vec3& v = p.coords_mm;
  const Vec3& w = t.translation_mm();
  return {t.to_frame(),
          Vec3{r(0, 0) * v.x() + r(0, 1) * v.y() + r(0, 2) * v.z() + w.x(),
               r(1, 0) * v.x() + r(1, 1) * v.y() + r(1, 2) * v.z() + w.y(),
               r(2, 0) * v.x() + r(2, 1) * v.y() + r(2, 2) * v.z() + w.z()}};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  if (b.to_frame() != a.from_frame()) {
    throw Error(ErrorCode::FrameMismatch,
                "cannot compose: inner transform ends in '" + b.to_frame().name +
                    "' but outer starts from '" + a.from_frame().name + "'");
  }
  return RigidTransform(a.rotation() * b.rotation(),
                        a.rotation() * b.translation_mm() + a.translation_mm(),
                        b.from_frame(), a.to_frame());
}

RigidTransform invert(const RigidTransform& t) {
  const Mat3 rt = t.rotation().transpose();
  return RigidTransform(rt, -(rt * t.translation_mm()), t.to_frame(),
                        t.from_frame());
}

RigidTransform build_workpiece_frame(const FramedPoint& p1,
                                     const FramedPoint& p3,
                                     const FramedPoint& p5) {
  const FrameId world = frames::world();
  for (const FramedPoint* p : {&p1, &p3, &p5}) {
    if (p->frame != world) {
      throw Error(ErrorCode::FrameMismatch,
                  "workpiece feature points must be in the world frame, got '" +
                      p->frame.name + "'");
    }
  }

  const Vec3 z_raw = p5.coords_mm - p1.coords_mm;
  const double z_len = z_raw.norm();
  if (z_len < 1e-6) {
    throw Error(ErrorCode::DegenerateFeaturePoints,
                "p5 coincides with p1 (|p5 - p1| < 1e-6 mm)");
  }
  const Vec3 z_axis = z_raw / z_len;

  const Vec3 w = p3.coords_mm - p1.coords_mm;
  const Vec3 y_raw = w - w.dot(z_axis) * z_axis;
  const double y_len = y_raw.norm();
  if (y_len < 1e-6) {
    throw Error(ErrorCode::DegenerateFeaturePoints,
                "p1, p3, p5 are collinear (orthogonal component " +
                    std::to_string(y_len) + " mm)");
  }
  const Vec3 y_axis = y_raw / y_len;
  const Vec3 x_axis = y_axis.cross(z_axis);

  Mat3 axes;  // workpiece axes as world-frame columns
  axes.col(0) = x_axis;
  axes.col(1) = y_axis;
  axes.col(2) = z_axis;

  const Mat3 r = axes.transpose();
  return RigidTransform(r, -(r * p1.coords_mm), world, frames::workpiece());
}

void FrameGraph::add_edge(const RigidTransform& t) {
  const auto key = std::make_pair(t.from_frame().name, t.to_frame().name);
  if (t.from_frame() == t.to_frame()) {
    throw Error(ErrorCode::ValidationError,
                "self-edge on frame '" + t.from_frame().name + "'");
  }
  if (edges_.contains(key)) {
    throw Error(ErrorCode::ValidationError,
                "duplicate edge " + key.first + " -> " + key.second);
  }
  const auto reverse = std::make_pair(key.second, key.first);
  if (auto it = edges_.find(reverse); it != edges_.end()) {
    const RigidTransform inv = invert(t);
    const double rot_diff = (inv.rotation() - it->second.rotation()).norm();
    const double trans_diff =
        (inv.translation_mm() - it->second.translation_mm()).norm();
    if (rot_diff > 1e-9 || trans_diff > 1e-6) {
      throw Error(ErrorCode::ValidationError,
                  "reverse edge " + reverse.first + " -> " + reverse.second +
                      " does not match the inverse transform");
    }
  }
  edges_.emplace(key, t);
}

bool FrameGraph::has_frame(const FrameId& frame) const {
  for (const auto& [key, t] : edges_) {
    if (key.first == frame.name || key.second == frame.name) return true;
  }
  return false;
}

RigidTransform FrameGraph::resolve(const FrameId& from, const FrameId& to) const {
  if (from == to) {
    return RigidTransform::identity(from, to);
  }

  // BFS from `from`, accumulating the from -> node transform per node.
  std::map<std::string, RigidTransform> reached;
  reached.emplace(from.name, RigidTransform::identity(from));
  std::deque<std::string> queue{from.name};
  while (!queue.empty()) {
    const std::string node = queue.front();
    queue.pop_front();
    const RigidTransform& acc = reached.at(node);
    for (const auto& [key, edge] : edges_) {
      if (key.first == node && !reached.contains(key.second)) {
        reached.emplace(key.second, compose(edge, acc));
        queue.push_back(key.second);
      } else if (key.second == node && !reached.contains(key.first)) {
        reached.emplace(key.first, compose(invert(edge), acc));
        queue.push_back(key.first);
      }
    }
  }

  // Every edge inside the reached component closes a cycle against the BFS
  // tree; a cycle that does not close to identity means two paths disagree.
  for (const auto& [key, edge] : edges_) {
    auto u = reached.find(key.first);
    auto w = reached.find(key.second);
    if (u == reached.end() || w == reached.end()) continue;
    const RigidTransform via_edge = compose(edge, u->second);
    const RigidTransform delta = compose(via_edge, invert(w->second));
    const double discrepancy_mm =
        delta.translation_mm().norm() +
        1000.0 * (delta.rotation() - Mat3::Identity()).norm();
    if (discrepancy_mm > 1e-6) {
      throw Error(ErrorCode::InconsistentGraph,
                  "paths to frame '" + key.second + "' disagree by " +
                      std::to_string(discrepancy_mm) + " mm at a 1 m lever arm");
    }
  }

  auto it = reached.find(to.name);
  if (it == reached.end()) {
    throw Error(ErrorCode::NoPath,
                "no chain of edges connects '" + from.name + "' to '" + to.name + "'");
  }
  return it->second;
}

}  // namespace arreg
