#pragma once

#include <span>
#include <vector>

#include "arreg/camera.hpp"
#include "arreg/geometry.hpp"

namespace arreg {

/// One world point (mm) with its measured image location. Pixels must be
/// undistorted before they enter the solver.
struct Correspondence {
  FramedPoint world;
  PixelPoint pixel;
};

struct DltOptions {
  /// Centroid-shift + isotropic-scale preconditioning of both point sets.
  bool normalize = true;
};

/// Ratio of the second-smallest to the largest singular value of the
/// (preconditioned) design matrix. Coplanar or collinear world points
/// collapse it to machine zero; see solve_dlt.
struct DltResult {
  ProjectionMatrix projection;
  double condition_indicator = 0.0;
};

inline constexpr double kDltDegeneracyThreshold = 1e-8;

/// Total-least-squares solve of the 3x4 projection from >= 6
/// correspondences: two homogeneous equations per point, smallest
/// singular vector of the 2Nx12 system. The result has unit Frobenius
/// norm and its sign makes the reconstructed depths of the inputs
/// positive.
///
/// Throws TooFewPoints (N < 6) and DegenerateConfiguration
/// (condition_indicator < 1e-8).
DltResult solve_dlt(std::span<const Correspondence> points,
                    const DltOptions& options = {});

struct ExtrinsicDecomposition {
  RigidTransform extrinsic;  // source frame -> camera
  EulerAngles euler;
  bool gimbal_lock = false;
  /// ||Rt R - I||_F of the raw (pre-Procrustes) rotation block.
  double orthogonality_residual = 0.0;
};

/// Peels the intrinsics off a projection matrix: [R~ | T~] = K^-1 P,
/// scale fixed by the unit norm of R~'s third row, sign by det(R~) > 0,
/// then projection to the nearest rotation.
///
/// Throws SingularIntrinsics when K is not invertible and NonPhysical
/// when the orthogonality residual exceeds 0.1.
ExtrinsicDecomposition extract_extrinsics(const ProjectionMatrix& projection,
                                          const CameraIntrinsics& c);

struct ResidualReport {
  /// Euclidean pixel error per input point; NaN where the point projects
  /// behind the camera.
  std::vector<double> per_point_px;
  int behind_camera_count = 0;
  /// Root mean square over the residual coordinates (u and v separately)
  /// of the points in front of the camera.
  double rms_px = 0.0;
};

/// Throws EmptyInput when no point contributes to the RMS.
ResidualReport reprojection_residual(const ProjectionMatrix& projection,
                                     std::span<const Correspondence> points);

struct PoseSolution {
  ProjectionMatrix projection;
  RigidTransform extrinsic;
  EulerAngles euler;
  double rms_reprojection_px = 0.0;
  double condition_indicator = 0.0;
};

/// solve_dlt + extract_extrinsics + reprojection_residual in one call.
PoseSolution solve_pose(std::span<const Correspondence> points,
                        const CameraIntrinsics& c,
                        const DltOptions& options = {});

}  // namespace arreg
