#pragma once

#include <cstdint>
#include <vector>

#include "arreg/geometry.hpp"

namespace arreg {

/// Simplified camera-to-world chain: a two-axis turntable attitude
/// (roll alpha, pitch beta, no yaw), a rail translation, and the fixed
/// camera-to-turntable mounting transform.
struct ChainParameters {
  double alpha_rad = 0.0;
  double beta_rad = 0.0;
  Vec3 translation_mm = Vec3::Zero();
  RigidTransform m_cr =
      RigidTransform::identity(frames::camera(), frames::turntable());
};

struct UncertaintyInputs {
  double sigma_alpha_rad = 0.0;
  double sigma_beta_rad = 0.0;
  double sigma_tx_mm = 0.0;
  double sigma_ty_mm = 0.0;
  double sigma_tz_mm = 0.0;

  /// Throws ValidationError when any sigma is negative or non-finite.
  void validate() const;
};

struct UncertaintyBudget {
  double sigma_xw0_mm = 0.0;
  double sigma_yw0_mm = 0.0;
  double sigma_zw0_mm = 0.0;
};

/// World coordinates of a camera-frame point through the simplified
/// chain. With the default identity mounting transform this is the
/// closed scalar form
///   Xw = cos(b) Xc + sin(a) sin(b) Yc + cos(a) sin(b) Zc + tx
///   Yw = cos(a) Yc - sin(a) Zc + ty
///   Zw = -sin(b) Xc + sin(a) cos(b) Yc + cos(a) cos(b) Zc + tz
/// A non-identity m_cr is applied to the point first.
Vec3 world_from_camera_simplified(const ChainParameters& p, const Vec3& pc_mm);

/// Analytic Jacobian of world_from_camera_simplified: rows (Xw, Yw, Zw),
/// columns (alpha, beta, tx, ty, tz). dYw/dbeta is identically zero and
/// the translation block is the identity.
Eigen::Matrix<double, 3, 5> error_transfer_coefficients(const ChainParameters& p,
                                                        const Vec3& pc_mm);

/// First-order propagation of independent input sigmas through the
/// chain: per-axis root sum of squares of Jacobian * sigma.
UncertaintyBudget propagate_sigma(const ChainParameters& p, const Vec3& pc_mm,
                                  const UncertaintyInputs& u);

/// Sampling estimate of the same budget: n_samples independent Gaussian
/// perturbations of (alpha, beta, t), per-axis sample standard deviation.
/// Deterministic for a fixed seed. Requires n_samples >= 10000.
UncertaintyBudget monte_carlo_sigma(const ChainParameters& p, const Vec3& pc_mm,
                                    const UncertaintyInputs& u,
                                    std::size_t n_samples, std::uint64_t seed);

/// Evaluation grid for sensitivity_sweep: every combination of a pitch
/// angle and a rail position (translation along world X on top of the
/// base parameters).
struct SweepGrid {
  std::vector<double> betas_rad;
  std::vector<double> track_positions_mm;
};

struct SweepRow {
  double beta_rad = 0.0;
  double track_position_mm = 0.0;
  UncertaintyBudget budget;
};

/// Throws EmptyGrid when either grid axis is empty.
std::vector<SweepRow> sensitivity_sweep(const ChainParameters& base,
                                        const SweepGrid& grid, const Vec3& pc_mm,
                                        const UncertaintyInputs& u);

}  // namespace arreg
