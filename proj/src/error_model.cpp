#include "arreg/error_model.hpp"

#include <cmath>
#include <string>

#include "arreg/rng.hpp"

namespace arreg {

void UncertaintyInputs::validate() const {
  for (double s : {sigma_alpha_rad, sigma_beta_rad, sigma_tx_mm, sigma_ty_mm,
                   sigma_tz_mm}) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::ValidationError,
                  "input sigmas must be finite and >= 0");
    }
  }
}

namespace {

/// The scalar chain with the mounting transform already applied to pc.
Vec3 simplified_chain(double alpha, double beta, const Vec3& t, const Vec3& pc) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  return {cb * pc.x() + sa * sb * pc.y() + ca * sb * pc.z() + t.x(),
          ca * pc.y() - sa * pc.z() + t.y(),
          -sb * pc.x() + sa * cb * pc.y() + ca * cb * pc.z() + t.z()};
}

Vec3 mounted_point(const ChainParameters& p, const Vec3& pc_mm) {
  return p.m_cr.rotation() * pc_mm + p.m_cr.translation_mm();
}

}  // namespace

Vec3 world_from_camera_simplified(const ChainParameters& p, const Vec3& pc_mm) {
  return simplified_chain(p.alpha_rad, p.beta_rad, p.translation_mm,
                          mounted_point(p, pc_mm));
}

Eigen::Matrix<double, 3, 5> error_transfer_coefficients(const ChainParameters& p,
                                                        const Vec3& pc_mm) {
  const Vec3 q = mounted_point(p, pc_mm);
  const double ca = std::cos(p.alpha_rad), sa = std::sin(p.alpha_rad);
  const double cb = std::cos(p.beta_rad), sb = std::sin(p.beta_rad);

  Eigen::Matrix<double, 3, 5> j = Eigen::Matrix<double, 3, 5>::Zero();
  // d/d alpha
  j(0, 0) = ca * sb * q.y() - sa * sb * q.z();
  j(1, 0) = -sa * q.y() - ca * q.z();
  j(2, 0) = ca * cb * q.y() - sa * cb * q.z();
  // d/d beta (dYw/dbeta = 0 identically)
  j(0, 1) = -sb * q.x() + sa * cb * q.y() + ca * cb * q.z();
  j(2, 1) = -cb * q.x() - sa * sb * q.y() - ca * sb * q.z();
  // d/d t
  j(0, 2) = 1.0;
  j(1, 3) = 1.0;
  j(2, 4) = 1.0;
  return j;
}

UncertaintyBudget propagate_sigma(const ChainParameters& p, const Vec3& pc_mm,
                                  const UncertaintyInputs& u) {
  u.validate();
  const Eigen::Matrix<double, 3, 5> j = error_transfer_coefficients(p, pc_mm);
  const Eigen::Matrix<double, 5, 1> sigmas{u.sigma_alpha_rad, u.sigma_beta_rad,
                                           u.sigma_tx_mm, u.sigma_ty_mm,
                                           u.sigma_tz_mm};
  UncertaintyBudget out;
  const auto rss = [&](int row) {
    double sum = 0.0;
    for (int col = 0; col < 5; ++col) {
      const double term = j(row, col) * sigmas(col);
      sum += term * term;
    }
    return std::sqrt(sum);
  };
  out.sigma_xw0_mm = rss(0);
  out.sigma_yw0_mm = rss(1);
  out.sigma_zw0_mm = rss(2);
  return out;
}

UncertaintyBudget monte_carlo_sigma(const ChainParameters& p, const Vec3& pc_mm,
                                    const UncertaintyInputs& u,
                                    std::size_t n_samples, std::uint64_t seed) {
  u.validate();
  if (n_samples < 10000) {
    throw Error(ErrorCode::ValidationError,
                "monte_carlo_sigma needs at least 1e4 samples, got " +
                    std::to_string(n_samples));
  }

  const Vec3 q = mounted_point(p, pc_mm);
  const Vec3 nominal =
      simplified_chain(p.alpha_rad, p.beta_rad, p.translation_mm, q);

  SeededRng rng(seed);
  // Deviations from the nominal output keep the accumulation exact when
  // every sigma is zero and well-conditioned otherwise.
  std::vector<Vec3> deviations;
  deviations.reserve(n_samples);
  Vec3 mean = Vec3::Zero();
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double alpha = rng.gaussian(p.alpha_rad, u.sigma_alpha_rad);
    const double beta = rng.gaussian(p.beta_rad, u.sigma_beta_rad);
    const Vec3 t{rng.gaussian(p.translation_mm.x(), u.sigma_tx_mm),
                 rng.gaussian(p.translation_mm.y(), u.sigma_ty_mm),
                 rng.gaussian(p.translation_mm.z(), u.sigma_tz_mm)};
    const Vec3 dev = simplified_chain(alpha, beta, t, q) - nominal;
    deviations.push_back(dev);
    mean += dev;
  }
  mean /= static_cast<double>(n_samples);

  Vec3 sum_sq = Vec3::Zero();
  for (const Vec3& dev : deviations) {
    const Vec3 d = dev - mean;
    sum_sq += d.cwiseProduct(d);
  }
  const double denom = static_cast<double>(n_samples) - 1.0;
  return {std::sqrt(sum_sq.x() / denom), std::sqrt(sum_sq.y() / denom),
          std::sqrt(sum_sq.z() / denom)};
}

std::vector<SweepRow> sensitivity_sweep(const ChainParameters& base,
                                        const SweepGrid& grid, const Vec3& pc_mm,
                                        const UncertaintyInputs& u) {
  if (grid.betas_rad.empty() || grid.track_positions_mm.empty()) {
    throw Error(ErrorCode::EmptyGrid, "sweep grid has an empty axis");
  }
  std::vector<SweepRow> rows;
  rows.reserve(grid.betas_rad.size() * grid.track_positions_mm.size());
  for (double beta : grid.betas_rad) {
    for (double s : grid.track_positions_mm) {
      ChainParameters p = base;
      p.beta_rad = beta;
      p.translation_mm = base.translation_mm + Vec3{s, 0.0, 0.0};
      rows.push_back({beta, s, propagate_sigma(p, pc_mm, u)});
    }
  }
  return rows;
}

}  // namespace arreg
