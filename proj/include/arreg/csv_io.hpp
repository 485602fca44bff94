#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arreg/error_model.hpp"
#include "arreg/pose_solver.hpp"
#include "arreg/rig_sim.hpp"

namespace arreg {

/// One recorded rig state; timestamps must be monotone within a file.
struct TrajectoryRow {
  double t_s = 0.0;
  std::int64_t encoder_counts = 0;
  double alpha_rad = 0.0;
  double beta_rad = 0.0;
};

/// Columns: X, Y, Z, u, v (world mm, undistorted pixels). A header row
/// is accepted and skipped.
std::vector<Correspondence> read_correspondences_csv(const std::string& path);

/// Columns: t_s, encoder_counts, alpha_rad, beta_rad.
std::vector<TrajectoryRow> read_trajectory_csv(const std::string& path);

/// Deterministic shortest-ish float formatting shared by all writers.
std::string format_number(double v);

std::string tracking_samples_csv(std::span<const TrackingSample> samples);
std::string sweep_csv(std::span<const SweepRow> rows);
std::string overlay_track_csv(std::span<const TrajectoryRow> trajectory,
                              std::span<const PixelPoint> pixels);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace arreg
