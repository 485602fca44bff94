#pragma once

#include <json.hpp>

#include <span>
#include <string>

#include "arreg/error_model.hpp"
#include "arreg/pose_solver.hpp"
#include "arreg/rig_sim.hpp"
#include "arreg/scene.hpp"

namespace arreg {

/// Published hardware results shipped with the toolkit for comparison.
/// Each block carries a provenance label; none of these values is a
/// simulation target.
nlohmann::json reference_static_table();
nlohmann::json reference_tracking_rms();
nlohmann::json reference_error_budget();
nlohmann::json reference_hand_eye();

/// Common report envelope: command name, scene content hash, seed.
nlohmann::json report_envelope(const std::string& command,
                               const SceneConfig& scene, std::uint64_t seed);

nlohmann::json static_report_json(const StaticExperimentReport& report,
                                  const SceneConfig& scene);
nlohmann::json tracking_report_json(const TrackingExperimentResult& result,
                                    const SceneConfig& scene);
nlohmann::json budget_report_json(std::span<const SweepRow> rows,
                                  const ChainParameters& base, const Vec3& pc_mm,
                                  const SceneConfig& scene);
nlohmann::json pose_report_json(const PoseSolution& solution,
                                const SceneConfig& scene);

}  // namespace arreg
