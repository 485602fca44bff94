#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "arreg/error_model.hpp"
#include "arreg/rig_sim.hpp"

namespace arreg {

struct ExperimentDefaults {
  std::vector<double> static_points_mm{0.0, 300.0, 1500.0};
  int static_trials = 30;
};

/// Full configuration of a run: rig hardware and scene content, the
/// uncertainty inputs for the error budget, the noise model, and the
/// experiment defaults. Loaded from a single JSON file whose keys mirror
/// the camera/rig symbol names (fx, fy, r, u0, v0, k1, k2, m_cr, ...).
struct SceneConfig {
  RigScene rig;
  UncertaintyInputs uncertainty;
  NoiseSpec noise;
  ExperimentDefaults experiment;
};

struct SceneLoadResult {
  SceneConfig config;
  std::vector<std::string> warnings;
  /// ||RtR - I||_F of the configured mounting rotation before it was
  /// projected onto the nearest exact rotation.
  double m_cr_orthonormality_residual = 0.0;
};

/// Parses and validates a scene. Unknown keys are rejected with their
/// JSON path; syntax errors carry line and column. All angles are
/// degrees in the file and radians in the loaded config.
SceneLoadResult parse_scene(const std::string& text,
                            const std::string& source_name);

/// parse_scene over a file. Throws IoError when unreadable.
SceneLoadResult load_scene(const std::string& path);

/// Canonical JSON form of a config; load(emit(c)) reproduces c and
/// serializing the same config twice is byte-identical.
nlohmann::json scene_to_json(const SceneConfig& config);
std::string emit_scene(const SceneConfig& config);

/// SHA-1 over the canonical serialized form, hex encoded.
std::string scene_content_hash(const SceneConfig& config);

std::string sha1_hex(const std::string& bytes);

}  // namespace arreg
