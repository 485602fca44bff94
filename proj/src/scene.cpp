#include "arreg/scene.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

namespace arreg {

namespace {

using nlohmann::json;

double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, path + ": " + what);
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    parse_fail(path, std::string("missing key \"") + key + "\"");
  }
  return *it;
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      parse_fail(path, "unknown key \"" + key + "\"");
    }
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) parse_fail(path, "expected a number");
  return j.get<double>();
}

double number_at(const json& obj, const std::string& path, const char* key) {
  return as_number(require(obj, path, key), path + "/" + key);
}

std::int64_t integer_at(const json& obj, const std::string& path, const char* key) {
  const json& j = require(obj, path, key);
  if (!j.is_number_integer()) parse_fail(path + "/" + key, "expected an integer");
  return j.get<std::int64_t>();
}

bool boolean_at(const json& obj, const std::string& path, const char* key) {
  const json& j = require(obj, path, key);
  if (!j.is_boolean()) parse_fail(path + "/" + key, "expected a boolean");
  return j.get<bool>();
}

Vec3 vec3_at(const json& obj, const std::string& path, const char* key) {
  const json& j = require(obj, path, key);
  const std::string here = path + "/" + key;
  if (!j.is_array() || j.size() != 3) parse_fail(here, "expected an array of 3 numbers");
  return {as_number(j[0], here), as_number(j[1], here), as_number(j[2], here)};
}

CameraIntrinsics parse_camera(const json& j, const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  reject_unknown_keys(j, path,
                      {"fx", "fy", "r", "u0", "v0", "k1", "k2", "image_width",
                       "image_height"});
  CameraIntrinsics c;
  c.fx_px = number_at(j, path, "fx");
  c.fy_px = number_at(j, path, "fy");
  c.skew_r = number_at(j, path, "r");
  c.u0_px = number_at(j, path, "u0");
  c.v0_px = number_at(j, path, "v0");
  c.k1 = number_at(j, path, "k1");
  c.k2 = number_at(j, path, "k2");
  c.image_width_px = static_cast<int>(integer_at(j, path, "image_width"));
  c.image_height_px = static_cast<int>(integer_at(j, path, "image_height"));
  c.validate();
  return c;
}

Mat4 parse_mat4(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) parse_fail(path, "expected a 4x4 array");
  Mat4 m;
  for (int row = 0; row < 4; ++row) {
    const json& r = j[row];
    if (!r.is_array() || r.size() != 4) parse_fail(path, "expected a 4x4 array");
    for (int col = 0; col < 4; ++col) {
      m(row, col) = as_number(r[col], path);
    }
  }
  return m;
}

TrackGeometry parse_track(const json& j, const std::string& path,
                          HeadingMode& heading) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  reject_unknown_keys(
      j, path, {"length_mm", "width_mm", "corner_radius_mm", "height_mm", "heading"});
  TrackGeometry g;
  g.length_mm = number_at(j, path, "length_mm");
  g.width_mm = number_at(j, path, "width_mm");
  g.corner_radius_mm = number_at(j, path, "corner_radius_mm");
  g.height_mm = number_at(j, path, "height_mm");
  g.validate();
  heading = HeadingMode::TangentFollowing;
  if (j.contains("heading")) {
    const std::string mode = j["heading"].is_string()
                                 ? j["heading"].get<std::string>()
                                 : std::string();
    if (mode == "tangent") {
      heading = HeadingMode::TangentFollowing;
    } else if (mode == "world-fixed") {
      heading = HeadingMode::WorldFixed;
    } else {
      parse_fail(path + "/heading", "expected \"tangent\" or \"world-fixed\"");
    }
  }
  return g;
}

EncoderModel parse_encoder(const json& j, const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  reject_unknown_keys(j, path, {"pulses_per_rev", "wheel_circumference_mm"});
  EncoderModel e;
  e.pulses_per_rev = static_cast<int>(integer_at(j, path, "pulses_per_rev"));
  e.wheel_circumference_mm = number_at(j, path, "wheel_circumference_mm");
  e.validate();
  return e;
}

UncertaintyInputs parse_uncertainty(const json& j, const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  reject_unknown_keys(j, path,
                      {"sigma_alpha_deg", "sigma_beta_deg", "sigma_tx_mm",
                       "sigma_ty_mm", "sigma_tz_mm"});
  UncertaintyInputs u;
  u.sigma_alpha_rad = deg_to_rad(number_at(j, path, "sigma_alpha_deg"));
  u.sigma_beta_rad = deg_to_rad(number_at(j, path, "sigma_beta_deg"));
  u.sigma_tx_mm = number_at(j, path, "sigma_tx_mm");
  u.sigma_ty_mm = number_at(j, path, "sigma_ty_mm");
  u.sigma_tz_mm = number_at(j, path, "sigma_tz_mm");
  u.validate();
  return u;
}

NoiseSpec parse_noise(const json& j, const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  reject_unknown_keys(j, path,
                      {"encoder_quantization", "turntable_sigma_deg",
                       "pixel_sigma_px", "seed"});
  NoiseSpec n;
  n.encoder_quantization = boolean_at(j, path, "encoder_quantization");
  n.turntable_sigma_rad = deg_to_rad(number_at(j, path, "turntable_sigma_deg"));
  n.pixel_sigma_px = number_at(j, path, "pixel_sigma_px");
  const std::int64_t seed = integer_at(j, path, "seed");
  n.seed = static_cast<std::uint64_t>(seed);
  n.validate();
  return n;
}

std::pair<int, int> line_and_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

SceneLoadResult parse_scene(const std::string& text,
                            const std::string& source_name) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw Error(ErrorCode::ParseError,
                source_name + ":" + std::to_string(line) + ":" +
                    std::to_string(column) + ": " + e.what());
  }
  if (!root.is_object()) parse_fail(source_name, "top level must be an object");

  reject_unknown_keys(root, source_name,
                      {"camera", "m_cr", "track", "encoder", "workpiece",
                       "anchor_offset_mm", "turntable_rest_deg", "experiment",
                       "uncertainty", "noise"});

  SceneLoadResult out;
  SceneConfig& cfg = out.config;

  cfg.rig.camera = parse_camera(require(root, source_name, "camera"),
                                source_name + "/camera");
  if (!cfg.rig.camera.principal_point_in_image()) {
    out.warnings.push_back(
        "principal point (u0, v0) lies outside the image bounds");
  }
  if (std::abs(cfg.rig.camera.k1) > 0.5 || std::abs(cfg.rig.camera.k2) > 0.5) {
    out.warnings.push_back(
        "distortion coefficients k1/k2 are unusually large for the "
        "normalized radial model; they are used as configured");
  }

  const Mat4 m_cr_raw =
      parse_mat4(require(root, source_name, "m_cr"), source_name + "/m_cr");
  if (m_cr_raw(3, 0) != 0.0 || m_cr_raw(3, 1) != 0.0 || m_cr_raw(3, 2) != 0.0 ||
      m_cr_raw(3, 3) != 1.0) {
    throw Error(ErrorCode::ValidationError,
                "m_cr bottom row must be exactly (0, 0, 0, 1)");
  }
  const Mat3 rot_raw = m_cr_raw.topLeftCorner<3, 3>();
  out.m_cr_orthonormality_residual =
      (rot_raw.transpose() * rot_raw - Mat3::Identity()).norm();
  if (out.m_cr_orthonormality_residual > 0.1) {
    throw Error(ErrorCode::ValidationError,
                "m_cr rotation block is not close to a rotation (residual " +
                    std::to_string(out.m_cr_orthonormality_residual) + ")");
  }
  if (out.m_cr_orthonormality_residual > kRotationOrthonormalityTol) {
    out.warnings.push_back(
        "m_cr rotation block projected onto the nearest rotation "
        "(orthonormality residual " +
        std::to_string(out.m_cr_orthonormality_residual) + ")");
  }
  cfg.rig.m_cr =
      RigidTransform(nearest_rotation(rot_raw), m_cr_raw.topRightCorner<3, 1>(),
                     frames::camera(), frames::turntable());

  cfg.rig.track = parse_track(require(root, source_name, "track"),
                              source_name + "/track", cfg.rig.heading);
  cfg.rig.encoder = parse_encoder(require(root, source_name, "encoder"),
                                  source_name + "/encoder");

  {
    const json& wp = require(root, source_name, "workpiece");
    const std::string path = source_name + "/workpiece";
    if (!wp.is_object()) parse_fail(path, "expected an object");
    reject_unknown_keys(wp, path, {"p1_mm", "p3_mm", "p5_mm"});
    cfg.rig.workpiece_p1 = {frames::world(), vec3_at(wp, path, "p1_mm")};
    cfg.rig.workpiece_p3 = {frames::world(), vec3_at(wp, path, "p3_mm")};
    cfg.rig.workpiece_p5 = {frames::world(), vec3_at(wp, path, "p5_mm")};
    // Surfaces DegenerateFeaturePoints at load time.
    workpiece_frame(cfg.rig);
  }

  cfg.rig.anchor_offset_mm = vec3_at(root, source_name, "anchor_offset_mm");

  if (root.contains("turntable_rest_deg")) {
    const json& tr = root["turntable_rest_deg"];
    const std::string path = source_name + "/turntable_rest_deg";
    if (!tr.is_object()) parse_fail(path, "expected an object");
    reject_unknown_keys(tr, path, {"alpha", "beta"});
    cfg.rig.turntable_rest.alpha_rad = deg_to_rad(number_at(tr, path, "alpha"));
    cfg.rig.turntable_rest.beta_rad = deg_to_rad(number_at(tr, path, "beta"));
  }

  if (root.contains("experiment")) {
    const json& ex = root["experiment"];
    const std::string path = source_name + "/experiment";
    if (!ex.is_object()) parse_fail(path, "expected an object");
    reject_unknown_keys(ex, path,
                        {"static_points_mm", "static_trials", "tracking_start_mm"});
    if (ex.contains("static_points_mm")) {
      const json& pts = ex["static_points_mm"];
      if (!pts.is_array() || pts.empty()) {
        parse_fail(path + "/static_points_mm", "expected a non-empty array");
      }
      cfg.experiment.static_points_mm.clear();
      for (const json& p : pts) {
        cfg.experiment.static_points_mm.push_back(
            as_number(p, path + "/static_points_mm"));
      }
    }
    if (ex.contains("static_trials")) {
      cfg.experiment.static_trials =
          static_cast<int>(integer_at(ex, path, "static_trials"));
      if (cfg.experiment.static_trials < 2) {
        throw Error(ErrorCode::ValidationError, "static_trials must be >= 2");
      }
    }
    if (ex.contains("tracking_start_mm")) {
      cfg.rig.tracking_start_arclength_mm =
          number_at(ex, path, "tracking_start_mm");
    }
  }

  cfg.uncertainty = parse_uncertainty(require(root, source_name, "uncertainty"),
                                      source_name + "/uncertainty");
  cfg.noise =
      parse_noise(require(root, source_name, "noise"), source_name + "/noise");

  return out;
}

SceneLoadResult load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open scene file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scene(buffer.str(), path);
}

nlohmann::json scene_to_json(const SceneConfig& cfg) {
  json j;
  j["camera"] = {{"fx", cfg.rig.camera.fx_px},
                 {"fy", cfg.rig.camera.fy_px},
                 {"r", cfg.rig.camera.skew_r},
                 {"u0", cfg.rig.camera.u0_px},
                 {"v0", cfg.rig.camera.v0_px},
                 {"k1", cfg.rig.camera.k1},
                 {"k2", cfg.rig.camera.k2},
                 {"image_width", cfg.rig.camera.image_width_px},
                 {"image_height", cfg.rig.camera.image_height_px}};

  const Mat4 m = cfg.rig.m_cr.homogeneous();
  json rows = json::array();
  for (int row = 0; row < 4; ++row) {
    rows.push_back({m(row, 0), m(row, 1), m(row, 2), m(row, 3)});
  }
  j["m_cr"] = rows;

  j["track"] = {{"length_mm", cfg.rig.track.length_mm},
                {"width_mm", cfg.rig.track.width_mm},
                {"corner_radius_mm", cfg.rig.track.corner_radius_mm},
                {"height_mm", cfg.rig.track.height_mm},
                {"heading", cfg.rig.heading == HeadingMode::TangentFollowing
                                ? "tangent"
                                : "world-fixed"}};
  j["encoder"] = {{"pulses_per_rev", cfg.rig.encoder.pulses_per_rev},
                  {"wheel_circumference_mm", cfg.rig.encoder.wheel_circumference_mm}};
  const auto vec = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
  j["workpiece"] = {{"p1_mm", vec(cfg.rig.workpiece_p1.coords_mm)},
                    {"p3_mm", vec(cfg.rig.workpiece_p3.coords_mm)},
                    {"p5_mm", vec(cfg.rig.workpiece_p5.coords_mm)}};
  j["anchor_offset_mm"] = vec(cfg.rig.anchor_offset_mm);
  j["turntable_rest_deg"] = {
      {"alpha", rad_to_deg(cfg.rig.turntable_rest.alpha_rad)},
      {"beta", rad_to_deg(cfg.rig.turntable_rest.beta_rad)}};
  j["experiment"] = {{"static_points_mm", cfg.experiment.static_points_mm},
                     {"static_trials", cfg.experiment.static_trials},
                     {"tracking_start_mm", cfg.rig.tracking_start_arclength_mm}};
  j["uncertainty"] = {{"sigma_alpha_deg", rad_to_deg(cfg.uncertainty.sigma_alpha_rad)},
                      {"sigma_beta_deg", rad_to_deg(cfg.uncertainty.sigma_beta_rad)},
                      {"sigma_tx_mm", cfg.uncertainty.sigma_tx_mm},
                      {"sigma_ty_mm", cfg.uncertainty.sigma_ty_mm},
                      {"sigma_tz_mm", cfg.uncertainty.sigma_tz_mm}};
  j["noise"] = {{"encoder_quantization", cfg.noise.encoder_quantization},
                {"turntable_sigma_deg", rad_to_deg(cfg.noise.turntable_sigma_rad)},
                {"pixel_sigma_px", cfg.noise.pixel_sigma_px},
                {"seed", cfg.noise.seed}};
  return j;
}

std::string emit_scene(const SceneConfig& config) {
  return scene_to_json(config).dump(2) + "\n";
}

std::string scene_content_hash(const SceneConfig& config) {
  return sha1_hex(scene_to_json(config).dump());
}

namespace {

std::uint32_t rotl32(std::uint32_t x, int bits) {
  return (x << bits) | (x >> (32 - bits));
}

}  // namespace

std::string sha1_hex(const std::string& bytes) {
  std::uint32_t h0 = 0x67452301, h1 = 0xEFCDAB89, h2 = 0x98BADCFE,
                h3 = 0x10325476, h4 = 0xC3D2E1F0;

  std::string msg = bytes;
  const std::uint64_t bit_length = static_cast<std::uint64_t>(msg.size()) * 8;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i) {
    msg.push_back(static_cast<char>((bit_length >> (8 * i)) & 0xFF));
  }

  for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
    std::array<std::uint32_t, 80> w{};
    for (int i = 0; i < 16; ++i) {
      w[i] = (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i])) << 24) |
             (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i + 1])) << 16) |
             (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i + 2])) << 8) |
             static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i + 3]));
    }
    for (int i = 16; i < 80; ++i) {
      w[i] = rotl32(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    }

    std::uint32_t a = h0, b = h1, c = h2, d = h3, e = h4;
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDC;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6;
      }
      const std::uint32_t temp = rotl32(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rotl32(b, 30);
      b = a;
      a = temp;
    }
    h0 += a;
    h1 += b;
    h2 += c;
    h3 += d;
    h4 += e;
  }

  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (std::uint32_t h : {h0, h1, h2, h3, h4}) {
    out << std::setw(8) << h;
  }
  return out.str();
}

}  // namespace arreg
