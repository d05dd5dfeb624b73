#include "frictorq/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "frictorq/model.hpp"

namespace frictorq {

using nlohmann::json;

namespace {

constexpr double kPi = 3.141592653589793238462643;

[[noreturn]] void fail(const std::string& msg) { throw ModelError("scenario: " + msg); }

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number()) fail("missing or non-numeric '" + key + "'");
  return j[key].get<double>();
}

// Scalar -> uniform diagonal, flat array -> diagonal, nested arrays -> full.
Mat gain_matrix(const json& j, const std::string& key, int dim) {
  if (j.is_number()) return j.get<double>() * Mat::Identity(dim, dim);
  if (j.is_array() && !j.empty() && j[0].is_number()) {
    if (static_cast<int>(j.size()) != dim) fail("'" + key + "' length != " + std::to_string(dim));
    Vec d(dim);
    for (int i = 0; i < dim; ++i) d(i) = j[i].get<double>();
    return d.asDiagonal();
  }
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != dim) fail("'" + key + "' rows != " + std::to_string(dim));
    Mat m(dim, dim);
    for (int r = 0; r < dim; ++r) {
      if (static_cast<int>(j[r].size()) != dim) {
        fail("'" + key + "' row " + std::to_string(r) + " length != " + std::to_string(dim));
      }
      for (int c = 0; c < dim; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
  }
  fail("'" + key + "' must be a number or array");
}

Mat gain_or(const json& gains, const std::string& key, int dim, double fallback) {
  if (!gains.contains(key)) return fallback * Mat::Identity(dim, dim);
  return gain_matrix(gains[key], key, dim);
}

ReferenceSpec parse_reference(const json& j, int n) {
  ReferenceSpec ref;
  const std::string kind = j.value("type", "");
  if (kind == "joint_sinusoid") {
    ref.kind = ReferenceKind::joint_sinusoid;
    double scale = 1.0;
    const char* key = nullptr;
    if (j.contains("amplitude")) {
      key = "amplitude";
    } else if (j.contains("amplitude_deg")) {
      key = "amplitude_deg";
      scale = kPi / 180.0;
    } else {
      fail("joint_sinusoid needs 'amplitude' (rad) or 'amplitude_deg'");
    }
    const json& a = j[key];
    ref.amplitude = Vec::Zero(n);
    if (a.is_number()) {
      ref.amplitude.setConstant(scale * a.get<double>());
    } else if (a.is_array() && static_cast<int>(a.size()) == n) {
      for (int i = 0; i < n; ++i) ref.amplitude(i) = scale * a[i].get<double>();
    } else {
      fail(std::string("'") + key + "' must be a number or an array of length " +
           std::to_string(n));
    }
  } else if (kind == "com_sinusoid") {
    ref.kind = ReferenceKind::com_sinusoid;
    if (j.contains("amplitude")) {
      ref.amplitude_m = require_number(j, "amplitude");
    } else if (j.contains("amplitude_cm")) {
      ref.amplitude_m = 0.01 * require_number(j, "amplitude_cm");
    } else {
      fail("com_sinusoid needs 'amplitude' (m) or 'amplitude_cm'");
    }
    if (j.contains("axis") && j["axis"].is_string()) {
      const std::string ax = j["axis"].get<std::string>();
      if (ax == "x") ref.axis = 0;
      else if (ax == "y") ref.axis = 1;
      else if (ax == "z") ref.axis = 2;
      else fail("axis must be x, y or z");
    } else if (j.contains("axis")) {
      ref.axis = j["axis"].get<int>();
      if (ref.axis < 0 || ref.axis > 2) fail("axis must be 0, 1 or 2");
    }
  } else {
    fail("reference.type must be joint_sinusoid or com_sinusoid");
  }
  ref.frequency = require_number(j, "frequency");
  if (ref.frequency < 0) fail("frequency must be >= 0");
  return ref;
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("config not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  if (!j.contains("model") || !j["model"].is_string()) fail("missing 'model' path");
  std::filesystem::path mp = j["model"].get<std::string>();
  if (mp.is_relative()) mp = std::filesystem::path(path).parent_path() / mp;
  cfg.model_path = mp.string();
  const RobotModel model = load_model(cfg.model_path);
  const int n = model.n_joints();

  const std::string ctl = j.value("controller", "");
  if (ctl == "baseline") cfg.controller = ControllerKind::baseline;
  else if (ctl == "ef") cfg.controller = ControllerKind::ef;
  else fail("controller must be baseline or ef");

  const std::string mode = j.value("mode", "");
  if (mode == "fixed_base") cfg.mode = ModeKind::fixed_base;
  else if (mode == "floating_base") cfg.mode = ModeKind::floating_base;
  else fail("mode must be fixed_base or floating_base");
  if (cfg.mode == ModeKind::floating_base && !model.floating_base) {
    fail("floating_base mode needs a floating-base model");
  }
  if (cfg.mode == ModeKind::fixed_base && model.floating_base) {
    fail("fixed_base mode needs a fixed-base model");
  }

  cfg.duration = require_number(j, "duration");
  if (cfg.duration < 0) fail("duration must be >= 0");
  cfg.dt_physics = j.value("dt_physics", 1e-4);
  cfg.dt_inner = j.value("dt_inner", 1e-3);
  cfg.dt_outer = j.value("dt_outer", 1e-2);
  if (cfg.dt_physics <= 0 || cfg.dt_inner <= 0 || cfg.dt_outer <= 0) fail("rates must be > 0");
  if (cfg.dt_physics > cfg.dt_inner || cfg.dt_inner > cfg.dt_outer) {
    fail("need dt_physics <= dt_inner <= dt_outer");
  }
  for (auto [coarse, fine, name] :
       {std::tuple{cfg.dt_inner, cfg.dt_physics, "dt_inner/dt_physics"},
        std::tuple{cfg.dt_outer, cfg.dt_inner, "dt_outer/dt_inner"}}) {
    const double ratio = coarse / fine;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
      fail(std::string(name) + " must be an integer");
    }
  }

  const json gains = j.value("gains", json::object());
  if (cfg.mode == ModeKind::fixed_base) {
    if (!gains.contains("kp") || !gains.contains("kd")) fail("fixed_base needs gains.kp and gains.kd");
    cfg.joint_gains.kp = gain_matrix(gains["kp"], "kp", n);
    cfg.joint_gains.kd = gain_matrix(gains["kd"], "kd", n);
    // The baseline may need different damping (its usable kd is limited by the
    // outer rate); without overrides both controllers share kp/kd.
    cfg.baseline_joint_gains.kp =
        gains.contains("baseline_kp") ? gain_matrix(gains["baseline_kp"], "baseline_kp", n)
                                      : cfg.joint_gains.kp;
    cfg.baseline_joint_gains.kd =
        gains.contains("baseline_kd") ? gain_matrix(gains["baseline_kd"], "baseline_kd", n)
                                      : cfg.joint_gains.kd;
  } else {
    if (!gains.contains("momentum_kp")) fail("floating_base needs gains.momentum_kp");
    cfg.momentum_gains.kp = gain_matrix(gains["momentum_kp"], "momentum_kp", 6);
    cfg.momentum_gains.ki = gain_or(gains, "momentum_ki", 6, 0.0);
    cfg.momentum_gains.postural.kp = gain_or(gains, "postural_kp", n, 0.0);
    cfg.momentum_gains.postural.kd = gain_or(gains, "postural_kd", n, 0.0);
  }
  cfg.ki_inner = gain_or(gains, "ki_inner", n, 10.0);

  if (!j.contains("reference")) fail("missing 'reference'");
  cfg.reference = parse_reference(j["reference"], n);
  if (cfg.mode == ModeKind::fixed_base && cfg.reference.kind != ReferenceKind::joint_sinusoid) {
    fail("fixed_base mode needs a joint_sinusoid reference");
  }
  if (cfg.mode == ModeKind::floating_base && cfg.reference.kind != ReferenceKind::com_sinusoid) {
    fail("floating_base mode needs a com_sinusoid reference");
  }

  if (j.contains("noise")) {
    const json& nj = j["noise"];
    cfg.noise.sigma_v = nj.value("sigma_v", 0.0);
    cfg.noise.tau_f = nj.value("tau_f", 0.0);
    cfg.noise.seed = nj.value("seed", 0ull);
    if (cfg.noise.sigma_v < 0) fail("noise.sigma_v must be >= 0");
    if (cfg.noise.tau_f < 0) fail("noise.tau_f must be >= 0");
  }

  if (j.contains("anti_windup")) {
    cfg.windup_momentum = j["anti_windup"].value("momentum", 50.0);
    cfg.windup_inner = j["anti_windup"].value("inner", 50.0);
  }
  cfg.output = j.value("output", "");
  return cfg;
}

JointReference joint_reference_at(const ReferenceSpec& ref, int n, double t) {
  JointReference out;
  out.s = Vec::Zero(n);
  out.sdot = Vec::Zero(n);
  out.sddot = Vec::Zero(n);
  if (ref.kind != ReferenceKind::joint_sinusoid) return out;
  const double w = 2.0 * kPi * ref.frequency;
  for (int i = 0; i < n; ++i) {
    out.s(i) = ref.amplitude(i) * std::sin(w * t);
    out.sdot(i) = ref.amplitude(i) * w * std::cos(w * t);
    out.sddot(i) = -ref.amplitude(i) * w * w * std::sin(w * t);
  }
  return out;
}

void com_reference_at(const ReferenceSpec& ref, double mass, const Vec3& com0, double t,
                      Vec3* com_ref, MomentumReference* mref) {
  const double w = 2.0 * kPi * ref.frequency;
  Vec3 axis = Vec3::Zero();
  axis(ref.axis) = 1.0;
  // Smoothstep envelope over the first period so the sway starts from rest:
  // position, velocity and acceleration are all continuous at t = 0, and the
  // reference equals the pure sinusoid from one period onward.
  double e = 1.0, de = 0.0, dde = 0.0;
  if (ref.frequency > 0.0) {
    const double period = 1.0 / ref.frequency;
    if (t < period) {
      const double x = t / period;
      e = x * x * (3.0 - 2.0 * x);
      de = 6.0 * x * (1.0 - x) / period;
      dde = (6.0 - 12.0 * x) / (period * period);
    }
  } else {
    e = 0.0;
  }
  const double sn = std::sin(w * t);
  const double cs = std::cos(w * t);
  const double pos = ref.amplitude_m * e * sn;
  const double vel = ref.amplitude_m * (de * sn + e * w * cs);
  const double acc = ref.amplitude_m * (dde * sn + 2.0 * de * w * cs - e * w * w * sn);
  if (com_ref) *com_ref = com0 + pos * axis;
  if (mref) {
    mref->H.setZero();
    mref->Hdot.setZero();
    mref->H.head<3>() = mass * vel * axis;
    mref->Hdot.head<3>() = mass * acc * axis;
  }
}

}  // namespace frictorq
