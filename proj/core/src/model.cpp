#include "frictorq/model.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace frictorq {

using nlohmann::json;

Mat3 rpy_to_rot(const Vec3& rpy) {
  return (Eigen::AngleAxisd(rpy(2), Vec3::UnitZ()) *
          Eigen::AngleAxisd(rpy(1), Vec3::UnitY()) *
          Eigen::AngleAxisd(rpy(0), Vec3::UnitX()))
      .toRotationMatrix();
}

int RobotModel::link_index(const std::string& name) const {
  for (size_t i = 0; i < links.size(); ++i)
    if (links[i].name == name) return static_cast<int>(i);
  return -1;
}

void RobotModel::finalize() {
  const int nl = static_cast<int>(links.size());
  const int nj = n_joints();
  if (nl == 0) throw ModelError("model has no links");

  std::set<std::string> seen;
  for (const auto& l : links)
    if (!seen.insert(l.name).second)
      throw ModelError("duplicate link name: " + l.name);
  seen.clear();
  for (const auto& j : joints)
    if (!seen.insert(j.name).second)
      throw ModelError("duplicate joint name: " + j.name);

  joint_parent_link.assign(nj, -1);
  joint_child_link.assign(nj, -1);
  link_parent_joint.assign(nl, -1);
  for (int j = 0; j < nj; ++j) {
    joint_parent_link[j] = link_index(joints[j].parent);
    joint_child_link[j] = link_index(joints[j].child);
    if (joint_parent_link[j] < 0)
      throw ModelError("joint " + joints[j].name + " references unknown parent link " + joints[j].parent);
    if (joint_child_link[j] < 0)
      throw ModelError("joint " + joints[j].name + " references unknown child link " + joints[j].child);
    if (link_parent_joint[joint_child_link[j]] >= 0)
      throw ModelError("link " + joints[j].child + " has more than one parent joint");
    link_parent_joint[joint_child_link[j]] = j;
  }

  root_link = -1;
  for (int l = 0; l < nl; ++l) {
    if (link_parent_joint[l] < 0) {
      if (root_link >= 0)
        throw ModelError("tree has multiple roots: " + links[root_link].name + " and " + links[l].name);
      root_link = l;
    }
  }
  if (root_link < 0) {
    // Every link has a parent, so some subset of links forms a cycle.
    std::ostringstream os;
    os << "kinematic cycle through links:";
    int l = 0;
    std::set<int> visited;
    while (visited.insert(l).second) l = joint_parent_link[link_parent_joint[l]];
    const int start = l;
    do {
      os << " " << links[l].name;
      l = joint_parent_link[link_parent_joint[l]];
    } while (l != start);
    throw ModelError(os.str());
  }

  // Walk from the root; anything unreached sits on a cycle detached from it.
  joint_order.clear();
  std::vector<int> depth(nl, -1);
  depth[root_link] = 0;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int j = 0; j < nj; ++j) {
      if (depth[joint_child_link[j]] < 0 && depth[joint_parent_link[j]] >= 0) {
        depth[joint_child_link[j]] = depth[joint_parent_link[j]] + 1;
        joint_order.push_back(j);
        grew = true;
      }
    }
  }
  for (int l = 0; l < nl; ++l) {
    if (depth[l] < 0) {
      std::ostringstream os;
      os << "kinematic cycle through links:";
      int c = l;
      std::set<int> visited;
      while (visited.insert(c).second) c = joint_parent_link[link_parent_joint[c]];
      const int start = c;
      do {
        os << " " << links[c].name;
        c = joint_parent_link[link_parent_joint[c]];
      } while (c != start);
      throw ModelError(os.str());
    }
  }

  total_mass = 0.0;
  for (const auto& l : links) total_mass += l.mass;
}

namespace {

Vec3 parse_vec3(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 3)
    throw ModelError(what + " must be an array of 3 numbers");
  return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

Transform parse_transform(const json& v, const std::string& what) {
  Transform t;
  if (v.contains("xyz")) t.xyz = parse_vec3(v["xyz"], what + ".xyz");
  if (v.contains("rpy")) t.rot = rpy_to_rot(parse_vec3(v["rpy"], what + ".rpy"));
  return t;
}

// Square matrix: either row-major array of arrays or {"diag": [...]}.
Mat parse_matrix(const json& v, int n, const std::string& what) {
  Mat m = Mat::Zero(n, n);
  if (v.is_object() && v.contains("diag")) {
    const json& d = v["diag"];
    if (!d.is_array() || static_cast<int>(d.size()) != n)
      throw ModelError(what + ".diag must have " + std::to_string(n) + " entries");
    for (int i = 0; i < n; ++i) m(i, i) = d[i].get<double>();
    return m;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    throw ModelError(what + " must be a " + std::to_string(n) + "x" + std::to_string(n) +
                     " array of arrays or {\"diag\": [...]}");
  for (int i = 0; i < n; ++i) {
    const json& row = v[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ModelError(what + " row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j) m(i, j) = row[j].get<double>();
  }
  return m;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vec3_to_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

Vec3 rot_to_rpy(const Mat3& r) {
  // Inverse of rpy_to_rot (ZYX Euler angles).
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll, yaw;
  if (std::abs(std::cos(pitch)) > 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    roll = std::atan2(-r(1, 2), r(1, 1));
    yaw = 0.0;
  }
  return Vec3(roll, pitch, yaw);
}

json transform_to_json(const Transform& t) {
  return json{{"xyz", vec3_to_json(t.xyz)}, {"rpy", vec3_to_json(rot_to_rpy(t.rot))}};
}

}  // namespace

RobotModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("model not found: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ModelError("failed to parse " + path + ": " + e.what());
  }

  RobotModel m;
  try {
    m.floating_base = root.value("floating_base", false);
    m.gravity_norm = root.value("gravity_norm", 9.81);

    for (const json& jl : root.at("links")) {
      Link l;
      l.name = jl.at("name").get<std::string>();
      l.mass = jl.at("mass").get<double>();
      if (jl.contains("com")) l.com = parse_vec3(jl["com"], l.name + ".com");
      const Mat mi = parse_matrix(jl.at("inertia"), 3, l.name + ".inertia");
      l.inertia = mi;
      m.links.push_back(l);
    }
    if (root.contains("joints")) {
      for (const json& jj : root["joints"]) {
        Joint j;
        j.name = jj.at("name").get<std::string>();
        const std::string type = jj.value("type", "revolute");
        if (type != "revolute")
          throw ModelError("joint " + j.name + ": unsupported type " + type);
        j.parent = jj.at("parent").get<std::string>();
        j.child = jj.at("child").get<std::string>();
        j.axis = parse_vec3(jj.at("axis"), j.name + ".axis");
        if (jj.contains("origin")) j.origin = parse_transform(jj["origin"], j.name + ".origin");
        m.joints.push_back(j);
      }
    }
    if (root.contains("contacts")) {
      for (const json& jc : root["contacts"]) {
        ContactSpec c;
        c.link = jc.at("link").get<std::string>();
        if (jc.contains("origin")) c.origin = parse_transform(jc["origin"], c.link + ".contact.origin");
        const Vec3 he = jc.contains("half_extents")
                            ? Vec3(jc["half_extents"][0].get<double>(), jc["half_extents"][1].get<double>(), 0)
                            : Vec3::Zero();
        c.half_x = he(0);
        c.half_y = he(1);
        c.mu = jc.at("mu").get<double>();
        c.fz_min = jc.value("fz_min", 0.0);
        m.contacts.push_back(c);
      }
    }

    const int n = m.n_joints();
    const json& act = root.at("actuation");
    m.actuation.gamma = parse_matrix(act.at("gamma"), n, "actuation.gamma");
    m.actuation.im = parse_matrix(act.at("im"), n, "actuation.im");
    m.actuation.kv = parse_matrix(act.at("kv"), n, "actuation.kv");
    m.actuation.kc = parse_matrix(act.at("kc"), n, "actuation.kc");
    m.actuation.epsilon = act.value("epsilon", 1e-4);
  } catch (const json::exception& e) {
    throw ModelError("failed to parse " + path + ": " + e.what());
  }

  m.finalize();
  const auto report = validate(m);
  if (!report.empty()) throw ModelError(path + ": " + report.front());
  return m;
}

void save_model(const RobotModel& m, const std::string& path) {
  json root;
  root["floating_base"] = m.floating_base;
  root["gravity_norm"] = m.gravity_norm;
  root["links"] = json::array();
  for (const auto& l : m.links) {
    root["links"].push_back(json{{"name", l.name},
                                 {"mass", l.mass},
                                 {"com", vec3_to_json(l.com)},
                                 {"inertia", matrix_to_json(l.inertia)}});
  }
  root["joints"] = json::array();
  for (const auto& j : m.joints) {
    root["joints"].push_back(json{{"name", j.name},
                                  {"type", "revolute"},
                                  {"parent", j.parent},
                                  {"child", j.child},
                                  {"axis", vec3_to_json(j.axis)},
                                  {"origin", transform_to_json(j.origin)}});
  }
  root["contacts"] = json::array();
  for (const auto& c : m.contacts) {
    root["contacts"].push_back(json{{"link", c.link},
                                    {"origin", transform_to_json(c.origin)},
                                    {"half_extents", json::array({c.half_x, c.half_y})},
                                    {"mu", c.mu},
                                    {"fz_min", c.fz_min}});
  }
  root["actuation"] = json{{"gamma", matrix_to_json(m.actuation.gamma)},
                           {"im", matrix_to_json(m.actuation.im)},
                           {"kv", matrix_to_json(m.actuation.kv)},
                           {"kc", matrix_to_json(m.actuation.kc)},
                           {"epsilon", m.actuation.epsilon}};
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write " + path);
  out << root.dump(2) << "\n";
}

std::vector<std::string> validate(const RobotModel& m) {
  std::vector<std::string> report;
  auto fail = [&](const std::string& s) { report.push_back(s); };

  if (m.gravity_norm < 0) fail("gravity_norm must be >= 0");

  for (const auto& l : m.links) {
    if (l.mass <= 0) fail("link " + l.name + ": mass must be > 0, got " + std::to_string(l.mass));
    if (!l.inertia.isApprox(l.inertia.transpose(), 1e-10)) {
      fail("link " + l.name + ": inertia not symmetric");
    } else {
      Eigen::SelfAdjointEigenSolver<Mat3> es(l.inertia, Eigen::EigenvaluesOnly);
      if (es.eigenvalues()(0) <= 0) fail("link " + l.name + ": inertia not positive definite");
    }
  }
  for (const auto& j : m.joints) {
    if (std::abs(j.axis.norm() - 1.0) > 1e-9)
      fail("joint " + j.name + ": axis must be a unit vector");
  }
  for (size_t k = 0; k < m.contacts.size(); ++k) {
    const auto& c = m.contacts[k];
    if (m.link_index(c.link) < 0) fail("contact " + std::to_string(k) + ": unknown link " + c.link);
    if (c.half_x <= 0 || c.half_y <= 0) fail("contact " + std::to_string(k) + ": half_extents must be > 0");
    if (c.mu <= 0) fail("contact " + std::to_string(k) + ": mu must be > 0");
    if (c.fz_min < 0) fail("contact " + std::to_string(k) + ": fz_min must be >= 0");
  }

  const int n = m.n_joints();
  const Actuation& a = m.actuation;
  auto check_dims = [&](const Mat& mat, const std::string& name) {
    if (mat.rows() != n || mat.cols() != n) {
      fail("actuation." + name + " must be " + std::to_string(n) + "x" + std::to_string(n));
      return false;
    }
    return true;
  };
  if (check_dims(a.gamma, "gamma")) {
    Eigen::FullPivLU<Mat> lu(a.gamma);
    if (!lu.isInvertible()) fail("actuation.gamma not invertible");
  }
  auto check_diag = [&](const Mat& mat, const std::string& name, bool strict) {
    if (!check_dims(mat, name)) return;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && mat(i, j) != 0.0) {
          fail("actuation." + name + " must be diagonal");
          return;
        }
    for (int i = 0; i < n; ++i) {
      if (strict && mat(i, i) <= 0)
        fail("actuation." + name + "[" + std::to_string(i) + "] must be > 0, got " +
             std::to_string(mat(i, i)));
      if (!strict && mat(i, i) < 0)
        fail("actuation." + name + "[" + std::to_string(i) + "] must be >= 0, got " +
             std::to_string(mat(i, i)));
    }
  };
  check_diag(a.im, "im", true);
  check_diag(a.kv, "kv", false);
  check_diag(a.kc, "kc", false);
  if (a.epsilon <= 0) fail("actuation.epsilon must be > 0");

  return report;
}

}  // namespace frictorq
