#include <doctest.h>

#include <cmath>

#include "frictorq/dynamics.hpp"
#include "frictorq/friction.hpp"
#include "frictorq/model.hpp"
#include "test_helpers.hpp"

using namespace frictorq;
using namespace frictorq::testing;

namespace {

RobotModel random_chain(TestRng& rng, int n) {
  RobotModel m;
  m.floating_base = false;
  Link base;
  base.name = "base";
  base.mass = 1.0 + rng.u01();
  base.inertia = Mat3::Identity() * 0.01;
  m.links.push_back(base);
  for (int i = 0; i < n; ++i) {
    Link link;
    link.name = "link" + std::to_string(i);
    link.mass = 0.5 + rng.u01();
    link.com = Vec3(rng.u(), rng.u(), rng.u()) * 0.2;
    link.inertia = Mat3::Zero();
    link.inertia.diagonal() << 0.002 + 0.02 * rng.u01(), 0.002 + 0.02 * rng.u01(),
        0.002 + 0.02 * rng.u01();
    m.links.push_back(link);

    Joint j;
    j.name = "j" + std::to_string(i);
    j.parent = i == 0 ? "base" : ("link" + std::to_string(i - 1));
    j.child = link.name;
    j.axis = Vec3(rng.u(), rng.u(), rng.u()).normalized();
    j.origin.xyz = Vec3(rng.u(), rng.u(), rng.u()) * 0.3;
    j.origin.rot = rpy_to_rot(Vec3(rng.u(), rng.u(), rng.u()));
    m.joints.push_back(j);
  }
  Mat diag = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) diag(i, i) = 0.01 + 0.01 * rng.u01();
  m.actuation.gamma = diag;
  m.actuation.im = Mat::Identity(n, n) * 1e-5;
  m.actuation.kv = Mat::Identity(n, n) * 1e-3;
  m.actuation.kc = Mat::Zero(n, n);
  m.actuation.epsilon = 1e-4;
  m.finalize();
  return m;
}

RobotModel free_body_model() {
  RobotModel m;
  m.floating_base = true;
  Link body;
  body.name = "body";
  body.mass = 3.7;
  body.com = Vec3(0.02, -0.01, 0.05);
  body.inertia = Mat3::Zero();
  body.inertia.diagonal() << 0.05, 0.09, 0.04;
  m.links.push_back(body);
  m.actuation.gamma = Mat::Zero(0, 0);
  m.actuation.im = Mat::Zero(0, 0);
  m.actuation.kv = Mat::Zero(0, 0);
  m.actuation.kc = Mat::Zero(0, 0);
  m.finalize();
  return m;
}

/// Potential energy from the pose oracle: sum of m g c_z.
double oracle_potential(const RobotModel& model, const RobotState& state) {
  const std::vector<OraclePose> poses = oracle_fk(model, state);
  double v = 0.0;
  for (size_t l = 0; l < model.links.size(); ++l) {
    const Vec3 c = poses[l].p + poses[l].R * model.links[l].com;
    v += model.links[l].mass * model.gravity_norm * c.z();
  }
  return v;
}

}  // namespace

TEST_CASE("mass matrix equals the kinetic-energy Hessian oracle") {
  TestRng rng(301);
  std::vector<RobotModel> models;
  models.push_back(load_model(model_file("pendulum_2dof.json")));
  models.push_back(load_model(fixture("elbow_2dof.json")));
  models.push_back(load_model(model_file("arm_4dof.json")));
  models.push_back(random_chain(rng, 4));

  for (const RobotModel& model : models) {
    for (int trial = 0; trial < 3; ++trial) {
      RobotState st = RobotState::zero(model);
      st.s = rng.vec(model.n_joints(), 1.2);
      const DynamicsQuantities dq = compute_dynamics(model, st);
      const Mat want = oracle_mass_fixed(model, st);
      CHECK(rel_err(dq.M_s, want) < 1e-6);
    }
  }
}

TEST_CASE("coaxial pendulum has the hand-derived constant mass matrix") {
  // Both axles pass through the same point on the y axis, so the inertia
  // about them cannot depend on the configuration.
  const RobotModel model = load_model(model_file("pendulum_2dof.json"));
  Mat want(2, 2);
  want << 0.196, 0.128, 0.128, 0.128;
  TestRng rng(302);
  for (int trial = 0; trial < 4; ++trial) {
    RobotState st = RobotState::zero(model);
    st.s = rng.vec(2, 2.0);
    const DynamicsQuantities dq = compute_dynamics(model, st);
    CHECK(max_abs(dq.M_s - want) < 1e-12);
  }
}

TEST_CASE("floating-base kinetic energy splits over the block-diagonal mass matrix") {
  const RobotModel model = load_model(model_file("biped.json"));
  TestRng rng(303);
  for (int trial = 0; trial < 4; ++trial) {
    RobotState st = RobotState::zero(model);
    st.s = rng.vec(model.n_joints(), 0.3);
    st.sdot = rng.vec(model.n_joints(), 0.8);
    st.v_b = rng.vec(6, 0.5).head<6>();
    st.base_pos = rng.vec(3, 0.4).head<3>();
    st.base_quat = Quat(Eigen::AngleAxisd(0.4 * rng.u(), Vec3(rng.u(), rng.u(), rng.u()).normalized()));

    const DynamicsQuantities dq = compute_dynamics(model, st);
    const Vec6 twist = base_twist_from_state(dq, st);
    const double want = oracle_kinetic_energy(model, st, st.sdot, twist);
    const double got = 0.5 * st.v_b.dot(dq.M_b * st.v_b) + 0.5 * st.sdot.dot(dq.M_s * st.sdot);
    CHECK(std::abs(got - want) < 1e-8 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("base mass matrix structure: m I top left, SPD blocks") {
  const RobotModel model = load_model(model_file("biped.json"));
  TestRng rng(304);
  for (int trial = 0; trial < 3; ++trial) {
    RobotState st = RobotState::zero(model);
    st.s = rng.vec(model.n_joints(), 0.4);
    const DynamicsQuantities dq = compute_dynamics(model, st);

    CHECK(max_abs(dq.M_b.topLeftCorner<3, 3>() - model.total_mass * Mat3::Identity()) < 1e-10);
    CHECK(max_abs(Mat(dq.M_b.topRightCorner<3, 3>())) < 1e-10);
    CHECK(max_abs(dq.M_b - dq.M_b.transpose()) < 1e-10);
    CHECK(max_abs(dq.M_s - dq.M_s.transpose()) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es_b(dq.M_b, Eigen::EigenvaluesOnly);
    CHECK(es_b.eigenvalues()(0) > 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es_s(dq.M_s, Eigen::EigenvaluesOnly);
    CHECK(es_s.eigenvalues()(0) > 0.0);
    CHECK(max_abs(dq.H - dq.M_b * st.v_b) == 0.0);
  }
}

TEST_CASE("single free body: locked inertia, rest bias, free fall, gyroscopics") {
  const RobotModel model = free_body_model();
  RobotState st = RobotState::zero(model);
  st.base_quat = Quat(Eigen::AngleAxisd(0.7, Vec3(0.2, 1.0, -0.3).normalized()));
  const Mat3 r = st.base_quat.toRotationMatrix();

  DynamicsQuantities dq = compute_dynamics(model, st);
  CHECK(max_abs(dq.M_b.topLeftCorner<3, 3>() - 3.7 * Mat3::Identity()) < 1e-12);
  const Mat3 want_rot = r * model.links[0].inertia * r.transpose();
  CHECK(max_abs(Mat(dq.M_b.bottomRightCorner<3, 3>()) - want_rot) < 1e-12);

  // At rest the only bias is the weight on the linear rows.
  Vec6 want_h = Vec6::Zero();
  want_h(2) = 3.7 * model.gravity_norm;
  CHECK((dq.h_b - want_h).norm() < 1e-12);

  // Unactuated: the CoM falls straight down and the spin obeys the rigid
  // body moment balance about the CoM.
  st.v_b << 0.3, -0.1, 0.2, 1.3, -0.7, 0.9;
  dq = compute_dynamics(model, st);
  const ForwardDynamicsResult fd =
      forward_dynamics_constrained(model, dq, st, Vec::Zero(0), nullptr);
  CHECK((fd.nudot.head<3>() - Vec3(0, 0, -model.gravity_norm)).norm() < 1e-10);
  const Vec3 w = st.v_b.tail<3>();
  const Vec3 want_wdot = -want_rot.ldlt().solve(w.cross(want_rot * w));
  CHECK((fd.nudot.tail<3>() - want_wdot).norm() < 1e-9);
}

TEST_CASE("rest bias equals the gradient of the potential energy") {
  TestRng rng(305);
  std::vector<RobotModel> models;
  models.push_back(load_model(model_file("pendulum_2dof.json")));
  models.push_back(load_model(fixture("elbow_2dof.json")));
  models.push_back(load_model(model_file("arm_4dof.json")));

  const double h = 1e-6;
  for (const RobotModel& model : models) {
    const int n = model.n_joints();
    for (int trial = 0; trial < 3; ++trial) {
      RobotState st = RobotState::zero(model);
      st.s = rng.vec(n, 1.2);
      const DynamicsQuantities dq = compute_dynamics(model, st);
      for (int i = 0; i < n; ++i) {
        RobotState sp = st, sm = st;
        sp.s(i) += h;
        sm.s(i) -= h;
        const double grad = (oracle_potential(model, sp) - oracle_potential(model, sm)) / (2 * h);
        CHECK(std::abs(dq.h_s(i) - grad) < 1e-6 * std::max(1.0, std::abs(grad)));
      }
    }
  }
}

TEST_CASE("coaxial pendulum gravity torque at the horizontal, by hand") {
  const RobotModel model = load_model(model_file("pendulum_2dof.json"));
  RobotState st = RobotState::zero(model);
  st.s << M_PI / 2.0, 0.0;
  const DynamicsQuantities dq = compute_dynamics(model, st);
  // V(s) = -g (1.2*0.2 cos s1 + 0.8*0.35 cos(s1+s2));
  // dV/ds at (pi/2, 0) = g (0.24 + 0.28, 0.28).
  CHECK(dq.h_s(0) == doctest::Approx(9.81 * 0.52).epsilon(1e-12));
  CHECK(dq.h_s(1) == doctest::Approx(9.81 * 0.28).epsilon(1e-12));
}

TEST_CASE("velocity bias is quadratic in the joint rates") {
  const RobotModel model = load_model(model_file("arm_4dof.json"));
  TestRng rng(306);
  RobotState st = RobotState::zero(model);
  st.s = rng.vec(4, 1.0);
  const Vec sdot = rng.vec(4, 1.0);

  auto coriolis = [&](double scale) {
    RobotState v = st;
    v.sdot = scale * sdot;
    const Vec h_v = compute_dynamics(model, v).h_s;
    v.sdot.setZero();
    return Vec(h_v - compute_dynamics(model, v).h_s);
  };
  const Vec c1 = coriolis(1.0);
  const Vec c2 = coriolis(2.0);
  CHECK((c2 - 4.0 * c1).norm() < 1e-9 * std::max(1.0, c2.norm()));
}

TEST_CASE("velocity bias carries the power of the mass-matrix rate") {
  // Energy bookkeeping: sdot' C(q, sdot) sdot = sdot' Mdot sdot / 2.
  const RobotModel model = load_model(model_file("arm_4dof.json"));
  TestRng rng(307);
  for (int trial = 0; trial < 3; ++trial) {
    RobotState st = RobotState::zero(model);
    st.s = rng.vec(4, 1.0);
    st.sdot = rng.vec(4, 1.0);

    const DynamicsQuantities dq = compute_dynamics(model, st);
    RobotState rest = st;
    rest.sdot.setZero();
    const Vec coriolis = dq.h_s - compute_dynamics(model, rest).h_s;

    const double h = 1e-6;
    RobotState qp = st, qm = st;
    qp.s += h * st.sdot;
    qm.s -= h * st.sdot;
    const Mat mdot =
        (compute_dynamics(model, qp).M_s - compute_dynamics(model, qm).M_s) / (2.0 * h);
    const double lhs = st.sdot.dot(coriolis);
    const double rhs = 0.5 * st.sdot.dot(mdot * st.sdot);
    CHECK(std::abs(lhs - rhs) < 1e-6 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("feeding the bias back as input freezes the joints") {
  // The elbow fixture has no motor friction, so u = h_s leaves sddot = 0.
  const RobotModel model = load_model(fixture("elbow_2dof.json"));
  TestRng rng(308);
  RobotState st = RobotState::zero(model);
  st.s = rng.vec(2, 1.0);
  st.sdot = rng.vec(2, 1.0);
  const DynamicsQuantities dq = compute_dynamics(model, st);
  const ForwardDynamicsResult fd = forward_dynamics_constrained(model, dq, st, dq.h_s, nullptr);
  CHECK(fd.nudot.norm() < 1e-10);
}

TEST_CASE("constrained forward dynamics matches the dense saddle-point oracle") {
  const RobotModel model = load_model(model_file("biped.json"));
  TestRng rng(309);
  const int n = model.n_joints();

  const RobotState ref_state = RobotState::zero(model);
  const DynamicsQuantities dq0 = compute_dynamics(model, ref_state);
  std::vector<ContactRef> refs;
  for (const auto& cp : dq0.contact_poses) refs.push_back({cp.p, cp.R});

  for (int trial = 0; trial < 10; ++trial) {
    RobotState st = RobotState::zero(model);
    st.s = rng.vec(n, 0.15);
    st.sdot = rng.vec(n, 0.6);
    st.v_b = rng.vec(6, 0.4).head<6>();
    const Vec u = rng.vec(n, 20.0);

    const DynamicsQuantities dq = compute_dynamics(model, st);
    const ForwardDynamicsResult got = forward_dynamics_constrained(model, dq, st, u, &refs);
    const OracleKkt want = oracle_constrained_dynamics(model, dq, st, u, &refs);

    CHECK(rel_err(got.nudot, want.nudot) < 1e-8);
    CHECK(rel_err(got.f, want.f) < 1e-8);
  }
}

TEST_CASE("fixed-base forward dynamics matches the oracle without contacts") {
  const RobotModel model = load_model(model_file("arm_4dof.json"));
  TestRng rng(310);
  for (int trial = 0; trial < 5; ++trial) {
    RobotState st = RobotState::zero(model);
    st.s = rng.vec(4, 1.0);
    st.sdot = rng.vec(4, 1.0);
    const Vec u = rng.vec(4, 10.0);
    const DynamicsQuantities dq = compute_dynamics(model, st);
    const ForwardDynamicsResult got = forward_dynamics_constrained(model, dq, st, u, nullptr);
    const OracleKkt want = oracle_constrained_dynamics(model, dq, st, u, nullptr);
    CHECK(rel_err(got.nudot, want.nudot) < 1e-10);
  }
}

TEST_CASE("constraint residual is plain matrix arithmetic") {
  const RobotModel model = load_model(model_file("biped.json"));
  TestRng rng(311);
  RobotState st = RobotState::zero(model);
  st.s = rng.vec(model.n_joints(), 0.2);
  const DynamicsQuantities dq = compute_dynamics(model, st);
  const Vec nudot = rng.vec(model.n_vel(), 1.0);
  const Vec got = contact_constraint_residual(dq, nudot);
  const Vec want = dq.J_full(true) * nudot + dq.jdot_nu;
  CHECK((got - want).norm() == 0.0);

  // nudot = 0 leaves exactly the drift term.
  CHECK((contact_constraint_residual(dq, Vec::Zero(model.n_vel())) - dq.jdot_nu).norm() == 0.0);
}

TEST_CASE("the constrained solution annihilates the constraint residual") {
  const RobotModel model = load_model(model_file("biped.json"));
  TestRng rng(312);
  const RobotState zero_state = RobotState::zero(model);
  const DynamicsQuantities dq0 = compute_dynamics(model, zero_state);
  std::vector<ContactRef> refs;
  for (const auto& cp : dq0.contact_poses) refs.push_back({cp.p, cp.R});

  // Contact-consistent velocities at the welded pose: no Baumgarte forcing,
  // so the accelerations must sit in the constraint's tangent space.
  RobotState st = zero_state;
  random_constrained_velocity(dq0, rng, 0.5, &st.v_b, &st.sdot);
  const Vec u = rng.vec(model.n_joints(), 10.0);
  const ForwardDynamicsResult fd = forward_dynamics_constrained(model, dq0, st, u, &refs);
  const Vec res = contact_constraint_residual(dq0, fd.nudot);
  CHECK(res.lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("momentum equals the momentum map on constrained velocities") {
  const RobotModel model = load_model(model_file("biped.json"));
  TestRng rng(313);
  const RobotState zero_state = RobotState::zero(model);
  const DynamicsQuantities dq0 = compute_dynamics(model, zero_state);
  for (int trial = 0; trial < 5; ++trial) {
    RobotState st = zero_state;
    random_constrained_velocity(dq0, rng, 0.8, &st.v_b, &st.sdot);
    const DynamicsQuantities dq = compute_dynamics(model, st);
    const Vec6 via_map = dq.Jg * st.sdot;
    CHECK((dq.H - via_map).norm() < 1e-8 * std::max(1.0, dq.H.norm()));
  }
}

TEST_CASE("over-constrained contact layout fails loudly") {
  // Five joints cannot satisfy twelve independent weld rows: the constraint
  // Gram matrix is singular and the solve must say so instead of returning
  // garbage.
  const RobotModel model = load_model(fixture("biped_5link.json"));
  RobotState st = RobotState::zero(model);
  CHECK_THROWS_AS(
      forward_dynamics_constrained(model, st, Vec::Zero(model.n_joints()), nullptr),
      SolverError);
}
