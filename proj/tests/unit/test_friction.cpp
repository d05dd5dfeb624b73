#include <doctest.h>

#include <cmath>

#include "frictorq/friction.hpp"
#include "frictorq/linalg.hpp"
#include "test_helpers.hpp"

using namespace frictorq;
using namespace frictorq::testing;

namespace {

Actuation diag_actuation(int n, double gamma, double im, double kv, double kc,
                         double epsilon = 1e-4) {
  Actuation act;
  act.gamma = Mat::Identity(n, n) * gamma;
  act.im = Mat::Identity(n, n) * im;
  act.kv = Mat::Identity(n, n) * kv;
  act.kc = Mat::Identity(n, n) * kc;
  act.epsilon = epsilon;
  return act;
}

}  // namespace

TEST_CASE("friction matrix at standstill: kv + kc / epsilon") {
  const Actuation act = diag_actuation(1, 1.0, 0.0, 0.1, 0.05, 1e-4);
  const Mat kf = friction_matrix(act, Vec::Zero(1));
  CHECK(kf(0, 0) == doctest::Approx(500.1).epsilon(1e-12));
}

TEST_CASE("friction matrix at speed: kv + kc / (|thetadot| + eps)") {
  Actuation act = diag_actuation(2, 1.0, 0.0, 0.1, 0.05, 1e-4);
  Vec sdot(2);
  sdot << 0.5, -0.5;
  const Mat kf = friction_matrix(act, sdot);
  // 0.1 + 0.05 / 0.5001 = 0.19998...
  CHECK(kf(0, 0) == doctest::Approx(0.1 + 0.05 / 0.5001).epsilon(1e-12));
  CHECK(kf(1, 1) == kf(0, 0));  // even in the velocity
  CHECK(kf(0, 1) == 0.0);
  CHECK(kf(1, 0) == 0.0);
}

TEST_CASE("friction matrix is even in the velocity") {
  TestRng rng(401);
  const RobotModel model = load_model(model_file("arm_4dof.json"));
  const Vec sdot = rng.vec(4, 2.0);
  const Mat a = friction_matrix(model.actuation, sdot);
  const Mat b = friction_matrix(model.actuation, -sdot);
  CHECK(max_abs(a - b) < 1e-15);
}

TEST_CASE("friction times motor velocity reproduces viscous plus Coulomb torque") {
  TestRng rng(402);
  const RobotModel model = load_model(model_file("arm_4dof.json"));
  const Actuation& act = model.actuation;
  for (int trial = 0; trial < 5; ++trial) {
    const Vec sdot = rng.vec(4, 1.5);
    const Vec thetadot = act.gamma.inverse() * sdot;
    const Vec via_matrix = friction_matrix(act, sdot) * thetadot;
    Vec direct(4);
    for (int i = 0; i < 4; ++i) {
      direct(i) = act.kv(i, i) * thetadot(i) +
                  act.kc(i, i) * thetadot(i) / (std::abs(thetadot(i)) + act.epsilon);
    }
    CHECK((via_matrix - direct).norm() < 1e-13);
  }
}

TEST_CASE("gear amplification: gamma = 0.01 turns kv = 0.1 into 1000 joint side") {
  const Actuation act = diag_actuation(3, 0.01, 0.0, 0.1, 0.0);
  const Mat kf = friction_matrix(act, Vec::Zero(3));
  const Mat kf_bar = coupled_friction(act, kf);
  CHECK(max_abs(kf_bar - 1000.0 * Mat::Identity(3, 3)) < 1e-9);
}

TEST_CASE("reflected inertia: im = 1e-5 through gear 100 gives 0.1") {
  const Actuation act = diag_actuation(2, 0.01, 1e-5, 0.0, 0.0);
  const Mat ir = reflected_inertia(act);
  CHECK(max_abs(ir - 0.1 * Mat::Identity(2, 2)) < 1e-12);
}

TEST_CASE("reflected inertia tames an ill-conditioned mass matrix") {
  Mat m_s(2, 2);
  m_s << 1.0, 0.0, 0.0, 1e-4;
  const Actuation act = diag_actuation(2, 0.01, 1e-7, 0.0, 0.0);
  const double before = condition_number(m_s);
  const double after = condition_number(mbar_s(m_s, act));
  CHECK(before == doctest::Approx(1e4).epsilon(1e-12));
  // Adding 1e-3 to both diagonals: (1 + 1e-3) / (1e-4 + 1e-3) ~ 910.
  CHECK(after == doctest::Approx((1.0 + 1e-3) / (1.1e-3)).epsilon(1e-9));
  CHECK(after < before / 10.0);
}

TEST_CASE("no Coulomb term collapses the matrix to pure viscous") {
  Actuation act = diag_actuation(3, 0.02, 0.0, 0.3, 0.0);
  TestRng rng(403);
  const Vec sdot = rng.vec(3, 1.0);
  const Mat kf = friction_matrix(act, sdot);
  CHECK(max_abs(kf - act.kv) < 1e-15);
}

TEST_CASE("joint-side friction is symmetric positive definite") {
  TestRng rng(404);
  for (int trial = 0; trial < 5; ++trial) {
    Actuation act;
    const int n = 4;
    // Non-diagonal invertible coupling.
    act.gamma = Mat::Identity(n, n) * 0.02 + rng.mat(n, n, 0.002);
    act.im = Mat::Identity(n, n) * 1e-5;
    act.kv = Mat::Zero(n, n);
    act.kc = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      act.kv(i, i) = 0.05 + 0.1 * rng.u01();
      act.kc(i, i) = 0.02 + 0.05 * rng.u01();
    }
    act.epsilon = 1e-4;
    const Vec sdot = rng.vec(n, 1.0);

    const FrictionQuantities fq = friction_quantities(act, sdot);
    CHECK(max_abs(fq.kf_bar - fq.kf_bar.transpose()) == 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(fq.kf_bar, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) > 0.0);

    CHECK(rel_err(fq.kf, oracle_kf(act, sdot)) < 1e-13);
    CHECK(rel_err(fq.kf_bar, oracle_kf_bar(act, sdot)) < 1e-12);
  }
}

TEST_CASE("friction power is never negative") {
  // sdot' Kf_bar(sdot) sdot >= 0: the friction load can only dissipate.
  TestRng rng(405);
  const RobotModel model = load_model(model_file("biped.json"));
  for (int trial = 0; trial < 20; ++trial) {
    const Vec sdot = rng.vec(model.n_joints(), 3.0);
    const Mat kf_bar = friction_quantities(model.actuation, sdot).kf_bar;
    CHECK(sdot.dot(kf_bar * sdot) >= 0.0);
  }
}

TEST_CASE("mbar_s matches the definition on shipped models") {
  TestRng rng(406);
  for (const char* name : {"pendulum_2dof.json", "arm_4dof.json", "biped.json"}) {
    const RobotModel model = load_model(model_file(name));
    RobotState st = RobotState::zero(model);
    st.s = rng.vec(model.n_joints(), 0.3);
    const Mat m_s = compute_dynamics(model, st).M_s;
    CHECK(rel_err(mbar_s(m_s, model.actuation), oracle_mbar(m_s, model.actuation)) < 1e-12);
  }
}
