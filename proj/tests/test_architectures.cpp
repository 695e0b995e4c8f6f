#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ctrcac/architectures.hpp"

using namespace ctrcac;

namespace {

LoopOptions pid_loop(double p0 = 1.0, double pole = 1.0) {
    return make_siso_loop(p0, pole, PidParameterization{});
}

LoopOptions pi_loop(double p0 = 1.0, double pole = 1.0) {
    return make_siso_loop(p0, pole, PiParameterization{});
}

LoopOptions fsfi_loop(double p0 = 1.0, double pole = 1.0) {
    return make_siso_loop(p0, pole, FsfiParameterization(2));
}

} // namespace

TEST_CASE("loop packing round-trips the freshly initialized state") {
    const LoopOptions opts = make_siso_loop(2.0, 1.5, PidParameterization{});
    const AdaptiveLoop loop(opts, 3);
    VectorXd x = VectorXd::Constant(3 + loop.size(), -7.0); // poison
    loop.write_initial(x);

    const AdaptationState direct =
        init_adaptation({1, 1, 3}, opts.hp, opts.filter);
    const AdaptationState packed = loop.unpack(x);
    CHECK(packed.theta == direct.theta);
    CHECK(packed.P == direct.P);
    CHECK(packed.filter_phi == direct.filter_phi);
    CHECK(packed.filter_u == direct.filter_u);
    CHECK(packed.cost.A == direct.cost.A);
    CHECK(packed.cost.b == direct.cost.b);
    CHECK(packed.cost.c == direct.cost.c);
    CHECK(loop.regressor_state(x).isZero(0.0));
    // the slice before the loop's offset is untouched
    CHECK(x(0) == -7.0);
    CHECK(x(2) == -7.0);
}

TEST_CASE("servo: zero gains give zero control, z = y - r") {
    DoubleIntegrator plant;
    plant.initial = Vector2d(1.0, 0.0); // start on the reference
    ServoSystem sys(plant, StepReference{1.0}, pid_loop());
    const VectorXd x0 = sys.initial_state();
    const VectorXd s = sys.sample(0.0, x0);
    const auto sc = sys.schema();
    CHECK(s(sys.schema().performance[0]) == 0.0); // z
    CHECK(s(3) == 0.0);                            // u

    // off the reference: z = y - r, u still zero at theta = 0
    ServoSystem sys2(DoubleIntegrator{}, StepReference{1.0}, pid_loop());
    const VectorXd x2 = sys2.initial_state();
    const VectorXd s2 = sys2.sample(0.0, x2);
    CHECK(s2(2) == -1.0);
    CHECK(s2(3) == 0.0);
    CHECK(sc.columns[2] == "z");
}

TEST_CASE("servo rejects a cascaded structure") {
    CHECK_THROWS_AS(ServoSystem(DoubleIntegrator{}, StepReference{}, pi_loop()), ConfigError);
}

TEST_CASE("ppi block diagram arithmetic") {
    // K_p = 1, r - y = 2, y_dot = 0.5, theta = (1, 0) -> u = (2 - 0.5) + 2 = 3.5
    DoubleIntegrator plant;
    plant.initial = Vector2d(-1.0, 0.5); // r = 1 so r - y = 2
    PpiSystem sys(plant, StepReference{1.0}, pi_loop(), 1.0);
    VectorXd x = sys.initial_state();
    sys.loop().set_theta(x, Eigen::Vector2d(1.0, 0.0));
    const VectorXd s = sys.sample(0.0, x);
    CHECK(s(sys.schema().performance[0]) == -2.0); // z = y - r
    CHECK(s(3) == doctest::Approx(3.5));           // u
    CHECK(s(4) == doctest::Approx(2.0));           // v

    // at rest on the reference with zero gains only the feedforward is left
    DoubleIntegrator on_ref;
    on_ref.initial = Vector2d(1.0, 0.0);
    PpiSystem sys2(on_ref, StepReference{1.0}, pi_loop(), 1.0);
    const VectorXd s2 = sys2.sample(0.0, sys2.initial_state());
    CHECK(s2(3) == 0.0);
}

TEST_CASE("fsfi control is the regressor-gain dot product") {
    DoubleIntegrator plant;
    plant.initial = Vector2d(1.0, 0.0);
    FsfiSystem sys(plant, StepReference{1.0}, fsfi_loop());
    VectorXd x = sys.initial_state();
    sys.loop().set_theta(x, Eigen::Vector3d(0.5, -1.0, -2.0));
    sys.loop().set_regressor_state(x, VectorXd::Constant(1, 2.0)); // integral of (r - y)
    const VectorXd s = sys.sample(0.0, x);
    CHECK(s(3) == doctest::Approx(0.0)); // 0.5*2 - 1*1 - 2*0

    // all-zero signals and states
    FsfiSystem sys2(DoubleIntegrator{}, StepReference{0.0}, fsfi_loop());
    const VectorXd s2 = sys2.sample(0.0, sys2.initial_state());
    CHECK(s2(3) == 0.0);
}

TEST_CASE("bicopter allocation") {
    SUBCASE("hover with gravity feedforward") {
        const auto a = BicopterSystem::allocate(0.0, 0.0, 1.5, 9.81, true);
        CHECK(a.roll_setpoint == 0.0);
        CHECK(a.force == doctest::Approx(14.715));
    }
    SUBCASE("no horizontal demand keeps the setpoint level") {
        const auto a = BicopterSystem::allocate(0.0, 2.0, 1.5, 9.81, false);
        CHECK(a.roll_setpoint == 0.0);
        CHECK(a.force == doctest::Approx(2.0));
    }
    SUBCASE("pure horizontal demand tilts a quarter turn") {
        const auto a = BicopterSystem::allocate(-1.0, 0.0, 1.5, 9.81, false);
        CHECK(a.roll_setpoint == doctest::Approx(M_PI / 2.0));
        CHECK(a.force == doctest::Approx(1.0));
    }
    SUBCASE("zero force fixes the setpoint at zero") {
        const auto a = BicopterSystem::allocate(0.0, 0.0, 1.5, 9.81, false);
        CHECK(a.roll_setpoint == 0.0);
        CHECK(a.force == 0.0);
    }
    SUBCASE("literal formula without the feedforward") {
        const auto a = BicopterSystem::allocate(1.0, 1.0, 1.5, 9.81, false);
        CHECK(a.roll_setpoint == doctest::Approx(std::atan2(-1.0, 1.0)));
        CHECK(a.force == doctest::Approx(std::sqrt(2.0)));
    }
}

TEST_CASE("bicopter at rest on the reference is in hover trim") {
    BicopterSystem sys(Bicopter{}, EllipseReference{}, CascadeKind::pid, pid_loop(), pid_loop(),
                       pid_loop());
    const VectorXd x0 = sys.initial_state();
    const VectorXd s = sys.sample(0.0, x0);
    const auto cols = sys.schema().columns;
    auto col = [&](const std::string& name) {
        for (size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        FAIL("missing column ", name);
        return -1;
    };
    CHECK(s(col("force")) == doctest::Approx(1.5 * 9.81));
    CHECK(s(col("moment")) == doctest::Approx(0.0));
    CHECK(s(col("roll_ref")) == doctest::Approx(0.0));
    CHECK(s(col("z_r1")) == doctest::Approx(0.0));
    CHECK(s(col("z_r2")) == doctest::Approx(0.0));
}

TEST_CASE("bicopter loop structures must match the cascade kind") {
    CHECK_THROWS_AS(BicopterSystem(Bicopter{}, EllipseReference{}, CascadeKind::pid, pid_loop(),
                                   pi_loop(), pid_loop()),
                    ConfigError);
    CHECK_THROWS_AS(BicopterSystem(Bicopter{}, EllipseReference{}, CascadeKind::ppi, pi_loop(),
                                   pi_loop(), pid_loop()),
                    ConfigError);
}

TEST_CASE("outer position loops share no state") {
    // Decoupled translational test: two adaptive loops on m*r_ddot = f,
    // integrated as one block. Zeroing the r2 reference must leave the r1
    // loop's slice bit-identical.
    struct Translational : System {
        double mass = 1.5;
        EllipseReference ref;
        bool zero_r2 = false;
        AdaptiveLoop l1, l2;

        Translational(bool zero_second)
            : zero_r2(zero_second), l1(pid_loop(), 4), l2(pid_loop(), 4 + l1.size()) {}

        int state_size() const override { return 4 + l1.size() + l2.size(); }
        VectorXd initial_state() const override {
            VectorXd x = VectorXd::Zero(state_size());
            l1.write_initial(x);
            l2.write_initial(x);
            return x;
        }
        VectorXd derivative(double t, const VectorXd& x) const override {
            const Vector2d pos = ref.position(t);
            const Vector2d vel = ref.velocity(t);
            const double r1 = pos(0), r2 = zero_r2 ? 0.0 : pos(1);
            const double v1 = vel(0), v2 = zero_r2 ? 0.0 : vel(1);

            RegressorInputs in1{x(0) - r1, x(2) - v1, {}};
            RegressorInputs in2{x(1) - r2, x(3) - v2, {}};
            const auto e1 = l1.evaluate(x, in1);
            const auto e2 = l2.evaluate(x, in2);

            VectorXd dx(state_size());
            dx(0) = x(2);
            dx(1) = x(3);
            dx(2) = e1.u / mass;
            dx(3) = e2.u / mass;
            l1.derivative(x, in1, e1, in1.err, dx);
            l2.derivative(x, in2, e2, in2.err, dx);
            return dx;
        }
        void post_step(VectorXd& x) const override {
            l1.symmetrize(x);
            l2.symmetrize(x);
        }
        LogSchema schema() const override { return {{"z"}, {0}}; }
        VectorXd sample(double t, const VectorXd& x) const override {
            return VectorXd::Constant(1, x(0) - ref.position(t)(0));
        }
    };

    Translational full(false), zeroed(true);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 5.0;
    cfg.capture_states = true;
    const auto log_full = integrate(full, full.initial_state(), cfg);
    const auto log_zero = integrate(zeroed, zeroed.initial_state(), cfg);

    const int n1 = full.l1.size();
    const auto end_full = log_full.states->bottomRows(1);
    const auto end_zero = log_zero.states->bottomRows(1);
    // r1 plant states and the whole r1 loop slice agree exactly
    CHECK(end_full(0, 0) == end_zero(0, 0));
    CHECK(end_full(0, 2) == end_zero(0, 2));
    for (int i = 0; i < n1; ++i) {
        CHECK(end_full(0, 4 + i) == end_zero(0, 4 + i));
    }
    // while the r2 loop actually did something different
    CHECK(end_full(0, 1) != end_zero(0, 1));
}

TEST_CASE("attitude stack saturates the summed control before the plant") {
    RigidBody plant;
    plant.initial << 0.2, 0.0, 0.0, 0.0, 0.0, 0.0;
    AttitudeSystem sys(plant, AttitudeReference{}, AttitudeKind::fsfi,
                       {fsfi_loop(), fsfi_loop(), fsfi_loop()});
    VectorXd x = sys.initial_state();
    // gains chosen so the roll loop asks for 2.5 * 0.2 = 0.5
    sys.axis(0).set_theta(x, Eigen::Vector3d(0.0, 2.5, 0.0));
    const Vector3d tau = sys.applied_torque(0.0, x);
    CHECK(tau(0) == doctest::Approx(0.2));
    CHECK(tau(1) == 0.0);
    CHECK(tau(2) == 0.0);
}

TEST_CASE("attitude stack at the reference with zero gains applies no torque") {
    AttitudeSystem sys(RigidBody{}, AttitudeReference{}, AttitudeKind::fsfi,
                       {fsfi_loop(), fsfi_loop(), fsfi_loop()});
    const VectorXd x = sys.initial_state();
    CHECK(sys.applied_torque(0.0, x).isZero(0.0));
}

TEST_CASE("attitude stack loop structure checks") {
    CHECK_THROWS_AS(AttitudeSystem(RigidBody{}, AttitudeReference{}, AttitudeKind::fsfi,
                                   {fsfi_loop(), pi_loop(), fsfi_loop()}),
                    ConfigError);
    CHECK_THROWS_AS(AttitudeSystem(RigidBody{}, AttitudeReference{}, AttitudeKind::ppi,
                                   {pi_loop(), pi_loop(), fsfi_loop()}),
                    ConfigError);
    // per-axis state feedback must be the 2-state pair
    CHECK_THROWS_AS(AttitudeSystem(RigidBody{}, AttitudeReference{}, AttitudeKind::fsfi,
                                   {make_siso_loop(1.0, 1.0, FsfiParameterization(3)),
                                    fsfi_loop(), fsfi_loop()}),
                    ConfigError);
}

TEST_CASE("closed-loop derivative maps are pure") {
    ServoSystem servo(DoubleIntegrator{}, StepReference{}, pid_loop());
    PpiSystem ppi(DoubleIntegrator{}, StepReference{}, pi_loop());
    BicopterSystem bic(Bicopter{}, EllipseReference{}, CascadeKind::ppi, pi_loop(), pi_loop(),
                       pi_loop());
    AttitudeSystem att(RigidBody{}, AttitudeReference{}, AttitudeKind::ppi,
                       {pi_loop(), pi_loop(), pi_loop()});

    const System* systems[] = {&servo, &ppi, &bic, &att};
    for (const System* sys : systems) {
        VectorXd x = sys->initial_state();
        // perturb off the trivial point
        for (int i = 0; i < x.size(); ++i) x(i) += 1e-3 * std::sin(1.0 + i);
        const VectorXd d1 = sys->derivative(0.37, x);
        const VectorXd d2 = sys->derivative(0.37, x);
        CHECK(d1 == d2);
    }
}

TEST_CASE("short closed-loop runs stay finite and shrink the covariance") {
    ServoSystem sys(DoubleIntegrator{}, StepReference{1.0},
                    pid_loop(std::pow(10.0, -1.02), 0.6508));
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 2.0;
    cfg.capture_states = true;
    const auto log = integrate(sys, sys.initial_state(), cfg);
    CHECK_FALSE(log.diverged);

    const MatrixXd p0 = sys.loop().covariance(log.states->row(0).transpose());
    const MatrixXd p1 = sys.loop().covariance(log.states->bottomRows(1).transpose());
    CHECK(p1.trace() < p0.trace());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p1, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}
