#pragma once

#include <array>
#include <memory>

#include "ctrcac/loop.hpp"
#include "ctrcac/plants.hpp"
#include "ctrcac/references.hpp"
#include "ctrcac/sim.hpp"

namespace ctrcac {

/// Convenience builder for the common SISO loop: scalar weights, first-order
/// adaptation filter 1/(s + pole).
LoopOptions make_siso_loop(double p0, double filter_pole, Parameterization param,
                           double rz = 1.0, double ru = 0.0, bool track_cost = true);

/// Basic servo loop: u = Phi theta with a transfer-function or PID regressor
/// driven by the tracking error z = y - r.
class ServoSystem : public System {
public:
    ServoSystem(DoubleIntegrator plant, StepReference ref, LoopOptions loop);

    int state_size() const override;
    VectorXd initial_state() const override;
    VectorXd derivative(double t, const VectorXd& x) const override;
    void post_step(VectorXd& x) const override;
    LogSchema schema() const override;
    VectorXd sample(double t, const VectorXd& x) const override;

    const AdaptiveLoop& loop() const { return loop_; }

private:
    DoubleIntegrator plant_;
    StepReference ref_;
    AdaptiveLoop loop_;
};

/// Modified cascaded PPI: a fixed outer proportional gain produces a rate
/// command v = K_p (r - y) that both feeds the inner adaptive PI loop through
/// e = v - y_dot and sums directly into the plant input.
class PpiSystem : public System {
public:
    PpiSystem(DoubleIntegrator plant, StepReference ref, LoopOptions loop,
              double outer_gain = 1.0);

    int state_size() const override;
    VectorXd initial_state() const override;
    VectorXd derivative(double t, const VectorXd& x) const override;
    void post_step(VectorXd& x) const override;
    LogSchema schema() const override;
    VectorXd sample(double t, const VectorXd& x) const override;

    const AdaptiveLoop& loop() const { return loop_; }
    double outer_gain() const { return outer_gain_; }

private:
    struct Signals;
    Signals compute(double t, const VectorXd& x) const;

    DoubleIntegrator plant_;
    StepReference ref_;
    AdaptiveLoop loop_;
    double outer_gain_;
};

/// Full state feedback with integral action: u = Phi theta with
/// Phi = [integral of (r - y), x'].
class FsfiSystem : public System {
public:
    FsfiSystem(DoubleIntegrator plant, StepReference ref, LoopOptions loop);

    int state_size() const override;
    VectorXd initial_state() const override;
    VectorXd derivative(double t, const VectorXd& x) const override;
    void post_step(VectorXd& x) const override;
    LogSchema schema() const override;
    VectorXd sample(double t, const VectorXd& x) const override;

    const AdaptiveLoop& loop() const { return loop_; }

private:
    DoubleIntegrator plant_;
    StepReference ref_;
    AdaptiveLoop loop_;
};

enum class CascadeKind { pid, ppi };

struct BicopterOptions {
    bool gravity_feedforward = true;
    double outer_gain = 1.0; ///< used by the ppi cascade
};

/// Two-level bicopter autopilot: decoupled horizontal/vertical position loops
/// whose force demands are allocated into a roll setpoint and a total force,
/// plus an inner roll loop producing the moment. All three loops adapt.
class BicopterSystem : public System {
public:
    using Options = BicopterOptions;

    struct Allocation {
        double roll_setpoint = 0.0;
        double force = 0.0;
    };

    /// Force-demand allocation. With the feedforward enabled the vertical
    /// demand is offset by the weight so hover maps to zero roll.
    static Allocation allocate(double f_r1, double f_r2, double mass, double gravity,
                               bool gravity_feedforward);

    BicopterSystem(Bicopter plant, EllipseReference ref, CascadeKind kind, LoopOptions outer_r1,
                   LoopOptions outer_r2, LoopOptions inner, BicopterOptions options = BicopterOptions());

    int state_size() const override;
    VectorXd initial_state() const override;
    VectorXd derivative(double t, const VectorXd& x) const override;
    void post_step(VectorXd& x) const override;
    LogSchema schema() const override;
    VectorXd sample(double t, const VectorXd& x) const override;

    const AdaptiveLoop& outer_r1() const { return r1_; }
    const AdaptiveLoop& outer_r2() const { return r2_; }
    const AdaptiveLoop& inner() const { return inner_; }
    const Bicopter& plant() const { return plant_; }

private:
    struct Signals;
    Signals compute(double t, const VectorXd& x) const;

    Bicopter plant_;
    EllipseReference ref_;
    CascadeKind kind_;
    Options options_;
    AdaptiveLoop r1_;
    AdaptiveLoop r2_;
    AdaptiveLoop inner_;
};

enum class AttitudeKind { fsfi, ppi };

/// Three independent per-axis loops on the 3-2-1 Euler angles of a rigid body.
/// Each axis sees (angle_i, omega_i) as its decoupled measurements; the summed
/// control is saturated componentwise before entering the plant.
class AttitudeSystem : public System {
public:
    AttitudeSystem(RigidBody plant, AttitudeReference ref, AttitudeKind kind,
                   std::array<LoopOptions, 3> loops, double outer_gain = 1.0);

    int state_size() const override;
    VectorXd initial_state() const override;
    VectorXd derivative(double t, const VectorXd& x) const override;
    void post_step(VectorXd& x) const override;
    LogSchema schema() const override;
    VectorXd sample(double t, const VectorXd& x) const override;

    /// Saturated torque entering the plant; exposed for probing and logging.
    Vector3d applied_torque(double t, const VectorXd& x) const;

    const AdaptiveLoop& axis(int i) const { return loops_[static_cast<size_t>(i)]; }
    const RigidBody& plant() const { return plant_; }

private:
    struct Signals;
    Signals compute(double t, const VectorXd& x) const;

    RigidBody plant_;
    AttitudeReference ref_;
    AttitudeKind kind_;
    double outer_gain_;
    std::vector<AdaptiveLoop> loops_;
};

} // namespace ctrcac
