#pragma once

#include <Eigen/Dense>
#include <optional>
#include <variant>

#include "ctrcac/errors.hpp"

namespace ctrcac {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

/// q_ddot = u, y = q. State [q, q_dot].
struct DoubleIntegrator {
    Vector2d initial = Vector2d::Zero();

    static constexpr int state_dim = 2;
    Vector2d derivative(const Vector2d& x, double u) const { return {x(1), u}; }
    double output(const Vector2d& x) const { return x(0); }
    double rate(const Vector2d& x) const { return x(1); }
};

/// Planar bicopter: horizontal/vertical position and roll driven by a total
/// force along the body axis and a moment about the roll axis.
/// State [r1, r2, roll, r1_dot, r2_dot, roll_rate].
struct Bicopter {
    double mass = 1.5;
    double inertia = 0.03;
    double gravity = 9.81;
    Eigen::Matrix<double, 6, 1> initial = Eigen::Matrix<double, 6, 1>::Zero();
    std::optional<double> force_limit;
    std::optional<double> moment_limit;

    static constexpr int state_dim = 6;
    Eigen::Matrix<double, 6, 1> derivative(const Eigen::Matrix<double, 6, 1>& x, double force,
                                           double moment) const;
    void validate() const;
};

/// Standard 3-2-1 kinematic matrix mapping body rates to Euler-angle rates.
/// Throws SingularityError when the pitch is within `guard` of +-pi/2.
Matrix3d euler321_kinematics(const Vector3d& angles, double guard = 1e-3);

/// Rigid body with 3-2-1 Euler kinematics and a constant disturbance torque.
/// State [roll, pitch, yaw, omega_x, omega_y, omega_z].
struct RigidBody {
    Matrix3d inertia = Vector3d(0.02, 0.02, 0.035).asDiagonal();
    Vector3d disturbance = Vector3d(0.05, 0.05, 0.0);
    double torque_limit = 0.2;
    double pitch_guard = 1e-3;
    Eigen::Matrix<double, 6, 1> initial = Eigen::Matrix<double, 6, 1>::Zero();

    static constexpr int state_dim = 6;
    Eigen::Matrix<double, 6, 1> derivative(const Eigen::Matrix<double, 6, 1>& x,
                                           const Vector3d& torque) const;
    void validate() const;
};

/// Componentwise clamp to [-limit, limit].
double saturate(double value, double limit);
VectorXd saturate(const VectorXd& values, double limit);

using Plant = std::variant<DoubleIntegrator, Bicopter, RigidBody>;

int state_dim(const Plant& plant);
VectorXd initial_state(const Plant& plant);

} // namespace ctrcac
