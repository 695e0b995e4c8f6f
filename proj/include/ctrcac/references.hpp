#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <variant>

namespace ctrcac {

using Eigen::Vector2d;
using Eigen::Vector3d;

/// Constant setpoint applied from t = 0. Its rate is taken as zero; the step
/// discontinuity is never differentiated.
struct StepReference {
    double amplitude = 1.0;

    double value(double) const { return amplitude; }
    double rate(double) const { return 0.0; }
};

/// Inclined elliptical position trajectory
///   r1(t) = a cos(incline) - a cos(incline) cos(wt) - b sin(incline) sin(wt)
///   r2(t) = a sin(incline) - a sin(incline) cos(wt) + b cos(incline) sin(wt)
/// starting at the origin with semi-axes a, b.
struct EllipseReference {
    double semi_major = 5.0;
    double semi_minor = 3.0;
    double incline = M_PI / 4.0; // rad
    double omega = 0.1;          // rad/s

    Vector2d position(double t) const;
    Vector2d velocity(double t) const;
};

/// Constant attitude setpoint [roll, pitch, yaw] in radians.
struct AttitudeReference {
    Vector3d angles = Vector3d::Zero();
};

using Reference = std::variant<StepReference, EllipseReference, AttitudeReference>;

} // namespace ctrcac
