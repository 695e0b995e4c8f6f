#include "ctrcac/plants.hpp"

#include <cmath>

namespace ctrcac {

Eigen::Matrix<double, 6, 1> Bicopter::derivative(const Eigen::Matrix<double, 6, 1>& x,
                                                 double force, double moment) const {
    const double roll = x(2);
    Eigen::Matrix<double, 6, 1> d;
    d.head<3>() = x.tail<3>();
    d(3) = -force * std::sin(roll) / mass;
    d(4) = (force * std::cos(roll) - mass * gravity) / mass;
    d(5) = moment / inertia;
    return d;
}

void Bicopter::validate() const {
    if (!(mass > 0.0)) throw ConfigError("bicopter mass must be positive");
    if (!(inertia > 0.0)) throw ConfigError("bicopter inertia must be positive");
}

Matrix3d euler321_kinematics(const Vector3d& angles, double guard) {
    const double roll = angles(0);
    const double pitch = angles(1);
    if (std::abs(pitch) >= M_PI / 2.0 - guard) {
        throw SingularityError("pitch within guard band of +-pi/2");
    }
    const double sr = std::sin(roll), cr = std::cos(roll);
    const double tp = std::tan(pitch), cp = std::cos(pitch);
    Matrix3d s;
    s << 1.0, sr * tp, cr * tp,
         0.0, cr, -sr,
         0.0, sr / cp, cr / cp;
    return s;
}

Eigen::Matrix<double, 6, 1> RigidBody::derivative(const Eigen::Matrix<double, 6, 1>& x,
                                                  const Vector3d& torque) const {
    const Vector3d angles = x.head<3>();
    const Vector3d omega = x.tail<3>();
    const Matrix3d s = euler321_kinematics(angles, pitch_guard);

    Eigen::Matrix<double, 6, 1> d;
    d.head<3>() = s * omega;
    d.tail<3>() = inertia.ldlt().solve(torque + disturbance - omega.cross(inertia * omega));
    return d;
}

void RigidBody::validate() const {
    if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw ConfigError("inertia matrix must be symmetric");
    }
    Eigen::LLT<Matrix3d> llt(inertia);
    if (llt.info() != Eigen::Success) {
        throw ConfigError("inertia matrix must be positive definite");
    }
    if (!(torque_limit > 0.0)) throw ConfigError("torque limit must be positive");
}

double saturate(double value, double limit) {
    if (!(limit > 0.0)) throw ConfigError("saturation limit must be positive");
    return std::clamp(value, -limit, limit);
}

VectorXd saturate(const VectorXd& values, double limit) {
    if (!(limit > 0.0)) throw ConfigError("saturation limit must be positive");
    return values.cwiseMax(-limit).cwiseMin(limit);
}

int state_dim(const Plant& plant) {
    return std::visit([](const auto& p) { return static_cast<int>(p.state_dim); }, plant);
}

VectorXd initial_state(const Plant& plant) {
    return std::visit([](const auto& p) -> VectorXd { return p.initial; }, plant);
}

} // namespace ctrcac
