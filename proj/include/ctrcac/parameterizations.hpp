#pragma once

#include <Eigen/Dense>
#include <variant>

#include "ctrcac/errors.hpp"

namespace ctrcac {

using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Signals a regressor may tap. `err` is the loop's tracking error, `err_rate`
/// its measured rate of change, `full_state` the plant state seen by
/// state-feedback structures. Unused fields stay at their defaults.
struct RegressorInputs {
    double err = 0.0;
    double err_rate = 0.0;
    VectorXd full_state;
};

/// Regressor row of an n-th order SISO transfer function controller:
/// [-Iu_1 ... -Iu_n, Iz_1 ... Iz_n] where Iu_j / Iz_j are the j-fold running
/// integrals of the control and of the error. Gain layout is
/// [a_{n-1} ... a_0, b_{n-1} ... b_0].
RowVectorXd tf_regressor(const VectorXd& u_integrals, const VectorXd& z_integrals);

/// PID regressor row [z, integral of z, z_rate]; gains [k_p, k_i, k_d].
RowVectorXd pid_regressor(double z, double z_integral, double z_rate);

/// PI regressor row [e, integral of e]; gains [k_p, k_i].
RowVectorXd pi_regressor(double e, double e_integral);

/// Full-state-feedback-with-integrator row [integral of (r - y), x'];
/// gains [K_gamma, K_x components].
RowVectorXd fsfi_regressor(double z_integral, const VectorXd& state);

/// n-th order transfer-function controller. Internal states are the two
/// repeated-integral chains, packed [Iu_1..Iu_n, Iz_1..Iz_n] with
/// d/dt Iu_1 = u, d/dt Iu_j = Iu_{j-1} (same for the error chain).
class TfParameterization {
public:
    explicit TfParameterization(int order);

    int order() const { return order_; }
    int gain_count() const { return 2 * order_; }
    int state_count() const { return 2 * order_; }
    RowVectorXd regressor(const VectorXd& rstate, const RegressorInputs& in) const;
    VectorXd state_derivative(const VectorXd& rstate, const RegressorInputs& in, double u) const;

private:
    int order_;
};

/// PID controller. One integrator state; the derivative term comes from a
/// measured rate or from a first-order filtered differentiator s/(eps s + 1).
class PidParameterization {
public:
    enum class RateSource { measured_rate, filtered_derivative };

    explicit PidParameterization(RateSource source = RateSource::measured_rate,
                                 double filter_epsilon = 0.01);

    RateSource rate_source() const { return source_; }
    int gain_count() const { return 3; }
    int state_count() const { return source_ == RateSource::measured_rate ? 1 : 2; }
    RowVectorXd regressor(const VectorXd& rstate, const RegressorInputs& in) const;
    VectorXd state_derivative(const VectorXd& rstate, const RegressorInputs& in, double u) const;

private:
    RateSource source_;
    double eps_;
};

/// Inner-loop PI controller of the cascaded architecture. One integrator on
/// the inner error.
class PiParameterization {
public:
    int gain_count() const { return 2; }
    int state_count() const { return 1; }
    RowVectorXd regressor(const VectorXd& rstate, const RegressorInputs& in) const;
    VectorXd state_derivative(const VectorXd& rstate, const RegressorInputs& in, double u) const;
};

/// Full state feedback with an outer integrator on the tracking error.
/// `err` must carry r - y (the integrator input).
class FsfiParameterization {
public:
    explicit FsfiParameterization(int plant_state_dim);

    int gain_count() const { return 1 + plant_dim_; }
    int state_count() const { return 1; }
    RowVectorXd regressor(const VectorXd& rstate, const RegressorInputs& in) const;
    VectorXd state_derivative(const VectorXd& rstate, const RegressorInputs& in, double u) const;

private:
    int plant_dim_;
};

using Parameterization =
    std::variant<TfParameterization, PidParameterization, PiParameterization,
                 FsfiParameterization>;

int gain_count(const Parameterization& p);
int state_count(const Parameterization& p);
RowVectorXd build_regressor(const Parameterization& p, const VectorXd& rstate,
                            const RegressorInputs& in);
VectorXd regressor_state_derivative(const Parameterization& p, const VectorXd& rstate,
                                    const RegressorInputs& in, double u);

} // namespace ctrcac
