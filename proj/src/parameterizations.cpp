#include "ctrcac/parameterizations.hpp"

namespace ctrcac {

RowVectorXd tf_regressor(const VectorXd& u_integrals, const VectorXd& z_integrals) {
    const int n = static_cast<int>(u_integrals.size());
    if (n < 1) throw ConfigError("transfer-function order must be at least 1");
    if (z_integrals.size() != n) {
        throw ConfigError("integral chains must have equal order");
    }
    RowVectorXd phi(2 * n);
    phi.head(n) = -u_integrals.transpose();
    phi.tail(n) = z_integrals.transpose();
    return phi;
}

RowVectorXd pid_regressor(double z, double z_integral, double z_rate) {
    RowVectorXd phi(3);
    phi << z, z_integral, z_rate;
    return phi;
}

RowVectorXd pi_regressor(double e, double e_integral) {
    RowVectorXd phi(2);
    phi << e, e_integral;
    return phi;
}

RowVectorXd fsfi_regressor(double z_integral, const VectorXd& state) {
    RowVectorXd phi(1 + state.size());
    phi(0) = z_integral;
    phi.tail(state.size()) = state.transpose();
    return phi;
}

TfParameterization::TfParameterization(int order) : order_(order) {
    if (order < 1) throw ConfigError("transfer-function order must be at least 1");
}

RowVectorXd TfParameterization::regressor(const VectorXd& rstate, const RegressorInputs&) const {
    return tf_regressor(rstate.head(order_), rstate.tail(order_));
}

VectorXd TfParameterization::state_derivative(const VectorXd& rstate, const RegressorInputs& in,
                                              double u) const {
    VectorXd d(2 * order_);
    d(0) = u;
    for (int j = 1; j < order_; ++j) d(j) = rstate(j - 1);
    d(order_) = in.err;
    for (int j = 1; j < order_; ++j) d(order_ + j) = rstate(order_ + j - 1);
    return d;
}

PidParameterization::PidParameterization(RateSource source, double filter_epsilon)
    : source_(source), eps_(filter_epsilon) {
    if (source == RateSource::filtered_derivative && !(eps_ > 0.0)) {
        throw ConfigError("derivative filter time constant must be positive");
    }
}

RowVectorXd PidParameterization::regressor(const VectorXd& rstate,
                                           const RegressorInputs& in) const {
    const double rate = source_ == RateSource::measured_rate
                            ? in.err_rate
                            : (in.err - rstate(1)) / eps_;
    return pid_regressor(in.err, rstate(0), rate);
}

VectorXd PidParameterization::state_derivative(const VectorXd& rstate, const RegressorInputs& in,
                                               double) const {
    VectorXd d(state_count());
    d(0) = in.err;
    if (source_ == RateSource::filtered_derivative) d(1) = (in.err - rstate(1)) / eps_;
    return d;
}

RowVectorXd PiParameterization::regressor(const VectorXd& rstate,
                                          const RegressorInputs& in) const {
    return pi_regressor(in.err, rstate(0));
}

VectorXd PiParameterization::state_derivative(const VectorXd&, const RegressorInputs& in,
                                              double) const {
    VectorXd d(1);
    d(0) = in.err;
    return d;
}

FsfiParameterization::FsfiParameterization(int plant_state_dim) : plant_dim_(plant_state_dim) {
    if (plant_state_dim < 1) throw ConfigError("state-feedback structure needs a plant state");
}

RowVectorXd FsfiParameterization::regressor(const VectorXd& rstate,
                                            const RegressorInputs& in) const {
    if (in.full_state.size() != plant_dim_) {
        throw ConfigError("plant does not expose the full state required by this structure");
    }
    return fsfi_regressor(rstate(0), in.full_state);
}

VectorXd FsfiParameterization::state_derivative(const VectorXd&, const RegressorInputs& in,
                                                double) const {
    VectorXd d(1);
    d(0) = in.err;
    return d;
}

int gain_count(const Parameterization& p) {
    return std::visit([](const auto& v) { return v.gain_count(); }, p);
}

int state_count(const Parameterization& p) {
    return std::visit([](const auto& v) { return v.state_count(); }, p);
}

RowVectorXd build_regressor(const Parameterization& p, const VectorXd& rstate,
                            const RegressorInputs& in) {
    return std::visit([&](const auto& v) { return v.regressor(rstate, in); }, p);
}

VectorXd regressor_state_derivative(const Parameterization& p, const VectorXd& rstate,
                                    const RegressorInputs& in, double u) {
    return std::visit([&](const auto& v) { return v.state_derivative(rstate, in, u); }, p);
}

} // namespace ctrcac
