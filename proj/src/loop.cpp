#include "ctrcac/loop.hpp"

namespace ctrcac {

namespace {
Dimensions siso_dims(int gains) { return Dimensions{1, 1, gains}; }
} // namespace

AdaptiveLoop::AdaptiveLoop(LoopOptions options, int offset)
    : opts_(std::move(options)), offset_(offset) {
    gains_ = ctrcac::gain_count(opts_.param);
    filter_order_ = opts_.filter.order();
    reg_states_ = ctrcac::state_count(opts_.param);

    // Validates dimensions, definiteness, and the filter's Hurwitz property.
    (void)init_adaptation(siso_dims(gains_), opts_.hp, opts_.filter);

    reg_off_ = offset_;
    xphi_off_ = reg_off_ + reg_states_;
    xu_off_ = xphi_off_ + filter_order_ * gains_;
    theta_off_ = xu_off_ + filter_order_;
    p_off_ = theta_off_ + gains_;
    cost_a_off_ = p_off_ + gains_ * gains_;
    cost_b_off_ = cost_a_off_ + (opts_.track_cost ? gains_ * gains_ : 0);
    cost_c_off_ = cost_b_off_ + (opts_.track_cost ? gains_ : 0);
    size_ = cost_c_off_ + (opts_.track_cost ? 1 : 0) - offset_;
}

void AdaptiveLoop::write_initial(VectorXd& x) const {
    const AdaptationState s = init_adaptation(siso_dims(gains_), opts_.hp, opts_.filter);
    x.segment(reg_off_, reg_states_).setZero();
    x.segment(xphi_off_, filter_order_ * gains_).setZero();
    x.segment(xu_off_, filter_order_).setZero();
    x.segment(theta_off_, gains_) = s.theta;
    x.segment(p_off_, gains_ * gains_) = Eigen::Map<const VectorXd>(s.P.data(), s.P.size());
    if (opts_.track_cost) {
        x.segment(cost_a_off_, gains_ * gains_) =
            Eigen::Map<const VectorXd>(s.cost.A.data(), s.cost.A.size());
        x.segment(cost_b_off_, gains_).setZero();
        x(cost_c_off_) = 0.0;
    }
}

AdaptiveLoop::Eval AdaptiveLoop::evaluate(const VectorXd& x, const RegressorInputs& in) const {
    Eval ev;
    ev.phi = build_regressor(opts_.param, x.segment(reg_off_, reg_states_), in);
    ev.u = ev.phi * x.segment(theta_off_, gains_);
    return ev;
}

void AdaptiveLoop::derivative(const VectorXd& x, const RegressorInputs& in, const Eval& ev,
                              double z, VectorXd& dx) const {
    const AdaptationState s = unpack(x);
    const VectorXd z_vec = VectorXd::Constant(1, z);
    const MatrixXd phi = ev.phi;

    const RetrospectiveQuantities rq = retrospective_quantities(opts_.filter, s, phi, z_vec);
    const AdaptationDerivative ad =
        adaptation_derivative(s, z_vec, phi, rq.phi_f, rq.u_f, opts_.hp);

    dx.segment(reg_off_, reg_states_) =
        regressor_state_derivative(opts_.param, x.segment(reg_off_, reg_states_), in, ev.u);

    const FilterDerivative fphi = filter_derivative(opts_.filter, s.filter_phi, phi);
    const FilterDerivative fu =
        filter_derivative(opts_.filter, s.filter_u, VectorXd::Constant(1, ev.u));
    dx.segment(xphi_off_, filter_order_ * gains_) =
        Eigen::Map<const VectorXd>(fphi.state_dot.data(), fphi.state_dot.size());
    dx.segment(xu_off_, filter_order_) = fu.state_dot;

    dx.segment(theta_off_, gains_) = ad.theta_dot;
    dx.segment(p_off_, gains_ * gains_) =
        Eigen::Map<const VectorXd>(ad.P_dot.data(), ad.P_dot.size());

    if (opts_.track_cost) {
        const AccumulatorDerivative cd =
            accumulator_derivative(z_vec, phi, rq.phi_f, rq.u_f, opts_.hp);
        dx.segment(cost_a_off_, gains_ * gains_) =
            Eigen::Map<const VectorXd>(cd.A_dot.data(), cd.A_dot.size());
        dx.segment(cost_b_off_, gains_) = cd.b_dot;
        dx(cost_c_off_) = cd.c_dot;
    }
}

void AdaptiveLoop::symmetrize(VectorXd& x) const {
    Eigen::Map<MatrixXd> p(x.data() + p_off_, gains_, gains_);
    p = (0.5 * (p + p.transpose())).eval();
}

VectorXd AdaptiveLoop::theta(const VectorXd& x) const { return x.segment(theta_off_, gains_); }

MatrixXd AdaptiveLoop::covariance(const VectorXd& x) const {
    return Eigen::Map<const MatrixXd>(x.data() + p_off_, gains_, gains_);
}

VectorXd AdaptiveLoop::regressor_state(const VectorXd& x) const {
    return x.segment(reg_off_, reg_states_);
}

CostAccumulators AdaptiveLoop::accumulators(const VectorXd& x) const {
    if (!opts_.track_cost) throw ConfigError("loop does not track cost accumulators");
    CostAccumulators c;
    c.A = Eigen::Map<const MatrixXd>(x.data() + cost_a_off_, gains_, gains_);
    c.b = x.segment(cost_b_off_, gains_);
    c.c = x(cost_c_off_);
    return c;
}

void AdaptiveLoop::set_theta(VectorXd& x, const VectorXd& theta) const {
    if (theta.size() != gains_) throw ConfigError("gain vector size mismatch");
    x.segment(theta_off_, gains_) = theta;
}

void AdaptiveLoop::set_regressor_state(VectorXd& x, const VectorXd& rstate) const {
    if (rstate.size() != reg_states_) throw ConfigError("regressor state size mismatch");
    x.segment(reg_off_, reg_states_) = rstate;
}

AdaptationState AdaptiveLoop::unpack(const VectorXd& x) const {
    AdaptationState s;
    s.theta = x.segment(theta_off_, gains_);
    s.P = Eigen::Map<const MatrixXd>(x.data() + p_off_, gains_, gains_);
    s.filter_phi = Eigen::Map<const MatrixXd>(x.data() + xphi_off_, filter_order_, gains_);
    s.filter_u = x.segment(xu_off_, filter_order_);
    if (opts_.track_cost) s.cost = accumulators(x);
    return s;
}

} // namespace ctrcac
