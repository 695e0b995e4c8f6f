#include "ctrcac/architectures.hpp"

#include <cmath>

namespace ctrcac {

namespace {

void append_theta_names(std::vector<std::string>& cols, const std::string& tag, int gains) {
    for (int i = 0; i < gains; ++i) cols.push_back("theta_" + tag + std::to_string(i));
}

void append_cov_names(std::vector<std::string>& cols, const std::string& tag) {
    cols.push_back("P_trace" + tag);
    cols.push_back("P_mineig" + tag);
}

void append_loop_sample(const AdaptiveLoop& loop, const VectorXd& x, VectorXd& out, int& k) {
    const VectorXd th = loop.theta(x);
    for (int i = 0; i < th.size(); ++i) out(k++) = th(i);
    const MatrixXd p = loop.covariance(x);
    out(k++) = p.trace();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p, Eigen::EigenvaluesOnly);
    out(k++) = es.eigenvalues().minCoeff();
}

} // namespace

LoopOptions make_siso_loop(double p0, double filter_pole, Parameterization param, double rz,
                           double ru, bool track_cost) {
    const Dimensions dims{1, 1, ctrcac::gain_count(param)};
    LoopOptions opts{Hyperparameters::scalar(p0, dims, rz, ru),
                     FilterRealization::first_order(filter_pole, Dimensions{1, 1, 1}),
                     std::move(param), track_cost};
    return opts;
}

// ---------------------------------------------------------------------------
// ServoSystem

ServoSystem::ServoSystem(DoubleIntegrator plant, StepReference ref, LoopOptions loop)
    : plant_(plant), ref_(ref), loop_(std::move(loop), DoubleIntegrator::state_dim) {
    if (!std::holds_alternative<TfParameterization>(loop_.parameterization()) &&
        !std::holds_alternative<PidParameterization>(loop_.parameterization())) {
        throw ConfigError("servo loop takes a transfer-function or PID structure");
    }
}

int ServoSystem::state_size() const { return DoubleIntegrator::state_dim + loop_.size(); }

VectorXd ServoSystem::initial_state() const {
    VectorXd x = VectorXd::Zero(state_size());
    x.head<2>() = plant_.initial;
    loop_.write_initial(x);
    return x;
}

VectorXd ServoSystem::derivative(double t, const VectorXd& x) const {
    const Vector2d xp = x.head<2>();
    const double z = plant_.output(xp) - ref_.value(t);
    RegressorInputs in;
    in.err = z;
    in.err_rate = plant_.rate(xp) - ref_.rate(t);
    const AdaptiveLoop::Eval ev = loop_.evaluate(x, in);

    VectorXd dx(state_size());
    dx.head<2>() = plant_.derivative(xp, ev.u);
    loop_.derivative(x, in, ev, z, dx);
    return dx;
}

void ServoSystem::post_step(VectorXd& x) const { loop_.symmetrize(x); }

LogSchema ServoSystem::schema() const {
    LogSchema s;
    s.columns = {"r", "y", "z", "u"};
    append_theta_names(s.columns, "", loop_.gain_count());
    append_cov_names(s.columns, "");
    s.columns.push_back("q");
    s.columns.push_back("q_dot");
    s.performance = {2};
    return s;
}

VectorXd ServoSystem::sample(double t, const VectorXd& x) const {
    const Vector2d xp = x.head<2>();
    const double r = ref_.value(t);
    const double y = plant_.output(xp);
    RegressorInputs in;
    in.err = y - r;
    in.err_rate = plant_.rate(xp) - ref_.rate(t);
    const AdaptiveLoop::Eval ev = loop_.evaluate(x, in);

    VectorXd out(4 + loop_.gain_count() + 2 + 2);
    int k = 0;
    out(k++) = r;
    out(k++) = y;
    out(k++) = y - r;
    out(k++) = ev.u;
    append_loop_sample(loop_, x, out, k);
    out(k++) = xp(0);
    out(k++) = xp(1);
    return out;
}

// ---------------------------------------------------------------------------
// PpiSystem

struct PpiSystem::Signals {
    double r, y, y_dot, z, v, e, u;
    AdaptiveLoop::Eval ev;
    RegressorInputs in;
};

PpiSystem::PpiSystem(DoubleIntegrator plant, StepReference ref, LoopOptions loop,
                     double outer_gain)
    : plant_(plant), ref_(ref), loop_(std::move(loop), DoubleIntegrator::state_dim),
      outer_gain_(outer_gain) {
    if (!std::holds_alternative<PiParameterization>(loop_.parameterization())) {
        throw ConfigError("the cascaded architecture takes a PI inner structure");
    }
    if (!(outer_gain_ > 0.0)) throw ConfigError("outer proportional gain must be positive");
}

PpiSystem::Signals PpiSystem::compute(double t, const VectorXd& x) const {
    Signals s;
    const Vector2d xp = x.head<2>();
    s.r = ref_.value(t);
    s.y = plant_.output(xp);
    s.y_dot = plant_.rate(xp);
    s.z = s.y - s.r;
    s.v = outer_gain_ * (s.r - s.y);
    s.e = s.v - s.y_dot;
    s.in.err = s.e;
    s.ev = loop_.evaluate(x, s.in);
    s.u = s.ev.u + s.v;
    return s;
}

int PpiSystem::state_size() const { return DoubleIntegrator::state_dim + loop_.size(); }

VectorXd PpiSystem::initial_state() const {
    VectorXd x = VectorXd::Zero(state_size());
    x.head<2>() = plant_.initial;
    loop_.write_initial(x);
    return x;
}

VectorXd PpiSystem::derivative(double t, const VectorXd& x) const {
    const Signals s = compute(t, x);
    VectorXd dx(state_size());
    dx.head<2>() = plant_.derivative(x.head<2>(), s.u);
    loop_.derivative(x, s.in, s.ev, s.z, dx);
    return dx;
}

void PpiSystem::post_step(VectorXd& x) const { loop_.symmetrize(x); }

LogSchema PpiSystem::schema() const {
    LogSchema s;
    s.columns = {"r", "y", "z", "u", "v"};
    append_theta_names(s.columns, "", loop_.gain_count());
    append_cov_names(s.columns, "");
    s.columns.push_back("q");
    s.columns.push_back("q_dot");
    s.performance = {2};
    return s;
}

VectorXd PpiSystem::sample(double t, const VectorXd& x) const {
    const Signals s = compute(t, x);
    VectorXd out(5 + loop_.gain_count() + 2 + 2);
    int k = 0;
    out(k++) = s.r;
    out(k++) = s.y;
    out(k++) = s.z;
    out(k++) = s.u;
    out(k++) = s.v;
    append_loop_sample(loop_, x, out, k);
    out(k++) = x(0);
    out(k++) = x(1);
    return out;
}

// ---------------------------------------------------------------------------
// FsfiSystem

FsfiSystem::FsfiSystem(DoubleIntegrator plant, StepReference ref, LoopOptions loop)
    : plant_(plant), ref_(ref), loop_(std::move(loop), DoubleIntegrator::state_dim) {
    if (!std::holds_alternative<FsfiParameterization>(loop_.parameterization())) {
        throw ConfigError("the FSFI architecture takes a state-feedback structure");
    }
}

int FsfiSystem::state_size() const { return DoubleIntegrator::state_dim + loop_.size(); }

VectorXd FsfiSystem::initial_state() const {
    VectorXd x = VectorXd::Zero(state_size());
    x.head<2>() = plant_.initial;
    loop_.write_initial(x);
    return x;
}

VectorXd FsfiSystem::derivative(double t, const VectorXd& x) const {
    const Vector2d xp = x.head<2>();
    const double z = plant_.output(xp) - ref_.value(t);
    RegressorInputs in;
    in.err = -z; // the outer integrator accumulates r - y
    in.full_state = xp;
    const AdaptiveLoop::Eval ev = loop_.evaluate(x, in);

    VectorXd dx(state_size());
    dx.head<2>() = plant_.derivative(xp, ev.u);
    loop_.derivative(x, in, ev, z, dx);
    return dx;
}

void FsfiSystem::post_step(VectorXd& x) const { loop_.symmetrize(x); }

LogSchema FsfiSystem::schema() const {
    LogSchema s;
    s.columns = {"r", "y", "z", "u"};
    append_theta_names(s.columns, "", loop_.gain_count());
    append_cov_names(s.columns, "");
    s.columns.push_back("q");
    s.columns.push_back("q_dot");
    s.performance = {2};
    return s;
}

VectorXd FsfiSystem::sample(double t, const VectorXd& x) const {
    const Vector2d xp = x.head<2>();
    const double r = ref_.value(t);
    const double y = plant_.output(xp);
    RegressorInputs in;
    in.err = r - y;
    in.full_state = xp;
    const AdaptiveLoop::Eval ev = loop_.evaluate(x, in);

    VectorXd out(4 + loop_.gain_count() + 2 + 2);
    int k = 0;
    out(k++) = r;
    out(k++) = y;
    out(k++) = y - r;
    out(k++) = ev.u;
    append_loop_sample(loop_, x, out, k);
    out(k++) = xp(0);
    out(k++) = xp(1);
    return out;
}

// ---------------------------------------------------------------------------
// BicopterSystem

BicopterSystem::Allocation BicopterSystem::allocate(double f_r1, double f_r2, double mass,
                                                    double gravity, bool gravity_feedforward) {
    const double f_vert = f_r2 + (gravity_feedforward ? mass * gravity : 0.0);
    Allocation a;
    a.force = std::hypot(f_r1, f_vert);
    a.roll_setpoint = (f_r1 == 0.0 && f_vert == 0.0) ? 0.0 : std::atan2(-f_r1, f_vert);
    return a;
}

namespace {
int loop_offset(int base, const std::initializer_list<const AdaptiveLoop*>& prev) {
    int off = base;
    for (const auto* l : prev) off += l->size();
    return off;
}
} // namespace

BicopterSystem::BicopterSystem(Bicopter plant, EllipseReference ref, CascadeKind kind,
                               LoopOptions outer_r1, LoopOptions outer_r2, LoopOptions inner,
                               Options options)
    : plant_(plant), ref_(ref), kind_(kind), options_(options),
      r1_(std::move(outer_r1), Bicopter::state_dim),
      r2_(std::move(outer_r2), loop_offset(Bicopter::state_dim, {&r1_})),
      inner_(std::move(inner), loop_offset(Bicopter::state_dim, {&r1_, &r2_})) {
    plant_.validate();
    const bool want_pi = kind_ == CascadeKind::ppi;
    for (const AdaptiveLoop* l : {&r1_, &r2_, &inner_}) {
        const bool is_pi = std::holds_alternative<PiParameterization>(l->parameterization());
        const bool is_pid = std::holds_alternative<PidParameterization>(l->parameterization());
        if (want_pi ? !is_pi : !is_pid) {
            throw ConfigError("bicopter loops must all use the cascade's structure");
        }
    }
    if (!(options_.outer_gain > 0.0)) throw ConfigError("outer proportional gain must be positive");
}

struct BicopterSystem::Signals {
    Vector2d pos_ref, vel_ref;
    double z1, z2, z_roll;
    double f_r1, f_r2;
    Allocation alloc;
    double force, moment;
    RegressorInputs in1, in2, in_roll;
    AdaptiveLoop::Eval ev1, ev2, ev_roll;
};

BicopterSystem::Signals BicopterSystem::compute(double t, const VectorXd& x) const {
    Signals s;
    s.pos_ref = ref_.position(t);
    s.vel_ref = ref_.velocity(t);
    const double r1 = x(0), r2 = x(1), roll = x(2);
    const double r1_dot = x(3), r2_dot = x(4), roll_rate = x(5);

    s.z1 = r1 - s.pos_ref(0);
    s.z2 = r2 - s.pos_ref(1);

    if (kind_ == CascadeKind::pid) {
        s.in1.err = s.z1;
        s.in1.err_rate = r1_dot - s.vel_ref(0);
        s.in2.err = s.z2;
        s.in2.err_rate = r2_dot - s.vel_ref(1);
        s.ev1 = r1_.evaluate(x, s.in1);
        s.ev2 = r2_.evaluate(x, s.in2);
        s.f_r1 = s.ev1.u;
        s.f_r2 = s.ev2.u;
    } else {
        // Rate error against the moving reference; on a step this reduces to
        // the plain v - y_dot of the block diagram.
        const double v1 = options_.outer_gain * -s.z1;
        const double v2 = options_.outer_gain * -s.z2;
        s.in1.err = v1 - (r1_dot - s.vel_ref(0));
        s.in2.err = v2 - (r2_dot - s.vel_ref(1));
        s.ev1 = r1_.evaluate(x, s.in1);
        s.ev2 = r2_.evaluate(x, s.in2);
        s.f_r1 = s.ev1.u + v1;
        s.f_r2 = s.ev2.u + v2;
    }

    s.alloc = allocate(s.f_r1, s.f_r2, plant_.mass, plant_.gravity,
                       options_.gravity_feedforward);
    s.z_roll = roll - s.alloc.roll_setpoint;

    if (kind_ == CascadeKind::pid) {
        s.in_roll.err = s.z_roll;
        s.in_roll.err_rate = roll_rate; // roll setpoint treated as slow
        s.ev_roll = inner_.evaluate(x, s.in_roll);
        s.moment = s.ev_roll.u;
    } else {
        const double v_roll = options_.outer_gain * -s.z_roll;
        s.in_roll.err = v_roll - roll_rate;
        s.ev_roll = inner_.evaluate(x, s.in_roll);
        s.moment = s.ev_roll.u + v_roll;
    }

    s.force = s.alloc.force;
    if (plant_.force_limit) s.force = saturate(s.force, *plant_.force_limit);
    if (plant_.moment_limit) s.moment = saturate(s.moment, *plant_.moment_limit);
    return s;
}

int BicopterSystem::state_size() const {
    return Bicopter::state_dim + r1_.size() + r2_.size() + inner_.size();
}

VectorXd BicopterSystem::initial_state() const {
    VectorXd x = VectorXd::Zero(state_size());
    x.head<6>() = plant_.initial;
    r1_.write_initial(x);
    r2_.write_initial(x);
    inner_.write_initial(x);
    return x;
}

VectorXd BicopterSystem::derivative(double t, const VectorXd& x) const {
    const Signals s = compute(t, x);
    VectorXd dx(state_size());
    dx.head<6>() = plant_.derivative(x.head<6>(), s.force, s.moment);
    r1_.derivative(x, s.in1, s.ev1, s.z1, dx);
    r2_.derivative(x, s.in2, s.ev2, s.z2, dx);
    inner_.derivative(x, s.in_roll, s.ev_roll, s.z_roll, dx);
    return dx;
}

void BicopterSystem::post_step(VectorXd& x) const {
    r1_.symmetrize(x);
    r2_.symmetrize(x);
    inner_.symmetrize(x);
}

LogSchema BicopterSystem::schema() const {
    LogSchema s;
    s.columns = {"r1_ref", "r2_ref", "r1", "r2", "z_r1", "z_r2",
                 "roll",   "roll_ref", "force", "moment"};
    append_theta_names(s.columns, "r1_", r1_.gain_count());
    append_cov_names(s.columns, "_r1");
    append_theta_names(s.columns, "r2_", r2_.gain_count());
    append_cov_names(s.columns, "_r2");
    append_theta_names(s.columns, "roll_", inner_.gain_count());
    append_cov_names(s.columns, "_roll");
    s.columns.insert(s.columns.end(), {"r1_dot", "r2_dot", "roll_rate"});
    s.performance = {4, 5};
    return s;
}

VectorXd BicopterSystem::sample(double t, const VectorXd& x) const {
    const Signals s = compute(t, x);
    VectorXd out(10 + r1_.gain_count() + r2_.gain_count() + inner_.gain_count() + 6 + 3);
    int k = 0;
    out(k++) = s.pos_ref(0);
    out(k++) = s.pos_ref(1);
    out(k++) = x(0);
    out(k++) = x(1);
    out(k++) = s.z1;
    out(k++) = s.z2;
    out(k++) = x(2);
    out(k++) = s.alloc.roll_setpoint;
    out(k++) = s.force;
    out(k++) = s.moment;
    append_loop_sample(r1_, x, out, k);
    append_loop_sample(r2_, x, out, k);
    append_loop_sample(inner_, x, out, k);
    out(k++) = x(3);
    out(k++) = x(4);
    out(k++) = x(5);
    return out;
}

// ---------------------------------------------------------------------------
// AttitudeSystem

namespace {
std::vector<AdaptiveLoop> make_axis_loops(std::array<LoopOptions, 3>&& opts) {
    std::vector<AdaptiveLoop> loops;
    loops.reserve(3);
    int off = RigidBody::state_dim;
    for (auto& o : opts) {
        loops.emplace_back(std::move(o), off);
        off += loops.back().size();
    }
    return loops;
}
} // namespace

AttitudeSystem::AttitudeSystem(RigidBody plant, AttitudeReference ref, AttitudeKind kind,
                               std::array<LoopOptions, 3> loops, double outer_gain)
    : plant_(plant), ref_(ref), kind_(kind), outer_gain_(outer_gain),
      loops_(make_axis_loops(std::move(loops))) {
    plant_.validate();
    for (const auto& l : loops_) {
        const bool is_pi = std::holds_alternative<PiParameterization>(l.parameterization());
        const bool is_fsfi = std::holds_alternative<FsfiParameterization>(l.parameterization());
        if (kind_ == AttitudeKind::ppi ? !is_pi : !is_fsfi) {
            throw ConfigError("attitude loops must all use the configured structure");
        }
        if (kind_ == AttitudeKind::fsfi && l.gain_count() != 3) {
            throw ConfigError("per-axis state feedback takes the 2-state (angle, rate) pair");
        }
    }
    if (!(outer_gain_ > 0.0)) throw ConfigError("outer proportional gain must be positive");
}

struct AttitudeSystem::Signals {
    Vector3d z;
    Vector3d torque;
    std::array<RegressorInputs, 3> in;
    std::array<AdaptiveLoop::Eval, 3> ev;
};

AttitudeSystem::Signals AttitudeSystem::compute(double, const VectorXd& x) const {
    Signals s;
    const Vector3d angles = x.head<3>();
    const Vector3d omega = x.segment<3>(3);
    Vector3d u;
    for (int i = 0; i < 3; ++i) {
        s.z(i) = angles(i) - ref_.angles(i);
        const double v = outer_gain_ * -s.z(i);
        auto& in = s.in[static_cast<size_t>(i)];
        if (kind_ == AttitudeKind::fsfi) {
            in.err = -s.z(i);
            in.full_state = Vector2d(angles(i), omega(i));
        } else {
            in.err = v - omega(i);
        }
        s.ev[static_cast<size_t>(i)] =
            loops_[static_cast<size_t>(i)].evaluate(x, in);
        u(i) = s.ev[static_cast<size_t>(i)].u;
        if (kind_ == AttitudeKind::ppi) u(i) += v;
    }
    s.torque = saturate(u, plant_.torque_limit);
    return s;
}

int AttitudeSystem::state_size() const {
    int n = RigidBody::state_dim;
    for (const auto& l : loops_) n += l.size();
    return n;
}

VectorXd AttitudeSystem::initial_state() const {
    VectorXd x = VectorXd::Zero(state_size());
    x.head<6>() = plant_.initial;
    for (const auto& l : loops_) l.write_initial(x);
    return x;
}

VectorXd AttitudeSystem::derivative(double t, const VectorXd& x) const {
    const Signals s = compute(t, x);
    VectorXd dx(state_size());
    dx.head<6>() = plant_.derivative(x.head<6>(), s.torque);
    for (size_t i = 0; i < 3; ++i) {
        loops_[i].derivative(x, s.in[i], s.ev[i], s.z(static_cast<int>(i)), dx);
    }
    return dx;
}

void AttitudeSystem::post_step(VectorXd& x) const {
    for (const auto& l : loops_) l.symmetrize(x);
}

Vector3d AttitudeSystem::applied_torque(double t, const VectorXd& x) const {
    return compute(t, x).torque;
}

LogSchema AttitudeSystem::schema() const {
    static const char* axis[] = {"roll", "pitch", "yaw"};
    LogSchema s;
    for (const char* a : axis) s.columns.push_back(std::string(a) + "_ref");
    for (const char* a : axis) s.columns.emplace_back(a);
    for (const char* a : axis) s.columns.push_back(std::string("z_") + a);
    for (const char* a : axis) s.columns.push_back(std::string("tau_") + a);
    for (int i = 0; i < 3; ++i) {
        append_theta_names(s.columns, std::string(axis[i]) + "_",
                           loops_[static_cast<size_t>(i)].gain_count());
    }
    for (const char* a : axis) append_cov_names(s.columns, std::string("_") + a);
    s.columns.insert(s.columns.end(), {"omega_x", "omega_y", "omega_z"});
    s.performance = {6, 7, 8};
    return s;
}

VectorXd AttitudeSystem::sample(double t, const VectorXd& x) const {
    const Signals s = compute(t, x);
    int total = 12 + 6 + 3;
    for (const auto& l : loops_) total += l.gain_count();
    VectorXd out(total);
    int k = 0;
    for (int i = 0; i < 3; ++i) out(k++) = ref_.angles(i);
    for (int i = 0; i < 3; ++i) out(k++) = x(i);
    for (int i = 0; i < 3; ++i) out(k++) = s.z(i);
    for (int i = 0; i < 3; ++i) out(k++) = s.torque(i);
    for (const auto& l : loops_) {
        const VectorXd th = l.theta(x);
        for (int i = 0; i < th.size(); ++i) out(k++) = th(i);
    }
    for (const auto& l : loops_) {
        const MatrixXd p = l.covariance(x);
        out(k++) = p.trace();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(p, Eigen::EigenvaluesOnly);
        out(k++) = es.eigenvalues().minCoeff();
    }
    for (int i = 0; i < 3; ++i) out(k++) = x(3 + i);
    return out;
}

} // namespace ctrcac
