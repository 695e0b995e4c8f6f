#include "ctrcac/sim.hpp"

#include <algorithm>
#include <cmath>

namespace ctrcac {

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (horizon / dt < 10.0) throw ConfigError("horizon must cover at least 10 steps");
    if (log_decimation < 1) throw ConfigError("log decimation must be a positive integer");
}

int TimeSeriesLog::column(const std::string& name) const {
    for (size_t i = 0; i < schema.columns.size(); ++i) {
        if (schema.columns[i] == name) return static_cast<int>(i);
    }
    throw ConfigError("no log column named " + name);
}

Eigen::VectorXd TimeSeriesLog::series(const std::string& name) const {
    return rows.col(column(name));
}

namespace {

VectorXd rk4_step(const System& sys, double t, const VectorXd& x, double dt) {
    const VectorXd k1 = sys.derivative(t, x);
    const VectorXd k2 = sys.derivative(t + dt / 2.0, x + (dt / 2.0) * k1);
    const VectorXd k3 = sys.derivative(t + dt / 2.0, x + (dt / 2.0) * k2);
    const VectorXd k4 = sys.derivative(t + dt, x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

VectorXd euler_step(const System& sys, double t, const VectorXd& x, double dt) {
    return x + dt * sys.derivative(t, x);
}

} // namespace

TimeSeriesLog integrate(const System& system, const VectorXd& x0, const SimConfig& cfg) {
    cfg.validate();
    if (x0.size() != system.state_size()) {
        throw ConfigError("initial state size does not match the system");
    }
    if (!x0.allFinite()) throw ConfigError("initial state must be finite");

    const long n = std::lround(cfg.horizon / cfg.dt);

    TimeSeriesLog log;
    log.schema = system.schema();
    log.horizon = cfg.horizon;
    const int cols = static_cast<int>(log.schema.columns.size());

    std::vector<double> times;
    std::vector<VectorXd> rows;
    std::vector<VectorXd> states;
    times.reserve(static_cast<size_t>(n / cfg.log_decimation) + 2);

    auto emit = [&](double t, const VectorXd& x) {
        times.push_back(t);
        rows.push_back(system.sample(t, x));
        if (cfg.capture_states) states.push_back(x);
    };

    VectorXd x = x0;
    emit(0.0, x);

    for (long k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        const double t_next = static_cast<double>(k + 1) * cfg.dt;
        bool bad = false;
        try {
            x = cfg.integrator == IntegratorKind::rk4 ? rk4_step(system, t, x, cfg.dt)
                                                      : euler_step(system, t, x, cfg.dt);
        } catch (const DivergenceError&) {
            bad = true;
        }
        if (bad || !x.allFinite()) {
            log.diverged = true;
            log.diverged_at = t_next;
            break;
        }
        system.post_step(x);
        if ((k + 1) % cfg.log_decimation == 0 || k + 1 == n) emit(t_next, x);
    }

    log.t = std::move(times);
    log.rows.resize(static_cast<long>(log.t.size()), cols);
    for (size_t i = 0; i < log.t.size(); ++i) log.rows.row(static_cast<long>(i)) = rows[i];
    if (cfg.capture_states) {
        MatrixXd snap(static_cast<long>(states.size()), system.state_size());
        for (size_t i = 0; i < states.size(); ++i) snap.row(static_cast<long>(i)) = states[i];
        log.states = std::move(snap);
    }
    return log;
}

Metrics compute_metrics(const TimeSeriesLog& log) {
    if (log.t.empty()) throw ConfigError("metrics need a non-empty log");

    Metrics m;
    m.diverged = log.diverged;
    m.diverged_at = log.diverged_at;

    const size_t n = log.t.size();
    VectorXd err(n);
    for (size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (int c : log.schema.performance) {
            const double v = log.rows(static_cast<long>(i), c);
            sq += v * v;
        }
        err(static_cast<long>(i)) = std::sqrt(sq);
    }

    for (size_t i = 0; i + 1 < n; ++i) {
        const double h = log.t[i + 1] - log.t[i];
        m.iae += 0.5 * h * (err(static_cast<long>(i)) + err(static_cast<long>(i + 1)));
        m.ise += 0.5 * h *
                 (err(static_cast<long>(i)) * err(static_cast<long>(i)) +
                  err(static_cast<long>(i + 1)) * err(static_cast<long>(i + 1)));
    }

    const double t_end = log.t.back();
    const double t_from = t_end - 0.1 * (t_end - log.t.front());
    double sum = 0.0;
    long count = 0;
    for (size_t i = 0; i < n; ++i) {
        if (log.t[i] >= t_from) {
            sum += err(static_cast<long>(i));
            ++count;
        }
    }
    m.final_error = count > 0 ? sum / static_cast<double>(count) : 0.0;
    return m;
}

} // namespace ctrcac
