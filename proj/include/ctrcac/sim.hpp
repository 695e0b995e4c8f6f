#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ctrcac/errors.hpp"

namespace ctrcac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class IntegratorKind { rk4, euler };

struct SimConfig {
    double dt = 1e-3;
    double horizon = 0.0;
    IntegratorKind integrator = IntegratorKind::rk4;
    int log_decimation = 10;
    bool record_oracle = true;   ///< co-integrate the cost accumulators
    bool capture_states = false; ///< keep raw state snapshots alongside the log

    void validate() const;
};

/// Column names of a log, plus which columns are performance variables
/// (the tracking errors metrics are computed on).
struct LogSchema {
    std::vector<std::string> columns;
    std::vector<int> performance;
};

/// A closed-loop system presented as one monolithic ODE. `derivative` must be
/// a pure function of (t, state); `post_step` may project the state (covariance
/// symmetrization) after each integration step.
class System {
public:
    virtual ~System() = default;

    virtual int state_size() const = 0;
    virtual VectorXd initial_state() const = 0;
    virtual VectorXd derivative(double t, const VectorXd& x) const = 0;
    virtual void post_step(VectorXd&) const {}
    virtual LogSchema schema() const = 0;
    virtual VectorXd sample(double t, const VectorXd& x) const = 0;
};

struct TimeSeriesLog {
    LogSchema schema;
    std::vector<double> t;
    MatrixXd rows; ///< one row per sample, columns per schema
    bool diverged = false;
    double diverged_at = std::numeric_limits<double>::quiet_NaN();
    double horizon = 0.0;
    std::optional<MatrixXd> states; ///< raw state snapshots when captured

    int column(const std::string& name) const;
    Eigen::VectorXd series(const std::string& name) const;
};

struct Metrics {
    double iae = 0.0;
    double ise = 0.0;
    double final_error = 0.0;
    bool diverged = false;
    double diverged_at = std::numeric_limits<double>::quiet_NaN();
};

/// Fixed-step integration of the closed loop from x0 over cfg.horizon.
/// Divergence (non-finite state, a DivergenceError from the system) stops the
/// run and marks the log; it is never an exception at this level.
TimeSeriesLog integrate(const System& system, const VectorXd& x0, const SimConfig& cfg);

/// Trapezoidal IAE/ISE of the performance-column norm plus the mean error over
/// the trailing 10% of the logged span.
Metrics compute_metrics(const TimeSeriesLog& log);

} // namespace ctrcac
