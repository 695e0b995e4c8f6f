#pragma once

#include <Eigen/Dense>

#include "ctrcac/adaptation.hpp"
#include "ctrcac/parameterizations.hpp"

namespace ctrcac {

/// Configuration of one SISO adaptive loop.
struct LoopOptions {
    Hyperparameters hp;
    FilterRealization filter;
    Parameterization param;
    bool track_cost = true;
};

/// One adaptive controller packed into a slice of the monolithic state vector.
/// Slice layout: [regressor states | filter_phi | filter_u | theta | P
///                | cost A | cost b | cost c] with the cost block present only
/// when track_cost is set.
class AdaptiveLoop {
public:
    AdaptiveLoop(LoopOptions options, int offset);

    int offset() const { return offset_; }
    int size() const { return size_; }
    int gain_count() const { return gains_; }
    bool tracks_cost() const { return opts_.track_cost; }
    const Parameterization& parameterization() const { return opts_.param; }

    void write_initial(VectorXd& x) const;

    struct Eval {
        RowVectorXd phi;
        double u = 0.0;
    };
    /// Regressor row and adapted control at the current state.
    Eval evaluate(const VectorXd& x, const RegressorInputs& in) const;

    /// Writes this loop's slice of dx. `z` is the adaptation performance
    /// variable, `ev` the evaluation already computed for the plant input.
    void derivative(const VectorXd& x, const RegressorInputs& in, const Eval& ev, double z,
                    VectorXd& dx) const;

    /// P <- (P + P') / 2 within the packed state.
    void symmetrize(VectorXd& x) const;

    VectorXd theta(const VectorXd& x) const;
    MatrixXd covariance(const VectorXd& x) const;
    VectorXd regressor_state(const VectorXd& x) const;
    CostAccumulators accumulators(const VectorXd& x) const;
    AdaptationState unpack(const VectorXd& x) const;

    void set_theta(VectorXd& x, const VectorXd& theta) const;
    void set_regressor_state(VectorXd& x, const VectorXd& rstate) const;

private:
    LoopOptions opts_;
    int offset_;
    int gains_;
    int filter_order_;
    int reg_states_;
    int reg_off_, xphi_off_, xu_off_, theta_off_, p_off_, cost_a_off_, cost_b_off_, cost_c_off_;
    int size_;
};

} // namespace ctrcac
