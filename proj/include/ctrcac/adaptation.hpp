#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ctrcac/errors.hpp"

namespace ctrcac {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Signal dimensions of one adaptive controller instance.
struct Dimensions {
    int inputs = 1;  ///< l_u, control channels
    int outputs = 1; ///< l_y, performance channels
    int gains = 1;   ///< l_theta, adapted gain count

    void validate() const;
};

/// Weighting matrices of the retrospective cost. Rz must be symmetric positive
/// definite, Ru symmetric positive semidefinite, Rtheta symmetric positive
/// definite. The scalar form sets the gain regularizer Rtheta = p0 * I, so the
/// covariance starts at P(0) = Rtheta^{-1} = I/p0: small p0 means weak
/// regularization and fast initial adaptation.
struct Hyperparameters {
    MatrixXd Rz;
    MatrixXd Ru;
    MatrixXd Rtheta;
    std::optional<double> p0;

    static Hyperparameters scalar(double p0, const Dimensions& dims, double rz = 1.0,
                                  double ru = 0.0);
    void validate(const Dimensions& dims) const;
};

/// State-space realization (A, B, C, D) of the adaptation filter. B has one
/// column per control channel, C one row per performance channel. A static
/// filter (order 0) reduces to the feedthrough D. A must be Hurwitz.
struct FilterRealization {
    MatrixXd A;
    MatrixXd B;
    MatrixXd C;
    MatrixXd D;

    int order() const { return static_cast<int>(A.rows()); }

    /// 1/(s + pole) on every channel: A = -pole, B = 1, C = 1, D = 0.
    static FilterRealization first_order(double pole, const Dimensions& dims);
    /// Order-0 identity feedthrough, useful for static-filter tests.
    static FilterRealization passthrough(const Dimensions& dims);

    void validate(const Dimensions& dims) const;
};

/// Running coefficients of the accumulated quadratic cost
/// J(theta_hat) = theta_hat' A theta_hat + 2 theta_hat' b + c.
/// Co-integrated alongside theta/P as an independent consistency check.
struct CostAccumulators {
    MatrixXd A;
    VectorXd b;
    double c = 0.0;
};

/// Everything that evolves in time for one adaptive controller.
struct AdaptationState {
    VectorXd theta;     ///< adapted gains
    MatrixXd P;         ///< covariance, symmetric positive definite
    MatrixXd filter_phi; ///< filter state for the regressor, order x gains
    VectorXd filter_u;   ///< filter state for the control
    CostAccumulators cost;
};

/// Filtered signals entering the retrospective performance at one instant.
struct RetrospectiveQuantities {
    MatrixXd phi_f; ///< outputs x gains
    VectorXd u_f;   ///< outputs
    VectorXd z_hat; ///< outputs
};

struct FilterDerivative {
    MatrixXd state_dot;
    MatrixXd output;
};

struct AdaptationDerivative {
    VectorXd theta_dot;
    MatrixXd P_dot;
};

struct AccumulatorDerivative {
    MatrixXd A_dot;
    VectorXd b_dot;
    double c_dot = 0.0;
};

/// Fresh state: theta = 0, P = Rtheta^{-1}, filter states zero, cost
/// accumulators at (Rtheta, 0, 0). Diagonal Rtheta is inverted elementwise so
/// the common scalar/diagonal initializations are exact.
AdaptationState init_adaptation(const Dimensions& dims, const Hyperparameters& hp,
                                const FilterRealization& filt);

/// u = phi * theta.
VectorXd control_output(const MatrixXd& phi, const VectorXd& theta);

/// One evaluation of the filter: state_dot = A x + B input, output = C x + D input.
/// The input has one column for the control channel or `gains` columns when the
/// regressor is filtered column-wise through the same realization.
FilterDerivative filter_derivative(const FilterRealization& filt, const MatrixXd& state,
                                   const MatrixXd& input);

/// z_hat = z + phi_f * theta_hat - u_f.
VectorXd retrospective_performance(const VectorXd& z, const MatrixXd& phi_f,
                                   const VectorXd& theta_hat, const VectorXd& u_f);

/// Convenience bundle: filtered regressor/control outputs plus z_hat at the
/// live gains.
RetrospectiveQuantities retrospective_quantities(const FilterRealization& filt,
                                                 const AdaptationState& state,
                                                 const MatrixXd& phi, const VectorXd& z);

/// The coupled gain/covariance update law:
///   theta_dot = -P phi_f' Rz (z + phi_f theta - u_f) - P phi' Ru phi theta
///   P_dot     = -P (phi_f' Rz phi_f + phi' Ru phi) P
/// Throws DivergenceError if any input is non-finite.
AdaptationDerivative adaptation_derivative(const AdaptationState& state, const VectorXd& z,
                                           const MatrixXd& phi, const MatrixXd& phi_f,
                                           const VectorXd& u_f, const Hyperparameters& hp);

/// Derivatives of the quadratic-cost accumulators:
///   A_dot = phi_f' Rz phi_f + phi' Ru phi
///   b_dot = phi_f' Rz (z - u_f)
///   c_dot = (z - u_f)' Rz (z - u_f)
AccumulatorDerivative accumulator_derivative(const VectorXd& z, const MatrixXd& phi,
                                             const MatrixXd& phi_f, const VectorXd& u_f,
                                             const Hyperparameters& hp);

/// J(theta_hat) = theta_hat' A theta_hat + 2 theta_hat' b + c.
double evaluate_cost(const VectorXd& theta_hat, const CostAccumulators& cost);

/// Minimizer -A^{-1} b of the accumulated cost, solved with an SPD
/// factorization. The live gains must track this along any trajectory.
VectorXd accumulator_minimizer(const CostAccumulators& cost);

} // namespace ctrcac
