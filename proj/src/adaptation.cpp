#include "ctrcac/adaptation.hpp"

#include <cmath>
#include <sstream>

namespace ctrcac {
namespace {

bool is_diagonal(const MatrixXd& m) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) != 0.0) return false;
    return true;
}

void require_square(const MatrixXd& m, int n, const char* name) {
    if (m.rows() != n || m.cols() != n) {
        std::ostringstream os;
        os << name << " must be " << n << "x" << n << ", got " << m.rows() << "x" << m.cols();
        throw ConfigError(os.str());
    }
}

void require_symmetric(const MatrixXd& m, const char* name) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
        throw ConfigError(std::string(name) + " must be symmetric");
    }
}

void require_positive_definite(const MatrixXd& m, const char* name) {
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw ConfigError(std::string(name) + " must be positive definite");
    }
}

void require_positive_semidefinite(const MatrixXd& m, const char* name) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
        throw ConfigError(std::string(name) + " must be positive semidefinite");
    }
}

void require_finite(const MatrixXd& m, const char* name) {
    if (!m.allFinite()) {
        throw DivergenceError(std::string("non-finite value in ") + name);
    }
}

} // namespace

void Dimensions::validate() const {
    if (inputs < 1 || outputs < 1 || gains < 1) {
        throw ConfigError("all dimensions must be strictly positive");
    }
}

Hyperparameters Hyperparameters::scalar(double p0, const Dimensions& dims, double rz,
                                        double ru) {
    if (!(p0 > 0.0)) throw ConfigError("p0 must be positive");
    Hyperparameters hp;
    hp.Rz = rz * MatrixXd::Identity(dims.outputs, dims.outputs);
    hp.Ru = ru * MatrixXd::Identity(dims.inputs, dims.inputs);
    hp.Rtheta = p0 * MatrixXd::Identity(dims.gains, dims.gains);
    hp.p0 = p0;
    return hp;
}

void Hyperparameters::validate(const Dimensions& dims) const {
    dims.validate();
    require_square(Rz, dims.outputs, "Rz");
    require_square(Ru, dims.inputs, "Ru");
    require_square(Rtheta, dims.gains, "Rtheta");
    require_symmetric(Rz, "Rz");
    require_symmetric(Ru, "Ru");
    require_symmetric(Rtheta, "Rtheta");
    require_positive_definite(Rz, "Rz");
    require_positive_semidefinite(Ru, "Ru");
    require_positive_definite(Rtheta, "Rtheta");
}

FilterRealization FilterRealization::first_order(double pole, const Dimensions& dims) {
    if (!(pole > 0.0)) throw ConfigError("filter pole must be positive");
    if (dims.inputs != dims.outputs) {
        throw ConfigError("first-order filter assumes as many outputs as inputs");
    }
    const int n = dims.inputs;
    FilterRealization f;
    f.A = -pole * MatrixXd::Identity(n, n);
    f.B = MatrixXd::Identity(n, n);
    f.C = MatrixXd::Identity(n, n);
    f.D = MatrixXd::Zero(n, n);
    return f;
}

FilterRealization FilterRealization::passthrough(const Dimensions& dims) {
    if (dims.inputs != dims.outputs) {
        throw ConfigError("passthrough filter assumes as many outputs as inputs");
    }
    FilterRealization f;
    f.A = MatrixXd::Zero(0, 0);
    f.B = MatrixXd::Zero(0, dims.inputs);
    f.C = MatrixXd::Zero(dims.outputs, 0);
    f.D = MatrixXd::Identity(dims.outputs, dims.inputs);
    return f;
}

void FilterRealization::validate(const Dimensions& dims) const {
    const int n = order();
    if (A.cols() != n) throw ConfigError("filter A must be square");
    if (B.rows() != n || B.cols() != dims.inputs) throw ConfigError("filter B dimension mismatch");
    if (C.rows() != dims.outputs || C.cols() != n) throw ConfigError("filter C dimension mismatch");
    if (D.rows() != dims.outputs || D.cols() != dims.inputs) {
        throw ConfigError("filter D dimension mismatch");
    }
    if (n > 0) {
        Eigen::EigenSolver<MatrixXd> es(A, false);
        if (es.eigenvalues().real().maxCoeff() >= 0.0) {
            throw ConfigError("filter A must be Hurwitz");
        }
    }
}

AdaptationState init_adaptation(const Dimensions& dims, const Hyperparameters& hp,
                                const FilterRealization& filt) {
    hp.validate(dims);
    filt.validate(dims);

    AdaptationState s;
    s.theta = VectorXd::Zero(dims.gains);
    if (hp.p0) {
        s.P = (1.0 / *hp.p0) * MatrixXd::Identity(dims.gains, dims.gains);
    } else if (is_diagonal(hp.Rtheta)) {
        s.P = hp.Rtheta.diagonal().cwiseInverse().asDiagonal();
    } else {
        s.P = Eigen::LLT<MatrixXd>(hp.Rtheta).solve(MatrixXd::Identity(dims.gains, dims.gains));
    }
    s.filter_phi = MatrixXd::Zero(filt.order(), dims.gains);
    s.filter_u = VectorXd::Zero(filt.order());
    s.cost.A = hp.Rtheta;
    s.cost.b = VectorXd::Zero(dims.gains);
    s.cost.c = 0.0;
    return s;
}

VectorXd control_output(const MatrixXd& phi, const VectorXd& theta) {
    if (phi.cols() != theta.size()) {
        throw ConfigError("regressor column count must match gain count");
    }
    return phi * theta;
}

FilterDerivative filter_derivative(const FilterRealization& filt, const MatrixXd& state,
                                   const MatrixXd& input) {
    if (input.rows() != filt.B.cols()) {
        throw ConfigError("filter input row count must match B columns");
    }
    if (state.rows() != filt.order() || state.cols() != input.cols()) {
        throw ConfigError("filter state shape must match (order, input columns)");
    }
    FilterDerivative d;
    d.state_dot = filt.A * state + filt.B * input;
    d.output = filt.C * state + filt.D * input;
    return d;
}

VectorXd retrospective_performance(const VectorXd& z, const MatrixXd& phi_f,
                                   const VectorXd& theta_hat, const VectorXd& u_f) {
    if (phi_f.rows() != z.size() || phi_f.cols() != theta_hat.size() || u_f.size() != z.size()) {
        throw ConfigError("retrospective performance dimension mismatch");
    }
    return z + phi_f * theta_hat - u_f;
}

RetrospectiveQuantities retrospective_quantities(const FilterRealization& filt,
                                                 const AdaptationState& state,
                                                 const MatrixXd& phi, const VectorXd& z) {
    RetrospectiveQuantities q;
    q.phi_f = filt.C * state.filter_phi + filt.D * phi;
    q.u_f = filt.C * state.filter_u + filt.D * (phi * state.theta);
    q.z_hat = retrospective_performance(z, q.phi_f, state.theta, q.u_f);
    return q;
}

AdaptationDerivative adaptation_derivative(const AdaptationState& state, const VectorXd& z,
                                           const MatrixXd& phi, const MatrixXd& phi_f,
                                           const VectorXd& u_f, const Hyperparameters& hp) {
    require_finite(state.theta, "theta");
    require_finite(state.P, "P");
    require_finite(z, "z");
    require_finite(phi, "phi");
    require_finite(phi_f, "phi_f");
    require_finite(u_f, "u_f");

    const VectorXd z_hat = retrospective_performance(z, phi_f, state.theta, u_f);
    const MatrixXd info_rate = phi_f.transpose() * hp.Rz * phi_f + phi.transpose() * hp.Ru * phi;

    AdaptationDerivative d;
    d.theta_dot = -state.P * (phi_f.transpose() * (hp.Rz * z_hat)) -
                  state.P * (phi.transpose() * (hp.Ru * (phi * state.theta)));
    d.P_dot = -state.P * info_rate * state.P;
    return d;
}

AccumulatorDerivative accumulator_derivative(const VectorXd& z, const MatrixXd& phi,
                                             const MatrixXd& phi_f, const VectorXd& u_f,
                                             const Hyperparameters& hp) {
    if (u_f.size() != z.size() || phi_f.rows() != z.size()) {
        throw ConfigError("accumulator derivative dimension mismatch");
    }
    const VectorXd residual = z - u_f;
    AccumulatorDerivative d;
    d.A_dot = phi_f.transpose() * hp.Rz * phi_f + phi.transpose() * hp.Ru * phi;
    d.b_dot = phi_f.transpose() * (hp.Rz * residual);
    d.c_dot = residual.dot(hp.Rz * residual);
    return d;
}

double evaluate_cost(const VectorXd& theta_hat, const CostAccumulators& cost) {
    return theta_hat.dot(cost.A * theta_hat) + 2.0 * theta_hat.dot(cost.b) + cost.c;
}

VectorXd accumulator_minimizer(const CostAccumulators& cost) {
    Eigen::LLT<MatrixXd> llt(cost.A);
    if (llt.info() != Eigen::Success) {
        throw ConfigError("cost accumulator A is not positive definite");
    }
    return -llt.solve(cost.b);
}

} // namespace ctrcac
