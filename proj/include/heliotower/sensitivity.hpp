#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace heliotower::sensitivity {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Function = std::function<double(const Vector&)>;

/// Central differences. Throws InvalidArgument on non-positive steps or
/// non-finite function values.
Vector fd_gradient(const Function& f, const Vector& x, const Vector& steps);

/// Three-point diagonal and four-point cross stencils, symmetrized.
Matrix fd_hessian(const Function& f, const Vector& x, const Vector& steps);

struct StepOptions {
    int trials = 16;                 // candidates h_init * 2^-k, k = 0..trials-1
    double first_deriv_tol = 1e-6;   // |f'| h / |f| must stay below this
    double stability_tol = 0.02;     // relative change of f'' between h and 1.15 h
    double curvature_floor = 1e-6;   // f'' changes below floor * max(|f|, 1) count as zero
};

struct StepDiagnostic {
    double step = 0.0;
    double first_deriv_residual = 0.0;  // |f'(h)| h / |f|
    double stability_ratio = 0.0;       // |f''(h) - f''(1.15 h)| / max(|f''|, floor)
    double second_derivative = 0.0;
    bool accepted = false;
};

struct StepChoice {
    Vector steps;
    std::vector<StepDiagnostic> diagnostics;  // the accepted (or best) candidate per variable
};

/// Largest candidate step per variable meeting both criteria. Throws
/// StepSelectionError naming the variable and its best candidate otherwise.
StepChoice choose_steps(const Function& f, const Vector& x, const Vector& h_init, const StepOptions& options = {});

enum class SigmaConvention {
    Exact,    // sigma^2 = 2 (H^-1)_ii eps; re-minimized f rises by exactly eps on a quadratic
    Literal,  // sigma^2 = (H^-1)_ii eps
};

struct Inverse {
    Matrix inverse;
    double condition = 0.0;
    bool pseudo = false;  // condition above 1e12; small eigenvalues dropped
};

/// Throws NotPositiveDefinite naming the smallest eigenvalue when H is not
/// positive definite.
Inverse invert_hessian(const Matrix& h);

Vector uncertainties(const Matrix& h, double epsilon, SigmaConvention convention = SigmaConvention::Exact);
Vector uncertainties(const Inverse& inv, double epsilon, SigmaConvention convention = SigmaConvention::Exact);

Matrix correlations(const Matrix& h);
Matrix correlations(const Inverse& inv);

/// sigma_j * sqrt(1 - rho^2): the uncertainty of j with its partner frozen.
double sigma_inner(double sigma_j, double rho);

struct HessianReport {
    Vector x_star;
    double f_star = 0.0;
    Matrix hessian;
    Matrix hessian_inverse;
    double condition = 0.0;
    bool pseudo_inverse = false;
    Vector steps;
    double epsilon = 0.0;
    Vector sigma;
    Matrix rho;
    std::vector<StepDiagnostic> diagnostics;
};

struct AnalysisOptions {
    StepOptions steps;
    double epsilon = 0.001;
    SigmaConvention convention = SigmaConvention::Exact;
};

/// Step selection, Hessian, inverse, sigma and rho at a claimed minimum.
HessianReport analyze(const Function& f, const Vector& x_star, const Vector& h_init,
                      const AnalysisOptions& options = {});

}  // namespace heliotower::sensitivity
