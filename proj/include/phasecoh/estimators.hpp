#pragma once

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "phasecoh/circstats.hpp"
#include "phasecoh/emission_law.hpp"

namespace phasecoh {

struct ParamBounds {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

struct FitResult {
    std::vector<std::string> parameter_names;
    std::vector<double> estimates;
    double residual_norm = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    Eigen::MatrixXd covariance;            // from the final Jacobian; advisory only
    std::vector<double> cost_history;      // accepted-step residual norms, non-increasing

    double estimate(const std::string& name) const;
};

// residuals(params) -> r, minimized in ||r||^2
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Damped Gauss-Newton (Levenberg-Marquardt).  Bounds are enforced by smooth
// parameter transforms; the Jacobian is central-difference with relative step
// 1e-6.  Terminates on step norm < 1e-10, gradient norm < 1e-10, or 500
// iterations.  A Jacobian the damping cannot rescue yields converged = false,
// never an exception.
FitResult least_squares_fit(const ResidualFn& residuals,
                            std::vector<std::string> parameter_names,
                            std::span<const double> init,
                            std::span<const ParamBounds> bounds);

// Convenience form for scalar models y = f(params; x).
using Model1D = std::function<double(std::span<const double> params, double x)>;
FitResult least_squares_fit(const Model1D& model, std::span<const double> xs,
                            std::span<const double> ys,
                            std::vector<std::string> parameter_names,
                            std::span<const double> init,
                            std::span<const ParamBounds> bounds);

// Fit of measured R(M) by the binomial-averaged law.  In the collapsed form
// (default) the only parameter is the product p*eta, fitted through
// R(M) = R_det(peta * sqrt(M)); the two-parameter form (p, eta) is available
// for studying the collapse itself.  Points with R outside [0, 1] are
// rejected and reported.
struct RmFit {
    FitResult fit;
    double peta = 0.0;
    bool at_boundary = false;              // pegged at peta = 0
    std::vector<std::size_t> rejected_points;
};
RmFit fit_r_vs_m(std::span<const double> averages, std::span<const double> r_values,
                 bool two_parameter = false);

// Global fit of the phenomenological surface over the full (t_start, T) grid,
// multi-start over log-spaced (tau1, tau2); best residual wins, ties broken
// by the lowest start index.
struct SurfaceFit {
    SurfaceParams params;
    FitResult fit;
};
SurfaceFit fit_surface(std::span<const double> t_starts, std::span<const double> windows,
                       std::span<const double> r_values /* row-major */);
SurfaceFit fit_surface(const RSurface& surface);

// Fraction of the grid's energy carried by the leading singular value,
// sigma_1^2 / sum sigma_i^2.
double svd_separability(const Eigen::MatrixXd& grid);
double svd_separability(const RSurface& surface);

}  // namespace phasecoh
