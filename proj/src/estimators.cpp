#include "phasecoh/estimators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace phasecoh {

double FitResult::estimate(const std::string& name) const
{
    for (std::size_t i = 0; i < parameter_names.size(); ++i)
        if (parameter_names[i] == name) return estimates[i];
    throw std::out_of_range("unknown parameter: " + name);
}

namespace {

// Smooth map from the unconstrained optimizer space u to the bounded
// parameter x, chosen per bound pattern:
//   (-inf, inf): x = u
//   [lo,  inf):  x = lo + e^u
//   (-inf, hi]:  x = hi - e^u
//   [lo,  hi]:   x = lo + (hi - lo) * sigmoid(u)
struct BoundTransform {
    std::vector<ParamBounds> bounds;

    double to_x(double u, std::size_t i) const
    {
        const auto& b = bounds[i];
        const bool lo = std::isfinite(b.lower), hi = std::isfinite(b.upper);
        if (!lo && !hi) return u;
        if (lo && !hi) return b.lower + std::exp(u);
        if (!lo && hi) return b.upper - std::exp(u);
        return b.lower + (b.upper - b.lower) / (1.0 + std::exp(-u));
    }

    double to_u(double x, std::size_t i) const
    {
        const auto& b = bounds[i];
        const bool lo = std::isfinite(b.lower), hi = std::isfinite(b.upper);
        if (!lo && !hi) return x;
        if (lo && !hi) return std::log(std::max(x - b.lower, 1e-12 * (1.0 + std::abs(b.lower))));
        if (!lo && hi) return std::log(std::max(b.upper - x, 1e-12 * (1.0 + std::abs(b.upper))));
        double z = (x - b.lower) / (b.upper - b.lower);
        z = std::min(std::max(z, 1e-10), 1.0 - 1e-10);
        return std::log(z / (1.0 - z));
    }

    // dx/du, for mapping the Jacobian back to parameter space
    double slope(double u, std::size_t i) const
    {
        const auto& b = bounds[i];
        const bool lo = std::isfinite(b.lower), hi = std::isfinite(b.upper);
        if (!lo && !hi) return 1.0;
        if (lo != hi) return lo ? std::exp(u) : -std::exp(u);
        const double s = 1.0 / (1.0 + std::exp(-u));
        return (b.upper - b.lower) * s * (1.0 - s);
    }

    Eigen::VectorXd all_to_x(const Eigen::VectorXd& u) const
    {
        Eigen::VectorXd x(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) x[i] = to_x(u[i], i);
        return x;
    }
};

double safe_norm(const Eigen::VectorXd& r)
{
    const double n = r.norm();
    return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
}

}  // namespace

FitResult least_squares_fit(const ResidualFn& residuals,
                            std::vector<std::string> parameter_names,
                            std::span<const double> init,
                            std::span<const ParamBounds> bounds)
{
    const std::size_t np = init.size();
    if (np == 0) throw std::invalid_argument("no parameters to fit");
    if (!bounds.empty() && bounds.size() != np)
        throw std::invalid_argument("bounds/init size mismatch");
    if (!parameter_names.empty() && parameter_names.size() != np)
        throw std::invalid_argument("names/init size mismatch");

    BoundTransform tf;
    tf.bounds.assign(bounds.begin(), bounds.end());
    if (tf.bounds.empty()) tf.bounds.resize(np);

    Eigen::VectorXd u(np);
    for (std::size_t i = 0; i < np; ++i) u[i] = tf.to_u(init[i], i);

    FitResult out;
    out.parameter_names = std::move(parameter_names);
    if (out.parameter_names.empty())
        for (std::size_t i = 0; i < np; ++i) out.parameter_names.push_back("p" + std::to_string(i));

    Eigen::VectorXd r = residuals(tf.all_to_x(u));
    const Eigen::Index nr = r.size();
    if (static_cast<std::size_t>(nr) < np)
        throw std::invalid_argument("fewer residuals than parameters");
    double cost = safe_norm(r);
    out.cost_history.push_back(cost);

    Eigen::MatrixXd jac(nr, np);
    double lambda = 1e-3;
    bool have_jacobian = false;

    for (out.iterations = 0; out.iterations < 500; ++out.iterations) {
        // central-difference Jacobian, relative step 1e-6
        for (std::size_t j = 0; j < np; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(u[j]));
            Eigen::VectorXd up = u, um = u;
            up[j] += h;
            um[j] -= h;
            jac.col(j) = (residuals(tf.all_to_x(up)) - residuals(tf.all_to_x(um))) / (2.0 * h);
        }
        have_jacobian = true;
        const Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() < 1e-10) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12);

        bool accepted = false;
        while (lambda <= 1e12) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * diag;
            const Eigen::VectorXd step = a.ldlt().solve(-grad);
            const Eigen::VectorXd u_try = u + step;
            const Eigen::VectorXd r_try = residuals(tf.all_to_x(u_try));
            const double cost_try = safe_norm(r_try);
            if (cost_try < cost) {
                u = u_try;
                r = r_try;
                cost = cost_try;
                out.cost_history.push_back(cost);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (step.norm() < 1e-10 * (1.0 + u.norm())) out.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted || out.converged) break;  // !accepted: damping could not rescue
    }

    const Eigen::VectorXd x = tf.all_to_x(u);
    out.estimates.assign(x.data(), x.data() + np);
    out.residual_norm = cost;

    // covariance proxy in parameter space via the bound-transform chain rule
    out.covariance = Eigen::MatrixXd::Zero(np, np);
    if (have_jacobian && nr > static_cast<Eigen::Index>(np)) {
        Eigen::MatrixXd jx = jac;
        for (std::size_t j = 0; j < np; ++j) {
            const double s = tf.slope(u[j], j);
            if (std::abs(s) > 1e-300) jx.col(j) /= s;
        }
        const Eigen::MatrixXd jtj = jx.transpose() * jx;
        const auto ldlt = jtj.ldlt();
        if (ldlt.info() == Eigen::Success) {
            const double dof = static_cast<double>(nr) - static_cast<double>(np);
            const Eigen::MatrixXd inv =
                ldlt.solve(Eigen::MatrixXd::Identity(np, np));
            if (inv.allFinite()) out.covariance = inv * (cost * cost / dof);
        }
    }
    return out;
}

FitResult least_squares_fit(const Model1D& model, std::span<const double> xs,
                            std::span<const double> ys,
                            std::vector<std::string> parameter_names,
                            std::span<const double> init,
                            std::span<const ParamBounds> bounds)
{
    if (xs.size() != ys.size() || xs.empty())
        throw std::invalid_argument("data must be non-empty with matching sizes");
    auto residuals = [&, model](const Eigen::VectorXd& params) {
        Eigen::VectorXd r(xs.size());
        const std::span<const double> p(params.data(), static_cast<std::size_t>(params.size()));
        for (std::size_t i = 0; i < xs.size(); ++i) r[i] = model(p, xs[i]) - ys[i];
        return r;
    };
    return least_squares_fit(residuals, std::move(parameter_names), init, bounds);
}

RmFit fit_r_vs_m(std::span<const double> averages, std::span<const double> r_values,
                 bool two_parameter)
{
    if (averages.size() != r_values.size())
        throw std::invalid_argument("M and R arrays must match");
    RmFit out;
    std::vector<double> ms, rs;
    for (std::size_t i = 0; i < averages.size(); ++i) {
        if (r_values[i] < 0.0 || r_values[i] > 1.0 || averages[i] < 1.0)
            out.rejected_points.push_back(i);
        else {
            ms.push_back(averages[i]);
            rs.push_back(r_values[i]);
        }
    }
    std::vector<double> distinct = ms;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 4)
        throw std::invalid_argument("need at least 4 distinct M values");

    if (!two_parameter) {
        // collapsed form: R(M) = R_det(peta sqrt(M))
        const double r0 = rs.front();
        const double init = std::max(2.0 * r0 / std::sqrt(M_PI) / std::sqrt(ms.front()), 1e-4);
        const Model1D model = [](std::span<const double> p, double m) {
            return r_det(p[0] * std::sqrt(m));
        };
        const ParamBounds b{0.0, 1e3};
        out.fit = least_squares_fit(model, ms, rs, {"peta"}, std::array{init},
                                    std::array{b});
        out.peta = out.fit.estimates[0];
    } else {
        const Model1D model = [](std::span<const double> p, double m) {
            StochasticEmissionParams sp;
            sp.emission_probability = p[0];
            sp.single_shot_snr = p[1];
            sp.averages = static_cast<long>(std::lround(m));
            return r_predicted(sp);
        };
        const std::array init{0.5, std::max(4.0 * rs.front() / std::sqrt(M_PI), 1e-4)};
        const std::array bs{ParamBounds{0.0, 1.0}, ParamBounds{0.0, 1e6}};
        out.fit = least_squares_fit(model, ms, rs, {"p", "eta"}, init, bs);
        out.peta = out.fit.estimates[0] * out.fit.estimates[1];
    }
    out.at_boundary = out.peta < 1e-6;
    return out;
}

SurfaceFit fit_surface(std::span<const double> t_starts, std::span<const double> windows,
                       std::span<const double> r_values)
{
    const std::size_t ni = t_starts.size(), nj = windows.size();
    if (ni < 4 || nj < 4) throw std::invalid_argument("surface grid must be at least 4x4");
    if (r_values.size() != ni * nj) throw std::invalid_argument("grid size mismatch");

    auto residuals_for = [&](const Eigen::VectorXd& q) {
        SurfaceParams sp;
        sp.scale = q[0];
        sp.tau1 = q[1];
        sp.beta = q[2];
        sp.tau2 = q[3];
        sp.offset = q[4];
        Eigen::VectorXd r(ni * nj);
        for (std::size_t i = 0; i < ni; ++i)
            for (std::size_t j = 0; j < nj; ++j)
                r[i * nj + j] =
                    r_phenomenological(t_starts[i], windows[j], sp) - r_values[i * nj + j];
        return r;
    };

    double rmin = r_values[0], rmax = r_values[0];
    for (double v : r_values) {
        rmin = std::min(rmin, v);
        rmax = std::max(rmax, v);
    }
    const double t0_min = *std::min_element(t_starts.begin(), t_starts.end());
    const double w_mid = windows[nj / 2];

    const std::array<ParamBounds, 5> bounds{
        ParamBounds{0.0, 1e3},   // A
        ParamBounds{1.0, 1e4},   // tau1
        ParamBounds{0.0, 1.0},   // beta
        ParamBounds{1.0, 1e5},   // tau2
        ParamBounds{0.0, 1.0},   // C
    };
    static constexpr double kTau1Starts[4] = {10.0, 40.0, 160.0, 640.0};
    static constexpr double kTau2Starts[2] = {30.0, 300.0};

    SurfaceFit best;
    bool have_best = false;
    for (double tau1_0 : kTau1Starts) {
        for (double tau2_0 : kTau2Starts) {
            const double c0 = std::max(0.5 * rmin, 1e-6);
            const double shape =
                std::exp(-t0_min / tau1_0) * std::sqrt(w_mid) * std::exp(-w_mid / tau2_0);
            const double a0 = std::max((rmax - c0) / std::max(shape, 1e-6), 1e-6);
            const std::array init{a0, tau1_0, 0.5, tau2_0, c0};
            FitResult fit = least_squares_fit(residuals_for,
                                              {"A", "tau1", "beta", "tau2", "C"}, init, bounds);
            if (!have_best || fit.residual_norm < best.fit.residual_norm) {
                best.fit = std::move(fit);
                have_best = true;
            }
        }
    }
    best.params.scale = best.fit.estimates[0];
    best.params.tau1 = best.fit.estimates[1];
    best.params.beta = best.fit.estimates[2];
    best.params.tau2 = best.fit.estimates[3];
    best.params.offset = best.fit.estimates[4];
    return best;
}

SurfaceFit fit_surface(const RSurface& surface)
{
    return fit_surface(surface.t_starts, surface.windows, surface.values);
}

double svd_separability(const Eigen::MatrixXd& grid)
{
    if (grid.rows() < 2 || grid.cols() < 2)
        throw std::invalid_argument("separability needs at least a 2x2 grid");
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(grid);
    const Eigen::VectorXd s = svd.singularValues();
    const double total = s.squaredNorm();
    if (total == 0.0) return 0.0;
    return s[0] * s[0] / total;
}

double svd_separability(const RSurface& surface)
{
    Eigen::MatrixXd grid(surface.t_starts.size(), surface.windows.size());
    for (std::size_t i = 0; i < surface.t_starts.size(); ++i)
        for (std::size_t j = 0; j < surface.windows.size(); ++j)
            grid(i, j) = surface.at(i, j);
    return svd_separability(grid);
}

}  // namespace phasecoh
