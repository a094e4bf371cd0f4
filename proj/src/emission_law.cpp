#include "phasecoh/emission_law.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace phasecoh {

namespace {

constexpr double kSeriesCutoff = 15.0;

// power series for I_nu, nu in {0, 1}; plain (unscaled) value
double bessel_series(double x, int nu)
{
    const double q = 0.25 * x * x;
    double term = (nu == 0) ? 1.0 : 0.5 * x;
    double sum = term;
    for (int k = 1; k < 64; ++k) {
        term *= q / (static_cast<double>(k) * (k + nu));
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

// asymptotic expansion for e^{-x} I_nu(x), x > kSeriesCutoff
double bessel_asymptotic_scaled(double x, int nu)
{
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    double prev = std::abs(term);
    for (int k = 1; k < 30; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (8.0 * k * x);
        if (std::abs(term) >= prev) break;  // divergent tail of the asymptotic series
        sum += term;
        prev = std::abs(term);
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * M_PI * x);
}

void check_nonnegative(double x)
{
    if (!(x >= 0.0)) throw std::domain_error("Bessel argument must be non-negative");
}

}  // namespace

double bessel_i0_scaled(double x)
{
    check_nonnegative(x);
    if (x <= kSeriesCutoff) return std::exp(-x) * bessel_series(x, 0);
    return bessel_asymptotic_scaled(x, 0);
}

double bessel_i1_scaled(double x)
{
    check_nonnegative(x);
    if (x <= kSeriesCutoff) return std::exp(-x) * bessel_series(x, 1);
    return bessel_asymptotic_scaled(x, 1);
}

double bessel_i0(double x)
{
    check_nonnegative(x);
    if (x <= kSeriesCutoff) return bessel_series(x, 0);
    return std::exp(x) * bessel_asymptotic_scaled(x, 0);  // inf past ~709, as exp would be
}

double bessel_i1(double x)
{
    check_nonnegative(x);
    if (x <= kSeriesCutoff) return bessel_series(x, 1);
    return std::exp(x) * bessel_asymptotic_scaled(x, 1);
}

double r_det(double rho)
{
    if (!(rho >= 0.0)) throw std::domain_error("SNR must be non-negative");
    if (rho == 0.0) return 0.0;
    if (rho > 1e8) return 1.0;  // 1 - 1/(4 rho^2) is 1 to double precision
    const double x = 0.5 * rho * rho;
    return 0.5 * std::sqrt(M_PI) * rho * (bessel_i0_scaled(x) + bessel_i1_scaled(x));
}

double binomial_pmf(long m, long k, double p)
{
    if (m < 0 || k < 0 || k > m) throw std::domain_error("binomial_pmf requires 0 <= k <= M");
    if (!(p >= 0.0) || !(p <= 1.0)) throw std::domain_error("probability must be in [0, 1]");
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == m ? 1.0 : 0.0;
    if (m <= 50) {
        // direct product, binomial factor interleaved with the powers
        double v = std::pow(1.0 - p, static_cast<double>(m - k));
        for (long i = 1; i <= k; ++i)
            v *= static_cast<double>(m - k + i) / static_cast<double>(i) * p;
        return v;
    }
    const double lg = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0) +
                      k * std::log(p) + (m - k) * std::log1p(-p);
    return std::exp(lg);
}

double effective_snr(long k, double eta, long m)
{
    if (m < 1) throw std::domain_error("averaging count must be >= 1");
    return static_cast<double>(k) * eta / std::sqrt(static_cast<double>(m));
}

void StochasticEmissionParams::validate() const
{
    if (!(emission_probability >= 0.0) || !(emission_probability <= 1.0))
        throw std::invalid_argument("emission probability must be in [0, 1]");
    if (!(single_shot_snr >= 0.0)) throw std::invalid_argument("SNR must be non-negative");
    if (averages < 1) throw std::invalid_argument("averaging count must be >= 1");
}

double r_predicted(const StochasticEmissionParams& params)
{
    params.validate();
    const long m = params.averages;
    const double p = params.emission_probability;
    const double eta = params.single_shot_snr;
    if (p == 0.0) return r_det(0.0);
    if (p == 1.0) return r_det(effective_snr(m, eta, m));

    // walk outward from the pmf mode so huge-M tails can be dropped
    const long mode = std::min<long>(m, static_cast<long>((m + 1) * p));
    const double pmf_mode = binomial_pmf(m, mode, p);
    const bool truncate = m > 10000;
    const double floor = truncate ? 1e-16 * pmf_mode : 0.0;
    const double odds = p / (1.0 - p);

    double sum = pmf_mode * r_det(effective_snr(mode, eta, m));
    double pmf = pmf_mode;
    for (long k = mode + 1; k <= m; ++k) {
        pmf *= static_cast<double>(m - k + 1) / static_cast<double>(k) * odds;
        if (truncate && pmf < floor) break;
        sum += pmf * r_det(effective_snr(k, eta, m));
    }
    pmf = pmf_mode;
    for (long k = mode - 1; k >= 0; --k) {
        pmf *= static_cast<double>(k + 1) / (static_cast<double>(m - k) * odds);
        if (truncate && pmf < floor) break;
        sum += pmf * r_det(effective_snr(k, eta, m));
    }
    return sum;
}

void SurfaceParams::validate() const
{
    if (!(scale >= 0.0)) throw std::invalid_argument("scale must be non-negative");
    if (!(tau1 > 0.0) || !(tau2 > 0.0)) throw std::invalid_argument("decay times must be positive");
    if (!(beta >= 0.0) || !(beta <= 1.0)) throw std::invalid_argument("beta must be in [0, 1]");
    if (!(offset >= 0.0)) throw std::invalid_argument("offset must be non-negative");
}

double r_phenomenological(double t_start, double window, const SurfaceParams& params)
{
    if (!(window > 0.0)) throw std::domain_error("integration window must be positive");
    return params.scale * std::exp(-t_start / params.tau1) *
               std::pow(window, params.beta) * std::exp(-window / params.tau2) +
           params.offset;
}

}  // namespace phasecoh
