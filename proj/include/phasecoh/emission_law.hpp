#pragma once

namespace phasecoh {

// Modified Bessel functions of the first kind, orders 0 and 1, for x >= 0.
// Power series below x = 15, asymptotic expansion above; relative error is
// below 1e-12 over the whole range.  The *_scaled variants return
// e^{-x} I_nu(x) and never overflow.
double bessel_i0(double x);
double bessel_i1(double x);
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

// Mean resultant length of the phase of a deterministic complex signal in
// circular Gaussian noise at amplitude SNR rho:
//   R_det(rho) = (sqrt(pi)/2) rho e^{-rho^2/2} [I0(rho^2/2) + I1(rho^2/2)].
// Evaluated via the exponentially scaled Bessel forms, so rho of order 1e3+
// (rho^2/2 far beyond exp overflow) is fine.
double r_det(double rho);

// Binomial pmf C(M,k) p^k (1-p)^(M-k); log-space evaluation above M = 50.
double binomial_pmf(long m, long k, double p);

// Effective SNR of an M-shot average in which k of the shots emitted:
// rho_k = k eta / sqrt(M), with eta the single-shot amplitude SNR.
double effective_snr(long k, double eta, long m);

struct StochasticEmissionParams {
    double emission_probability = 1.0;  // p
    double single_shot_snr = 0.0;       // eta = |S_qb| / sigma_N
    long averages = 1;                  // M

    void validate() const;
};

// Predicted mean resultant length of an M-shot average under stochastic
// emission: sum_k P(k) R_det(k eta / sqrt(M)).  For M > 10^4 the sum is
// truncated where the pmf falls below 1e-16 of its mode.
double r_predicted(const StochasticEmissionParams& params);

// Phenomenological surface parameters for R(t_start, T).
struct SurfaceParams {
    double scale = 0.0;        // A
    double tau1 = 1.0;         // ns, wavepacket amplitude decay
    double beta = 0.5;         // noise-color exponent, [0, 1]
    double tau2 = 1.0;         // ns, phase-coherence decay
    double offset = 0.0;       // C

    void validate() const;
};

// A e^{-t_start/tau1} T^beta e^{-T/tau2} + C
double r_phenomenological(double t_start, double window, const SurfaceParams& params);

}  // namespace phasecoh
