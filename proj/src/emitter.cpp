#include "phasecoh/emitter.hpp"

#include <cmath>
#include <stdexcept>

namespace phasecoh {

void DrivePulse::validate() const
{
    if (!(duration > 0.0)) throw std::invalid_argument("pulse duration must be positive");
    if (!(amplitude >= 0.0)) throw std::invalid_argument("pulse amplitude must be non-negative");
    if (order < 1) throw std::invalid_argument("super-Gaussian order must be >= 1");
    if (!(edge_fraction > 0.0) || !(edge_fraction < 1.0))
        throw std::invalid_argument("edge fraction must lie strictly inside (0, 1)");
}

void DecoherenceParams::validate() const
{
    if (!(t1 > 0.0)) throw std::invalid_argument("T1 must be positive");
    if (!(t_phi > 0.0)) throw std::invalid_argument("Tphi must be positive");
    if (!(coupling >= 0.0)) throw std::invalid_argument("coupling must be non-negative");
}

double super_gaussian_envelope(double t, const DrivePulse& pulse)
{
    pulse.validate();
    if (t < 0.0 || t > pulse.duration)
        throw std::domain_error("envelope evaluated outside the pulse");
    const double x = (2.0 * t - pulse.duration) / pulse.duration;
    return pulse.amplitude * std::exp(std::pow(x, 2 * pulse.order) * std::log(pulse.edge_fraction));
}

double effective_pulse_area(const DrivePulse& pulse, double quadrature_step)
{
    pulse.validate();
    if (!(quadrature_step > 0.0))
        throw std::invalid_argument("quadrature step must be positive");
    const long n = std::lround(pulse.duration / quadrature_step);
    if (n < 16)
        throw std::invalid_argument("quadrature step too coarse: needs >= 16 intervals");
    const double h = pulse.duration / static_cast<double>(n);
    double sum = 0.5 * (super_gaussian_envelope(0.0, pulse) +
                        super_gaussian_envelope(pulse.duration, pulse));
    for (long k = 1; k < n; ++k)
        sum += super_gaussian_envelope(static_cast<double>(k) * h, pulse);
    return sum * h;
}

std::complex<double> emission_expectation(const PreparationState& state,
                                          double coupling, double t)
{
    if (t < 0.0) throw std::domain_error("time must be non-negative");
    const double mag = 0.5 * std::sin(state.polar_angle) * std::sin(coupling * t);
    // -(i/2) sin(theta) sin(lambda t) e^{i phi}
    return std::complex<double>(0.0, -mag) *
           std::exp(std::complex<double>(0.0, state.azimuthal_angle));
}

double wavepacket_envelope(double t_since_pulse_end, double t1)
{
    if (t_since_pulse_end < 0.0) throw std::domain_error("time must be non-negative");
    if (!(t1 > 0.0)) throw std::domain_error("T1 must be positive");
    return std::exp(-t_since_pulse_end / (2.0 * t1));
}

PreparationState prepare_state(const DrivePulse& pulse, double quadrature_step)
{
    PreparationState state;
    state.polar_angle = effective_pulse_area(pulse, quadrature_step);
    state.azimuthal_angle = std::remainder(pulse.drive_phase, 2.0 * M_PI);
    if (state.azimuthal_angle <= -M_PI) state.azimuthal_angle += 2.0 * M_PI;
    return state;
}

double amplitude_for_angle(double theta, const DrivePulse& shape, double quadrature_step)
{
    if (theta < 0.0) throw std::invalid_argument("target angle must be non-negative");
    DrivePulse unit = shape;
    unit.amplitude = 1.0;
    return theta / effective_pulse_area(unit, quadrature_step);
}

}  // namespace phasecoh
