#pragma once

#include <complex>

namespace phasecoh {

// Resonant drive pulse with a super-Gaussian envelope
//   env(t) = D * exp(((2t - tau)/tau)^(2n) * ln(alpha)),   t in [0, tau].
// The envelope peaks at D in the pulse center and falls to D*alpha at both
// edges.  alpha in (0, 1) strictly: 0 makes ln(alpha) singular, 1 is the
// degenerate rectangle (pass alpha close to 1 instead).
struct DrivePulse {
    double amplitude = 1.0;        // D, dimensionless drive units
    double duration = 16.0;        // tau, ns
    int order = 5;                 // n >= 1
    double edge_fraction = 0.01;   // alpha
    double drive_phase = 0.0;      // rad
    double carrier_frequency = 6.2503;  // GHz; metadata only, never computed with

    void validate() const;
};

// Bloch angles of the emitter right after the drive pulse.  polar_angle is
// kept unwrapped (multi-rotation drives exceed 2*pi); azimuthal_angle is in
// (-pi, pi].
struct PreparationState {
    double polar_angle = 0.0;
    double azimuthal_angle = 0.0;
};

struct DecoherenceParams {
    double t1 = 20.5;      // energy relaxation time, ns
    double t_phi = 100.0;  // pure dephasing time, ns
    double coupling = 0.0; // lambda, rad/ns; used only by the closed-form evaluator

    void validate() const;
};

// Envelope value at time t in [0, duration]; throws std::domain_error outside.
double super_gaussian_envelope(double t, const DrivePulse& pulse);

// Integral of the envelope over [0, duration] by composite trapezoid at the
// given step.  The step must divide the duration into at least 16 intervals;
// it is snapped to the nearest exact divisor.  Halving a conforming step
// changes the result by less than 1e-6 relative (tested property).
double effective_pulse_area(const DrivePulse& pulse, double quadrature_step);

// Expectation value of the emitted field for the minimal Jaynes-Cummings
// evolution: -(i/2) sin(theta) sin(lambda t) e^{i phi}.  Real part is I,
// imaginary part is Q.
std::complex<double> emission_expectation(const PreparationState& state,
                                          double coupling, double t);

// Amplitude decay of the emitted wavepacket, e^{-t/(2 T1)}.
double wavepacket_envelope(double t_since_pulse_end, double t1);

// State prepared by a pulse: polar angle = effective pulse area, azimuthal
// angle = drive phase (wrapped into (-pi, pi]).
PreparationState prepare_state(const DrivePulse& pulse, double quadrature_step = 0.0625);

// Amplitude that rotates the emitter to a target polar angle for the given
// pulse shape.
double amplitude_for_angle(double theta, const DrivePulse& shape,
                           double quadrature_step = 0.0625);

}  // namespace phasecoh
