#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "phasecoh/shot_sim.hpp"

namespace phasecoh {

// Integration window within a record, in record time (start_time = 0).
struct WindowSpec {
    double t_start = 0.0;  // ns
    double duration = 1.0; // T, ns
};

// Phase samples in (0, 2pi] with their provenance.
struct PhaseEnsemble {
    std::vector<double> phases;
    WindowSpec window;
    long batch_size = 1;  // M used to produce the ensemble
};

struct PhasePdf {
    std::vector<double> bin_edges;   // n_bins + 1 edges over (0, 2pi]
    std::vector<double> bin_masses;  // sums to 1
};

// Holevo variance R^-2 - 1.  `value` is empty when R vanishes to machine
// tolerance (no resolvable phase at all).  `resolved` is false whenever R is
// below the pure-noise floor 3/sqrt(N); the value is still reported so the
// caller can decide what to do with an unresolved ensemble.
struct HolevoVariance {
    std::optional<double> value;
    bool resolved = false;
};

// Left-Riemann sum of the trace over [t_start, t_start + T), scaled by dt.
std::complex<double> integrate_window(const Trace& trace, const WindowSpec& window);

// Same window applied to every shot of a set.
std::vector<std::complex<double>> integrate_windows(const TraceSet& traces,
                                                    const WindowSpec& window);

// Non-overlapping groups of M consecutive values, averaged; the remainder
// (size() mod M) is discarded so all groups are identically distributed.
std::vector<std::complex<double>> batch_average(std::span<const std::complex<double>> values,
                                                long m);

// arg() mapped into (0, 2pi].  An exact complex zero has no phase and is
// rejected with std::domain_error.
double phase_in_interval(std::complex<double> value);
PhaseEnsemble phase_of(std::span<const std::complex<double>> values);

double mean_resultant_length(const PhaseEnsemble& ensemble);

HolevoVariance holevo_variance(const PhaseEnsemble& ensemble);

// Normalized histogram over (0, 2pi].  The bin width is snapped to the
// nearest exact divisor of 2pi; the default 0.01*pi gives 200 bins.
PhasePdf phase_pdf(const PhaseEnsemble& ensemble, double bin_width = 0.01 * M_PI);

struct RSurface {
    std::vector<double> t_starts;
    std::vector<double> windows;
    std::vector<double> values;  // row-major, [i * windows.size() + j]

    double at(std::size_t i, std::size_t j) const { return values[i * windows.size() + j]; }
};

// R on a (t_start, T) grid: integrate -> batch by M -> phases -> R per point.
// Deterministic; grid points may be evaluated by several workers.
RSurface r_surface(const TraceSet& traces, std::span<const double> t_starts,
                   std::span<const double> windows, long m, int workers = 1);

}  // namespace phasecoh
