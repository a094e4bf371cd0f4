#include "phasecoh/circstats.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace phasecoh {

namespace {

// Sample index range [k0, k1) covered by the window; validates bounds.
std::pair<int, int> window_samples(double start_time, double dt, int record_length,
                                   const WindowSpec& window)
{
    if (!(window.duration >= dt))
        throw std::domain_error("window must span at least one sample");
    const long k0 = std::lround((window.t_start - start_time) / dt);
    const long k1 = k0 + std::lround(window.duration / dt);
    if (k0 < 0 || k1 > record_length || k1 <= k0)
        throw std::domain_error("window outside the record");
    return {static_cast<int>(k0), static_cast<int>(k1)};
}

std::complex<double> sum_window(std::span<const std::complex<float>> samples, int k0, int k1,
                                double dt)
{
    std::complex<double> acc(0.0, 0.0);
    for (int k = k0; k < k1; ++k) acc += std::complex<double>(samples[k]);
    return acc * dt;
}

}  // namespace

std::complex<double> integrate_window(const Trace& trace, const WindowSpec& window)
{
    const auto [k0, k1] = window_samples(trace.start_time, trace.dt,
                                         static_cast<int>(trace.samples.size()), window);
    return sum_window(trace.samples, k0, k1, trace.dt);
}

std::vector<std::complex<double>> integrate_windows(const TraceSet& traces,
                                                    const WindowSpec& window)
{
    const auto [k0, k1] =
        window_samples(traces.start_time(), traces.dt(), traces.record_length(), window);
    std::vector<std::complex<double>> out(traces.size());
    for (std::int64_t n = 0; n < traces.size(); ++n)
        out[n] = sum_window(traces.shot(n), k0, k1, traces.dt());
    return out;
}

std::vector<std::complex<double>> batch_average(std::span<const std::complex<double>> values,
                                                long m)
{
    if (m < 1) throw std::invalid_argument("batch size must be >= 1");
    const long groups = static_cast<long>(values.size()) / m;
    if (groups == 0) throw std::invalid_argument("batch size exceeds the number of values");
    std::vector<std::complex<double>> out(groups);
    for (long g = 0; g < groups; ++g) {
        std::complex<double> acc(0.0, 0.0);
        for (long i = g * m; i < (g + 1) * m; ++i) acc += values[i];
        out[g] = acc / static_cast<double>(m);
    }
    return out;
}

double phase_in_interval(std::complex<double> value)
{
    if (value.real() == 0.0 && value.imag() == 0.0)
        throw std::domain_error("phase of an exactly zero signal is undefined");
    double phi = std::arg(value);  // (-pi, pi]
    if (phi <= 0.0) phi += 2.0 * M_PI;
    return phi;
}

PhaseEnsemble phase_of(std::span<const std::complex<double>> values)
{
    PhaseEnsemble ens;
    ens.phases.reserve(values.size());
    for (const auto& v : values) ens.phases.push_back(phase_in_interval(v));
    return ens;
}

double mean_resultant_length(const PhaseEnsemble& ensemble)
{
    if (ensemble.phases.empty()) throw std::domain_error("empty phase ensemble");
    double re = 0.0, im = 0.0;
    for (double phi : ensemble.phases) {
        re += std::cos(phi);
        im += std::sin(phi);
    }
    const double n = static_cast<double>(ensemble.phases.size());
    return std::hypot(re / n, im / n);
}

HolevoVariance holevo_variance(const PhaseEnsemble& ensemble)
{
    const double r = mean_resultant_length(ensemble);
    HolevoVariance out;
    out.resolved = r >= 3.0 / std::sqrt(static_cast<double>(ensemble.phases.size()));
    if (r > 1e-300) out.value = 1.0 / (r * r) - 1.0;
    return out;
}

PhasePdf phase_pdf(const PhaseEnsemble& ensemble, double bin_width)
{
    if (!(bin_width > 0.0) || bin_width > 2.0 * M_PI)
        throw std::invalid_argument("bin width must be in (0, 2pi]");
    const long n_bins = std::max<long>(1, std::lround(2.0 * M_PI / bin_width));
    const double width = 2.0 * M_PI / static_cast<double>(n_bins);

    PhasePdf pdf;
    pdf.bin_edges.resize(n_bins + 1);
    for (long b = 0; b <= n_bins; ++b) pdf.bin_edges[b] = b * width;
    pdf.bin_masses.assign(n_bins, 0.0);
    if (ensemble.phases.empty()) return pdf;

    const double mass = 1.0 / static_cast<double>(ensemble.phases.size());
    for (double phi : ensemble.phases) {
        // bin b covers (b*width, (b+1)*width]
        long b = static_cast<long>(std::ceil(phi / width)) - 1;
        if (b < 0) b = 0;
        if (b >= n_bins) b = n_bins - 1;
        pdf.bin_masses[b] += mass;
    }
    return pdf;
}

RSurface r_surface(const TraceSet& traces, std::span<const double> t_starts,
                   std::span<const double> windows, long m, int workers)
{
    if (t_starts.empty() || windows.empty()) throw std::invalid_argument("empty grid");
    // validate every window up front so errors do not depend on worker timing
    for (double t0 : t_starts)
        for (double T : windows)
            window_samples(traces.start_time(), traces.dt(), traces.record_length(),
                           {t0, T});

    RSurface surf;
    surf.t_starts.assign(t_starts.begin(), t_starts.end());
    surf.windows.assign(windows.begin(), windows.end());
    surf.values.assign(t_starts.size() * windows.size(), 0.0);

    auto eval_point = [&](std::size_t i, std::size_t j) {
        auto vals = integrate_windows(traces, {surf.t_starts[i], surf.windows[j]});
        auto batched = batch_average(vals, m);
        surf.values[i * surf.windows.size() + j] =
            mean_resultant_length(phase_of(batched));
    };

    const std::size_t total = surf.values.size();
    if (workers <= 1 || total < 2) {
        for (std::size_t idx = 0; idx < total; ++idx)
            eval_point(idx / windows.size(), idx % windows.size());
        return surf;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(total, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            for (std::size_t idx = begin; idx < end; ++idx)
                eval_point(idx / windows.size(), idx % windows.size());
        });
    }
    for (auto& th : pool) th.join();
    return surf;
}

}  // namespace phasecoh
