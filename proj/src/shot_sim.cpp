#include "phasecoh/shot_sim.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace phasecoh {

void PhaseNoiseConfig::validate() const
{
    if (!(rms_amplitude >= 0.0))
        throw std::invalid_argument("phase-noise rms must be non-negative");
    if (model == PhaseNoiseModel::ornstein_uhlenbeck && !(correlation_time > 0.0))
        throw std::invalid_argument("OU correlation time must be positive");
}

void SimConfig::validate() const
{
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (record_length < 1) throw std::invalid_argument("record length must be >= 1");
    if (!(pre_drive_time >= 0.0)) throw std::invalid_argument("pre-drive time must be non-negative");
    if (!(emission_probability >= 0.0) || !(emission_probability <= 1.0))
        throw std::invalid_argument("emission probability must be in [0, 1]");
    if (!(signal_amplitude >= 0.0)) throw std::invalid_argument("signal amplitude must be non-negative");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
    if (shots < 1) throw std::invalid_argument("shot count must be >= 1");
    pulse.validate();
    decoherence.validate();
    phase_noise.validate();
    if (record_duration() < pre_drive_time + pulse.duration)
        throw std::invalid_argument("record must cover the pre-drive interval and the pulse");
}

TraceSet::TraceSet(SimConfig config, std::int64_t n_shots)
    : config_(std::move(config)),
      n_shots_(n_shots),
      data_(static_cast<std::size_t>(n_shots) * config_.record_length),
      flags_(static_cast<std::size_t>(n_shots), 0),
      has_flags_(true)
{
}

std::span<const std::complex<float>> TraceSet::shot(std::int64_t n) const
{
    return {data_.data() + n * config_.record_length,
            static_cast<std::size_t>(config_.record_length)};
}

std::span<std::complex<float>> TraceSet::shot(std::int64_t n)
{
    return {data_.data() + n * config_.record_length,
            static_cast<std::size_t>(config_.record_length)};
}

void TraceSet::drop_emission_flags()
{
    flags_.clear();
    has_flags_ = false;
}

TraceSet make_traceset_for_io(SimConfig config, std::int64_t n_shots, double start_time,
                              bool with_flags)
{
    TraceSet set(std::move(config), n_shots);
    set.start_time_ = start_time;
    if (!with_flags) set.drop_emission_flags();
    return set;
}

std::vector<double> correlated_phase_path(const PhaseNoiseConfig& config, double dt,
                                          int length, SubStream& stream)
{
    config.validate();
    std::vector<double> path(length, 0.0);
    if (config.model == PhaseNoiseModel::none || config.rms_amplitude == 0.0 || length == 0)
        return path;
    if (config.model == PhaseNoiseModel::white) {
        const double step = config.rms_amplitude * std::sqrt(dt);
        double acc = 0.0;
        for (int k = 0; k < length; ++k) {
            acc += step * stream.next_gaussian();
            path[k] = acc;
        }
        return path;
    }
    // OU, exact discretization from the stationary distribution
    const double a = std::exp(-dt / config.correlation_time);
    const double drive = config.rms_amplitude * std::sqrt(1.0 - a * a);
    path[0] = config.rms_amplitude * stream.next_gaussian();
    for (int k = 1; k < length; ++k)
        path[k] = a * path[k - 1] + drive * stream.next_gaussian();
    return path;
}

SignalProfile make_signal_profile(const SimConfig& config)
{
    const int len = config.record_length;
    SignalProfile prof;
    prof.signed_amplitude.assign(len, 0.0);
    prof.crosstalk.assign(len, 0.0);

    const double t_on = config.drive_start();
    const double t_off = config.wavepacket_start();

    // Rabi angle accumulated up to each sample, trapezoid over the envelope
    // with partial intervals at the pulse edges.
    std::vector<double> acc(len, 0.0);
    double prev_t = t_on;
    double prev_env = super_gaussian_envelope(0.0, config.pulse);
    double running = 0.0;
    for (int k = 0; k < len; ++k) {
        const double t = k * config.dt;
        if (t < t_on || t >= t_off) continue;
        const double env = super_gaussian_envelope(t - t_on, config.pulse);
        running += 0.5 * (env + prev_env) * (t - prev_t);
        acc[k] = running;
        prev_t = t;
        prev_env = env;
    }
    double acc_end = running +
        0.5 * (prev_env + super_gaussian_envelope(config.pulse.duration, config.pulse)) *
            (t_off - prev_t);

    // rescale so the accumulated angle lands exactly on the prepared state
    const double theta = prepare_state(config.pulse).polar_angle;
    const double scale = acc_end > 0.0 ? theta / acc_end : 0.0;

    for (int k = 0; k < len; ++k) {
        const double t = k * config.dt;
        if (t < t_on) continue;
        if (t < t_off) {
            prof.signed_amplitude[k] = std::sin(acc[k] * scale);
            prof.crosstalk[k] =
                config.drive_crosstalk * super_gaussian_envelope(t - t_on, config.pulse);
        } else {
            prof.signed_amplitude[k] =
                std::sin(theta) * wavepacket_envelope(t - t_off, config.decoherence.t1);
        }
    }
    return prof;
}

namespace {

void fill_shot(const SimConfig& config, std::int64_t shot_index, const SignalProfile& profile,
               std::span<std::complex<float>> out, bool& emitted)
{
    const int len = config.record_length;
    const double dt = config.dt;

    SubStream bern(config.seed, shot_index, RngChannel::emission);
    emitted = bern.next_uniform() < config.emission_probability;

    // per-shot dephasing walk, variance rate 2/Tphi, running from drive start
    std::vector<double> walk(len, 0.0);
    {
        SubStream deph(config.seed, shot_index, RngChannel::dephasing);
        const double step = std::sqrt(2.0 * dt / config.decoherence.t_phi);
        double acc = 0.0;
        for (int k = 0; k < len; ++k) {
            if (k * dt >= config.drive_start()) acc += step * deph.next_gaussian();
            walk[k] = acc;
        }
    }
    std::vector<double> corr;
    if (config.phase_noise.model != PhaseNoiseModel::none) {
        SubStream cs(config.seed, shot_index, RngChannel::correlated);
        corr = correlated_phase_path(config.phase_noise, dt, len, cs);
    }

    SubStream noise(config.seed, shot_index, RngChannel::noise);
    const double quad_sigma = config.noise_sigma / std::sqrt(2.0);
    const double base_phase = config.pulse.drive_phase - 0.5 * M_PI;
    const std::complex<double> leak_rot =
        std::exp(std::complex<double>(0.0, config.pulse.drive_phase));

    for (int k = 0; k < len; ++k) {
        const double t = k * dt;
        std::complex<double> s(0.0, 0.0);
        const double amp = profile.signed_amplitude[k];
        if (emitted && amp != 0.0) {
            double phase = base_phase + walk[k] + config.drift_rate * t;
            if (!corr.empty()) phase += corr[k];
            s = config.signal_amplitude * amp *
                std::exp(std::complex<double>(0.0, phase));
        }
        if (profile.crosstalk[k] != 0.0) s += profile.crosstalk[k] * leak_rot;
        double g0, g1;
        noise.next_gaussian_pair(g0, g1);
        s += std::complex<double>(quad_sigma * g0, quad_sigma * g1);
        out[k] = std::complex<float>(static_cast<float>(s.real()),
                                     static_cast<float>(s.imag()));
    }
}

}  // namespace

Trace simulate_shot(const SimConfig& config, std::int64_t shot_index, bool& emitted,
                    const SignalProfile& profile)
{
    Trace trace;
    trace.dt = config.dt;
    trace.start_time = 0.0;
    trace.samples.resize(config.record_length);
    fill_shot(config, shot_index, profile, trace.samples, emitted);
    return trace;
}

Trace simulate_shot(const SimConfig& config, std::int64_t shot_index, bool& emitted)
{
    config.validate();
    return simulate_shot(config, shot_index, emitted, make_signal_profile(config));
}

TraceSet simulate_ensemble(const SimConfig& config, int workers)
{
    config.validate();
    if (workers < 1) workers = 1;
    TraceSet set(config, config.shots);
    const SignalProfile profile = make_signal_profile(config);

    auto run_range = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t n = begin; n < end; ++n) {
            bool emitted = false;
            fill_shot(config, n, profile, set.shot(n), emitted);
            set.set_emission_flag(n, emitted);
        }
    };

    if (workers == 1 || config.shots < 2 * workers) {
        run_range(0, config.shots);
        return set;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (config.shots + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t begin = w * chunk;
        const std::int64_t end = std::min<std::int64_t>(config.shots, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
    return set;
}

}  // namespace phasecoh
