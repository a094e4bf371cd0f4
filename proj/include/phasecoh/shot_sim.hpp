#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "phasecoh/emitter.hpp"
#include "phasecoh/rng.hpp"

namespace phasecoh {

enum class PhaseNoiseModel { none, white, ornstein_uhlenbeck };

// Correlated phase fluctuations of the emission, on top of the pure-dephasing
// walk.  The white model is a Wiener walk with variance rate rms^2 rad^2/ns;
// the OU model is a stationary process with autocovariance
// rms^2 e^{-dt/correlation_time}, generated by exact discretization.
struct PhaseNoiseConfig {
    PhaseNoiseModel model = PhaseNoiseModel::none;
    double rms_amplitude = 0.0;     // rad
    double correlation_time = 1.0;  // ns, OU only

    void validate() const;
};

struct SimConfig {
    double dt = 1.0;              // ns per sample
    int record_length = 180;      // samples per shot
    double pre_drive_time = 20.0; // ns before the drive pulse starts
    DrivePulse pulse;
    DecoherenceParams decoherence;
    double emission_probability = 1.0;  // p
    double signal_amplitude = 1.0;      // A0: coherent field amplitude at wavepacket start
    double noise_sigma = 0.0;           // sigma_N: RMS complex noise amplitude
                                        // (variance sigma_N^2/2 per quadrature)
    PhaseNoiseConfig phase_noise;
    std::int64_t shots = 1;             // N
    std::uint64_t seed = 0;
    double shot_spacing = 4000.0;       // ns between repetitions; metadata
    double drive_crosstalk = 0.0;       // pulse leakage amplitude seen by the detector
    double drift_rate = 0.0;            // rad/ns, record-synchronized phase ramp

    void validate() const;
    double record_duration() const { return record_length * dt; }
    double drive_start() const { return pre_drive_time; }
    double wavepacket_start() const { return pre_drive_time + pulse.duration; }
};

struct Trace {
    std::vector<std::complex<float>> samples;
    double start_time = 0.0;  // ns
    double dt = 1.0;          // ns
};

// N traces on a shared time axis, stored contiguously.  Emission flags are
// present for simulated data and absent for ingested data.
class TraceSet {
public:
    TraceSet() = default;
    TraceSet(SimConfig config, std::int64_t n_shots);

    std::span<const std::complex<float>> shot(std::int64_t n) const;
    std::span<std::complex<float>> shot(std::int64_t n);

    std::int64_t size() const { return n_shots_; }
    int record_length() const { return config_.record_length; }
    double dt() const { return config_.dt; }
    double start_time() const { return start_time_; }
    const SimConfig& config() const { return config_; }

    bool has_emission_flags() const { return has_flags_; }
    std::span<const std::uint8_t> emission_flags() const { return flags_; }
    void set_emission_flag(std::int64_t n, bool emitted) { flags_[n] = emitted ? 1 : 0; }
    void drop_emission_flags();

    std::span<const std::complex<float>> raw() const { return data_; }

private:
    SimConfig config_;
    std::int64_t n_shots_ = 0;
    double start_time_ = 0.0;
    std::vector<std::complex<float>> data_;
    std::vector<std::uint8_t> flags_;
    bool has_flags_ = false;

    friend TraceSet make_traceset_for_io(SimConfig, std::int64_t, double, bool);
};

// One correlated-phase path of `length` samples drawn from the substream.
std::vector<double> correlated_phase_path(const PhaseNoiseConfig& config, double dt,
                                          int length, SubStream& stream);

// Deterministic per-sample coherent amplitude (signed by sin of the
// accumulated Rabi angle) and drive-leakage envelope; shared by all shots.
struct SignalProfile {
    std::vector<double> signed_amplitude;  // sin(theta_acc(t)), tail decays at 2*T1
    std::vector<double> crosstalk;         // drive envelope scaled by the crosstalk factor
};
SignalProfile make_signal_profile(const SimConfig& config);

// One shot: s(t) = X A0 prof(t) e^{i(phi_drive - pi/2 + dphi(t))}
//                  + crosstalk(t) e^{i phi_drive} + n(t),
// X ~ Bernoulli(p), dphi = dephasing walk + correlated path + drift ramp,
// n(t) i.i.d. complex Gaussian with per-quadrature variance sigma_N^2/2.
// Fully determined by (config.seed, shot_index).
Trace simulate_shot(const SimConfig& config, std::int64_t shot_index, bool& emitted);
Trace simulate_shot(const SimConfig& config, std::int64_t shot_index, bool& emitted,
                    const SignalProfile& profile);

// N independent shots; bit-identical output for a fixed seed regardless of
// the worker count.
TraceSet simulate_ensemble(const SimConfig& config, int workers = 1);

}  // namespace phasecoh
