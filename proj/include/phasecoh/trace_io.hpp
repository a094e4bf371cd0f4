#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "phasecoh/shot_sim.hpp"

namespace phasecoh {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed trace file; `offset` is the byte position of the problem.
struct FormatError : std::runtime_error {
    std::uint64_t offset;
    FormatError(const std::string& what, std::uint64_t offset_)
        : std::runtime_error(what + " (offset " + std::to_string(offset_) + ")"),
          offset(offset_) {}
};

// QPHS trace file, little-endian:
//   64-byte header: magic "QPHS", version u32, n_shots u64, samples_per_shot
//   u32, dt f64, start_time f64, flags u32 (bit 0: emission flags appended),
//   zero padding to 64 bytes.
//   payload: per shot, samples_per_shot interleaved (f32 I, f32 Q) pairs.
//   optional tail: n_shots bytes of 0/1 emission flags.
inline constexpr char kTraceMagic[4] = {'Q', 'P', 'H', 'S'};
inline constexpr std::uint32_t kTraceVersion = 1;
inline constexpr std::size_t kTraceHeaderSize = 64;

struct TraceFileHeader {
    std::uint32_t version = kTraceVersion;
    std::uint64_t n_shots = 0;
    std::uint32_t samples_per_shot = 0;
    double dt = 1.0;
    double start_time = 0.0;
    bool has_flags = false;
};

// Streams shots to disk in acquisition order; the flag tail and the final
// shot count are written by finalize().
class TraceFileWriter {
public:
    TraceFileWriter(const std::filesystem::path& path, std::uint32_t samples_per_shot,
                    double dt, double start_time, bool with_flags);
    ~TraceFileWriter();

    void append(std::span<const std::complex<float>> samples, bool emitted);
    void finalize();

private:
    std::ofstream out_;
    std::filesystem::path path_;
    std::uint32_t samples_per_shot_;
    double dt_;
    double start_time_;
    bool with_flags_;
    std::uint64_t n_shots_ = 0;
    std::vector<std::uint8_t> flags_;
    bool finalized_ = false;
};

void write_traceset(const std::filesystem::path& path, const TraceSet& traces);

TraceFileHeader read_trace_header(const std::filesystem::path& path);
TraceSet read_traceset(const std::filesystem::path& path);

}  // namespace phasecoh
