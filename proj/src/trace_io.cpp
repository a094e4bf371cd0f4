#include "phasecoh/trace_io.hpp"

#include <bit>
#include <cstring>

static_assert(std::endian::native == std::endian::little,
              "QPHS I/O assumes a little-endian host");

namespace phasecoh {

namespace {

void put(std::uint8_t* buf, std::size_t at, const void* src, std::size_t n)
{
    std::memcpy(buf + at, src, n);
}

std::array<std::uint8_t, kTraceHeaderSize> encode_header(const TraceFileHeader& h)
{
    std::array<std::uint8_t, kTraceHeaderSize> buf{};
    put(buf.data(), 0, kTraceMagic, 4);
    put(buf.data(), 4, &h.version, 4);
    put(buf.data(), 8, &h.n_shots, 8);
    put(buf.data(), 16, &h.samples_per_shot, 4);
    put(buf.data(), 20, &h.dt, 8);
    put(buf.data(), 28, &h.start_time, 8);
    const std::uint32_t flags = h.has_flags ? 1u : 0u;
    put(buf.data(), 36, &flags, 4);
    return buf;
}

TraceFileHeader decode_header(const std::uint8_t* buf)
{
    if (std::memcmp(buf, kTraceMagic, 4) != 0)
        throw FormatError("not a QPHS trace file: bad magic", 0);
    TraceFileHeader h;
    std::memcpy(&h.version, buf + 4, 4);
    if (h.version != kTraceVersion)
        throw FormatError("unsupported QPHS version " + std::to_string(h.version), 4);
    std::memcpy(&h.n_shots, buf + 8, 8);
    std::memcpy(&h.samples_per_shot, buf + 16, 4);
    std::memcpy(&h.dt, buf + 20, 8);
    std::memcpy(&h.start_time, buf + 28, 8);
    std::uint32_t flags = 0;
    std::memcpy(&flags, buf + 36, 4);
    h.has_flags = (flags & 1u) != 0;
    if (h.samples_per_shot == 0)
        throw FormatError("samples_per_shot is zero", 16);
    if (!(h.dt > 0.0))
        throw FormatError("non-positive dt", 20);
    return h;
}

}  // namespace

TraceFileWriter::TraceFileWriter(const std::filesystem::path& path,
                                 std::uint32_t samples_per_shot, double dt,
                                 double start_time, bool with_flags)
    : out_(path, std::ios::binary | std::ios::trunc),
      path_(path),
      samples_per_shot_(samples_per_shot),
      dt_(dt),
      start_time_(start_time),
      with_flags_(with_flags)
{
    if (!out_) throw IoError("cannot open for writing: " + path.string());
    TraceFileHeader h;
    h.n_shots = 0;  // patched by finalize()
    h.samples_per_shot = samples_per_shot;
    h.dt = dt;
    h.start_time = start_time;
    h.has_flags = with_flags;
    const auto buf = encode_header(h);
    out_.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

TraceFileWriter::~TraceFileWriter()
{
    if (!finalized_ && out_.is_open()) {
        try {
            finalize();
        } catch (...) {
        }
    }
}

void TraceFileWriter::append(std::span<const std::complex<float>> samples, bool emitted)
{
    if (samples.size() != samples_per_shot_)
        throw IoError("shot length does not match the header");
    out_.write(reinterpret_cast<const char*>(samples.data()),
               static_cast<std::streamsize>(samples.size() * sizeof(std::complex<float>)));
    if (with_flags_) flags_.push_back(emitted ? 1 : 0);
    ++n_shots_;
    if (!out_) throw IoError("write failed: " + path_.string());
}

void TraceFileWriter::finalize()
{
    if (finalized_) return;
    if (with_flags_ && !flags_.empty())
        out_.write(reinterpret_cast<const char*>(flags_.data()),
                   static_cast<std::streamsize>(flags_.size()));
    TraceFileHeader h;
    h.n_shots = n_shots_;
    h.samples_per_shot = samples_per_shot_;
    h.dt = dt_;
    h.start_time = start_time_;
    h.has_flags = with_flags_;
    const auto buf = encode_header(h);
    out_.seekp(0);
    out_.write(reinterpret_cast<const char*>(buf.data()), buf.size());
    out_.flush();
    if (!out_) throw IoError("finalize failed: " + path_.string());
    out_.close();
    finalized_ = true;
}

void write_traceset(const std::filesystem::path& path, const TraceSet& traces)
{
    TraceFileWriter writer(path, static_cast<std::uint32_t>(traces.record_length()),
                           traces.dt(), traces.start_time(), traces.has_emission_flags());
    for (std::int64_t n = 0; n < traces.size(); ++n)
        writer.append(traces.shot(n),
                      traces.has_emission_flags() && traces.emission_flags()[n] != 0);
    writer.finalize();
}

TraceFileHeader read_trace_header(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::array<std::uint8_t, kTraceHeaderSize> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
        throw FormatError("truncated header", static_cast<std::uint64_t>(in.gcount()));
    return decode_header(buf.data());
}

TraceSet make_traceset_for_io(SimConfig, std::int64_t, double, bool);

TraceSet read_traceset(const std::filesystem::path& path)
{
    const TraceFileHeader h = read_trace_header(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    in.seekg(kTraceHeaderSize);

    SimConfig config;
    config.dt = h.dt;
    config.record_length = static_cast<int>(h.samples_per_shot);
    config.shots = std::max<std::int64_t>(1, static_cast<std::int64_t>(h.n_shots));

    TraceSet set = make_traceset_for_io(config, static_cast<std::int64_t>(h.n_shots),
                                        h.start_time, h.has_flags);
    if (h.n_shots == 0) return set;
    const std::streamsize payload =
        static_cast<std::streamsize>(h.n_shots) * h.samples_per_shot *
        sizeof(std::complex<float>);
    in.read(reinterpret_cast<char*>(set.shot(0).data()), payload);
    if (in.gcount() != payload)
        throw FormatError("truncated payload: expected " + std::to_string(payload) + " bytes",
                          kTraceHeaderSize + static_cast<std::uint64_t>(in.gcount()));
    if (h.has_flags) {
        std::vector<std::uint8_t> flags(h.n_shots);
        in.read(reinterpret_cast<char*>(flags.data()),
                static_cast<std::streamsize>(flags.size()));
        if (in.gcount() != static_cast<std::streamsize>(flags.size()))
            throw FormatError("truncated emission-flag tail",
                              kTraceHeaderSize + static_cast<std::uint64_t>(payload) +
                                  static_cast<std::uint64_t>(in.gcount()));
        for (std::int64_t n = 0; n < set.size(); ++n)
            set.set_emission_flag(n, flags[n] != 0);
    }
    return set;
}

}  // namespace phasecoh
