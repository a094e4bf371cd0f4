#include "phasecoh/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "phasecoh/circstats.hpp"
#include "phasecoh/estimators.hpp"
#include "phasecoh/trace_io.hpp"

namespace phasecoh {

using nlohmann::json;

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

struct CsvWriter {
    std::ostringstream body;

    explicit CsvWriter(const std::string& header) { body << header << "\n"; }
    void row(const std::vector<double>& values)
    {
        for (std::size_t i = 0; i < values.size(); ++i)
            body << (i ? "," : "") << fmt(values[i]);
        body << "\n";
    }
    void save(const std::filesystem::path& path) { write_text_file(path, body.str()); }
};

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          std::vector<std::string>& header)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty CSV: " + path.string(), 0);
    header.clear();
    {
        std::istringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) header.push_back(col);
    }
    std::vector<std::vector<double>> rows;
    std::uint64_t offset = line.size() + 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError("bad numeric cell '" + cell + "' in " + path.string(),
                                  offset);
            }
        }
        if (row.size() != header.size())
            throw FormatError("row width mismatch in " + path.string(), offset);
        rows.push_back(std::move(row));
        offset += line.size() + 1;
    }
    return rows;
}

PhaseNoiseModel phase_noise_model_from(const std::string& name)
{
    if (name == "none") return PhaseNoiseModel::none;
    if (name == "white") return PhaseNoiseModel::white;
    if (name == "ornstein_uhlenbeck") return PhaseNoiseModel::ornstein_uhlenbeck;
    throw std::invalid_argument("unknown phase-noise model: " + name);
}

std::string phase_noise_model_name(PhaseNoiseModel m)
{
    switch (m) {
        case PhaseNoiseModel::none: return "none";
        case PhaseNoiseModel::white: return "white";
        case PhaseNoiseModel::ornstein_uhlenbeck: return "ornstein_uhlenbeck";
    }
    return "none";
}

SimConfig sim_config_from_json(const json& j)
{
    SimConfig c;
    c.dt = j.value("dt", c.dt);
    c.record_length = j.value("record_length", c.record_length);
    c.pre_drive_time = j.value("pre_drive_time", c.pre_drive_time);
    if (j.contains("pulse")) {
        const json& p = j.at("pulse");
        c.pulse.amplitude = p.value("amplitude", c.pulse.amplitude);
        c.pulse.duration = p.value("duration", c.pulse.duration);
        c.pulse.order = p.value("order", c.pulse.order);
        c.pulse.edge_fraction = p.value("edge_fraction", c.pulse.edge_fraction);
        c.pulse.drive_phase = p.value("drive_phase", c.pulse.drive_phase);
        c.pulse.carrier_frequency = p.value("carrier_frequency", c.pulse.carrier_frequency);
    }
    if (j.contains("decoherence")) {
        const json& d = j.at("decoherence");
        c.decoherence.t1 = d.value("t1", c.decoherence.t1);
        c.decoherence.t_phi = d.value("t_phi", c.decoherence.t_phi);
        c.decoherence.coupling = d.value("coupling", c.decoherence.coupling);
    }
    c.emission_probability = j.value("emission_probability", c.emission_probability);
    c.signal_amplitude = j.value("signal_amplitude", c.signal_amplitude);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    if (j.contains("phase_noise")) {
        const json& p = j.at("phase_noise");
        c.phase_noise.model =
            phase_noise_model_from(p.value("model", std::string("none")));
        c.phase_noise.rms_amplitude = p.value("rms_amplitude", c.phase_noise.rms_amplitude);
        c.phase_noise.correlation_time =
            p.value("correlation_time", c.phase_noise.correlation_time);
    }
    c.shots = j.value("shots", c.shots);
    c.seed = j.value("seed", c.seed);
    c.shot_spacing = j.value("shot_spacing", c.shot_spacing);
    c.drive_crosstalk = j.value("drive_crosstalk", c.drive_crosstalk);
    c.drift_rate = j.value("drift_rate", c.drift_rate);
    c.validate();
    return c;
}

json sim_config_to_json(const SimConfig& c)
{
    json j;
    j["dt"] = c.dt;
    j["record_length"] = c.record_length;
    j["pre_drive_time"] = c.pre_drive_time;
    j["pulse"] = {{"amplitude", c.pulse.amplitude},
                  {"duration", c.pulse.duration},
                  {"order", c.pulse.order},
                  {"edge_fraction", c.pulse.edge_fraction},
                  {"drive_phase", c.pulse.drive_phase},
                  {"carrier_frequency", c.pulse.carrier_frequency}};
    j["decoherence"] = {{"t1", c.decoherence.t1},
                        {"t_phi", c.decoherence.t_phi},
                        {"coupling", c.decoherence.coupling}};
    j["emission_probability"] = c.emission_probability;
    j["signal_amplitude"] = c.signal_amplitude;
    j["noise_sigma"] = c.noise_sigma;
    j["phase_noise"] = {{"model", phase_noise_model_name(c.phase_noise.model)},
                        {"rms_amplitude", c.phase_noise.rms_amplitude},
                        {"correlation_time", c.phase_noise.correlation_time}};
    j["shots"] = c.shots;
    j["seed"] = c.seed;
    j["shot_spacing"] = c.shot_spacing;
    j["drive_crosstalk"] = c.drive_crosstalk;
    j["drift_rate"] = c.drift_rate;
    return j;
}

json fit_to_json(const FitResult& fit)
{
    json j;
    json est = json::object();
    for (std::size_t i = 0; i < fit.parameter_names.size(); ++i)
        est[fit.parameter_names[i]] = fit.estimates[i];
    j["estimates"] = est;
    j["residual_norm"] = fit.residual_norm;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    return j;
}

// streams shots to the file in acquisition order; workers fill fixed slices
// of a chunk buffer so the bytes never depend on scheduling
void stream_simulation(const SimConfig& config, const std::filesystem::path& path,
                       int workers)
{
    TraceFileWriter writer(path, static_cast<std::uint32_t>(config.record_length),
                           config.dt, 0.0, true);
    const SignalProfile profile = make_signal_profile(config);
    const std::int64_t chunk = std::max<std::int64_t>(1024, 256 * workers);
    std::vector<std::complex<float>> buffer;
    std::vector<std::uint8_t> flags;
    for (std::int64_t base = 0; base < config.shots; base += chunk) {
        const std::int64_t n = std::min(chunk, config.shots - base);
        buffer.resize(static_cast<std::size_t>(n) * config.record_length);
        flags.resize(n);
        auto fill = [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) {
                bool emitted = false;
                Trace tr = simulate_shot(config, base + i, emitted, profile);
                std::copy(tr.samples.begin(), tr.samples.end(),
                          buffer.begin() + i * config.record_length);
                flags[i] = emitted ? 1 : 0;
            }
        };
        if (workers <= 1) {
            fill(0, n);
        } else {
            std::vector<std::thread> pool;
            const std::int64_t per = (n + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                const std::int64_t lo = w * per, hi = std::min<std::int64_t>(n, lo + per);
                if (lo >= hi) break;
                pool.emplace_back(fill, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
        for (std::int64_t i = 0; i < n; ++i)
            writer.append({buffer.data() + i * config.record_length,
                           static_cast<std::size_t>(config.record_length)},
                          flags[i] != 0);
    }
    writer.finalize();
}

struct WindowStats {
    double r = 0.0;
    HolevoVariance holevo;
    double abs_of_mean = 0.0;  // |<Z>|
    double mean_of_abs = 0.0;  // <|Z|>
};

WindowStats window_stats(const std::vector<std::complex<double>>& values, long m)
{
    WindowStats ws;
    const auto batched = batch_average(values, m);
    const auto phases = phase_of(batched);
    ws.r = mean_resultant_length(phases);
    ws.holevo = holevo_variance(phases);
    std::complex<double> mean(0.0, 0.0);
    double mean_abs = 0.0;
    for (const auto& v : batched) {
        mean += v;
        mean_abs += std::abs(v);
    }
    mean /= static_cast<double>(batched.size());
    ws.abs_of_mean = std::abs(mean);
    ws.mean_of_abs = mean_abs / static_cast<double>(batched.size());
    return ws;
}

void write_time_series(const TraceSet& traces, const std::filesystem::path& path)
{
    CsvWriter csv("t,mean_abs,abs_mean,arg_of_mean,circ_mean_arg,arith_mean_arg");
    const std::int64_t n = traces.size();
    for (int k = 0; k < traces.record_length(); ++k) {
        std::complex<double> mean(0.0, 0.0), unit_mean(0.0, 0.0);
        double mean_abs = 0.0, arith = 0.0;
        for (std::int64_t s = 0; s < n; ++s) {
            const std::complex<double> v(traces.shot(s)[k]);
            mean += v;
            mean_abs += std::abs(v);
            if (v != std::complex<double>(0.0, 0.0)) {
                const double phi = phase_in_interval(v);
                unit_mean += std::exp(std::complex<double>(0.0, phi));
                arith += phi;
            }
        }
        mean /= static_cast<double>(n);
        unit_mean /= static_cast<double>(n);
        const double t = traces.start_time() + k * traces.dt();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        csv.row({t, mean_abs / static_cast<double>(n), std::abs(mean),
                 std::abs(mean) > 0.0 ? phase_in_interval(mean) : nan,
                 std::abs(unit_mean) > 0.0 ? phase_in_interval(unit_mean) : nan,
                 arith / static_cast<double>(n)});
    }
    csv.save(path);
}

}  // namespace

int resolve_workers(int requested)
{
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PHASECOH_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 1;
}

SimConfig load_sim_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config parse error: " + std::string(e.what()));
    }
    return sim_config_from_json(j);
}

void save_sim_config(const std::filesystem::path& path, const SimConfig& config)
{
    write_text_file(path, sim_config_to_json(config).dump(2) + "\n");
}

int cmd_simulate(const RunConfig& run)
{
    if (run.config_path.empty()) throw std::invalid_argument("simulate needs --config");
    if (run.output_path.empty()) throw std::invalid_argument("simulate needs --out");
    SimConfig config = load_sim_config(run.config_path);
    if (run.seed) config.seed = *run.seed;
    const int workers = resolve_workers(run.workers);
    stream_simulation(config, run.output_path, workers);
    std::cout << "simulate: N=" << config.shots << " dt=" << config.dt
              << " p=" << config.emission_probability << " sigma_N=" << config.noise_sigma
              << " seed=" << config.seed << " -> " << run.output_path.string() << "\n";
    return 0;
}

int cmd_analyze(const RunConfig& run)
{
    if (run.input_path.empty()) throw std::invalid_argument("analyze needs --in");
    if (run.output_dir.empty()) throw std::invalid_argument("analyze needs --out-dir");
    if (run.m_list.empty()) throw std::invalid_argument("M list must not be empty");
    if (run.t_start_grid.empty() || run.window_grid.empty())
        throw std::invalid_argument("window grids must not be empty");
    for (long m : run.m_list)
        if (m < 1) throw std::invalid_argument("M values must be >= 1");

    const TraceSet traces = read_traceset(run.input_path);
    std::filesystem::create_directories(run.output_dir);
    const int workers = resolve_workers(run.workers);

    write_time_series(traces, run.output_dir / "time_series.csv");

    // phase PDF at the first window / first M
    const WindowSpec w0{run.t_start_grid.front(), run.window_grid.front()};
    const auto z0 = integrate_windows(traces, w0);
    {
        const auto phases = phase_of(batch_average(z0, run.m_list.front()));
        const PhasePdf pdf = phase_pdf(phases, run.bin_width);
        CsvWriter csv("bin_center,mass");
        for (std::size_t b = 0; b + 1 < pdf.bin_edges.size(); ++b)
            csv.row({0.5 * (pdf.bin_edges[b] + pdf.bin_edges[b + 1]), pdf.bin_masses[b]});
        csv.save(run.output_dir / "phase_pdf.csv");
    }

    // R(M) per window, windows anchored at the first t_start
    {
        std::string header = "M";
        for (double T : run.window_grid) header += ",R_T" + fmt(T);
        CsvWriter csv(header);
        std::vector<std::vector<std::complex<double>>> per_window;
        per_window.reserve(run.window_grid.size());
        for (double T : run.window_grid)
            per_window.push_back(integrate_windows(traces, {run.t_start_grid.front(), T}));
        for (long m : run.m_list) {
            std::vector<double> row{static_cast<double>(m)};
            for (const auto& z : per_window)
                row.push_back(mean_resultant_length(phase_of(batch_average(z, m))));
            csv.row(row);
        }
        csv.save(run.output_dir / "r_vs_m.csv");
    }

    // R surface at the first M
    {
        const RSurface surf = r_surface(traces, run.t_start_grid, run.window_grid,
                                        run.m_list.front(), workers);
        CsvWriter csv("t_start,T,R");
        for (std::size_t i = 0; i < surf.t_starts.size(); ++i)
            for (std::size_t j = 0; j < surf.windows.size(); ++j)
                csv.row({surf.t_starts[i], surf.windows[j], surf.at(i, j)});
        csv.save(run.output_dir / "r_surface.csv");
    }

    // summary stats at the first t_start, per window, first M
    {
        json stats;
        stats["n_shots"] = traces.size();
        stats["record_length"] = traces.record_length();
        stats["dt"] = traces.dt();
        json windows = json::array();
        for (double T : run.window_grid) {
            const auto z = integrate_windows(traces, {run.t_start_grid.front(), T});
            const WindowStats ws = window_stats(z, run.m_list.front());
            json w;
            w["t_start"] = run.t_start_grid.front();
            w["T"] = T;
            w["M"] = run.m_list.front();
            w["R"] = ws.r;
            if (ws.holevo.value)
                w["V_H"] = *ws.holevo.value;
            else
                w["V_H"] = nullptr;
            w["resolved"] = ws.holevo.resolved;
            w["abs_of_mean"] = ws.abs_of_mean;
            w["mean_of_abs"] = ws.mean_of_abs;
            windows.push_back(w);
        }
        stats["windows"] = windows;
        write_text_file(run.output_dir / "stats.json", stats.dump(2) + "\n");
    }
    std::cout << "analyze: " << traces.size() << " shots -> " << run.output_dir.string()
              << "\n";
    return 0;
}

int cmd_fit_rm(const RunConfig& run)
{
    if (run.input_path.empty()) throw std::invalid_argument("fit-rm needs --in");
    if (run.output_path.empty()) throw std::invalid_argument("fit-rm needs --out");
    std::vector<std::string> header;
    const auto rows = read_csv(run.input_path, header);
    if (header.empty() || header[0] != "M")
        throw FormatError("expected first column M in " + run.input_path.string(), 0);
    if (rows.empty()) throw FormatError("no data rows in " + run.input_path.string(), 0);

    std::vector<double> ms;
    for (const auto& r : rows) ms.push_back(r[0]);

    json out;
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::vector<double> rs;
        for (const auto& r : rows) rs.push_back(r[c]);
        const RmFit fit = fit_r_vs_m(ms, rs);
        json jf = fit_to_json(fit.fit);
        jf["peta"] = fit.peta;
        jf["at_boundary"] = fit.at_boundary;
        jf["rejected_points"] = fit.rejected_points;
        out[header[c]] = jf;
    }
    write_text_file(run.output_path, out.dump(2) + "\n");
    std::cout << "fit-rm: " << run.input_path.string() << " -> "
              << run.output_path.string() << "\n";
    return 0;
}

int cmd_fit_surface(const RunConfig& run)
{
    if (run.input_path.empty()) throw std::invalid_argument("fit-surface needs --in");
    if (run.output_path.empty()) throw std::invalid_argument("fit-surface needs --out");
    std::vector<std::string> header;
    const auto rows = read_csv(run.input_path, header);
    if (header != std::vector<std::string>{"t_start", "T", "R"})
        throw FormatError("expected columns t_start,T,R in " + run.input_path.string(), 0);

    std::vector<double> t0s, ts;
    for (const auto& r : rows) {
        t0s.push_back(r[0]);
        ts.push_back(r[1]);
    }
    std::sort(t0s.begin(), t0s.end());
    t0s.erase(std::unique(t0s.begin(), t0s.end()), t0s.end());
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    std::vector<double> grid(t0s.size() * ts.size(),
                             std::numeric_limits<double>::quiet_NaN());
    for (const auto& r : rows) {
        const auto i = std::lower_bound(t0s.begin(), t0s.end(), r[0]) - t0s.begin();
        const auto j = std::lower_bound(ts.begin(), ts.end(), r[1]) - ts.begin();
        grid[i * ts.size() + j] = r[2];
    }
    for (double v : grid)
        if (std::isnan(v))
            throw FormatError("surface grid has holes in " + run.input_path.string(), 0);

    const SurfaceFit fit = fit_surface(t0s, ts, grid);

    Eigen::MatrixXd mat(t0s.size(), ts.size());
    for (std::size_t i = 0; i < t0s.size(); ++i)
        for (std::size_t j = 0; j < ts.size(); ++j) mat(i, j) = grid[i * ts.size() + j];

    json out = fit_to_json(fit.fit);
    out["params"] = {{"A", fit.params.scale},    {"tau1", fit.params.tau1},
                     {"beta", fit.params.beta},  {"tau2", fit.params.tau2},
                     {"C", fit.params.offset}};
    out["svd_leading_fraction"] = svd_separability(mat);
    write_text_file(run.output_path, out.dump(2) + "\n");
    std::cout << "fit-surface: tau1=" << fmt(fit.params.tau1)
              << " beta=" << fmt(fit.params.beta) << " tau2=" << fmt(fit.params.tau2)
              << " -> " << run.output_path.string() << "\n";
    return 0;
}

namespace {

SimConfig preset_base()
{
    SimConfig c;
    c.dt = 1.0;
    c.record_length = 180;
    c.pre_drive_time = 20.0;
    c.pulse.duration = 16.0;
    c.pulse.order = 5;
    c.pulse.edge_fraction = 0.01;
    c.decoherence.t1 = 20.5;
    c.decoherence.t_phi = 100.0;
    c.noise_sigma = 1.0;
    return c;
}

json reproduce_fig2(const std::filesystem::path& dir, std::uint64_t seed, int workers)
{
    json outputs = json::array();
    const double thetas[3] = {0.5 * M_PI, M_PI, 1.5 * M_PI};
    for (int i = 0; i < 3; ++i) {
        SimConfig c = preset_base();
        c.pulse.amplitude = amplitude_for_angle(thetas[i], c.pulse);
        c.emission_probability = 0.8;
        c.signal_amplitude = 0.35;
        c.shots = 50000;
        c.seed = seed + static_cast<std::uint64_t>(i);
        const TraceSet traces = simulate_ensemble(c, workers);
        const auto z = integrate_windows(traces, {36.0, 36.0});
        const PhasePdf pdf = phase_pdf(phase_of(z));
        CsvWriter csv("bin_center,mass");
        for (std::size_t b = 0; b + 1 < pdf.bin_edges.size(); ++b)
            csv.row({0.5 * (pdf.bin_edges[b] + pdf.bin_edges[b + 1]), pdf.bin_masses[b]});
        const std::string name = "phase_pdf_theta" + fmt(thetas[i] / M_PI) + "pi.csv";
        csv.save(dir / name);
        outputs.push_back(name);
    }
    json manifest;
    manifest["outputs"] = outputs;
    return manifest;
}

json reproduce_fig3(const std::filesystem::path& dir, std::uint64_t seed, int workers)
{
    // theta in [0, 4pi], step pi/8; V_H and mean amplitude for T = 4 and 36 ns
    const double t_windows[2] = {4.0, 36.0};
    CsvWriter csv(
        "theta,R_T4,V_H_T4,resolved_T4,abs_mean_T4,R_T36,V_H_T36,resolved_T36,abs_mean_T36");
    for (int i = 0; i <= 32; ++i) {
        const double theta = i * M_PI / 8.0;
        SimConfig c = preset_base();
        c.pulse.amplitude = amplitude_for_angle(theta, c.pulse);
        c.emission_probability = 0.8;
        c.signal_amplitude = 0.35;
        c.shots = 20000;
        c.seed = seed + 100 + static_cast<std::uint64_t>(i);
        const TraceSet traces = simulate_ensemble(c, workers);
        std::vector<double> row{theta};
        for (double T : t_windows) {
            const auto z = integrate_windows(traces, {36.0, T});
            const WindowStats ws = window_stats(z, 1);
            const double floor_r = 3.0 / std::sqrt(static_cast<double>(z.size()));
            const double capped =
                1.0 / std::pow(std::max(ws.r, floor_r), 2.0) - 1.0;
            row.push_back(ws.r);
            row.push_back(ws.holevo.resolved && ws.holevo.value ? *ws.holevo.value : capped);
            row.push_back(ws.holevo.resolved ? 1.0 : 0.0);
            row.push_back(ws.abs_of_mean);
        }
        csv.row(row);
    }
    csv.save(dir / "theta_sweep.csv");
    json manifest;
    manifest["outputs"] = json::array({"theta_sweep.csv"});
    return manifest;
}

json reproduce_fig4(const std::filesystem::path& dir, std::uint64_t seed, int workers)
{
    SimConfig c = preset_base();
    c.pulse.amplitude = amplitude_for_angle(0.5 * M_PI, c.pulse);
    c.emission_probability = 0.5;
    c.signal_amplitude = 0.36;
    c.phase_noise.model = PhaseNoiseModel::ornstein_uhlenbeck;
    c.phase_noise.rms_amplitude = 1.0;
    c.phase_noise.correlation_time = 250.0;
    c.shots = 100000;
    c.seed = seed;
    const TraceSet traces = simulate_ensemble(c, workers);

    json manifest;
    json outputs = json::array();

    // R(M) for T = 4 and 36 ns
    {
        const std::vector<long> ms{1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048};
        const auto z4 = integrate_windows(traces, {36.0, 4.0});
        const auto z36 = integrate_windows(traces, {36.0, 36.0});
        CsvWriter csv("M,R_T4,R_T36");
        std::vector<double> msd, r4, r36;
        for (long m : ms) {
            const double a = mean_resultant_length(phase_of(batch_average(z4, m)));
            const double b = mean_resultant_length(phase_of(batch_average(z36, m)));
            csv.row({static_cast<double>(m), a, b});
            msd.push_back(static_cast<double>(m));
            r4.push_back(a);
            r36.push_back(b);
        }
        csv.save(dir / "r_vs_m.csv");
        outputs.push_back("r_vs_m.csv");

        const RmFit f4 = fit_r_vs_m(msd, r4);
        const RmFit f36 = fit_r_vs_m(msd, r36);
        json jf;
        jf["R_T4"] = fit_to_json(f4.fit);
        jf["R_T4"]["peta"] = f4.peta;
        jf["R_T36"] = fit_to_json(f36.fit);
        jf["R_T36"]["peta"] = f36.peta;
        write_text_file(dir / "fit_rm.json", jf.dump(2) + "\n");
        outputs.push_back("fit_rm.json");
        manifest["peta_T4"] = f4.peta;
        manifest["peta_T36"] = f36.peta;
    }

    // R(t_start, T) surface at M = 1 and its global fit
    {
        const std::vector<double> t0s{36, 44, 52, 60, 68, 76};
        const std::vector<double> ts{4, 8, 12, 16, 24, 32, 40, 56, 72};
        const RSurface surf = r_surface(traces, t0s, ts, 1, workers);
        CsvWriter csv("t_start,T,R");
        for (std::size_t i = 0; i < surf.t_starts.size(); ++i)
            for (std::size_t j = 0; j < surf.windows.size(); ++j)
                csv.row({surf.t_starts[i], surf.windows[j], surf.at(i, j)});
        csv.save(dir / "r_surface.csv");
        outputs.push_back("r_surface.csv");

        const SurfaceFit fit = fit_surface(surf);
        json jf = fit_to_json(fit.fit);
        jf["params"] = {{"A", fit.params.scale},   {"tau1", fit.params.tau1},
                        {"beta", fit.params.beta}, {"tau2", fit.params.tau2},
                        {"C", fit.params.offset}};
        jf["svd_leading_fraction"] = svd_separability(surf);
        write_text_file(dir / "fit_surface.json", jf.dump(2) + "\n");
        outputs.push_back("fit_surface.json");
        manifest["tau1"] = fit.params.tau1;
        manifest["beta"] = fit.params.beta;
        manifest["tau2"] = fit.params.tau2;
    }
    manifest["outputs"] = outputs;
    return manifest;
}

}  // namespace

int cmd_reproduce(const RunConfig& run)
{
    if (run.output_dir.empty()) throw std::invalid_argument("reproduce needs --out-dir");
    if (run.preset != "fig2" && run.preset != "fig3" && run.preset != "fig4")
        throw std::invalid_argument("unknown preset: " + run.preset +
                                    " (expected fig2, fig3 or fig4)");
    std::filesystem::create_directories(run.output_dir);
    const std::uint64_t seed = run.seed.value_or(7);
    const int workers = resolve_workers(run.workers);

    json manifest;
    if (run.preset == "fig2") manifest = reproduce_fig2(run.output_dir, seed, workers);
    if (run.preset == "fig3") manifest = reproduce_fig3(run.output_dir, seed, workers);
    if (run.preset == "fig4") manifest = reproduce_fig4(run.output_dir, seed, workers);
    manifest["preset"] = run.preset;
    manifest["seed"] = seed;
    write_text_file(run.output_dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "reproduce " << run.preset << " (seed " << seed << ") -> "
              << run.output_dir.string() << "\n";
    return 0;
}

}  // namespace phasecoh
