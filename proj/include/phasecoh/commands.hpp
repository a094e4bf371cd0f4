#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phasecoh/shot_sim.hpp"

namespace phasecoh {

// Everything the CLI front end hands to a command.  Grid defaults follow the
// paper's analysis choices (windows anchored at the wavepacket start, 36 ns
// into the default record).
struct RunConfig {
    std::filesystem::path config_path;
    std::filesystem::path input_path;
    std::filesystem::path output_path;
    std::filesystem::path output_dir;
    std::vector<double> t_start_grid{36.0};
    std::vector<double> window_grid{36.0};
    std::vector<long> m_list{1};
    double bin_width = 0.01 * M_PI;
    std::optional<std::uint64_t> seed;
    int workers = 0;  // 0: PHASECOH_WORKERS env var, else 1
    std::string preset;
};

int resolve_workers(int requested);

SimConfig load_sim_config(const std::filesystem::path& path);
void save_sim_config(const std::filesystem::path& path, const SimConfig& config);

// Exit codes: 0 ok, 1 config error, 2 I/O error, 3 data-format error.
int cmd_simulate(const RunConfig& run);
int cmd_analyze(const RunConfig& run);
int cmd_fit_rm(const RunConfig& run);
int cmd_fit_surface(const RunConfig& run);
int cmd_reproduce(const RunConfig& run);

}  // namespace phasecoh
