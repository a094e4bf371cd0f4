// phasecoh: simulate single-shot heterodyne emission records of a driven
// two-level emitter and recover its coherence parameters from the phase
// statistics of the records.

#include <CLI11.hpp>
#include <iostream>

#include "phasecoh/commands.hpp"
#include "phasecoh/trace_io.hpp"

using phasecoh::RunConfig;

namespace {

int run_guarded(int (*cmd)(const RunConfig&), const RunConfig& run)
{
    try {
        return cmd(run);
    } catch (const phasecoh::FormatError& e) {
        std::cerr << "data format error: " << e.what() << "\n";
        return 3;
    } catch (const phasecoh::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
}

void add_common(CLI::App* cmd, RunConfig& run)
{
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&run](std::uint64_t s) { run.seed = s; }, "override the RNG seed");
    cmd->add_option("--workers", run.workers,
                    "worker threads (default: PHASECOH_WORKERS env var, else 1)");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"phase statistics of simulated single-qubit emission records"};
    app.require_subcommand(1);

    RunConfig run;
    int rc = 0;

    auto* sim = app.add_subcommand("simulate", "generate an ensemble of IQ records");
    sim->add_option("--config", run.config_path, "simulation config (JSON)")->required();
    sim->add_option("--out", run.output_path, "output trace file (.qph)")->required();
    add_common(sim, run);
    sim->callback([&] { rc = run_guarded(phasecoh::cmd_simulate, run); });

    auto* ana = app.add_subcommand("analyze", "circular statistics of a trace file");
    ana->add_option("--in", run.input_path, "input trace file (.qph)")->required();
    ana->add_option("--out-dir", run.output_dir, "output directory")->required();
    ana->add_option("--t-start", run.t_start_grid, "window start grid (ns)");
    ana->add_option("--window", run.window_grid, "integration time grid (ns)");
    ana->add_option("--m-list", run.m_list, "averaging counts M");
    ana->add_option("--bin-width", run.bin_width, "phase PDF bin width (rad)");
    add_common(ana, run);
    ana->callback([&] { rc = run_guarded(phasecoh::cmd_analyze, run); });

    auto* frm = app.add_subcommand("fit-rm", "fit R(M) columns of an r_vs_m.csv");
    frm->add_option("--in", run.input_path, "input CSV (M,R_T...)")->required();
    frm->add_option("--out", run.output_path, "output fit JSON")->required();
    frm->callback([&] { rc = run_guarded(phasecoh::cmd_fit_rm, run); });

    auto* fsu = app.add_subcommand("fit-surface", "global fit of an R(t_start,T) surface");
    fsu->add_option("--in", run.input_path, "input CSV (t_start,T,R)")->required();
    fsu->add_option("--out", run.output_path, "output fit JSON")->required();
    fsu->callback([&] { rc = run_guarded(phasecoh::cmd_fit_surface, run); });

    auto* rep = app.add_subcommand("reproduce", "run a full figure-data preset");
    rep->add_option("preset", run.preset, "fig2 | fig3 | fig4");
    rep->add_option("--preset", run.preset, "fig2 | fig3 | fig4");
    rep->add_option("--out-dir", run.output_dir, "output directory")->required();
    add_common(rep, run);
    rep->callback([&] { rc = run_guarded(phasecoh::cmd_reproduce, run); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return rc;
}
