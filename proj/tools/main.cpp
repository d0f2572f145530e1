#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "biphoton/commands.hpp"
#include "biphoton/error.hpp"

using namespace biphoton;

namespace {

void add_run_flags(CLI::App* cmd, std::string& config, RunOverrides& o, bool& dry_run) {
    cmd->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::Range(1u, 4096u));
    cmd->add_option("--seed", o.seed, "Override the master seed");
    cmd->add_option("--output", o.output, "Override the output directory");
    cmd->add_flag("--dry-run", dry_run, "Validate the configuration and exit");
}

std::vector<std::string> split(std::string const& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(item);
    return out;
}

std::vector<double> parse_values(std::string const& text) {
    std::vector<double> out;
    for (auto const& item : split(text)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (std::exception const&) {
            used = 0;
        }
        if (used == 0 || used != item.size())
            throw InvalidArgument("'" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-photon multiple scattering and coherent backscattering simulator"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::string config;
    RunOverrides overrides;
    bool dry_run = false;

    auto* run = app.add_subcommand("run", "Ensemble-averaged currents and correlations");
    add_run_flags(run, config, overrides, dry_run);

    auto* speckle = app.add_subcommand("speckle", "Run with the speckle correlation analysis enabled");
    add_run_flags(speckle, config, overrides, dry_run);

    auto* sweep = app.add_subcommand("sweep", "Repeat a run over values of one parameter");
    add_run_flags(sweep, config, overrides, dry_run);
    std::string axis_name, values_text;
    sweep->add_option("--axis", axis_name, "schmidt_rank | delta_theta | density | n_realizations")->required();
    sweep->add_option("--values", values_text, "Comma-separated values (density: particle counts)")->required();

    auto* fewbody = app.add_subcommand("fewbody", "Correlation of a single few-particle arrangement");
    FewBodyParams fb;
    std::string layout_name = "pair", kinds_text = "entangled_pure,fully_mixed";
    fewbody->add_option("--layout", layout_name, "pair | triple_line | triangle | quad");
    fewbody->add_option("--spacing", fb.spacing, "Nearest-neighbour spacing in wavelengths");
    fewbody->add_option("--states", kinds_text, "Comma-separated state kinds");
    fewbody->add_option("--schmidt-rank", fb.schmidt_rank, "Schmidt rank M");
    fewbody->add_option("--theta-middle", fb.theta_middle_deg, "Middle incidence angle (deg)");
    fewbody->add_option("--delta-theta", fb.delta_theta_deg, "Pair separation angle (deg)");
    fewbody->add_option("--theta-min", fb.grid.theta_min_deg, "First detection angle (deg)");
    fewbody->add_option("--theta-max", fb.grid.theta_max_deg, "Last detection angle (deg)");
    fewbody->add_option("--step", fb.grid.step_deg, "Detection step (deg)");
    fewbody->add_option("--output", fb.output_dir, "Output directory");
    fewbody->add_flag("--dry-run", dry_run, "Validate the parameters and exit");

    auto* check = app.add_subcommand("oracle-check", "Compare closed-form currents with the Fock-space oracle");
    OracleCheckParams oc;
    std::string state_kind = "entangled_pure", rows_text = "0";
    check->add_option("--smatrix", oc.smatrix_path, "Dumped scattering matrix (.bsmx)")
        ->required()
        ->check(CLI::ExistingFile);
    check->add_option("--state", state_kind, "entangled_pure | fully_mixed | fock_two_same_mode");
    check->add_option("--schmidt-rank", oc.state.schmidt_rank, "Schmidt rank M (<= 3)");
    check->add_option("--theta-middle", oc.state.theta_middle_deg, "Middle incidence angle (deg)");
    check->add_option("--delta-theta", oc.state.delta_theta_deg, "Pair separation angle (deg)");
    check->add_option("--rows", rows_text, "Comma-separated detection indices (at most 8)");
    check->add_option("--tolerance", oc.tolerance, "Relative tolerance");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int const code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }

    try {
        if (*run)
            return cmd_run(config, overrides, dry_run, std::cout, std::cerr);
        if (*speckle)
            return cmd_speckle(config, overrides, dry_run, std::cout, std::cerr);
        if (*sweep)
            return cmd_sweep(config, parse_sweep_axis(axis_name), parse_values(values_text), overrides, dry_run,
                             std::cout, std::cerr);
        if (*fewbody) {
            fb.layout = parse_layout(layout_name);
            fb.kinds.clear();
            for (auto const& k : split(kinds_text))
                fb.kinds.push_back(parse_state_kind(k));
            return cmd_fewbody(fb, dry_run, std::cout, std::cerr);
        }
        if (*check) {
            oc.state.kind = parse_state_kind(state_kind);
            for (double r : parse_values(rows_text)) {
                if (r < 0 || r != static_cast<double>(static_cast<std::size_t>(r)))
                    throw InvalidArgument("oracle-check --rows: indices must be non-negative integers");
                oc.rows.push_back(static_cast<std::size_t>(r));
            }
            return cmd_oracle_check(oc, std::cout, std::cerr);
        }
    } catch (InvalidArgument const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return kExitOk;
}
