#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biphoton/analytics.hpp"
#include "biphoton/config.hpp"
#include "biphoton/ensemble.hpp"

namespace biphoton {

inline constexpr char const* kVersion = "1.0.0";

// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitComputeFailure = 1;
inline constexpr int kExitInvalidInput = 2;

struct RunOverrides {
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
};

/// Loads a config, applies command-line overrides and validates it.
RunConfig resolve_config(std::filesystem::path const& path, RunOverrides const& overrides);
void apply_overrides(RunConfig& config, RunOverrides const& overrides);

/// "theta_rad,value,stderr" rows formatted with 17 significant digits.
void write_curve_csv(std::filesystem::path const& path, AngularGrid const& grid, std::vector<double> const& value,
                     std::vector<double> const& stderr_values);
void write_curve_csv(std::filesystem::path const& path, std::vector<double> const& x,
                     std::vector<double> const& value, std::vector<double> const& stderr_values);

struct ConeAnalysis {
    std::optional<ConeFit> fit;
    std::string error;  // set when no cone was found
};

ConeAnalysis analyze_cone(std::vector<double> const& curve, AngularGrid const& grid, InputStateSpec const& spec);

struct StateAnalysis {
    std::string label;
    std::filesystem::path dir;
    ConeAnalysis cone_single_photon;
    ConeAnalysis cone_two_photon;
    std::size_t cone_peak_count = 0;  // local maxima of the smoothed two-photon curve
    double c_bar_grid_mean = 0.0;
    double c_prime_bar_grid_mean = 0.0;
};

struct RunOutcome {
    RunConfig config;
    EnsembleResult result;
    std::vector<StateAnalysis> states;
    std::optional<SpeckleCorrelation> speckle;
    nlohmann::ordered_json report;
};

/// Runs the ensemble described by a validated config and writes per-state
/// curves, report.json and manifest.json under config.output.dir.
RunOutcome execute_run(RunConfig const& config, std::ostream& log);

/// Number of distinct cone-like maxima of a two-photon curve: local maxima of
/// the 1 deg smoothed curve rising at least a quarter of the way from the
/// median to the global maximum, at least 3 deg apart.
std::size_t count_cone_peaks(std::vector<double> const& curve, AngularGrid const& grid);

int cmd_run(std::filesystem::path const& config_path, RunOverrides const& overrides, bool dry_run,
            std::ostream& out, std::ostream& err);

/// Same pipeline with the speckle analysis switched on.
int cmd_speckle(std::filesystem::path const& config_path, RunOverrides const& overrides, bool dry_run,
                std::ostream& out, std::ostream& err);

struct FewBodyParams {
    FixedLayout layout = FixedLayout::Pair;
    double spacing = 1.0;
    std::vector<StateKind> kinds = {StateKind::EntangledPure, StateKind::FullyMixed};
    int schmidt_rank = 2;
    double theta_middle_deg = 180.0;
    double delta_theta_deg = 2.0;
    GridConfig grid;
    double particle_radius = kDefaultParticleRadius;
    double refractive_index = kDefaultRefractiveIndex;
    std::string output_dir = "out_fewbody";

    void validate() const;
};

struct FewBodyResult {
    AngularGrid grid;
    std::vector<InputStateSpec> states;
    std::vector<std::vector<double>> correlation;  // per state, over the grid
    std::vector<std::vector<double>> i2;
};

FewBodyResult run_fewbody(FewBodyParams const& params);

int cmd_fewbody(FewBodyParams const& params, bool dry_run, std::ostream& out, std::ostream& err);

enum class SweepAxis { SchmidtRank, DeltaTheta, Density, NRealizations };

SweepAxis parse_sweep_axis(std::string const& name);
std::string to_string(SweepAxis axis);

/// One config per value, each with its own derived seed and output subdirectory.
std::vector<RunConfig> sweep_configs(RunConfig const& base, SweepAxis axis, std::vector<double> const& values);

int cmd_sweep(std::filesystem::path const& config_path, SweepAxis axis, std::vector<double> const& values,
              RunOverrides const& overrides, bool dry_run, std::ostream& out, std::ostream& err);

struct OracleCheckParams {
    std::string smatrix_path;
    StateConfig state;
    std::vector<std::size_t> rows;  // detection indices; at most 8
    double tolerance = 1e-10;
};

struct OracleCheckResult {
    std::size_t comparisons = 0;
    double max_rel_error = 0.0;
};

OracleCheckResult run_oracle_check(ScatteringMatrix const& s, OracleCheckParams const& params);

int cmd_oracle_check(OracleCheckParams const& params, std::ostream& out, std::ostream& err);

} // namespace biphoton
