#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "biphoton/ensemble.hpp"
#include "biphoton/qstates.hpp"
#include "biphoton/scene.hpp"

namespace biphoton {

/// Input state as written in a config file; angles in degrees.
struct StateConfig {
    StateKind kind = StateKind::EntangledPure;
    int schmidt_rank = 1;
    double theta_middle_deg = 180.0;
    double delta_theta_deg = 5.0;
    double qe_factor = 1.0;

    InputStateSpec to_spec() const;

    friend bool operator==(StateConfig const&, StateConfig const&) = default;
};

struct GridConfig {
    double theta_min_deg = -90.0;
    double theta_max_deg = 90.0;
    double step_deg = 0.25;
    double phi_deg = 0.0;

    AngularGrid build() const;

    friend bool operator==(GridConfig const&, GridConfig const&) = default;
};

struct EnsembleConfig {
    std::uint64_t n_realizations = 1;
    std::uint64_t master_seed = 0;
    unsigned workers = 1;

    friend bool operator==(EnsembleConfig const&, EnsembleConfig const&) = default;
};

struct AnalysesConfig {
    bool cone_fit = true;
    bool speckle = false;
    bool gaussian_compare = false;
    bool averaging_order_compare = false;
    bool record_pairwise = false;

    friend bool operator==(AnalysesConfig const&, AnalysesConfig const&) = default;
};

struct SpeckleConfig {
    double reference_theta_deg = 140.0;
    std::vector<double> offsets_deg = default_offsets();

    static std::vector<double> default_offsets();

    friend bool operator==(SpeckleConfig const&, SpeckleConfig const&) = default;
};

struct OutputConfig {
    std::string dir = "out";
    bool dump_smatrix = false;

    friend bool operator==(OutputConfig const&, OutputConfig const&) = default;
};

struct RunConfig {
    SceneSpec scene = SceneSpec::random_cube(50, 5.0);
    std::vector<StateConfig> states;
    EnsembleConfig ensemble;
    GridConfig grid;
    AnalysesConfig analyses;
    SpeckleConfig speckle;
    bool nonreciprocal_control = false;
    OutputConfig output;

    /// Checks every nested spec; throws InvalidArgument with the field path.
    void validate() const;

    EnsembleSpec ensemble_spec() const;

    friend bool operator==(RunConfig const&, RunConfig const&) = default;
};

/// Strict parse: unknown keys and wrongly typed values are rejected with the
/// offending path, e.g. "states[1].schmidt_rank: expected an integer".
RunConfig parse_config(nlohmann::json const& doc);
RunConfig parse_config_text(std::string const& text);
RunConfig load_config(std::filesystem::path const& path);

nlohmann::ordered_json to_json(RunConfig const& config);

/// 16 hex digits; covers every field that affects computed values and
/// ignores workers, the output section and an unused speckle section.
std::string config_hash(RunConfig const& config);

} // namespace biphoton
