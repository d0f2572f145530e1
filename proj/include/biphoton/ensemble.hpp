#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "biphoton/geometry.hpp"
#include "biphoton/qstates.hpp"
#include "biphoton/scene.hpp"
#include "biphoton/solver.hpp"

namespace biphoton {

/// Speckle cross-correlation probe: far fields for a reference incidence and
/// for incidences offset from it, pooled over realizations and grid angles.
struct SpeckleProbe {
    Direction reference = Direction::from_degrees(140.0);
    std::vector<double> offsets;  // radians, added to reference.theta()

    friend bool operator==(SpeckleProbe const&, SpeckleProbe const&) = default;
};

struct EnsembleSpec {
    std::uint64_t n_realizations = 1;
    /// Index of the first realization; lets independent sub-runs be merged
    /// into exactly the accumulator a single run over the union would give.
    std::uint64_t first_realization = 0;
    std::uint64_t master_seed = 0;
    SceneSpec scene_spec;
    std::vector<InputStateSpec> state_specs;
    AngularGrid grid = AngularGrid::half_plane_default();
    bool record_pairwise = false;
    std::optional<SpeckleProbe> speckle;
    SolverOptions solver;

    void validate() const;
};

/// Running sums for one input state over the detection grid. Coinciding
/// detectors only, plus optional grid x grid matrices (row-major).
struct StateSums {
    std::vector<double> i1, i1_sq, i1_4;
    std::vector<double> i2, i2_sq, i2_i1sq;
    std::vector<double> c, c_sq;  // per-realization correlation, K = 1
    std::vector<double> pair_i2, pair_i1i1, pair_c;

    static StateSums zeros(std::size_t grid_size, bool pairwise);
    void add(StateSums const& other);

    friend bool operator==(StateSums const&, StateSums const&) = default;
};

/// Moments of the reference and offset far fields for each offset.
struct SpeckleSums {
    std::uint64_t samples = 0;  // (realization, detection angle) pairs
    std::vector<double> ref_i, off_i;    // sum |A|^2
    std::vector<double> ref_i2, off_i2;  // sum |A|^4
    std::vector<double> cross_i;         // sum |A_ref|^2 |A_off|^2
    std::vector<Complex> cross_field;    // sum A_ref conj(A_off)

    static SpeckleSums zeros(std::size_t n_offsets);
    void add(SpeckleSums const& other);

    friend bool operator==(SpeckleSums const&, SpeckleSums const&) = default;
};

struct RealizationSums {
    std::uint64_t count = 0;
    std::vector<StateSums> states;
    std::optional<SpeckleSums> speckle;

    void add(RealizationSums const& other);

    friend bool operator==(RealizationSums const&, RealizationSums const&) = default;
};

/// Mergeable ensemble statistics.
///
/// Contributions are keyed by realization index and combined along a fixed
/// dyadic tree: a node covering [i 2^l, (i+1) 2^l) is always the sum of its
/// two children, and siblings are combined as soon as both are present. The
/// stored node set therefore depends only on which realizations were absorbed,
/// so merge() is exactly associative and commutative and the totals are
/// bit-identical for any execution order or worker count.
class EnsembleAccumulator {
public:
    void absorb(std::uint64_t realization_index, RealizationSums contribution);
    void merge(EnsembleAccumulator const& other);

    std::uint64_t count() const;
    bool empty() const { return nodes_.empty(); }

    /// Canonical total: dyadic nodes folded in realization order.
    RealizationSums totals() const;

    friend bool operator==(EnsembleAccumulator const& a, EnsembleAccumulator const& b);

private:
    struct Node {
        int level = 0;
        RealizationSums sums;
    };
    void insert(std::uint64_t start, Node node);

    std::map<std::uint64_t, Node> nodes_;  // keyed by first realization index
};

/// Per-state curves derived from the accumulated sums.
struct AveragedCurves {
    std::vector<double> i1_bar, i1_stderr;
    std::vector<double> i2_bar, i2_stderr;
    std::vector<double> i2_bar_normalized, i2_normalized_stderr;
    std::vector<double> c_bar, c_bar_stderr;              // ratio of means
    std::vector<double> c_prime_bar, c_prime_bar_stderr;  // mean of ratios
    std::optional<std::vector<double>> c_bar_pairwise;    // row-major grid x grid
    std::optional<std::vector<double>> i2_bar_pairwise;
    std::uint64_t n_realizations = 0;
};

enum class AveragingOrder {
    RatioOfMeans,  // mean(I2(k,k')) / mean(I1(k) I1(k'))
    MeanOfRatios,  // mean over realizations of I2 / (I1 I1)
};

/// Coinciding-detector correlation in the requested averaging order, scaled
/// by the state's quantum-efficiency factor.
std::vector<double> averaged_correlation(StateSums const& sums, std::uint64_t count, AveragingOrder order,
                                         double qe_factor = 1.0);

AveragedCurves average_curves(StateSums const& sums, std::uint64_t count, InputStateSpec const& spec);

/// curve * (peak / max(curve)). Throws if max(curve) <= 0.
std::vector<double> normalize_to_peak(std::vector<double> const& curve, double peak = 2.0);

/// Every incidence needed by the spec's states and speckle probe, without
/// duplicates, in first-use order.
std::vector<Direction> collect_incidences(EnsembleSpec const& spec);

/// Statistics of a single realization (scene sampling, solve, currents).
RealizationSums realization_sums(EnsembleSpec const& spec, std::uint64_t realization_index);

/// Same, from an already assembled scattering matrix.
RealizationSums realization_sums(EnsembleSpec const& spec, ScatteringMatrix const& s);

struct EnsembleResult {
    EnsembleAccumulator accumulator;
    std::vector<AveragedCurves> curves;  // one per state spec, same order
    RealizationSums totals;
};

/// Runs every realization of the spec on `workers` threads. The result is
/// independent of the worker count. Any failing realization aborts the run
/// with an Error naming its index.
EnsembleResult run_ensemble(EnsembleSpec const& spec, unsigned workers = 1);

EnsembleResult finalize(EnsembleSpec const& spec, EnsembleAccumulator accumulator);

} // namespace biphoton
