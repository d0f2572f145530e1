#include "biphoton/commands.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "biphoton/error.hpp"
#include "biphoton/oracle.hpp"
#include "biphoton/smatrix_io.hpp"

namespace biphoton {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

double mean_of(std::vector<double> const& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void write_text(fs::path const& path, std::string const& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot write " + path.string());
    os << text;
    if (!os)
        throw Error("write failed for " + path.string());
}

void write_json(fs::path const& path, ojson const& doc) {
    write_text(path, doc.dump(2) + "\n");
}

// JSON cannot hold NaN or infinity; those become null.
ojson number_or_null(double x) {
    return std::isfinite(x) ? ojson(x) : ojson(nullptr);
}

ojson cone_record(std::string const& state, std::string const& metric, ConeAnalysis const& a) {
    ojson r;
    r["state"] = state;
    r["metric"] = metric;
    if (a.fit) {
        r["peak_angle_rad"] = a.fit->peak_angle;
        r["peak_value"] = a.fit->peak_value;
        r["background"] = a.fit->background;
        r["fwhm_rad"] = a.fit->fwhm;
        r["enhancement"] = a.fit->enhancement;
        r["mean_free_path"] = a.fit->mean_free_path;
        r["kl_star"] = a.fit->kl_star;
    } else {
        r["error"] = a.error;
    }
    return r;
}

std::string compiler_version() {
#ifdef __VERSION__
    return __VERSION__;
#else
    return "unknown";
#endif
}

ojson manifest_header(std::string const& command, RunConfig const& config) {
    ojson m;
    m["tool"] = "biphoton";
    m["command"] = command;
    m["versions"] = {{"biphoton", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                   "." + std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", compiler_version()}};
    m["master_seed"] = config.ensemble.master_seed;
    m["config_hash"] = config_hash(config);
    m["n_realizations"] = config.ensemble.n_realizations;
    m["workers"] = config.ensemble.workers;
    m["config"] = to_json(config);
    return m;
}

std::vector<double> nan_vector(std::size_t n) {
    return std::vector<double>(n, std::numeric_limits<double>::quiet_NaN());
}

} // namespace

void apply_overrides(RunConfig& config, RunOverrides const& o) {
    if (o.workers)
        config.ensemble.workers = *o.workers;
    if (o.seed)
        config.ensemble.master_seed = *o.seed;
    if (o.output)
        config.output.dir = *o.output;
}

RunConfig resolve_config(fs::path const& path, RunOverrides const& overrides) {
    RunConfig c = load_config(path);
    apply_overrides(c, overrides);
    c.validate();
    return c;
}

void write_curve_csv(fs::path const& path, std::vector<double> const& x, std::vector<double> const& value,
                     std::vector<double> const& stderr_values) {
    if (x.size() != value.size() || x.size() != stderr_values.size())
        throw InvalidArgument("write_curve_csv: column lengths differ");
    std::string text = "theta_rad,value,stderr\n";
    char buf[96];
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x[i], value[i], stderr_values[i]);
        text += buf;
    }
    write_text(path, text);
}

void write_curve_csv(fs::path const& path, AngularGrid const& grid, std::vector<double> const& value,
                     std::vector<double> const& stderr_values) {
    write_curve_csv(path, grid.thetas(), value, stderr_values);
}

ConeAnalysis analyze_cone(std::vector<double> const& curve, AngularGrid const& grid, InputStateSpec const& spec) {
    ConeAnalysis a;
    try {
        a.fit = fit_cone(curve, grid, backscatter_angle(spec), cone_options_for(spec));
    } catch (Error const& e) {
        a.error = e.what();
    }
    return a;
}

std::size_t count_cone_peaks(std::vector<double> const& curve, AngularGrid const& grid) {
    if (grid.size() < 3)
        return 0;
    auto const& x = grid.thetas();
    double const step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    auto const window = static_cast<std::size_t>(std::llround(deg_to_rad(1.0) / step)) | 1u;
    auto const smooth = moving_average(curve, window);
    double const base = median(smooth);
    double const top = *std::max_element(smooth.begin(), smooth.end());
    auto const sep = static_cast<std::size_t>(std::llround(deg_to_rad(3.0) / step));
    return find_peaks(smooth, base + 0.25 * (top - base), std::max<std::size_t>(sep, 1)).size();
}

RunOutcome execute_run(RunConfig const& config, std::ostream& log) {
    auto const t0 = std::chrono::steady_clock::now();
    EnsembleSpec const spec = config.ensemble_spec();
    RunOutcome outcome{config, run_ensemble(spec, config.ensemble.workers), {}, {}, {}};
    auto const& grid = spec.grid;
    fs::path const root = config.output.dir;
    fs::create_directories(root);

    ojson records = ojson::array();
    ojson state_files = ojson::array();
    for (std::size_t s = 0; s < spec.state_specs.size(); ++s) {
        auto const& st = spec.state_specs[s];
        auto const& cv = outcome.result.curves[s];
        StateAnalysis sa;
        sa.label = st.label();
        sa.dir = root / sa.label;
        fs::create_directories(sa.dir);

        write_curve_csv(sa.dir / "i1.csv", grid, cv.i1_bar, cv.i1_stderr);
        write_curve_csv(sa.dir / "i2_coinciding.csv", grid, cv.i2_bar, cv.i2_stderr);
        write_curve_csv(sa.dir / "i2_normalized.csv", grid, cv.i2_bar_normalized, cv.i2_normalized_stderr);
        write_curve_csv(sa.dir / "c_ratio_of_means.csv", grid, cv.c_bar, cv.c_bar_stderr);
        write_curve_csv(sa.dir / "c_mean_of_ratios.csv", grid, cv.c_prime_bar, cv.c_prime_bar_stderr);
        ojson files = ojson::array(
            {"i1.csv", "i2_coinciding.csv", "i2_normalized.csv", "c_ratio_of_means.csv", "c_mean_of_ratios.csv"});
        if (cv.c_bar_pairwise) {
            std::string text = "theta1_rad,theta2_rad,c,i2\n";
            char buf[128];
            std::size_t const g = grid.size();
            for (std::size_t i = 0; i < g; ++i)
                for (std::size_t j = 0; j < g; ++j) {
                    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", grid.theta(i), grid.theta(j),
                                  (*cv.c_bar_pairwise)[i * g + j], (*cv.i2_bar_pairwise)[i * g + j]);
                    text += buf;
                }
            write_text(sa.dir / "c_pairwise.csv", text);
            files.push_back("c_pairwise.csv");
        }

        sa.c_bar_grid_mean = mean_of(cv.c_bar);
        sa.c_prime_bar_grid_mean = mean_of(cv.c_prime_bar);
        if (config.analyses.cone_fit) {
            sa.cone_single_photon = analyze_cone(cv.i1_bar, grid, st);
            sa.cone_two_photon = analyze_cone(cv.i2_bar, grid, st);
            sa.cone_peak_count = count_cone_peaks(cv.i2_bar, grid);
            records.push_back(cone_record(sa.label, "cone_fit_single_photon", sa.cone_single_photon));
            records.push_back(cone_record(sa.label, "cone_fit_two_photon", sa.cone_two_photon));
            records.push_back({{"state", sa.label}, {"metric", "two_photon_peak_count"}, {"value", sa.cone_peak_count}});
        }
        records.push_back({{"state", sa.label}, {"metric", "c_bar_grid_mean"}, {"value", sa.c_bar_grid_mean}});
        if (config.analyses.gaussian_compare && st.is_pair_state() && st.kind != StateKind::CoherentIncoherentSum) {
            auto const g = gaussian_prediction(st.schmidt_rank, 1.0);
            double const predicted = st.qe_factor * g.c_coinciding;
            records.push_back({{"state", sa.label},
                               {"metric", "gaussian_compare"},
                               {"predicted_c_coinciding", predicted},
                               {"measured_c_bar_grid_mean", sa.c_bar_grid_mean},
                               {"deviation", sa.c_bar_grid_mean - predicted}});
        }
        if (config.analyses.averaging_order_compare) {
            double max_diff = 0.0;
            for (std::size_t i = 0; i < cv.c_bar.size(); ++i)
                max_diff = std::max(max_diff, std::abs(cv.c_bar[i] - cv.c_prime_bar[i]));
            records.push_back({{"state", sa.label},
                               {"metric", "averaging_order_compare"},
                               {"ratio_of_means_grid_mean", sa.c_bar_grid_mean},
                               {"mean_of_ratios_grid_mean", sa.c_prime_bar_grid_mean},
                               {"grid_mean_difference", sa.c_bar_grid_mean - sa.c_prime_bar_grid_mean},
                               {"max_abs_difference", max_diff}});
        }
        state_files.push_back({{"label", sa.label}, {"dir", sa.label}, {"files", files}});
        outcome.states.push_back(std::move(sa));
        log << "state " << outcome.states.back().label << ": written\n";
    }

    if (spec.speckle && outcome.result.totals.speckle) {
        auto const sc = speckle_correlation(*outcome.result.totals.speckle, *spec.speckle);
        std::vector<double> offs_rad;
        for (double d : sc.offsets_deg)
            offs_rad.push_back(deg_to_rad(d));
        write_curve_csv(root / "speckle_gamma_exact.csv", offs_rad, sc.gamma_exact, nan_vector(offs_rad.size()));
        write_curve_csv(root / "speckle_gamma_wick.csv", offs_rad, sc.gamma_wick, nan_vector(offs_rad.size()));
        records.push_back({{"state", "speckle"},
                           {"metric", "speckle_correlation_width"},
                           {"reference_theta_deg", config.speckle.reference_theta_deg},
                           {"corr_width_deg", number_or_null(sc.corr_width_deg)}});
        outcome.speckle = sc;
    }

    if (config.output.dump_smatrix) {
        Scene const scene = sample_scene(spec.scene_spec, 0, spec.master_seed);
        auto const dirs = collect_incidences(spec);
        auto const s = assemble_smatrix(scene, dirs, spec.grid, PointScatterer::for_spec(spec.scene_spec), spec.solver);
        save_smatrix((root / "smatrix_r0.bsmx").string(), s);
    }

    outcome.report = {{"records", records}};
    write_json(root / "report.json", outcome.report);

    double const wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ojson m = manifest_header("run", config);
    m["wall_time_s"] = wall;
    m["outputs"] = {{"report", "report.json"}, {"states", state_files}};
    if (config.output.dump_smatrix)
        m["outputs"]["smatrix"] = "smatrix_r0.bsmx";
    if (outcome.speckle)
        m["outputs"]["speckle"] = ojson::array({"speckle_gamma_exact.csv", "speckle_gamma_wick.csv"});
    m["failures"] = ojson::array();
    write_json(root / "manifest.json", m);
    return outcome;
}

namespace {

int run_pipeline(std::string const& command, RunConfig config, bool dry_run, std::ostream& out,
                 std::ostream& err) {
    if (dry_run) {
        out << "config ok, hash " << config_hash(config) << "\n";
        return kExitOk;
    }
    auto const t0 = std::chrono::steady_clock::now();
    try {
        auto const outcome = execute_run(config, err);
        out << "wrote " << outcome.states.size() << " state(s) to " << config.output.dir << "\n";
        for (auto const& s : outcome.states) {
            out << s.label << ": c_bar grid mean " << s.c_bar_grid_mean;
            if (s.cone_single_photon.fit)
                out << ", single-photon cone enhancement " << s.cone_single_photon.fit->enhancement << " fwhm "
                    << s.cone_single_photon.fit->fwhm << " rad";
            if (s.cone_two_photon.fit)
                out << ", two-photon cone enhancement " << s.cone_two_photon.fit->enhancement;
            out << "\n";
        }
        if (outcome.speckle)
            out << "speckle correlation width " << outcome.speckle->corr_width_deg << " deg\n";
        return kExitOk;
    } catch (InvalidArgument const& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (Error const& e) {
        err << "error: " << e.what() << "\n";
        fs::create_directories(config.output.dir);
        ojson m = manifest_header(command, config);
        m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        m["outputs"] = ojson::object();
        m["failures"] = ojson::array({e.what()});
        write_json(fs::path(config.output.dir) / "manifest.json", m);
        return kExitComputeFailure;
    }
}

template <class F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (InvalidArgument const& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (std::exception const& e) {
        err << "error: " << e.what() << "\n";
        return kExitComputeFailure;
    }
}

} // namespace

int cmd_run(fs::path const& config_path, RunOverrides const& overrides, bool dry_run, std::ostream& out,
            std::ostream& err) {
    return guarded(err, [&] { return run_pipeline("run", resolve_config(config_path, overrides), dry_run, out, err); });
}

int cmd_speckle(fs::path const& config_path, RunOverrides const& overrides, bool dry_run, std::ostream& out,
                std::ostream& err) {
    return guarded(err, [&] {
        RunConfig c = load_config(config_path);
        apply_overrides(c, overrides);
        c.analyses.speckle = true;
        c.validate();
        return run_pipeline("speckle", c, dry_run, out, err);
    });
}

// ---------------------------------------------------------------------------
// Few-body

void FewBodyParams::validate() const {
    if (kinds.empty())
        throw InvalidArgument("fewbody: at least one state kind is required");
    (void)fixed_layout(layout, spacing, particle_radius, refractive_index).validate();
    for (auto kind : kinds) {
        StateConfig sc{kind, schmidt_rank, theta_middle_deg, delta_theta_deg, 1.0};
        auto const spec = sc.to_spec();
        spec.validate();
        (void)required_directions(spec);
    }
    (void)grid.build();
}

FewBodyResult run_fewbody(FewBodyParams const& p) {
    p.validate();
    SceneSpec const scene_spec = fixed_layout(p.layout, p.spacing, p.particle_radius, p.refractive_index);
    Scene const scene = sample_scene(scene_spec, 0, 0);
    FewBodyResult r;
    r.grid = p.grid.build();
    std::vector<Direction> dirs;
    for (auto kind : p.kinds) {
        auto const spec = StateConfig{kind, p.schmidt_rank, p.theta_middle_deg, p.delta_theta_deg, 1.0}.to_spec();
        r.states.push_back(spec);
        for (auto const& d : required_directions(spec))
            if (std::find(dirs.begin(), dirs.end(), d) == dirs.end())
                dirs.push_back(d);
    }
    auto const s = assemble_smatrix(scene, dirs, r.grid, PointScatterer::for_spec(scene_spec));
    for (auto const& spec : r.states) {
        auto const cur = compute_currents(s, spec);
        r.correlation.push_back(cur.correlation(spec.qe_factor));
        r.i2.push_back(cur.i2_coinciding);
    }
    return r;
}

int cmd_fewbody(FewBodyParams const& p, bool dry_run, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        p.validate();
        if (dry_run) {
            out << "parameters ok\n";
            return kExitOk;
        }
        auto const r = run_fewbody(p);
        fs::path const root = p.output_dir;
        fs::create_directories(root);
        ojson summary;
        summary["layout"] = to_string(p.layout);
        summary["spacing"] = p.spacing;
        summary["states"] = ojson::array();
        for (std::size_t s = 0; s < r.states.size(); ++s) {
            auto const label = r.states[s].label();
            auto const& c = r.correlation[s];
            write_curve_csv(root / ("c_" + label + ".csv"), r.grid, c, nan_vector(c.size()));
            write_curve_csv(root / ("i2_" + label + ".csv"), r.grid, r.i2[s], nan_vector(c.size()));
            auto const [lo, hi] = std::minmax_element(c.begin(), c.end());
            auto const peaks = find_peaks(c, -std::numeric_limits<double>::infinity(), 1);
            summary["states"].push_back({{"label", label},
                                         {"file", "c_" + label + ".csv"},
                                         {"c_max", *hi},
                                         {"c_min", *lo},
                                         {"c_range", *hi - *lo},
                                         {"theta_at_max_rad", r.grid.theta(static_cast<std::size_t>(hi - c.begin()))},
                                         {"local_maxima", peaks.size()}});
            out << label << ": max C " << *hi << ", range " << (*hi - *lo) << ", " << peaks.size()
                << " local maxima\n";
        }
        write_json(root / "summary.json", summary);
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// Sweeps

SweepAxis parse_sweep_axis(std::string const& name) {
    if (name == "schmidt_rank")
        return SweepAxis::SchmidtRank;
    if (name == "delta_theta")
        return SweepAxis::DeltaTheta;
    if (name == "density")
        return SweepAxis::Density;
    if (name == "n_realizations")
        return SweepAxis::NRealizations;
    throw InvalidArgument("sweep axis '" + name + "' (expected schmidt_rank, delta_theta, density, n_realizations)");
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::SchmidtRank: return "schmidt_rank";
    case SweepAxis::DeltaTheta: return "delta_theta";
    case SweepAxis::Density: return "density";
    case SweepAxis::NRealizations: return "n_realizations";
    }
    return "?";
}

std::vector<RunConfig> sweep_configs(RunConfig const& base, SweepAxis axis, std::vector<double> const& values) {
    if (values.empty())
        throw InvalidArgument("sweep: values must not be empty");
    auto as_count = [](double v, char const* what) {
        if (!(v >= 1.0) || v != std::floor(v) || v > 1e12)
            throw InvalidArgument(std::string("sweep: ") + what + " values must be positive integers");
        return static_cast<std::uint64_t>(v);
    };
    std::vector<RunConfig> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double const v = values[i];
        RunConfig c = base;
        switch (axis) {
        case SweepAxis::SchmidtRank:
            for (auto& s : c.states)
                s.schmidt_rank = static_cast<int>(as_count(v, "schmidt_rank"));
            break;
        case SweepAxis::DeltaTheta:
            for (auto& s : c.states)
                s.delta_theta_deg = v;
            break;
        case SweepAxis::Density:
            if (c.scene.kind != SceneKind::RandomCube)
                throw InvalidArgument("sweep: density axis needs a random_cube scene");
            c.scene.n_particles = as_count(v, "density (particle count)");
            break;
        case SweepAxis::NRealizations:
            c.ensemble.n_realizations = as_count(v, "n_realizations");
            break;
        }
        c.ensemble.master_seed = realization_seed(base.ensemble.master_seed, 0x5eed000000000000ULL + i);
        char name[64];
        std::snprintf(name, sizeof name, "%s_%g", to_string(axis).c_str(), v);
        c.output.dir = (fs::path(base.output.dir) / name).string();
        try {
            c.validate();
        } catch (InvalidArgument const& e) {
            throw InvalidArgument(std::string("sweep value ") + name + ": " + e.what());
        }
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

ojson trend_verdicts(std::vector<std::optional<ConeFit>> const& fits) {
    bool complete = std::all_of(fits.begin(), fits.end(), [](auto const& f) { return f.has_value(); });
    if (!complete)
        return {{"complete", false}};
    bool fwhm_strict = true, fwhm_nondec = true, enh_nondec = true;
    for (std::size_t i = 1; i < fits.size(); ++i) {
        fwhm_strict = fwhm_strict && fits[i]->fwhm > fits[i - 1]->fwhm;
        fwhm_nondec = fwhm_nondec && fits[i]->fwhm >= fits[i - 1]->fwhm;
        enh_nondec = enh_nondec && fits[i]->enhancement >= fits[i - 1]->enhancement;
    }
    return {{"complete", true},
            {"fwhm_strictly_increasing", fwhm_strict},
            {"fwhm_nondecreasing", fwhm_nondec},
            {"enhancement_nondecreasing", enh_nondec}};
}

} // namespace

int cmd_sweep(fs::path const& config_path, SweepAxis axis, std::vector<double> const& values,
              RunOverrides const& overrides, bool dry_run, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunConfig const base = resolve_config(config_path, overrides);
        auto const configs = sweep_configs(base, axis, values);
        if (dry_run) {
            for (auto const& c : configs)
                out << c.output.dir << ": config ok, hash " << config_hash(c) << "\n";
            return kExitOk;
        }
        ojson points = ojson::array();
        std::size_t const n_states = base.states.size();
        std::vector<std::vector<std::optional<ConeFit>>> fits1(n_states), fits2(n_states);
        for (std::size_t i = 0; i < configs.size(); ++i) {
            err << "sweep " << to_string(axis) << " = " << values[i] << "\n";
            RunOutcome oc;
            try {
                oc = execute_run(configs[i], err);
            } catch (Error const& e) {
                err << "error: sweep value " << values[i] << ": " << e.what() << "\n";
                return kExitComputeFailure;
            }
            ojson states = ojson::array();
            for (std::size_t s = 0; s < n_states; ++s) {
                auto const& sa = oc.states[s];
                fits1[s].push_back(sa.cone_single_photon.fit);
                fits2[s].push_back(sa.cone_two_photon.fit);
                states.push_back({{"label", sa.label},
                                  {"cone_single_photon", cone_record(sa.label, "cone_fit_single_photon",
                                                                     sa.cone_single_photon)},
                                  {"cone_two_photon", cone_record(sa.label, "cone_fit_two_photon",
                                                                  sa.cone_two_photon)},
                                  {"two_photon_peak_count", sa.cone_peak_count},
                                  {"c_bar_grid_mean", sa.c_bar_grid_mean}});
            }
            points.push_back({{"value", values[i]},
                              {"dir", fs::path(configs[i].output.dir).filename().string()},
                              {"master_seed", configs[i].ensemble.master_seed},
                              {"states", states}});
        }
        ojson trends = ojson::array();
        for (std::size_t s = 0; s < n_states; ++s)
            trends.push_back({{"state_index", s},
                              {"single_photon", trend_verdicts(fits1[s])},
                              {"two_photon", trend_verdicts(fits2[s])}});
        ojson summary;
        summary["axis"] = to_string(axis);
        summary["values"] = values;
        summary["base_master_seed"] = base.ensemble.master_seed;
        summary["points"] = points;
        summary["trends"] = trends;
        write_json(fs::path(base.output.dir) / "sweep_summary.json", summary);
        out << "sweep summary written to " << (fs::path(base.output.dir) / "sweep_summary.json").string() << "\n";
        for (std::size_t s = 0; s < n_states; ++s)
            out << "state " << s << " single-photon trend " << trends[s]["single_photon"].dump()
                << ", two-photon trend " << trends[s]["two_photon"].dump() << "\n";
        return kExitOk;
    });
}

// ---------------------------------------------------------------------------
// Oracle spot check

OracleCheckResult run_oracle_check(ScatteringMatrix const& s, OracleCheckParams const& p) {
    auto const spec = p.state.to_spec();
    spec.validate();
    if (p.rows.empty() || p.rows.size() > oracle::kMaxOutputModes)
        throw InvalidArgument("oracle-check: give between 1 and 8 detection rows");
    for (auto r : p.rows)
        if (r >= s.rows())
            throw InvalidArgument("oracle-check: row " + std::to_string(r) + " outside the matrix");
    auto const sub = oracle::oracle_subblock(s, spec, p.rows);
    auto rel = [](double a, double b) {
        double const scale = std::max({std::abs(a), std::abs(b), 1e-300});
        return std::abs(a - b) / scale;
    };
    OracleCheckResult res;
    for (std::size_t a = 0; a < p.rows.size(); ++a)
        for (std::size_t b = 0; b < p.rows.size(); ++b) {
            auto const o = oracle::oracle_currents(sub, spec, a, b);
            double const i1a = single_photon_current(s, spec, p.rows[a]);
            double const i1b = single_photon_current(s, spec, p.rows[b]);
            double const i2 = two_photon_current(s, spec, p.rows[a], p.rows[b]);
            res.max_rel_error = std::max({res.max_rel_error, rel(i1a, o.i1_i), rel(i1b, o.i1_j), rel(i2, o.i2)});
            ++res.comparisons;
        }
    return res;
}

int cmd_oracle_check(OracleCheckParams const& p, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto const s = load_smatrix(p.smatrix_path);
        auto const r = run_oracle_check(s, p);
        bool const ok = r.max_rel_error <= p.tolerance;
        out << (ok ? "PASS" : "FAIL") << " oracle-check: " << r.comparisons << " detector pairs, max relative error "
            << r.max_rel_error << " (tolerance " << p.tolerance << ")\n";
        return ok ? kExitOk : kExitComputeFailure;
    });
}

} // namespace biphoton
