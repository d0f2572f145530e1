#include "biphoton/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "biphoton/error.hpp"

namespace biphoton {

using nlohmann::json;

namespace {

// Reads the members of one JSON object, remembering which keys were consumed
// so that leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(json const& value, std::string path) : value_(value), path_(std::move(path)) {
        if (!value_.is_object())
            throw InvalidArgument(label() + "expected an object");
    }

    std::string key_path(std::string const& key) const { return path_.empty() ? key : path_ + "." + key; }

    json const* find(std::string const& key) {
        allowed_.insert(key);
        auto it = value_.find(key);
        return it == value_.end() ? nullptr : &*it;
    }

    double number(std::string const& key, double fallback) {
        json const* v = find(key);
        if (!v)
            return fallback;
        if (!v->is_number())
            throw InvalidArgument(key_path(key) + ": expected a number");
        return v->get<double>();
    }

    std::uint64_t unsigned_integer(std::string const& key, std::uint64_t fallback) {
        json const* v = find(key);
        if (!v)
            return fallback;
        if (v->is_number_unsigned())
            return v->get<std::uint64_t>();
        if (!v->is_number_integer() || v->get<std::int64_t>() < 0)
            throw InvalidArgument(key_path(key) + ": expected a non-negative integer");
        return static_cast<std::uint64_t>(v->get<std::int64_t>());
    }

    int integer(std::string const& key, int fallback) {
        json const* v = find(key);
        if (!v)
            return fallback;
        if (!v->is_number_integer())
            throw InvalidArgument(key_path(key) + ": expected an integer");
        auto const x = v->get<std::int64_t>();
        if (x < -1000000 || x > 1000000)
            throw InvalidArgument(key_path(key) + ": out of range");
        return static_cast<int>(x);
    }

    bool boolean(std::string const& key, bool fallback) {
        json const* v = find(key);
        if (!v)
            return fallback;
        if (!v->is_boolean())
            throw InvalidArgument(key_path(key) + ": expected true or false");
        return v->get<bool>();
    }

    std::string string(std::string const& key, std::string fallback) {
        json const* v = find(key);
        if (!v)
            return fallback;
        if (!v->is_string())
            throw InvalidArgument(key_path(key) + ": expected a string");
        return v->get<std::string>();
    }

    /// Call after all reads: anything not looked up is a typo.
    void reject_unknown() const {
        for (auto const& [key, _] : value_.items())
            if (!allowed_.contains(key))
                throw InvalidArgument(key_path(key) + ": unknown key");
    }

private:
    std::string label() const { return path_.empty() ? "config: " : path_ + ": "; }

    json const& value_;
    std::string path_;
    std::set<std::string> allowed_;
};

template <class F>
auto with_prefix(std::string const& prefix, F&& f) {
    try {
        return f();
    } catch (InvalidArgument const& e) {
        std::string m = e.what();
        if (m.rfind(prefix, 0) == 0)
            throw;
        throw InvalidArgument(prefix + ": " + m);
    }
}

SceneSpec parse_scene(json const& value) {
    ObjectReader r(value, "scene");
    std::string const kind = r.string("kind", "random_cube");
    SceneSpec spec;
    double const radius = r.number("particle_radius", kDefaultParticleRadius);
    double const index = r.number("refractive_index", kDefaultRefractiveIndex);
    if (kind == "random_cube") {
        spec = SceneSpec::random_cube(r.unsigned_integer("n_particles", 0), r.number("box_edge", 0.0), radius, index);
    } else if (kind == "deterministic") {
        json const* layout = r.find("layout");
        json const* positions = r.find("positions");
        if (layout && positions)
            throw InvalidArgument("scene: give either layout or positions, not both");
        if (layout) {
            if (!layout->is_string())
                throw InvalidArgument("scene.layout: expected a string");
            double const spacing = r.number("spacing", 1.0);
            spec = with_prefix("scene.layout", [&] {
                return fixed_layout(parse_layout(layout->get<std::string>()), spacing, radius, index);
            });
        } else {
            if (!positions || !positions->is_array())
                throw InvalidArgument("scene.positions: expected an array of [x, y, z]");
            std::vector<Vec3> pts;
            for (std::size_t i = 0; i < positions->size(); ++i) {
                auto const& p = (*positions)[i];
                if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() || !p[2].is_number())
                    throw InvalidArgument("scene.positions[" + std::to_string(i) + "]: expected [x, y, z]");
                pts.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
            }
            spec = SceneSpec::deterministic(std::move(pts), radius, index);
        }
    } else {
        throw InvalidArgument("scene.kind: unknown kind '" + kind + "' (expected random_cube or deterministic)");
    }
    spec.min_separation = r.number("min_separation", 0.0);
    r.reject_unknown();
    return spec;
}

StateConfig parse_state(json const& value, std::string const& path) {
    ObjectReader r(value, path);
    StateConfig s;
    std::string const kind = r.string("kind", "");
    if (kind.empty())
        throw InvalidArgument(path + ".kind: required");
    s.kind = with_prefix(path + ".kind", [&] { return parse_state_kind(kind); });
    s.schmidt_rank = r.integer("schmidt_rank", s.schmidt_rank);
    s.theta_middle_deg = r.number("theta_middle_deg", s.theta_middle_deg);
    s.delta_theta_deg = r.number("delta_theta_deg", s.delta_theta_deg);
    s.qe_factor = r.number("qe_factor", s.qe_factor);
    r.reject_unknown();
    return s;
}

std::vector<double> number_list(json const& value, std::string const& path) {
    if (!value.is_array())
        throw InvalidArgument(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_number())
            throw InvalidArgument(path + "[" + std::to_string(i) + "]: expected a number");
        out.push_back(value[i].get<double>());
    }
    return out;
}

std::string scene_kind_name(SceneKind kind) {
    return kind == SceneKind::RandomCube ? "random_cube" : "deterministic";
}

} // namespace

InputStateSpec StateConfig::to_spec() const {
    InputStateSpec s;
    s.kind = kind;
    s.schmidt_rank = schmidt_rank;
    s.theta_middle = deg_to_rad(theta_middle_deg);
    s.delta_theta = deg_to_rad(delta_theta_deg);
    s.qe_factor = qe_factor;
    return s;
}

AngularGrid GridConfig::build() const {
    if (!std::isfinite(theta_min_deg) || !std::isfinite(theta_max_deg) || !std::isfinite(phi_deg))
        throw InvalidArgument("grid: angles must be finite");
    if (!(step_deg > 0.0))
        throw InvalidArgument("grid.step_deg: must be > 0");
    if (theta_min_deg < -90.0 || theta_max_deg > 90.0)
        throw InvalidArgument("grid: theta range must lie within [-90, 90] deg");
    if (!(theta_max_deg >= theta_min_deg))
        throw InvalidArgument("grid.theta_max_deg: must be >= theta_min_deg");
    if ((theta_max_deg - theta_min_deg) / step_deg > 1e6)
        throw InvalidArgument("grid.step_deg: too many grid points");
    return AngularGrid::uniform(deg_to_rad(theta_min_deg), deg_to_rad(theta_max_deg), deg_to_rad(step_deg),
                                deg_to_rad(phi_deg));
}

std::vector<double> SpeckleConfig::default_offsets() {
    std::vector<double> out;
    for (int i = -24; i <= 24; ++i)
        out.push_back(0.25 * i);
    return out;
}

void RunConfig::validate() const {
    scene.validate();
    if (states.empty())
        throw InvalidArgument("states: at least one input state is required");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < states.size(); ++i) {
        std::string const prefix = "states[" + std::to_string(i) + "]";
        try {
            auto const spec = states[i].to_spec();
            spec.validate();
            (void)required_directions(spec);
            if (!labels.insert(spec.label()).second)
                throw InvalidArgument(": duplicate of an earlier state");
        } catch (InvalidArgument const& e) {
            std::string m = e.what();
            if (m.rfind("state", 0) == 0)
                m = m.substr(5);
            throw InvalidArgument(prefix + m);
        }
    }
    if (ensemble.n_realizations < 1)
        throw InvalidArgument("ensemble.n_realizations: must be >= 1");
    if (ensemble.workers < 1)
        throw InvalidArgument("ensemble.workers: must be >= 1");
    (void)grid.build();
    if (analyses.speckle) {
        if (speckle.offsets_deg.empty())
            throw InvalidArgument("speckle.offsets_deg: at least one offset is required");
        for (std::size_t i = 0; i < speckle.offsets_deg.size(); ++i) {
            double const t = speckle.reference_theta_deg + speckle.offsets_deg[i];
            if (!std::isfinite(t) || t <= 90.0 || t >= 270.0)
                throw InvalidArgument("speckle.offsets_deg[" + std::to_string(i) +
                                      "]: incidence outside (90, 270) deg");
        }
    }
    if (output.dir.empty())
        throw InvalidArgument("output.dir: must not be empty");
    ensemble_spec().validate();
}

EnsembleSpec RunConfig::ensemble_spec() const {
    EnsembleSpec e;
    e.n_realizations = ensemble.n_realizations;
    e.master_seed = ensemble.master_seed;
    e.scene_spec = scene;
    for (auto const& s : states)
        e.state_specs.push_back(s.to_spec());
    e.grid = grid.build();
    e.record_pairwise = analyses.record_pairwise;
    if (analyses.speckle) {
        SpeckleProbe probe;
        probe.reference = Direction::from_degrees(speckle.reference_theta_deg);
        for (double o : speckle.offsets_deg)
            probe.offsets.push_back(deg_to_rad(o));
        e.speckle = probe;
    }
    e.solver.nonreciprocal_control = nonreciprocal_control;
    return e;
}

RunConfig parse_config(json const& doc) {
    ObjectReader root(doc, "");
    RunConfig c;

    if (json const* v = root.find("scene"))
        c.scene = parse_scene(*v);
    else
        throw InvalidArgument("scene: required");

    json const* states = root.find("states");
    if (!states || !states->is_array())
        throw InvalidArgument("states: expected an array of state objects");
    for (std::size_t i = 0; i < states->size(); ++i)
        c.states.push_back(parse_state((*states)[i], "states[" + std::to_string(i) + "]"));

    if (json const* v = root.find("ensemble")) {
        ObjectReader r(*v, "ensemble");
        c.ensemble.n_realizations = r.unsigned_integer("n_realizations", c.ensemble.n_realizations);
        c.ensemble.master_seed = r.unsigned_integer("master_seed", c.ensemble.master_seed);
        auto const w = r.unsigned_integer("workers", c.ensemble.workers);
        if (w > 4096)
            throw InvalidArgument("ensemble.workers: out of range");
        c.ensemble.workers = static_cast<unsigned>(w);
        r.reject_unknown();
    }
    if (json const* v = root.find("grid")) {
        ObjectReader r(*v, "grid");
        c.grid.theta_min_deg = r.number("theta_min_deg", c.grid.theta_min_deg);
        c.grid.theta_max_deg = r.number("theta_max_deg", c.grid.theta_max_deg);
        c.grid.step_deg = r.number("step_deg", c.grid.step_deg);
        c.grid.phi_deg = r.number("phi_deg", c.grid.phi_deg);
        r.reject_unknown();
    }
    if (json const* v = root.find("analyses")) {
        ObjectReader r(*v, "analyses");
        c.analyses.cone_fit = r.boolean("cone_fit", c.analyses.cone_fit);
        c.analyses.speckle = r.boolean("speckle", c.analyses.speckle);
        c.analyses.gaussian_compare = r.boolean("gaussian_compare", c.analyses.gaussian_compare);
        c.analyses.averaging_order_compare =
            r.boolean("averaging_order_compare", c.analyses.averaging_order_compare);
        c.analyses.record_pairwise = r.boolean("record_pairwise", c.analyses.record_pairwise);
        r.reject_unknown();
    }
    if (json const* v = root.find("speckle")) {
        ObjectReader r(*v, "speckle");
        c.speckle.reference_theta_deg = r.number("reference_theta_deg", c.speckle.reference_theta_deg);
        if (json const* o = r.find("offsets_deg"))
            c.speckle.offsets_deg = number_list(*o, "speckle.offsets_deg");
        r.reject_unknown();
    }
    if (json const* v = root.find("solver")) {
        ObjectReader r(*v, "solver");
        c.nonreciprocal_control = r.boolean("nonreciprocal_control", c.nonreciprocal_control);
        r.reject_unknown();
    }
    if (json const* v = root.find("output")) {
        ObjectReader r(*v, "output");
        c.output.dir = r.string("dir", c.output.dir);
        c.output.dump_smatrix = r.boolean("dump_smatrix", c.output.dump_smatrix);
        r.reject_unknown();
    }
    root.reject_unknown();
    return c;
}

RunConfig parse_config_text(std::string const& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (json::parse_error const& e) {
        throw InvalidArgument(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

RunConfig load_config(std::filesystem::path const& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("config: cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

nlohmann::ordered_json to_json(RunConfig const& c) {
    using oj = nlohmann::ordered_json;
    oj scene;
    scene["kind"] = scene_kind_name(c.scene.kind);
    if (c.scene.kind == SceneKind::RandomCube) {
        scene["n_particles"] = c.scene.n_particles;
        scene["box_edge"] = c.scene.box_edge;
    } else {
        oj pts = oj::array();
        for (auto const& p : c.scene.positions)
            pts.push_back(oj::array({p.x, p.y, p.z}));
        scene["positions"] = pts;
    }
    scene["particle_radius"] = c.scene.particle_radius;
    scene["refractive_index"] = c.scene.refractive_index;
    scene["min_separation"] = c.scene.min_separation;

    oj states = oj::array();
    for (auto const& s : c.states) {
        oj o;
        o["kind"] = to_string(s.kind);
        o["schmidt_rank"] = s.schmidt_rank;
        o["theta_middle_deg"] = s.theta_middle_deg;
        o["delta_theta_deg"] = s.delta_theta_deg;
        o["qe_factor"] = s.qe_factor;
        states.push_back(o);
    }

    oj out;
    out["scene"] = scene;
    out["states"] = states;
    out["ensemble"] = {{"n_realizations", c.ensemble.n_realizations},
                       {"master_seed", c.ensemble.master_seed},
                       {"workers", c.ensemble.workers}};
    out["grid"] = {{"theta_min_deg", c.grid.theta_min_deg},
                   {"theta_max_deg", c.grid.theta_max_deg},
                   {"step_deg", c.grid.step_deg},
                   {"phi_deg", c.grid.phi_deg}};
    out["analyses"] = {{"cone_fit", c.analyses.cone_fit},
                       {"speckle", c.analyses.speckle},
                       {"gaussian_compare", c.analyses.gaussian_compare},
                       {"averaging_order_compare", c.analyses.averaging_order_compare},
                       {"record_pairwise", c.analyses.record_pairwise}};
    out["speckle"] = {{"reference_theta_deg", c.speckle.reference_theta_deg},
                      {"offsets_deg", c.speckle.offsets_deg}};
    out["solver"] = {{"nonreciprocal_control", c.nonreciprocal_control}};
    out["output"] = {{"dir", c.output.dir}, {"dump_smatrix", c.output.dump_smatrix}};
    return out;
}

std::string config_hash(RunConfig const& c) {
    auto doc = to_json(c);
    doc.erase("output");
    doc["ensemble"].erase("workers");
    if (!c.analyses.speckle)
        doc.erase("speckle");
    std::string const text = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace biphoton
