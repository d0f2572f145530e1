#include <doctest.h>

#include <string>

#include "biphoton/config.hpp"
#include "biphoton/error.hpp"

using namespace biphoton;
using nlohmann::json;

namespace {

json base_doc() {
    return json::parse(R"({
        "scene": {"kind": "random_cube", "n_particles": 60, "box_edge": 5},
        "states": [{"kind": "entangled_pure", "schmidt_rank": 2, "theta_middle_deg": 150, "delta_theta_deg": 4},
                   {"kind": "fully_mixed", "schmidt_rank": 2, "theta_middle_deg": 150, "delta_theta_deg": 4}],
        "ensemble": {"n_realizations": 3, "master_seed": 11},
        "grid": {"theta_min_deg": -30, "theta_max_deg": 30, "step_deg": 1}
    })");
}

std::string error_of(json const& doc) {
    try {
        parse_config(doc).validate();
    } catch (InvalidArgument const& e) {
        return e.what();
    }
    return "";
}

bool contains(std::string const& s, std::string const& part) { return s.find(part) != std::string::npos; }

} // namespace

TEST_SUITE("config") {

TEST_CASE("parsing reads every section") {
    auto const c = parse_config(base_doc());
    CHECK(c.scene.kind == SceneKind::RandomCube);
    CHECK(c.scene.n_particles == 60);
    CHECK(c.states.size() == 2);
    CHECK(c.states[1].kind == StateKind::FullyMixed);
    CHECK(c.ensemble.n_realizations == 3);
    CHECK(c.ensemble.master_seed == 11);
    CHECK(c.grid.build().size() == 61);
    CHECK(c.analyses.cone_fit);
    CHECK_FALSE(c.nonreciprocal_control);
    CHECK(c.output.dir == "out");
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("serialization round-trips to a fixed point") {
    auto doc = base_doc();
    doc["speckle"] = {{"reference_theta_deg", 145.5}, {"offsets_deg", {-1.0, 0.0, 0.3}}};
    doc["analyses"] = {{"speckle", true}, {"record_pairwise", true}};
    doc["solver"] = {{"nonreciprocal_control", true}};
    doc["output"] = {{"dir", "x/y"}, {"dump_smatrix", true}};
    auto const first = parse_config(doc);
    auto const dumped = to_json(first);
    auto const second = parse_config(json::parse(dumped.dump()));
    CHECK(first == second);
    CHECK(to_json(second).dump() == dumped.dump());
    CHECK(config_hash(first) == config_hash(second));
}

TEST_CASE("deterministic scenes round-trip") {
    auto doc = base_doc();
    doc["scene"] = {{"kind", "deterministic"}, {"positions", {{0.0, 0.0, 0.0}, {1.5, 0.0, 0.25}}}};
    auto const c = parse_config(doc);
    CHECK(c.scene.kind == SceneKind::Deterministic);
    CHECK(c.scene.positions.size() == 2);
    CHECK(parse_config(json::parse(to_json(c).dump())) == c);

    doc["scene"] = {{"kind", "deterministic"}, {"layout", "triangle"}, {"spacing", 2.0}};
    auto const t = parse_config(doc);
    CHECK(t.scene.positions.size() == 3);
}

TEST_CASE("unknown keys are rejected with their path") {
    auto doc = base_doc();
    doc["ensembel"] = json::object();
    CHECK(error_of(doc) == "ensembel: unknown key");
    doc = base_doc();
    doc["states"][1]["schmidt"] = 2;
    CHECK(error_of(doc) == "states[1].schmidt: unknown key");
    doc = base_doc();
    doc["grid"]["steps"] = 1;
    CHECK(error_of(doc) == "grid.steps: unknown key");
}

TEST_CASE("wrong types are rejected with their path") {
    auto doc = base_doc();
    doc["states"][0]["schmidt_rank"] = "two";
    CHECK(error_of(doc) == "states[0].schmidt_rank: expected an integer");
    doc = base_doc();
    doc["scene"]["box_edge"] = "5";
    CHECK(error_of(doc) == "scene.box_edge: expected a number");
    doc = base_doc();
    doc["ensemble"]["n_realizations"] = -3;
    CHECK(error_of(doc) == "ensemble.n_realizations: expected a non-negative integer");
    doc = base_doc();
    doc["analyses"] = {{"speckle", 1}};
    CHECK(error_of(doc) == "analyses.speckle: expected true or false");
    doc = base_doc();
    doc["states"] = json::object();
    CHECK(contains(error_of(doc), "states: expected an array"));
}

TEST_CASE("semantic validation names the field") {
    auto doc = base_doc();
    doc["states"][1]["schmidt_rank"] = 0;
    CHECK(contains(error_of(doc), "states[1]"));
    CHECK(contains(error_of(doc), "schmidt_rank"));

    doc = base_doc();
    doc["states"][0]["kind"] = "squeezed";
    CHECK(contains(error_of(doc), "states[0].kind"));

    doc = base_doc();
    doc["states"][1] = doc["states"][0];
    CHECK(contains(error_of(doc), "states[1]: duplicate"));

    doc = base_doc();
    doc["ensemble"]["n_realizations"] = 0;
    CHECK(error_of(doc) == "ensemble.n_realizations: must be >= 1");

    doc = base_doc();
    doc["grid"]["step_deg"] = 0;
    CHECK(error_of(doc) == "grid.step_deg: must be > 0");

    doc = base_doc();
    doc["grid"]["theta_max_deg"] = 120;
    CHECK(contains(error_of(doc), "grid"));

    doc = base_doc();
    doc["scene"]["n_particles"] = 0;
    CHECK(contains(error_of(doc), "n_particles"));

    doc = base_doc();
    doc.erase("scene");
    CHECK(error_of(doc) == "scene: required");

    doc = base_doc();
    doc["states"] = json::array();
    CHECK(contains(error_of(doc), "states"));

    doc = base_doc();
    doc["output"] = {{"dir", ""}};
    CHECK(error_of(doc) == "output.dir: must not be empty");
}

TEST_CASE("malformed text is an input error") {
    CHECK_THROWS_AS(parse_config_text("{\"scene\": "), InvalidArgument);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), InvalidArgument);
}

TEST_CASE("hash tracks exactly the fields that change results") {
    auto const base = parse_config(base_doc());
    auto const h = config_hash(base);
    CHECK(h.size() == 16);

    auto c = base;
    c.ensemble.workers = 8;
    c.output.dir = "elsewhere";
    c.output.dump_smatrix = true;
    c.speckle.reference_theta_deg = 130.0;  // unused while the analysis is off
    CHECK(config_hash(c) == h);

    c = base;
    c.ensemble.master_seed = 12;
    CHECK(config_hash(c) != h);
    c = base;
    c.ensemble.n_realizations = 4;
    CHECK(config_hash(c) != h);
    c = base;
    c.states[0].delta_theta_deg = 4.5;
    CHECK(config_hash(c) != h);
    c = base;
    c.scene.n_particles = 61;
    CHECK(config_hash(c) != h);
    c = base;
    c.grid.step_deg = 0.5;
    CHECK(config_hash(c) != h);
    c = base;
    c.nonreciprocal_control = true;
    CHECK(config_hash(c) != h);

    c = base;
    c.analyses.speckle = true;
    auto const hs = config_hash(c);
    CHECK(hs != h);
    c.speckle.reference_theta_deg = 130.0;
    CHECK(config_hash(c) != hs);
}

TEST_CASE("ensemble spec mirrors the config") {
    auto doc = base_doc();
    doc["analyses"] = {{"speckle", true}};
    doc["speckle"] = {{"reference_theta_deg", 150}, {"offsets_deg", {0.0, 1.0}}};
    auto const c = parse_config(doc);
    auto const e = c.ensemble_spec();
    CHECK(e.n_realizations == 3);
    CHECK(e.master_seed == 11);
    CHECK(e.state_specs.size() == 2);
    CHECK(e.state_specs[0].theta_middle == doctest::Approx(deg_to_rad(150.0)));
    REQUIRE(e.speckle.has_value());
    CHECK(e.speckle->offsets.size() == 2);
    CHECK(e.speckle->offsets[1] == doctest::Approx(deg_to_rad(1.0)));
    CHECK(e.grid == c.grid.build());
}

}
