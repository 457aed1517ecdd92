#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gridseer/common/error.hpp"
#include "gridseer/common/fileio.hpp"
#include "gridseer/common/hash.hpp"
#include "gridseer/grid/model.hpp"

namespace gridseer::grid {

using json = nlohmann::json;

inline json to_json(const GridState& g) {
    json buses = json::array();
    for (const auto& b : g.buses) {
        buses.push_back({{"id", b.id},
                         {"kind", std::string(to_string(b.kind))},
                         {"v_mag", b.v_mag},
                         {"v_ang", b.v_ang},
                         {"p_load", b.p_load},
                         {"q_load", b.q_load},
                         {"base_kv", b.base_kv}});
    }
    json branches = json::array();
    for (const auto& br : g.branches) {
        branches.push_back({{"from", br.from_bus},
                            {"to", br.to_bus},
                            {"r", br.r},
                            {"x", br.x},
                            {"b_shunt", br.b_shunt},
                            {"mva_limit", br.mva_limit},
                            {"in_service", br.in_service}});
    }
    json gens = json::array();
    for (const auto& gen : g.generators) {
        gens.push_back({{"bus", gen.bus_id},
                        {"kind", std::string(to_string(gen.kind))},
                        {"p_rated", gen.p_rated},
                        {"p_set", gen.p_set},
                        {"q_min", gen.q_min},
                        {"q_max", gen.q_max},
                        {"cost_per_pu", gen.cost_per_pu},
                        {"on", gen.on}});
    }
    // nlohmann::json objects are std::map backed, so keys serialize sorted.
    return {{"base_mva", g.base_mva}, {"buses", buses}, {"branches", branches}, {"generators", gens}};
}

namespace detail {

inline BusKind parse_bus_kind(const std::string& s) {
    if (s == "Slack") return BusKind::Slack;
    if (s == "PV") return BusKind::PV;
    if (s == "PQ") return BusKind::PQ;
    throw ParseError("unknown bus kind \"" + s + "\"");
}

inline GenKind parse_gen_kind(const std::string& s) {
    if (s == "Solar") return GenKind::Solar;
    if (s == "Conventional") return GenKind::Conventional;
    throw ParseError("unknown generator kind \"" + s + "\"");
}

}  // namespace detail

/// Parses and validates. Structural problems are ParseError, rule violations
/// ValidationError.
inline GridState from_json(const json& j) {
    GridState g;
    try {
        g.base_mva = j.at("base_mva").get<double>();
        for (const auto& jb : j.at("buses")) {
            Bus b;
            b.id = jb.at("id").get<int>();
            b.kind = detail::parse_bus_kind(jb.at("kind").get<std::string>());
            b.v_mag = jb.at("v_mag").get<double>();
            b.v_ang = jb.at("v_ang").get<double>();
            b.p_load = jb.at("p_load").get<double>();
            b.q_load = jb.at("q_load").get<double>();
            b.base_kv = jb.at("base_kv").get<double>();
            g.buses.push_back(b);
        }
        for (const auto& jb : j.at("branches")) {
            Branch br;
            br.from_bus = jb.at("from").get<int>();
            br.to_bus = jb.at("to").get<int>();
            br.r = jb.at("r").get<double>();
            br.x = jb.at("x").get<double>();
            br.b_shunt = jb.at("b_shunt").get<double>();
            br.mva_limit = jb.at("mva_limit").get<double>();
            br.in_service = jb.at("in_service").get<bool>();
            g.branches.push_back(br);
        }
        for (const auto& jg : j.at("generators")) {
            Generator gen;
            gen.bus_id = jg.at("bus").get<int>();
            gen.kind = detail::parse_gen_kind(jg.at("kind").get<std::string>());
            gen.p_rated = jg.at("p_rated").get<double>();
            gen.p_set = jg.at("p_set").get<double>();
            gen.q_min = jg.at("q_min").get<double>();
            gen.q_max = jg.at("q_max").get<double>();
            gen.cost_per_pu = jg.at("cost_per_pu").get<double>();
            gen.on = jg.at("on").get<bool>();
            g.generators.push_back(gen);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("grid JSON: ") + e.what());
    }
    validate(g);
    return g;
}

inline std::string serialize(const GridState& g) { return to_json(g).dump(2) + "\n"; }

inline GridState parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("grid JSON: ") + e.what());
    }
    return from_json(j);
}

inline GridState load_grid(const std::filesystem::path& path) { return parse(read_file(path)); }

inline void save_grid(const GridState& g, const std::filesystem::path& path) {
    write_file_atomic(path, serialize(g));
}

/// Checksum of the canonical serialization; recorded in dataset sidecars.
inline std::string grid_hash(const GridState& g) { return fnv1a_hex(serialize(g)); }

}  // namespace gridseer::grid
