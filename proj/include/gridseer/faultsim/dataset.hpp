#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridseer/common/error.hpp"
#include "gridseer/common/fileio.hpp"
#include "gridseer/common/parallel.hpp"
#include "gridseer/common/rng.hpp"
#include "gridseer/faultsim/trace.hpp"
#include "gridseer/grid/io.hpp"

namespace gridseer::faultsim {

struct FaultDataset {
    std::vector<VoltageTrace> traces;
    std::uint64_t seed = 0;
    std::string grid_hash;
    std::size_t steps = 0;
    std::size_t buses = 0;
    double dt = 0.040;
};

struct DatasetOptions {
    TraceOptions trace;
    unsigned threads = 0;
};

/// One enumerated case: a fault kind at a bus (BranchTrip cases trip the
/// bus's designated branch), or a NoFault slot.
struct CaseSpec {
    TraceKind kind;
    int bus;
    std::size_t case_index;
    std::size_t run;
};

/// Faulted traces for kind x bus x run in that nesting order, followed by an
/// equal number of NoFault traces. Every trace has its own RNG stream
/// derived from (seed, case index, run), so the result does not depend on
/// scheduling.
inline FaultDataset gen_fault_dataset(const grid::GridState& g, std::size_t runs_per_case,
                                      std::uint64_t seed, const DatasetOptions& opt = {}) {
    if (runs_per_case < 1) throw ValidationError("runs_per_case must be >= 1");
    const std::size_t n = g.bus_count();
    const auto base = powerflow::solve_powerflow(g);
    const auto trip_branch = designated_trip_branches(g, base);
    const SequenceNetworks nets(g);

    std::vector<CaseSpec> cases;
    for (std::size_t k = 0; k < kAllFaultKinds.size(); ++k)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t r = 0; r < runs_per_case; ++r)
                cases.push_back({trace_kind(kAllFaultKinds[k]), static_cast<int>(b + 1), k * n + b, r});
    const std::size_t faulted = cases.size();
    for (std::size_t i = 0; i < faulted; ++i)
        cases.push_back({TraceKind::NoFault, 0, kAllFaultKinds.size() * n, i});

    FaultDataset ds;
    ds.seed = seed;
    ds.grid_hash = grid::grid_hash(g);
    ds.steps = opt.trace.steps;
    ds.buses = n;
    ds.dt = opt.trace.dt;
    ds.traces.resize(cases.size());

    parallel_for(
        cases.size(),
        [&](std::size_t i) {
            const CaseSpec& c = cases[i];
            const std::uint64_t s = derive_seed(seed, c.case_index, c.run);
            std::optional<FaultSpec> spec;
            if (c.kind != TraceKind::NoFault) {
                Rng onset_rng(derive_seed(s, 0x6f6e736574ULL));
                const int onset = 10 + static_cast<int>(onset_rng.index(41));
                const auto fk = static_cast<FaultKind>(static_cast<int>(c.kind));
                spec = fk == FaultKind::BranchTrip
                           ? FaultSpec::trip(trip_branch[static_cast<std::size_t>(c.bus - 1)], c.bus, onset)
                           : FaultSpec::at_bus(fk, c.bus, 0.0, onset);
            }
            try {
                ds.traces[i] = synthesize_trace(g, spec, s, nets, opt.trace);
            } catch (const Error& e) {
                throw Error(e.code(), "case " + std::string(to_string(c.kind)) + " bus " +
                                          std::to_string(c.bus) + " run " + std::to_string(c.run) +
                                          ": " + e.what());
            }
        },
        opt.threads);
    return ds;
}

/// Count of traces per (kind, bus) label pair.
inline std::map<std::pair<int, int>, std::size_t> label_counts(const FaultDataset& ds) {
    std::map<std::pair<int, int>, std::size_t> out;
    for (const auto& t : ds.traces) ++out[{static_cast<int>(t.label_kind), t.label_bus}];
    return out;
}

// ---- file format ---------------------------------------------------------

inline nlohmann::json sidecar_json(const FaultDataset& ds) {
    return {{"seed", ds.seed}, {"grid_hash", ds.grid_hash}, {"T", ds.steps}, {"N", ds.buses}, {"dt", ds.dt}};
}

/// CSV: label_kind,label_bus,v_t{t}_b{b}... (time-major), one trace per row.
/// Voltages are written with 6 decimals (1e-6 pu, well under the noise
/// floor).
inline void write_dataset(const FaultDataset& ds, const std::filesystem::path& csv_path) {
    std::string out;
    out.reserve(ds.traces.size() * ds.steps * ds.buses * 9 + 4096);
    out += "label_kind,label_bus";
    for (std::size_t t = 0; t < ds.steps; ++t)
        for (std::size_t b = 1; b <= ds.buses; ++b)
            out += ",v_t" + std::to_string(t) + "_b" + std::to_string(b);
    out += '\n';
    char buf[32];
    for (const auto& tr : ds.traces) {
        out += to_string(tr.label_kind);
        out += ',';
        out += std::to_string(tr.label_bus);
        for (double v : tr.samples) {
            const int len = std::snprintf(buf, sizeof buf, ",%.6f", v);
            out.append(buf, static_cast<std::size_t>(len));
        }
        out += '\n';
    }
    write_file_atomic(csv_path, out);
    auto side = csv_path;
    side.replace_extension(".json");
    write_file_atomic(side, sidecar_json(ds).dump(2) + "\n");
}

inline FaultDataset read_dataset(const std::filesystem::path& csv_path) {
    auto side = csv_path;
    side.replace_extension(".json");
    FaultDataset ds;
    try {
        const auto j = nlohmann::json::parse(read_file(side));
        ds.seed = j.at("seed").get<std::uint64_t>();
        ds.grid_hash = j.at("grid_hash").get<std::string>();
        ds.steps = j.at("T").get<std::size_t>();
        ds.buses = j.at("N").get<std::size_t>();
        ds.dt = j.at("dt").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("dataset sidecar " + side.string() + ": " + e.what());
    }
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path.string());
    std::string line;
    std::getline(in, line);
    const std::size_t width = ds.steps * ds.buses;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        VoltageTrace tr;
        tr.steps = ds.steps;
        tr.buses = ds.buses;
        tr.dt = ds.dt;
        tr.samples.reserve(width);
        const char* p = line.c_str();
        const char* comma = std::strchr(p, ',');
        if (!comma) throw ParseError("dataset row " + std::to_string(row) + " is truncated");
        const auto kind = parse_trace_kind(std::string_view(p, static_cast<std::size_t>(comma - p)));
        if (!kind) throw ParseError("dataset row " + std::to_string(row) + " has an unknown label_kind");
        tr.label_kind = *kind;
        p = comma + 1;
        char* end = nullptr;
        tr.label_bus = static_cast<int>(std::strtol(p, &end, 10));
        p = end;
        while (*p == ',') {
            tr.samples.push_back(std::strtod(p + 1, &end));
            if (end == p + 1) throw ParseError("dataset row " + std::to_string(row) + " has a bad number");
            p = end;
        }
        if (tr.samples.size() != width)
            throw ParseError("dataset row " + std::to_string(row) + " has " +
                             std::to_string(tr.samples.size()) + " voltages, expected " + std::to_string(width));
        ds.traces.push_back(std::move(tr));
    }
    return ds;
}

}  // namespace gridseer::faultsim
