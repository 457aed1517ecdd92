#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridseer/common/error.hpp"
#include "gridseer/common/fileio.hpp"
#include "gridseer/dispatch/scenario.hpp"

namespace gridseer::dispatch {

inline nlohmann::json sidecar_json(const SubsetDataset& ds) {
    const auto& s0 = ds.scenarios.front();
    return {{"l1_min", ds.scaler.l1_min}, {"l1_max", ds.scaler.l1_max}, {"seed", ds.seed},
            {"grid_hash", ds.grid_hash},  {"days", ds.days},            {"n_solar", s0.mask.size()},
            {"buses", s0.pre_voltages.size()}};
}

/// Leading columns: day, hour, v1..vN, g1..gK, committed_total, actual_total,
/// l1, l2, total. The trailing columns carry what is needed to re-simulate
/// the hour. Numbers are written at 17 significant digits.
inline std::string scenarios_csv(const SubsetDataset& ds) {
    if (ds.scenarios.empty()) throw ValidationError("no scenarios to write");
    const std::size_t nb = ds.scenarios.front().pre_voltages.size();
    const std::size_t ns = ds.scenarios.front().mask.size();
    std::string out = "day,hour";
    for (std::size_t i = 1; i <= nb; ++i) out += ",v" + std::to_string(i);
    for (std::size_t k = 1; k <= ns; ++k) out += ",g" + std::to_string(k);
    out += ",committed_total,actual_total,l1,l2,total";
    for (std::size_t k = 1; k <= ns; ++k) out += ",committed" + std::to_string(k);
    for (std::size_t k = 1; k <= ns; ++k) out += ",actual" + std::to_string(k);
    out += ",irradiance,ambient_temp,cloud_cover,fc_irradiance,fc_ambient_temp,fc_cloud_cover";
    for (std::size_t i = 1; i <= nb; ++i) out += ",p_load" + std::to_string(i);
    for (std::size_t i = 1; i <= nb; ++i) out += ",q_load" + std::to_string(i);
    out += ",l1_raw,congested,converged\n";

    char buf[40];
    auto num = [&](double v) {
        const int len = std::snprintf(buf, sizeof buf, ",%.17g", v);
        out.append(buf, static_cast<std::size_t>(len));
    };
    for (const auto& s : ds.scenarios) {
        out += std::to_string(s.day) + ',' + std::to_string(s.hour);
        for (double v : s.pre_voltages) num(v);
        for (auto b : s.mask.bits) out += b ? ",1" : ",0";
        for (double v : {s.committed_total, s.actual_total, s.l1, s.l2, s.total}) num(v);
        for (double v : s.committed_power) num(v);
        for (double v : s.actual_power) num(v);
        for (double v : {s.weather.irradiance, s.weather.ambient_temp, s.weather.cloud_cover, s.forecast.irradiance,
                         s.forecast.ambient_temp, s.forecast.cloud_cover})
            num(v);
        for (double v : s.p_load) num(v);
        for (double v : s.q_load) num(v);
        num(s.l1_raw);
        out += s.congested ? ",1" : ",0";
        out += s.converged ? ",1\n" : ",0\n";
    }
    return out;
}

inline void write_scenarios(const SubsetDataset& ds, const std::filesystem::path& csv_path) {
    write_file_atomic(csv_path, scenarios_csv(ds));
    auto side = csv_path;
    side.replace_extension(".json");
    write_file_atomic(side, sidecar_json(ds).dump(2) + "\n");
}

inline SubsetDataset read_scenarios(const std::filesystem::path& csv_path) {
    auto side = csv_path;
    side.replace_extension(".json");
    SubsetDataset ds;
    std::size_t nb = 0, ns = 0;
    try {
        const auto j = nlohmann::json::parse(read_file(side));
        ds.scaler.l1_min = j.at("l1_min").get<double>();
        ds.scaler.l1_max = j.at("l1_max").get<double>();
        ds.scaler.fitted = true;
        ds.seed = j.at("seed").get<std::uint64_t>();
        ds.grid_hash = j.at("grid_hash").get<std::string>();
        ds.days = j.at("days").get<std::size_t>();
        ns = j.at("n_solar").get<std::size_t>();
        nb = j.at("buses").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("scenario sidecar " + side.string() + ": " + e.what());
    }
    if (!(ds.scaler.l1_max > ds.scaler.l1_min)) throw ParseError("scenario sidecar has l1_max <= l1_min");
    ds.split = split_days(ds.days, ds.seed);

    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path.string());
    std::string line;
    std::getline(in, line);
    const std::size_t width = 2 + nb + ns + 5 + 2 * ns + 6 + 2 * nb + 3;
    std::size_t row = 0;
    std::vector<double> f;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        f.clear();
        const char* p = line.c_str();
        char* end = nullptr;
        for (;;) {
            f.push_back(std::strtod(p, &end));
            if (end == p) throw ParseError("scenario row " + std::to_string(row) + " has a bad number");
            if (*end != ',') break;
            p = end + 1;
        }
        if (f.size() != width)
            throw ParseError("scenario row " + std::to_string(row) + " has " + std::to_string(f.size()) +
                             " fields, expected " + std::to_string(width));
        SubsetScenario s;
        std::size_t c = 0;
        auto take = [&](std::vector<double>& v, std::size_t n) {
            v.assign(f.begin() + static_cast<std::ptrdiff_t>(c), f.begin() + static_cast<std::ptrdiff_t>(c + n));
            c += n;
        };
        s.day = static_cast<std::size_t>(f[c++]);
        s.hour = static_cast<int>(f[c++]);
        take(s.pre_voltages, nb);
        for (std::size_t k = 0; k < ns; ++k) s.mask.bits.push_back(f[c++] != 0.0 ? 1 : 0);
        s.committed_total = f[c++];
        s.actual_total = f[c++];
        s.l1 = f[c++];
        s.l2 = f[c++];
        s.total = f[c++];
        take(s.committed_power, ns);
        take(s.actual_power, ns);
        s.weather = {f[c], f[c + 1], f[c + 2], s.hour};
        s.forecast = {f[c + 3], f[c + 4], f[c + 5], s.hour};
        c += 6;
        take(s.p_load, nb);
        take(s.q_load, nb);
        s.l1_raw = f[c++];
        s.congested = f[c++] != 0.0;
        s.converged = f[c++] != 0.0;
        if (s.l2 != 0.0 && s.l2 != kCongestionPenalty)
            throw ParseError("scenario row " + std::to_string(row) + " has l2 outside {0, 50}");
        ds.scenarios.push_back(std::move(s));
    }
    if (ds.scenarios.empty()) throw ParseError("scenario file has no rows");
    return ds;
}

}  // namespace gridseer::dispatch
