#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "gridseer/grid/default_grid.hpp"
#include "gridseer/grid/io.hpp"

using namespace gridseer;
using namespace gridseer::grid;

TEST(DefaultGrid, ShapeAndValidity) {
    const auto g = build_default_grid();
    EXPECT_NO_THROW(validate(g));
    EXPECT_EQ(g.bus_count(), 23u);
    EXPECT_EQ(g.solar_indices().size(), 5u);
    EXPECT_EQ(g.buses[g.slack_index()].id, 1);
    EXPECT_DOUBLE_EQ(g.base_mva, 100.0);
}

TEST(DefaultGrid, SolarUnitsSitOnPqBuses) {
    const auto g = build_default_grid();
    for (auto k : g.solar_indices()) {
        const auto& gen = g.generators[k];
        EXPECT_EQ(g.buses[static_cast<std::size_t>(gen.bus_id - 1)].kind, BusKind::PQ);
        EXPECT_LE(gen.p_set, gen.p_rated);
    }
}

TEST(GridIo, JsonRoundTripIsExact) {
    const auto g = build_default_grid();
    const auto back = parse(serialize(g));
    EXPECT_EQ(back, g);
    EXPECT_EQ(grid_hash(back), grid_hash(g));
}

TEST(GridIo, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "gridseer_grid_roundtrip.json";
    const auto g = build_default_grid();
    save_grid(g, path);
    EXPECT_EQ(load_grid(path), g);
    std::filesystem::remove(path);
}

TEST(GridIo, MalformedJsonIsParseError) {
    EXPECT_THROW(parse("{ not json"), ParseError);
    EXPECT_THROW(parse(R"({"base_mva": 100})"), ParseError);
    auto j = to_json(build_default_grid());
    j["buses"][0]["kind"] = "Swing";
    EXPECT_THROW(from_json(j), ParseError);
}

TEST(GridIo, MissingFileIsIoError) { EXPECT_THROW(load_grid("/nonexistent/grid.json"), IoError); }

TEST(GridValidate, RejectsEachBrokenRule) {
    const auto base = build_default_grid();
    auto expect_invalid = [](const GridState& g) { EXPECT_THROW(validate(g), ValidationError); };

    auto g = base;
    g.buses[1].kind = BusKind::Slack;
    expect_invalid(g);

    g = base;
    g.buses[4].id = 99;
    expect_invalid(g);

    g = base;
    g.branches[0].to_bus = 42;
    expect_invalid(g);

    g = base;
    g.branches[3].x = 0.0;
    expect_invalid(g);

    g = base;
    g.branches[3].mva_limit = 0.0;
    expect_invalid(g);

    g = base;
    g.generators[g.solar_indices()[0]].p_set = 10.0;
    expect_invalid(g);

    g = base;
    g.buses[2].p_load = std::nan("");
    expect_invalid(g);

    g = base;
    for (auto& gen : g.generators)
        if (gen.bus_id == 1) gen.kind = GenKind::Solar;
    expect_invalid(g);
}

TEST(GridValidate, CorruptedFieldsNeverPassSilently) {
    // flipping any single numeric field to NaN is always rejected
    const auto base = build_default_grid();
    for (std::size_t k = 0; k < base.branches.size(); ++k) {
        auto g = base;
        g.branches[k].r = std::nan("");
        EXPECT_THROW(validate(g), ValidationError) << "branch " << k;
    }
    for (std::size_t k = 0; k < base.generators.size(); ++k) {
        auto g = base;
        g.generators[k].q_max = std::nan("");
        EXPECT_THROW(validate(g), ValidationError) << "generator " << k;
    }
}
