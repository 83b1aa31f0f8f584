#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "lightloc/monitoring.hpp"

namespace lightloc {
namespace {

Topology two_node(double length_km, int fibers, std::uint64_t seed) {
    Topology t;
    t.nodes = {{"a"}, {"b"}};
    t.links = {{0, 1, length_km, fibers}};
    t.wss = {32, 8, 8};
    t.seed = seed;
    return t;
}

Topology ring_mesh(std::uint64_t seed) {
    Topology t;
    t.nodes = {{"n0"}, {"n1"}, {"n2"}, {"n3"}};
    t.links = {{0, 1, 120.0, 2}, {1, 2, 90.0, 1}, {2, 3, 240.0, 2}, {3, 0, 75.0, 1}, {0, 2, 160.0, 1}};
    t.wss = {32, 8, 8};
    t.seed = seed;
    return t;
}

TEST(Deploy, ThreeMonitorsOverNineSlots) {
    auto d = deploy_uniform(9, 3);
    EXPECT_EQ(d.interval, 3);
    EXPECT_EQ(d.deployed, (std::vector<int>{3, 6, 9}));
    std::vector<bool> want(9, false);
    want[2] = want[5] = want[8] = true;
    EXPECT_EQ(d.psi, want);
}

TEST(Deploy, IntervalUsesFloorDivision) {
    auto d = deploy_uniform(10, 3);
    EXPECT_EQ(d.interval, 3);
    EXPECT_EQ(d.deployed, (std::vector<int>{3, 6, 9}));
    EXPECT_FALSE(d.monitors(9));
}

TEST(Deploy, FullCountCoversEverySlot) {
    auto d = deploy_uniform(7, 7);
    EXPECT_EQ(d.interval, 1);
    EXPECT_EQ(d.deployed.size(), 7u);
    for (int i = 0; i < 7; ++i) EXPECT_TRUE(d.monitors(i));
}

TEST(Deploy, ZeroCountDeploysNothing) {
    auto d = deploy_uniform(12, 0);
    EXPECT_TRUE(d.deployed.empty());
    for (int i = 0; i < 12; ++i) EXPECT_FALSE(d.monitors(i));
}

TEST(Deploy, RejectsCountsOutsideRange) {
    EXPECT_THROW(deploy_uniform(5, -1), ConfigError);
    EXPECT_THROW(deploy_uniform(5, 6), ConfigError);
    auto g = build_component_graph(two_node(80.0, 1, 1));
    EXPECT_THROW(deploy_uniform(g, 1.5), ConfigError);
    EXPECT_THROW(deploy_uniform(g, -0.1), ConfigError);
}

TEST(Deploy, FractionRoundsToNearestCount) {
    auto g = build_component_graph(two_node(80.0, 1, 1));
    int total = static_cast<int>(g.opm_slots.size());
    EXPECT_EQ(deploy_uniform(g, 1.0).deployed.size(), static_cast<std::size_t>(total));
    EXPECT_EQ(deploy_uniform(g, 0.0).deployed.size(), 0u);
    auto half = deploy_uniform(g, 0.5);
    EXPECT_EQ(half.deployed.size(),
              static_cast<std::size_t>(static_cast<int>(std::floor(0.5 * total + 0.5))));
}

TEST(Snapshot, FullDeploymentMatchesPropagation) {
    auto g = build_component_graph(two_node(240.0, 1, 5));
    auto lps = draw_lightpaths(g, 2, 8, 11);
    auto dep = deploy_uniform(g, 1.0);
    PowerModel pm;
    pm.jitter_sigma_db = 0.0;
    auto snap = snapshot(g, lps, dep, FailureScenario{}, pm, 99);
    ASSERT_EQ(snap.readings.size(), lps.size());
    for (std::size_t i = 0; i < lps.size(); ++i) {
        auto tr = propagate(lps[i], g, FailureScenario{}, pm, derive_seed(99, "lightpath", lps[i].id));
        ASSERT_EQ(snap.readings[i].size(), lps[i].slots.size() + 1);
        for (std::size_t j = 0; j < lps[i].slots.size(); ++j) {
            EXPECT_DOUBLE_EQ(snap.readings[i][j], tr.slot_dbm[j]);
        }
        EXPECT_DOUBLE_EQ(snap.readings[i].back(), 1.0);
    }
}

TEST(Snapshot, ZeroDeploymentMasksEverythingButFlag) {
    auto g = build_component_graph(two_node(160.0, 1, 5));
    auto lps = draw_lightpaths(g, 2, 8, 3);
    auto dep = deploy_uniform(g, 0.0);
    PowerModel pm;
    auto snap = snapshot(g, lps, dep, FailureScenario{}, pm, 1);
    for (const auto& row : snap.readings) {
        for (std::size_t j = 0; j + 1 < row.size(); ++j) EXPECT_DOUBLE_EQ(row[j], kAlpha);
        EXPECT_TRUE(row.back() == 0.0 || row.back() == 1.0);
    }
}

TEST(Snapshot, MaskFollowsDeploymentPattern) {
    auto g = build_component_graph(ring_mesh(7));
    auto lps = draw_lightpaths(g, 4, 8, 21);
    auto dep = deploy_uniform(g, 1.0 / 3.0);
    PowerModel pm;
    pm.jitter_sigma_db = 0.0;
    auto snap = snapshot(g, lps, dep, FailureScenario{}, pm, 5);
    int masked = 0, open = 0;
    for (std::size_t i = 0; i < lps.size(); ++i) {
        for (std::size_t j = 0; j < lps[i].slots.size(); ++j) {
            if (dep.monitors(lps[i].slots[j])) {
                EXPECT_GT(snap.readings[i][j], kAlpha);
                ++open;
            } else {
                EXPECT_DOUBLE_EQ(snap.readings[i][j], kAlpha);
                ++masked;
            }
        }
    }
    EXPECT_GT(masked, 0);
    EXPECT_GT(open, 0);
}

TEST(Snapshot, SentinelSitsBelowPhysicalReadings) {
    auto g = build_component_graph(ring_mesh(2));
    auto lps = draw_lightpaths(g, 4, 8, 2);
    auto dep = deploy_uniform(g, 1.0);
    PowerModel pm;
    auto snap = snapshot(g, lps, dep, FailureScenario{}, pm, 3);
    for (const auto& row : snap.readings) {
        for (std::size_t j = 0; j + 1 < row.size(); ++j) EXPECT_GT(row[j], kAlpha);
    }
    EXPECT_LT(kAlpha, pm.noise_floor_dbm);
}

TEST(Dataset, DrawsRequestedLightpathCount) {
    auto g = build_component_graph(ring_mesh(4));
    auto even = draw_lightpaths(g, 6, 8, 9);
    EXPECT_EQ(even.size(), 6u);
    auto odd = draw_lightpaths(g, 5, 8, 9);
    EXPECT_EQ(odd.size(), 5u);
    for (std::size_t i = 0; i < odd.size(); ++i) {
        EXPECT_EQ(odd[i].id, static_cast<int>(i));
        EXPECT_NE(odd[i].src, odd[i].dst);
        if (odd[i].pair >= 0) EXPECT_LT(odd[i].pair, 5);
    }
}

TEST(Dataset, ImpossibleProvisioningThrows) {
    auto g = build_component_graph(two_node(80.0, 1, 1));
    EXPECT_THROW(draw_lightpaths(g, 4000, 1, 1), ConfigError);
}

DatasetConfig small_config(std::uint64_t seed) {
    DatasetConfig cfg;
    cfg.topology = ring_mesh(31);
    cfg.lightpath_count = 6;
    cfg.sample_count = 8;
    cfg.n_f_set = {1, 2};
    cfg.opm_fraction = 0.6;
    cfg.wavelengths = 8;
    cfg.seed = seed;
    return cfg;
}

TEST(Dataset, ZeroSamplesYieldsEmptyList) {
    auto cfg = small_config(1);
    cfg.sample_count = 0;
    auto ds = generate_dataset(cfg);
    EXPECT_TRUE(ds.samples.empty());
    EXPECT_EQ(ds.lightpaths.size(), 6u);
    EXPECT_EQ(ds.pre.readings.size(), 6u);
}

TEST(Dataset, FixedSeedIsByteIdentical) {
    auto a = dataset_to_string(generate_dataset(small_config(42)));
    auto b = dataset_to_string(generate_dataset(small_config(42)));
    EXPECT_EQ(a, b);
    auto c = dataset_to_string(generate_dataset(small_config(43)));
    EXPECT_NE(a, c);
}

TEST(Dataset, WorkerCountDoesNotChangeBytes) {
    auto cfg = small_config(7);
    auto serial = dataset_to_string(generate_dataset(cfg));
    cfg.jobs = 4;
    auto parallel = dataset_to_string(generate_dataset(cfg));
    EXPECT_EQ(serial, parallel);
}

TEST(Dataset, SerializationRoundTripIsStable) {
    auto ds = generate_dataset(small_config(13));
    auto s1 = dataset_to_string(ds);
    auto ds2 = dataset_from_json(Json::parse(s1));
    auto s2 = dataset_to_string(ds2);
    EXPECT_EQ(s1, s2);
    EXPECT_EQ(ds2.digest, ds.digest);
    EXPECT_EQ(ds2.lightpaths.size(), ds.lightpaths.size());
    EXPECT_EQ(ds2.samples.size(), ds.samples.size());
    EXPECT_NO_THROW(dataset_graph(ds2));
}

TEST(Dataset, LabelsNameTraversedComponents) {
    auto ds = generate_dataset(small_config(19));
    auto g = dataset_graph(ds);
    auto traversed = traversed_components(ds.lightpaths);
    std::set<int> allowed(traversed.begin(), traversed.end());
    ASSERT_EQ(ds.samples.size(), 8u);
    for (const auto& s : ds.samples) {
        ASSERT_FALSE(s.scenario.failures.empty());
        for (const auto& f : s.scenario.failures) {
            EXPECT_TRUE(allowed.count(f.component));
            EXPECT_TRUE(failure_applies(f.type, g.components[f.component].kind));
        }
    }
}

TEST(Dataset, PreSnapshotIsFailureFreeAdditive) {
    auto cfg = small_config(23);
    cfg.power_model.jitter_sigma_db = 0.0;
    auto ds = generate_dataset(cfg);
    auto g = dataset_graph(ds);
    auto full = deploy_uniform(g, 1.0);
    auto clean = snapshot(g, ds.lightpaths, full, FailureScenario{}, ds.power_model,
                          derive_seed(cfg.seed, "pre"));
    for (std::size_t i = 0; i < ds.lightpaths.size(); ++i) {
        EXPECT_DOUBLE_EQ(ds.pre.readings[i].back(), 1.0);
        for (std::size_t j = 0; j + 1 < ds.pre.readings[i].size(); ++j) {
            if (ds.pre.readings[i][j] != kAlpha) {
                EXPECT_DOUBLE_EQ(ds.pre.readings[i][j], clean.readings[i][j]);
            }
        }
    }
}

TEST(Dataset, CorruptFilesAreRejected) {
    EXPECT_THROW(dataset_from_json(Json::parse(R"({"format":"other"})")), ParseError);
    auto ds = generate_dataset(small_config(3));
    auto j = dataset_to_json(ds);
    j["deployment"]["positions"].push_back(100000);
    EXPECT_THROW(dataset_from_json(j), ParseError);
    auto j2 = dataset_to_json(ds);
    j2.erase("lightpaths");
    EXPECT_THROW(dataset_from_json(j2), ParseError);
}

TEST(Dataset, DigestMismatchIsDetected) {
    auto ds = generate_dataset(small_config(5));
    ds.digest ^= 0xdeadbeef;
    EXPECT_THROW(dataset_graph(ds), ParseError);
}

}  // namespace
}  // namespace lightloc
