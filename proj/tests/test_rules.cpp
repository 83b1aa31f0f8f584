#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "lightloc/rules.hpp"

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

struct Fixture {
    ComponentGraph g;
    std::vector<Lightpath> lps;
    Deployment dep;
    PowerModel pm;
    ThresholdTable table;
};

Fixture make_fixture(const Topology& t, int n_lps, double fraction, std::uint64_t seed) {
    Fixture f{build_component_graph(t), {}, {}, {}, {}};
    f.lps = draw_lightpaths(f.g, n_lps, 8, seed);
    f.dep = deploy_uniform(f.g, fraction);
    f.pm.jitter_sigma_db = 0.0;
    f.table = nominal_thresholds(f.g, f.lps, f.pm);
    return f;
}

SuspectPartition run(const Fixture& f, const FailureScenario& sc, std::uint64_t seed = 1) {
    auto snap = snapshot(f.g, f.lps, f.dep, sc, f.pm, seed);
    return reason(f.g, f.lps, snap, f.table);
}

void expect_partition_valid(const SuspectPartition& p) {
    std::set<int> normal(p.normal.begin(), p.normal.end());
    std::set<int> faulty(p.faulty.begin(), p.faulty.end());
    std::set<int> suspect(p.suspect.begin(), p.suspect.end());
    EXPECT_EQ(normal.size() + faulty.size() + suspect.size(), p.all.size());
    std::set<int> merged;
    merged.insert(normal.begin(), normal.end());
    merged.insert(faulty.begin(), faulty.end());
    merged.insert(suspect.begin(), suspect.end());
    EXPECT_EQ(merged, std::set<int>(p.all.begin(), p.all.end()));
}

TEST(FitThresholds, AmplifierSeparatedClassesAnchorToTheHealthyCluster) {
    // Wide gap: boundary sits the capped margin below the smallest normal
    // change, not at the midpoint, so unseen moderate failures still convict.
    auto t = fit_pair_thresholds(true, {20.0, 21.0}, {5.0, 6.0});
    EXPECT_DOUBLE_EQ(t.delta, 18.5);
    EXPECT_DOUBLE_EQ(t.tau, 18.5);
    // Narrow gap: half the gap is below the cap, boundary lands midway.
    t = fit_pair_thresholds(true, {20.0}, {18.0});
    EXPECT_DOUBLE_EQ(t.delta, 19.0);
    EXPECT_DOUBLE_EQ(t.tau, 19.0);
}

TEST(FitThresholds, NonAmplifierSeparatedClassesAnchorToTheHealthyCluster) {
    auto t = fit_pair_thresholds(false, {5.0}, {9.0});
    EXPECT_DOUBLE_EQ(t.tau, 6.0);
    EXPECT_DOUBLE_EQ(t.delta, 6.0);
    t = fit_pair_thresholds(false, {5.0}, {6.0});
    EXPECT_DOUBLE_EQ(t.tau, 5.5);
    EXPECT_DOUBLE_EQ(t.delta, 5.5);
}

TEST(FitThresholds, PartialOverlapAveragesTheUnambiguousTails) {
    auto t = fit_pair_thresholds(true, {10.0, 20.0}, {5.0, 12.0});
    EXPECT_DOUBLE_EQ(t.tau, 20.0);  // normal changes above the worst faulty one
    EXPECT_DOUBLE_EQ(t.delta, 5.0);  // faulty changes below the best normal one
}

TEST(FitThresholds, MissingClassThrows) {
    EXPECT_THROW(fit_pair_thresholds(true, {}, {5.0}, 3, 7), InsufficientHistory);
    EXPECT_THROW(fit_pair_thresholds(false, {5.0}, {}, 3, 7), InsufficientHistory);
    try {
        fit_pair_thresholds(true, {}, {5.0}, 3, 7);
        FAIL();
    } catch (const InsufficientHistory& e) {
        EXPECT_EQ(e.lightpath, 3);
        EXPECT_EQ(e.position, 7);
    }
}

TEST(FitThresholds, OverlappingClassesFallBackToClassAverages) {
    auto t = fit_pair_thresholds(true, {10.0, 20.0}, {15.0, 25.0});
    EXPECT_DOUBLE_EQ(t.tau, 15.0);
    EXPECT_DOUBLE_EQ(t.delta, 15.0);  // class average 20 clamped down to tau
}

TEST(FitThresholds, EpsilonHugsCleanReadingsAndAveragesOverlap) {
    EXPECT_DOUBLE_EQ(fit_epsilon({-10.0, -10.5, -11.0}, {-14.0, -12.0}), -11.5);
    EXPECT_DOUBLE_EQ(fit_epsilon({-10.0}, {-20.0}), -11.0);  // margin capped
    EXPECT_DOUBLE_EQ(fit_epsilon({-10.0, -13.0}, {-12.0}), -10.0);
    EXPECT_DOUBLE_EQ(fit_epsilon({-13.0, -14.0}, {-12.0}), -13.5);
    EXPECT_THROW(fit_epsilon({}, {-12.0}), InsufficientHistory);
    EXPECT_THROW(fit_epsilon({-10.0}, {}), InsufficientHistory);
}

TEST(FitThresholds, DatasetPositionsWithoutFailuresKeepNominalValues) {
    DatasetConfig cfg;
    cfg.topology = ring_mesh(5);
    cfg.lightpath_count = 4;
    cfg.sample_count = 30;
    cfg.n_f_set = {1};
    cfg.opm_fraction = 1.0;
    cfg.wavelengths = 8;
    cfg.seed = 9;
    cfg.power_model.jitter_sigma_db = 0.0;
    auto ds = generate_dataset(cfg);
    auto g = dataset_graph(ds);
    auto nominal = nominal_thresholds(g, ds.lightpaths, ds.power_model);
    auto fitted = fit_thresholds(g, ds, 50);
    int fitted_positions = 0, fallback_positions = 0;
    for (const auto& [id, row] : fitted.rows) {
        const auto& base = nominal.rows.at(id);
        ASSERT_EQ(row.size(), base.size());
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!std::isnan(row[i].delta)) EXPECT_LE(row[i].delta, row[i].tau);
            if (row[i].epsilon != base[i].epsilon || row[i].delta != base[i].delta) {
                ++fitted_positions;
            } else {
                ++fallback_positions;
            }
        }
    }
    EXPECT_GT(fitted_positions, 0);
    EXPECT_GT(fallback_positions, 0);
}

TEST(FitThresholds, FittedTableNeverExoneratesTrueFailures) {
    DatasetConfig cfg;
    cfg.topology = ring_mesh(6);
    cfg.lightpath_count = 4;
    cfg.sample_count = 40;
    cfg.n_f_set = {1, 2};
    cfg.opm_fraction = 1.0;
    cfg.wavelengths = 8;
    cfg.seed = 12;
    cfg.power_model.jitter_sigma_db = 0.0;
    auto ds = generate_dataset(cfg);
    auto g = dataset_graph(ds);
    auto fitted = fit_thresholds(g, ds, 50);
    auto dep = deploy_uniform(g, 1.0);
    Rng rng(derive_seed(12, "fit_soundness"));
    for (int rep = 0; rep < 20; ++rep) {
        auto sc = sample_failure_scenario(g, ds.lightpaths, {1}, KindFilter::Any, ds.power_model, rng);
        auto snap = snapshot(g, ds.lightpaths, dep, sc, ds.power_model, 100 + rep);
        auto p = reason(g, ds.lightpaths, snap, fitted);
        expect_partition_valid(p);
        for (const auto& f : sc.failures) {
            EXPECT_FALSE(std::binary_search(p.normal.begin(), p.normal.end(), f.component));
        }
    }
}

TEST(NominalThresholds, DeriveFromCleanReadingsAndComponentSpecs) {
    auto f = make_fixture(two_node(240.0, 1, 3), 2, 1.0, 7);
    const auto& lp = f.lps[0];
    Trace clean = propagate(lp, f.g, FailureScenario{}, f.pm, 0);
    const auto& row = f.table.rows.at(lp.id);
    ASSERT_EQ(row.size(), lp.slots.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
        EXPECT_DOUBLE_EQ(row[i].epsilon, clean.slot_dbm[i] - 1.0);
        if (i == 0) continue;
        const Component& c = f.g.components[lp.components[i]];
        if (is_amplifier(c.kind)) {
            EXPECT_DOUBLE_EQ(row[i].delta, c.nominal - 1.5);
            EXPECT_DOUBLE_EQ(row[i].tau, c.nominal - 1.5);
        } else {
            EXPECT_DOUBLE_EQ(row[i].delta, c.nominal + 1.0);
            EXPECT_DOUBLE_EQ(row[i].tau, c.nominal + 1.0);
        }
    }
}

TEST(Reason, HealthyNetworkFullDeploymentClearsEverything) {
    auto f = make_fixture(ring_mesh(1), 6, 1.0, 5);
    auto p = run(f, FailureScenario{});
    expect_partition_valid(p);
    EXPECT_TRUE(p.faulty.empty());
    EXPECT_TRUE(p.suspect.empty());
    EXPECT_EQ(p.normal, p.all);
}

TEST(Reason, AmplifierGainDropIsLocalized) {
    auto f = make_fixture(ring_mesh(2), 4, 1.0, 9);
    const Lightpath* victim = nullptr;
    const Component* ila = nullptr;
    for (const auto& lp : f.lps) {
        for (int c : lp.components) {
            if (f.g.components[c].kind == ComponentKind::Ila) {
                victim = &lp;
                ila = &f.g.components[c];
                break;
            }
        }
        if (ila) break;
    }
    ASSERT_NE(ila, nullptr);
    FailureScenario sc;
    sc.failures.push_back({ila->id, FailureType::GainDegradation, 5.0, -1});
    auto p = run(f, sc);
    expect_partition_valid(p);
    EXPECT_EQ(p.faulty, std::vector<int>{ila->id});
    EXPECT_TRUE(p.suspect.empty());
    (void)victim;
}

TEST(Reason, WssExcessLossIsLocalized) {
    auto f = make_fixture(two_node(160.0, 1, 4), 2, 1.0, 3);
    const Component& line_out = [&]() -> const Component& {
        for (int c : f.lps[0].components) {
            if (f.g.components[c].kind == ComponentKind::LineWss) return f.g.components[c];
        }
        throw std::runtime_error("no line wss");
    }();
    FailureScenario sc;
    sc.failures.push_back({line_out.id, FailureType::ExtraAttenuation, 4.0, -1});
    auto p = run(f, sc);
    EXPECT_EQ(p.faulty, std::vector<int>{line_out.id});
    EXPECT_TRUE(p.suspect.empty());
}

TEST(Reason, NoDeploymentLeavesEverythingSuspect) {
    auto f = make_fixture(ring_mesh(3), 4, 0.0, 11);
    auto p = run(f, FailureScenario{});
    EXPECT_TRUE(p.normal.empty());
    EXPECT_TRUE(p.faulty.empty());
    EXPECT_EQ(p.suspect, p.all);
}

TEST(Reason, EpsilonPassClearsPrefix) {
    auto f = make_fixture(two_node(240.0, 1, 8), 2, 0.0, 13);
    const auto& lp = f.lps[0];
    int j = static_cast<int>(lp.slots.size()) / 2;
    f.dep.psi.assign(f.g.opm_slots.size(), false);
    f.dep.psi[lp.slots[j]] = true;
    f.dep.deployed = {lp.slots[j] + 1};
    auto p = run(f, FailureScenario{});
    expect_partition_valid(p);
    std::set<int> want_normal(lp.components.begin(), lp.components.begin() + j + 1);
    EXPECT_EQ(std::set<int>(p.normal.begin(), p.normal.end()), want_normal);
    EXPECT_TRUE(p.faulty.empty());
}

TEST(Reason, LaunchDropConvictsTransmitter) {
    auto f = make_fixture(ring_mesh(4), 4, 1.0, 15);
    int tx = f.lps[1].components.front();
    FailureScenario sc;
    sc.failures.push_back({tx, FailureType::LaunchPowerDegradation, 3.0, -1});
    auto p = run(f, sc);
    EXPECT_EQ(p.faulty, std::vector<int>{tx});
    EXPECT_TRUE(p.suspect.empty());
}

TEST(Reason, DeadReceiverConvictedThroughFlag) {
    auto f = make_fixture(ring_mesh(5), 4, 1.0, 17);
    int rx = f.lps[0].components.back();
    FailureScenario sc;
    sc.failures.push_back({rx, FailureType::TransponderBreak, 25.0, -1});
    auto p = run(f, sc);
    EXPECT_EQ(p.faulty, std::vector<int>{rx});
    EXPECT_TRUE(p.suspect.empty());
}

TEST(Reason, WavelengthSelectiveFaultWinsOverCleanReadings) {
    auto f = make_fixture(two_node(80.0, 1, 2), 4, 1.0, 19);
    const Component* shared_add = nullptr;
    const Lightpath *a = nullptr, *b = nullptr;
    for (const auto& l1 : f.lps) {
        for (const auto& l2 : f.lps) {
            if (l1.id != l2.id && l1.wavelength != l2.wavelength &&
                l1.components[1] == l2.components[1]) {
                a = &l1;
                b = &l2;
                shared_add = &f.g.components[l1.components[1]];
            }
        }
    }
    ASSERT_NE(shared_add, nullptr);
    FailureScenario sc;
    sc.failures.push_back({shared_add->id, FailureType::ExcessiveFiltering, 30.0, a->wavelength});
    auto p = run(f, sc);
    EXPECT_TRUE(std::binary_search(p.faulty.begin(), p.faulty.end(), shared_add->id));
    EXPECT_FALSE(std::binary_search(p.normal.begin(), p.normal.end(), shared_add->id));
    (void)b;
}

TEST(Reason, SoundAndCompleteOnSingleFailuresWithFullDeployment) {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        auto f = make_fixture(ring_mesh(seed), 6, 1.0, seed * 3);
        Rng rng(derive_seed(seed, "soundness"));
        for (int rep = 0; rep < 25; ++rep) {
            auto sc = sample_failure_scenario(f.g, f.lps, {1}, KindFilter::Any, f.pm, rng);
            auto p = run(f, sc, 50 + rep);
            expect_partition_valid(p);
            EXPECT_EQ(p.faulty, std::vector<int>{sc.failures[0].component});
            EXPECT_TRUE(p.suspect.empty());
        }
    }
}

TEST(Reason, ClampedReadingsNeverConvictInnocents) {
    auto f = make_fixture(two_node(240.0, 1, 6), 2, 1.0, 25);
    f.pm.noise_floor_dbm = -30.0;
    f.table = nominal_thresholds(f.g, f.lps, f.pm);
    auto clean = snapshot(f.g, f.lps, f.dep, FailureScenario{}, f.pm, 1);
    for (const auto& row : clean.readings) {
        for (std::size_t i = 0; i + 1 < row.size(); ++i) ASSERT_GT(row[i], -29.5);
    }
    const Component& span = [&]() -> const Component& {
        for (int c : f.lps[0].components) {
            if (f.g.components[c].kind == ComponentKind::FiberSpan) return f.g.components[c];
        }
        throw std::runtime_error("no span");
    }();
    FailureScenario sc;
    sc.failures.push_back({span.id, FailureType::FiberBreak, 25.0, -1});
    auto snap = snapshot(f.g, f.lps, f.dep, sc, f.pm, 2);
    int clamped = 0;
    for (const auto& row : snap.readings) {
        for (std::size_t i = 0; i + 1 < row.size(); ++i) {
            if (row[i] <= -29.5) ++clamped;
        }
    }
    ASSERT_GT(clamped, 0);
    auto p = reason(f.g, f.lps, snap, f.table);
    expect_partition_valid(p);
    for (int c : p.faulty) EXPECT_EQ(c, span.id);
}

TEST(Reason, MoreMonitorsNeverGrowTheSuspectSet) {
    auto f = make_fixture(ring_mesh(7), 6, 0.0, 27);
    Rng rng(derive_seed(7, "monotone"));
    auto sc = sample_failure_scenario(f.g, f.lps, {2}, KindFilter::Any, f.pm, rng);
    int total = static_cast<int>(f.g.opm_slots.size());
    std::size_t prev = SIZE_MAX;
    Deployment dep;
    dep.psi.assign(total, false);
    for (int step = 0; step <= 4; ++step) {
        for (int s = 0; s < total; ++s) {
            if (s % 5 < step) dep.psi[s] = true;  // grows monotonically with step
        }
        auto snap = snapshot(f.g, f.lps, dep, sc, f.pm, 3);
        auto p = reason(f.g, f.lps, snap, f.table);
        expect_partition_valid(p);
        EXPECT_LE(p.suspect.size(), prev);
        prev = p.suspect.size();
    }
}

TEST(Thresholds, SerializationRoundTripPreservesReasoning) {
    auto f = make_fixture(ring_mesh(8), 4, 0.6, 29);
    auto s1 = thresholds_to_json(f.table).dump(1);
    auto loaded = thresholds_from_json(Json::parse(s1));
    auto s2 = thresholds_to_json(loaded).dump(1);
    EXPECT_EQ(s1, s2);
    Rng rng(derive_seed(8, "roundtrip"));
    auto sc = sample_failure_scenario(f.g, f.lps, {2}, KindFilter::Any, f.pm, rng);
    auto snap = snapshot(f.g, f.lps, f.dep, sc, f.pm, 4);
    auto p1 = reason(f.g, f.lps, snap, f.table);
    auto p2 = reason(f.g, f.lps, snap, loaded);
    EXPECT_EQ(p1.normal, p2.normal);
    EXPECT_EQ(p1.faulty, p2.faulty);
    EXPECT_EQ(p1.suspect, p2.suspect);
}

TEST(Thresholds, RejectsMalformedFiles) {
    EXPECT_THROW(thresholds_from_json(Json::parse(R"({"format":"x"})")), ParseError);
    auto f = make_fixture(two_node(80.0, 1, 1), 2, 1.0, 1);
    auto j = thresholds_to_json(f.table);
    j.erase("lightpaths");
    EXPECT_THROW(thresholds_from_json(j), ParseError);
}

}  // namespace
}  // namespace lightloc
