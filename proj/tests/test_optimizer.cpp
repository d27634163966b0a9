#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "pieces/chains.hpp"
#include "pieces/common.hpp"
#include "pieces/disorder.hpp"
#include "pieces/optimizer.hpp"
#include "pieces/rng.hpp"

using namespace pieces;

namespace {

ModelParams synthetic_params(double minimal_length, double M) {
    ModelParams mp;
    mp.density = 0.1;
    mp.interaction_range = M;
    mp.minimal_length = minimal_length;
    mp.fermi_length = minimal_length + (4.0 * M + 6.0) * mp.density;
    mp.fermi_energy = kPiSq / (mp.fermi_length * mp.fermi_length);
    return mp;
}

// configuration with the given piece lengths separated by the given gaps
// (each positive gap realized as two short filler pieces)
PieceConfiguration pieces_with_gaps(const std::vector<double>& lengths,
                                    const std::vector<double>& gaps) {
    PieceConfiguration cfg;
    cfg.points.push_back(0.0);
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        cfg.points.push_back(cfg.points.back() + lengths[i]);
        if (i < gaps.size() && gaps[i] > 0.0) {
            cfg.points.push_back(cfg.points.back() + 0.5 * gaps[i]);
            cfg.points.push_back(cfg.points.back() + 0.5 * gaps[i]);
        }
    }
    cfg.box_length = cfg.points.back() + 0.1;
    return cfg;
}

// Random small instance within the enumeration guard.
struct SmallInstance {
    PieceConfiguration cfg;
    ModelParams params;
    ChainDecomposition decomp;
};

SmallInstance random_instance(SplitMix64& rng, double lu = 1.4, double M = 1.0) {
    for (;;) {
        const int m = 2 + static_cast<int>(rng.next_unit() * 2.99);  // 2..4 long pieces
        std::vector<double> lengths, gaps;
        for (int i = 0; i < m; ++i) {
            lengths.push_back(0.3 * lu + 3.0 * lu * rng.next_unit());
            if (i + 1 < m) gaps.push_back(rng.next_unit() < 0.4 ? 0.0 : 2.0 * M * rng.next_unit());
        }
        PieceConfiguration cfg = pieces_with_gaps(lengths, gaps);
        SmallInstance inst{cfg, synthetic_params(lu, M), {}};
        if (cfg.piece_count() > 8) continue;
        inst.decomp = decompose(inst.cfg, inst.params, 2);
        const long caps = std::accumulate(inst.decomp.piece_caps.begin(),
                                          inst.decomp.piece_caps.end(), 0L);
        if (caps >= 1 && caps <= 12) return inst;
    }
}

}  // namespace

TEST_CASE("pool of two free size-1 chains at p = 1") {
    const PieceConfiguration cfg = pieces_with_gaps({2.0, 3.0}, {1.5});
    // l_min = 1.6 keeps both caps at 1, so both chains sit in P_1
    const ModelParams mp = synthetic_params(1.6, 1.0);
    const ChainDecomposition d = decompose(cfg, mp, 1);
    const Potential zero = Potential::step(0.0, 1.0);
    SolverConfig scfg;
    const LevelPool pool = build_level_pool(d, zero, 1, scfg);
    REQUIRE(pool.entries.size() == 2);
    CHECK(pool.entries[0].value == doctest::Approx(kPiSq / 9.0));
    CHECK(pool.entries[1].value == doctest::Approx(kPiSq / 4.0));
}

TEST_CASE("ties break by chain position, then kappa") {
    const PieceConfiguration cfg = pieces_with_gaps({2.0, 2.0, 2.0}, {1.5, 1.5});
    const ModelParams mp = synthetic_params(1.4, 1.0);
    const ChainDecomposition d = decompose(cfg, mp, 2);
    const Potential zero = Potential::step(0.0, 1.0);
    SolverConfig scfg;
    const LevelPool pool = build_level_pool(d, zero, 2, scfg);
    REQUIRE(pool.entries.size() == 6);
    // three equal first levels sorted by position, then the second levels
    for (int i = 0; i < 3; ++i) {
        CHECK(pool.entries[static_cast<std::size_t>(i)].kappa == 1);
        CHECK(pool.first_piece[pool.entries[static_cast<std::size_t>(i)].chain_ord] ==
              static_cast<std::size_t>(3 * i));
    }
    for (int i = 3; i < 6; ++i) CHECK(pool.entries[static_cast<std::size_t>(i)].kappa == 2);
}

TEST_CASE("greedy fill basics") {
    const PieceConfiguration cfg = pieces_with_gaps({2.0, 2.5, 3.0}, {1.5, 1.5});
    const ModelParams mp = synthetic_params(1.4, 1.0);
    const ChainDecomposition d = decompose(cfg, mp, 2);
    const Potential zero = Potential::step(0.0, 1.0);
    SolverConfig scfg;
    const LevelPool pool = build_level_pool(d, zero, 2, scfg);

    SUBCASE("n = 0 is the vacuum") {
        const GroundStateEstimate gs = greedy_fill(pool, 0, d);
        CHECK(gs.total_energy() == 0.0);
        CHECK(gs.occupation.total == 0);
    }
    SUBCASE("three particles take the three lowest first levels") {
        const GroundStateEstimate gs = greedy_fill(pool, 3, d);
        const double expected = kPiSq / 4.0 + kPiSq / 6.25 + kPiSq / 9.0;
        CHECK(gs.total_energy() == doctest::Approx(expected).epsilon(1e-14));
        const auto [occ, brute] = brute_force_ground(d, zero, 3, scfg);
        CHECK(gs.total_energy() == doctest::Approx(brute).epsilon(1e-12));
    }
    SUBCASE("capacity exhaustion raises infeasible") {
        const long caps = std::accumulate(d.piece_caps.begin(), d.piece_caps.end(), 0L);
        CHECK_THROWS_AS(greedy_fill(pool, caps + 1, d), InfeasibleError);
    }
}

TEST_CASE("oracle equivalence on randomized instances") {
    SplitMix64 rng(91);
    const Potential U = Potential::step(1.0, 1.0);
    SolverConfig scfg;
    scfg.n_modes = 10;
    int trials = 0;
    while (trials < 60) {
        SmallInstance inst = random_instance(rng);
        const long caps = std::accumulate(inst.decomp.piece_caps.begin(),
                                          inst.decomp.piece_caps.end(), 0L);
        const long n = static_cast<long>(rng.next_unit() * (caps + 0.999));
        const LevelPool pool = build_level_pool(inst.decomp, U, 2, scfg);
        const GroundStateEstimate gs = greedy_fill(pool, n, inst.decomp);
        const auto [occ, brute] = brute_force_ground(inst.decomp, U, n, scfg);
        REQUIRE(gs.total_energy() ==
                doctest::Approx(brute).epsilon(1e-12));
        // occupations are admissible
        long total = 0;
        for (std::size_t i = 0; i < gs.occupation.counts.size(); ++i) {
            CHECK(gs.occupation.counts[i] <= inst.decomp.piece_caps[i]);
            total += gs.occupation.counts[i];
        }
        CHECK(total == n);
        ++trials;
    }
}

TEST_CASE("saturated instance has the unique occupation") {
    SplitMix64 rng(17);
    const Potential U = Potential::step(1.0, 1.0);
    SolverConfig scfg;
    scfg.n_modes = 10;
    SmallInstance inst = random_instance(rng);
    const long caps = std::accumulate(inst.decomp.piece_caps.begin(),
                                      inst.decomp.piece_caps.end(), 0L);
    const auto [occ, e] = brute_force_ground(inst.decomp, U, caps, scfg);
    for (std::size_t i = 0; i < occ.counts.size(); ++i) {
        CHECK(occ.counts[i] == inst.decomp.piece_caps[i]);
    }
    const LevelPool pool = build_level_pool(inst.decomp, U, 2, scfg);
    const GroundStateEstimate gs = greedy_fill(pool, caps, inst.decomp);
    CHECK(gs.occupation.counts == occ.counts);
}

TEST_CASE("brute force guard") {
    const PieceConfiguration cfg = sample_pieces(40.0, 3);  // ~40 pieces
    const ModelParams mp = synthetic_params(1.4, 1.0);
    const ChainDecomposition d = decompose(cfg, mp, 2);
    SolverConfig scfg;
    CHECK_THROWS_AS(brute_force_ground(d, Potential::step(1.0, 1.0), 1, scfg), TooLargeError);
}

TEST_CASE("greedy structural properties") {
    SplitMix64 rng(2718);
    const Potential U = Potential::step(1.0, 1.0);
    SolverConfig scfg;
    scfg.n_modes = 10;
    SmallInstance inst = random_instance(rng);
    const long caps = std::accumulate(inst.decomp.piece_caps.begin(),
                                      inst.decomp.piece_caps.end(), 0L);
    const LevelPool pool = build_level_pool(inst.decomp, U, 2, scfg);

    SUBCASE("prefix-sum identity and monotone increments") {
        const GroundStateEstimate gs = greedy_fill(pool, caps, inst.decomp);
        double sum = 0.0;
        for (const PoolEntry& e : gs.levels_used) sum += e.value;
        CHECK(gs.energy_P == doctest::Approx(sum).epsilon(1e-14));
        // merged placement values are non-decreasing along the trajectory
        std::vector<double> placed;
        for (long r = 1; r <= caps; ++r) {
            const GroundStateEstimate a = greedy_fill(pool, r - 1, inst.decomp);
            const GroundStateEstimate b = greedy_fill(pool, r, inst.decomp);
            placed.push_back(b.total_energy() - a.total_energy());
        }
        for (std::size_t i = 0; i + 1 < placed.size(); ++i) {
            CHECK(placed[i] <= placed[i + 1] + 1e-10);
        }
    }
    SUBCASE("one count changes per step") {
        for (long r = 1; r <= caps; ++r) {
            const GroundStateEstimate a = greedy_fill(pool, r - 1, inst.decomp);
            const GroundStateEstimate b = greedy_fill(pool, r, inst.decomp);
            // chain-level counts: at most one chain (or leftover piece) moves
            int moved = 0;
            std::vector<int> ca(pool.chain_ids.size(), 0), cb(pool.chain_ids.size(), 0);
            for (const PoolEntry& e : a.levels_used) ca[e.chain_ord] += 1;
            for (const PoolEntry& e : b.levels_used) cb[e.chain_ord] += 1;
            for (std::size_t c = 0; c < ca.size(); ++c) moved += std::abs(ca[c] - cb[c]);
            std::map<std::size_t, int> la, lb;
            for (const auto& [piece, v] : a.leftover_levels_used) la[piece] += 1;
            for (const auto& [piece, v] : b.leftover_levels_used) lb[piece] += 1;
            for (const auto& [piece, v] : lb) moved += std::abs(v - la[piece]);
            CHECK(moved == 1);
        }
    }
    SUBCASE("exchange optimality") {
        const long n = caps / 2;
        const GroundStateEstimate gs = greedy_fill(pool, n, inst.decomp);
        if (n > 0 && !gs.levels_used.empty()) {
            double max_placed = 0.0;
            for (const PoolEntry& e : gs.levels_used) max_placed = std::max(max_placed, e.value);
            for (const auto& [piece, v] : gs.leftover_levels_used) {
                max_placed = std::max(max_placed, v);
            }
            // every feasible unplaced increment is at least the largest placed one
            std::vector<int> cnt(pool.chain_ids.size(), 0);
            for (const PoolEntry& e : gs.levels_used) cnt[e.chain_ord] += 1;
            for (const PoolEntry& e : pool.entries) {
                const int cap = inst.decomp.chains[pool.chain_ids[e.chain_ord]].total_cap();
                if (e.kappa == cnt[e.chain_ord] + 1 && e.kappa <= cap) {
                    CHECK(e.value >= max_placed - 1e-12 * std::max(1.0, max_placed));
                }
            }
        }
    }
}

TEST_CASE("convexity check") {
    ConvexityReport ok = convexity_check({{1.0, 2.0, 3.0}, {0.5, 0.9}});
    CHECK(ok.violating_chains.empty());
    CHECK(ok.checked == 2);
    ConvexityReport bad = convexity_check({{1.0, 0.9}, {0.5, 0.6}});
    REQUIRE(bad.violating_chains.size() == 1);
    CHECK(bad.violating_chains[0] == 0);
}

TEST_CASE("degeneracy clustering") {
    LevelPool pool;
    pool.p = 2;
    pool.chain_ids = {0, 1, 2};
    pool.first_piece = {0, 1, 2};
    auto add = [&](std::size_t c, int k, double v) {
        PoolEntry e;
        e.chain_ord = c;
        e.kappa = k;
        e.value = v;
        pool.entries.push_back(e);
    };
    SUBCASE("all distinct") {
        add(0, 1, 1.0);
        add(1, 1, 2.0);
        add(2, 1, 3.0);
        const DegeneracyReport rep = degeneracy_count(pool, 1e-9);
        CHECK(rep.max_multiplicity == 1);
        CHECK(rep.multiplicity.size() == 3);
    }
    SUBCASE("duplicate value clusters") {
        add(0, 1, 1.0);
        add(1, 1, 1.0);
        add(2, 1, 3.0);
        const DegeneracyReport rep = degeneracy_count(pool, 1e-9);
        CHECK(rep.max_multiplicity == 2);
    }
    CHECK_THROWS_AS(degeneracy_count(pool, -1.0), std::invalid_argument);
}

TEST_CASE("stable chains under the greedy window") {
    const PieceConfiguration cfg = pieces_with_gaps({2.0, 2.5, 3.0}, {1.5, 1.5});
    const ModelParams mp = synthetic_params(1.4, 1.0);
    const ChainDecomposition d = decompose(cfg, mp, 2);
    const Potential zero = Potential::step(0.0, 1.0);
    SolverConfig scfg;
    const LevelPool pool = build_level_pool(d, zero, 2, scfg);
    // levels: pi^2/9 < pi^2/6.25 < pi^2/4 < 4pi^2/9 < 4pi^2/6.25 < 4pi^2/4

    SUBCASE("window 0 keeps every chain") {
        const StableSet s = stable_chains(pool, 3, 0, d);
        CHECK(s.stable_chain_ords.size() == pool.chain_ids.size());
        CHECK(s.unstable_chain_ords.empty());
    }
    SUBCASE("the chain absorbing the last step is excluded") {
        // step 3 places pi^2/4 into the first chain (piece 0)
        const StableSet s = stable_chains(pool, 3, 1, d);
        REQUIRE(s.unstable_chain_ords.size() == 1);
        CHECK(pool.first_piece[s.unstable_chain_ords[0]] == 0);
    }
    SUBCASE("at most `window` chains are unstable") {
        for (long w = 0; w <= 3; ++w) {
            const StableSet s = stable_chains(pool, 3, w, d);
            CHECK(s.unstable_chain_ords.size() <= static_cast<std::size_t>(w));
        }
    }
}
