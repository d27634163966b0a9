// Acceptance suite: one pass/fail line per criterion, every tolerance pinned
// here. Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "pieces/chains.hpp"
#include "pieces/common.hpp"
#include "pieces/densities.hpp"
#include "pieces/disorder.hpp"
#include "pieces/optimizer.hpp"
#include "pieces/pipeline.hpp"
#include "pieces/potential.hpp"
#include "pieces/rng.hpp"
#include "pieces/spectra.hpp"
#include "pieces/thermo.hpp"

using namespace pieces;

namespace {

int failures = 0;
std::chrono::steady_clock::time_point t_last = std::chrono::steady_clock::now();

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    const auto now = std::chrono::steady_clock::now();
    const double sec = std::chrono::duration<double>(now - t_last).count();
    t_last = now;
    std::printf("%s  criterion %2d: %s (%s) [%.1fs]\n", ok ? "PASS" : "FAIL", id, what.c_str(),
                detail.c_str(), sec);
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

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

std::vector<std::uint64_t> seed_range(std::uint64_t lo, std::uint64_t hi) {
    std::vector<std::uint64_t> s;
    for (std::uint64_t v = lo; v <= hi; ++v) s.push_back(v);
    return s;
}

}  // namespace

int main() {
    const Potential U = Potential::step(1.0, 1.0);
    const Potential zero = Potential::step(0.0, 0.0);
    SolverConfig cfg;  // n_modes = 12 pipeline default

    // ------------------------------------------------------------------
    // shared fits at the pinned lengths
    AsymptoticFit fits = fit_gamma(U, {20.0, 40.0, 80.0}, 16, cfg);
    fit_sigma(fits, U, {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}, {20.0, 40.0, 80.0}, 1.0, 24, cfg);
    {
        const auto now = std::chrono::steady_clock::now();
        std::printf("fits ready: gamma = %.4f, sigma(0) = %.4f [%.1fs]\n", fits.gamma,
                    fits.sigma(0.0), std::chrono::duration<double>(now - t_last).count());
        t_last = now;
    }

    // ------------------------------------------------------------------
    // 1. oracle equivalence on >= 200 randomized instances
    {
        SplitMix64 rng(424242);
        SolverConfig ocfg = cfg;
        ocfg.n_modes = 10;
        ModelParams mp;
        mp.density = 0.1;
        mp.interaction_range = 1.0;
        mp.minimal_length = 1.4;
        mp.fermi_length = 2.4;
        mp.fermi_energy = kPiSq / (2.4 * 2.4);
        int trials = 0, exact = 0;
        double worst = 0.0;
        while (trials < 200) {
            const int m = 2 + static_cast<int>(rng.next_unit() * 2.99);
            std::vector<double> lengths, gaps;
            for (int i = 0; i < m; ++i) {
                lengths.push_back(0.3 * 1.4 + 3.0 * 1.4 * rng.next_unit());
                if (i + 1 < m) gaps.push_back(rng.next_unit() < 0.4 ? 0.0 : 2.0 * rng.next_unit());
            }
            const PieceConfiguration pc = pieces_with_gaps(lengths, gaps);
            if (pc.piece_count() > 8) continue;
            const ChainDecomposition d = decompose(pc, mp, 2);
            const long caps =
                std::accumulate(d.piece_caps.begin(), d.piece_caps.end(), 0L);
            if (caps < 1 || caps > 12) continue;
            const long n = static_cast<long>(rng.next_unit() * (caps + 0.999));
            const LevelPool pool = build_level_pool(d, U, 2, ocfg);
            const GroundStateEstimate gs = greedy_fill(pool, n, d);
            const auto [occ, brute] = brute_force_ground(d, U, n, ocfg);
            const double rel =
                std::fabs(gs.total_energy() - brute) / std::max(1.0, std::fabs(brute));
            worst = std::max(worst, rel);
            if (rel <= 1e-12) ++exact;
            ++trials;
        }
        report(1, exact == trials, "greedy equals exhaustive enumeration on 200 instances",
               "worst relative gap " + fmt(worst));
    }

    // ------------------------------------------------------------------
    // 2. free pair identity at n_modes = 32
    {
        SolverConfig dense = cfg;
        dense.max_dense_dim = 600;
        bool ok = true;
        double worst = 0.0;
        for (double l : {5.0, 20.0, 80.0}) {
            const double e = solve_same_piece_pair(l, Potential::step(0.0, 1.0), 32, dense).energy;
            const double rel = std::fabs(e - 5.0 * kPiSq / (l * l)) / (5.0 * kPiSq / (l * l));
            worst = std::max(worst, rel);
            ok = ok && rel <= 1e-10;
        }
        report(2, ok, "free pair energy = 5 pi^2 / l^2", "worst relative error " + fmt(worst));
    }

    // ------------------------------------------------------------------
    // 3. range cutoff at d = M + 0.01
    {
        const double l = 5.0, a = 1.3, d = 1.01;
        SolverConfig dense = cfg;
        dense.max_dense_dim = 600;
        const TwoParticleSolution s = solve_two_piece_pair(l, a, d, U, 16, dense);
        const double free_sum = kPiSq / (l * l) + kPiSq / (a * a * l * l);
        bool ok = std::fabs(s.energy - free_sum) <= 1e-12 * free_sum;
        bool zeros = true;
        for (int p = 1; p <= 6; ++p) {
            for (int q = 1; q <= 6; ++q) {
                zeros = zeros && interaction_element_two(l, a * l, d, p, q, U) == 0.0;
            }
        }
        report(3, ok && zeros, "beyond-range pair is exactly free",
               "energy gap " + fmt(std::fabs(s.energy - free_sum)) + ", elements all zero: " +
                   (zeros ? "yes" : "no"));
    }

    // ------------------------------------------------------------------
    // 4. gamma scaling stability
    {
        const auto& c = fits.raw_gamma_corrections;
        const double mean = std::accumulate(c.begin(), c.end(), 0.0) / c.size();
        const double spread =
            (*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end())) / mean;
        const bool pos = *std::min_element(c.begin(), c.end()) > 0.0;
        report(4, pos && spread <= 0.05, "(E - 5 pi^2/l^2) l^3 stable across l = 20,40,80",
               "spread " + fmt(spread) + ", gamma " + fmt(fits.gamma));
    }

    // ------------------------------------------------------------------
    // 5. sigma scaling stability and cutoff
    {
        const auto& c = fits.raw_sigma_corrections[0];  // d = 0
        const double mean = std::accumulate(c.begin(), c.end(), 0.0) / c.size();
        const double spread =
            (*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end())) / mean;
        const bool pos = *std::min_element(c.begin(), c.end()) > 0.0;
        // beyond the range both the fitted table and a direct solve vanish exactly
        AsymptoticFit probe = fits;
        fit_sigma(probe, U, {1.01}, {20.0}, 1.0, 12, cfg);
        const bool cut = probe.sigma_val[0] == 0.0 && fits.sigma(1.0) == 0.0;
        report(5, pos && spread <= 0.10 && cut, "sigma(0) l^6 stable, sigma vanishes past M",
               "spread " + fmt(spread) + ", sigma(0) " + fmt(fits.sigma(0.0)));
    }

    // ------------------------------------------------------------------
    // 6. counting function vs J
    {
        const CountingExperiment ce =
            counting_experiment(0.05, 5e4, seed_range(1, 10), U, cfg, fits);
        report(6, ce.mean_sup_gap <= 0.15 * 0.05, "empirical counting matches J",
               "mean sup gap " + fmt(ce.mean_sup_gap) + " <= " + fmt(0.15 * 0.05));
    }

    // ------------------------------------------------------------------
    // 7 + 10 at rho = 0.05: pool bracket and the gap-trend midpoint
    double gap_mid = 0.0;
    {
        const ExperimentReport rep =
            energy_per_particle_experiment(0.05, 1e5, seed_range(1, 10), U, 2, 0.5, cfg, fits);
        bool ok = true;
        double lo = 1e300, hi = 0.0;
        for (const SeedRun& r : rep.runs) {
            const double ratio = static_cast<double>(r.pool_size) / (2.0 * 0.05 * 1e5);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            ok = ok && ratio >= 0.97 && ratio <= 1.0 + (3.0 * 1.0 + 6.0) * 0.05 + 0.03;
        }
        report(7, ok, "pool size bracket 2n < #Gamma_2 < 2n(1+(3M+6)rho)",
               "ratios in [" + fmt(lo) + ", " + fmt(hi) + "]");
        double mean = 0.0;
        for (std::size_t i = 0; i < 5; ++i) mean += rep.runs[i].gap_greedy / 5.0;
        gap_mid = mean;
    }

    // ------------------------------------------------------------------
    // 8. fermi sandwich
    {
        bool ok = true;
        std::string detail;
        for (double rho : {0.02, 0.05, 0.1}) {
            const ModelParams mp = model_params(rho, U.range());
            const FermiSolution f = fermi_level(rho, mp, U, fits);
            const bool here = mp.minimal_length < f.delta_rho && f.delta_rho < mp.fermi_length &&
                              mp.fermi_energy < f.lambda_rho;
            ok = ok && here;
            detail += "rho=" + fmt(rho) + ": delta=" + fmt(f.delta_rho) + "; ";
        }
        report(8, ok, "l_{rho,U} < delta_rho < l_rho and E_rho < lambda_rho", detail);
    }

    // ------------------------------------------------------------------
    // 9. free-model consistency
    {
        bool ok = true;
        std::string detail;
        for (double rho : {0.05, 0.1}) {
            const ModelParams mp = model_params(rho, 0.0);
            double mean = 0.0;
            const int seeds = 3;
            for (std::uint64_t s = 1; s <= seeds; ++s) {
                const PieceConfiguration pc = sample_pieces(1e5, s);
                const ChainDecomposition d = decompose(pc, mp, 2);
                const LevelPool pool = build_level_pool(d, zero, 2, cfg);
                const long n = std::lround(rho * 1e5);
                mean += greedy_fill(pool, n, d).total_energy() / n / seeds;
            }
            const double ref = free_energy_per_particle(rho);
            const double rel = std::fabs(mean - ref) / ref;
            ok = ok && rel <= 0.02;
            detail += "rho=" + fmt(rho) + ": rel " + fmt(rel) + "; ";
        }
        report(9, ok, "free greedy matches the IDS quadrature within 2%", detail);
    }

    // ------------------------------------------------------------------
    // 10. energy gap trend in rho
    {
        const ExperimentReport hi =
            energy_per_particle_experiment(0.1, 1e5, seed_range(1, 5), U, 2, 0.5, cfg, fits);
        const ExperimentReport lo =
            energy_per_particle_experiment(0.025, 1e5, seed_range(1, 5), U, 2, 0.5, cfg, fits);
        const double g_hi = hi.mean_gap_greedy;
        const double g_lo = lo.mean_gap_greedy;
        const bool ok = g_hi > gap_mid && gap_mid > g_lo;
        report(10, ok, "|E/n - J(lambda_rho)/rho| decreases along rho = 0.1, 0.05, 0.025",
               fmt(g_hi) + " > " + fmt(gap_mid) + " > " + fmt(g_lo));
    }

    // ------------------------------------------------------------------
    // 11. density factorization identities
    {
        SplitMix64 rng(777);
        bool ok = true;
        double worst = 0.0;
        for (int trial = 0; trial < 3; ++trial) {
            const int blocks = 2 + (trial % 2);
            std::vector<std::pair<double, double>> iv;
            double x = 0.0;
            for (int b = 0; b < blocks; ++b) {
                const double len = 1.0 + 0.4 * rng.next_unit();
                iv.push_back({x, x + len});
                x += len + 0.5 + rng.next_unit();
            }
            const Grid g = make_grid(iv, 20.0);
            std::vector<FactorComponent> comps;
            std::vector<Eigen::VectorXd> orbitals;
            FactorComponent c0;
            c0.blocks = {0};
            const Eigen::VectorXd u = sine_on_grid(g, 0, 1);
            const Eigen::VectorXd v = sine_on_grid(g, 0, 2);
            c0.one = slater_one_density({u, v}, g).matrix;
            c0.two = slater_two_density({u, v}, g).matrix;
            c0.particles = 2;
            comps.push_back(c0);
            orbitals.push_back(u);
            orbitals.push_back(v);
            if (blocks == 3) {
                FactorComponent c1;
                c1.blocks = {1};
                const Eigen::VectorXd w = sine_on_grid(g, 1, 1);
                c1.one = slater_one_density({w}, g).matrix;
                c1.particles = 1;
                comps.push_back(c1);
                orbitals.push_back(w);
            }
            const auto [one, two] = factorized_densities(g, comps);
            const long n = static_cast<long>(orbitals.size());

            // brute-force contraction of the wedge wavefunction
            const std::size_t G = g.size();
            std::vector<double> wave;
            if (n == 2) {
                wave.assign(G * G, 0.0);
                for (std::size_t i = 0; i < G; ++i) {
                    for (std::size_t j = 0; j < G; ++j) {
                        wave[i * G + j] =
                            (orbitals[0](static_cast<long>(i)) * orbitals[1](static_cast<long>(j)) -
                             orbitals[1](static_cast<long>(i)) * orbitals[0](static_cast<long>(j))) /
                            std::sqrt(2.0);
                    }
                }
            } else {
                wave.assign(G * G * G, 0.0);
                for (std::size_t i = 0; i < G; ++i) {
                    for (std::size_t j = 0; j < G; ++j) {
                        for (std::size_t k = 0; k < G; ++k) {
                            const double p12 =
                                (orbitals[0](static_cast<long>(j)) * orbitals[1](static_cast<long>(k)) -
                                 orbitals[1](static_cast<long>(j)) * orbitals[0](static_cast<long>(k))) /
                                std::sqrt(2.0);
                            const double p02 =
                                (orbitals[0](static_cast<long>(i)) * orbitals[1](static_cast<long>(k)) -
                                 orbitals[1](static_cast<long>(i)) * orbitals[0](static_cast<long>(k))) /
                                std::sqrt(2.0);
                            const double p01 =
                                (orbitals[0](static_cast<long>(i)) * orbitals[1](static_cast<long>(j)) -
                                 orbitals[1](static_cast<long>(i)) * orbitals[0](static_cast<long>(j))) /
                                std::sqrt(2.0);
                            wave[(i * G + j) * G + k] =
                                (orbitals[2](static_cast<long>(i)) * p12 -
                                 orbitals[2](static_cast<long>(j)) * p02 +
                                 orbitals[2](static_cast<long>(k)) * p01) /
                                std::sqrt(3.0);
                        }
                    }
                }
            }
            // order 1
            for (std::size_t a = 0; a < G; ++a) {
                for (std::size_t b = 0; b < G; ++b) {
                    double acc = 0.0;
                    if (n == 2) {
                        for (std::size_t z = 0; z < G; ++z) {
                            acc += g.weights[z] * wave[a * G + z] * wave[b * G + z];
                        }
                        acc *= 2.0;
                    } else {
                        for (std::size_t z1 = 0; z1 < G; ++z1) {
                            for (std::size_t z2 = 0; z2 < G; ++z2) {
                                acc += g.weights[z1] * g.weights[z2] *
                                       wave[(a * G + z1) * G + z2] * wave[(b * G + z1) * G + z2];
                            }
                        }
                        acc *= 3.0;
                    }
                    worst = std::max(worst,
                                     std::fabs(acc - one.matrix(static_cast<long>(a),
                                                                static_cast<long>(b))));
                }
            }
            // order 2
            for (std::size_t a = 0; a < G; ++a) {
                for (std::size_t b = a + 1; b < G; ++b) {
                    const long row = static_cast<long>(g.pair_index(a, b));
                    for (std::size_t c = 0; c < G; ++c) {
                        for (std::size_t d2 = c + 1; d2 < G; ++d2) {
                            const long col = static_cast<long>(g.pair_index(c, d2));
                            double acc = 0.0;
                            if (n == 2) {
                                acc = wave[a * G + b] * wave[c * G + d2];
                            } else {
                                for (std::size_t z = 0; z < G; ++z) {
                                    acc += g.weights[z] * wave[(a * G + b) * G + z] *
                                           wave[(c * G + d2) * G + z];
                                }
                                acc *= 3.0;
                            }
                            worst = std::max(worst, std::fabs(acc - two.matrix(row, col)));
                        }
                    }
                }
            }
            const double tr1 = std::fabs(one.trace - n);
            const double tr2 = std::fabs(two.trace - 0.5 * n * (n - 1));
            ok = ok && worst <= 1e-8 && tr1 <= 1e-9 && tr2 <= 1e-9;
        }
        report(11, ok, "Lemma-style density factorization matches direct quadrature",
               "max kernel error " + fmt(worst));
    }

    // ------------------------------------------------------------------
    // 12. desk-scale density comparison greedy vs test state
    {
        const double rho = 0.05, L = 1e4, delta = 0.5;
        const ModelParams mp = model_params(rho, U.range());
        bool ok = true;
        std::string detail;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const PieceConfiguration pc = sample_pieces(L, seed);
            const ChainDecomposition d = decompose(pc, mp, 2);
            const LevelPool pool = build_level_pool(d, U, 2, cfg);
            const long n = std::lround(rho * L);
            const GroundStateEstimate gs = greedy_fill(pool, n, d);
            const FermiSolution fermi = fermi_level(rho, mp, U, fits);
            const Occupation to = build_test_occupation(d, fermi, fits, U, n);
            const StateComparison sc = compare_states(d, pool, gs, to, U, cfg);
            const double one_per_n = sc.one_distance / static_cast<double>(sc.n);
            const double two_per_n2 =
                sc.two_gap_bound / (static_cast<double>(sc.n) * static_cast<double>(sc.n));
            const double band = std::pow(rho, 2.0 - delta);
            ok = ok && one_per_n <= 10.0 * band && two_per_n2 <= 45.0 * band;
            if (seed == 1) {
                detail = "gamma1/n " + fmt(one_per_n) + " <= " + fmt(10.0 * band) +
                         ", gamma2 bound/n^2 " + fmt(two_per_n2) + " <= " + fmt(45.0 * band);
            }
        }
        report(12, ok, "greedy vs test state trace norms at L = 1e4", detail);
    }

    // ------------------------------------------------------------------
    // 13. statistics bands at L = 1e5, >= 9/10 seeds
    {
        const double L = 1e5;
        const ModelParams mp = model_params(0.05, 1.0);
        const double lu = mp.minimal_length;
        int good = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const PieceConfiguration pc = sample_pieces(L, seed);
            bool seed_ok = true;
            // piece lengths in [1,2]
            const LengthHistogram h = piece_length_histogram(pc, {1.0, 2.0});
            seed_ok = seed_ok && std::fabs(h.zscores[0]) <= 5.0;
            // largest piece
            seed_ok = seed_ok && max_piece_length(pc) <= std::log(L) * std::log(std::log(L));
            // two-long-piece pattern
            GapPattern pat;
            pat.length_windows = {{1.0, 2.0}, {1.0, 2.0}};
            pat.gap_windows = {{0.0, 1.0}};
            pat.min_length = 1.0;
            seed_ok = seed_ok && std::fabs(gap_pattern_count(pc, pat).zscore) <= 5.0;
            // chain counts
            const ChainDecomposition d = decompose(pc, mp, 2);
            const ChainStatistics st =
                chain_statistics(d, mp, {lu, 2.0 * lu}, {0.0, 1.0});
            seed_ok = seed_ok && std::fabs(st.size1[0].zscore) <= 5.0;
            for (const auto& row : st.size2) seed_ok = seed_ok && std::fabs(row.zscore) <= 5.0;
            if (seed_ok) ++good;
        }
        report(13, good >= 9, "piece and chain statistics within 5 sigma", fmt(good) + "/10 seeds");
    }

    std::printf("%s: %d of 13 criteria failed\n", failures == 0 ? "ALL PASS" : "RESULT", failures);
    return failures;
}
