#include "pieces/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pieces/common.hpp"
#include "pieces/disorder.hpp"
#include "pieces/parallel.hpp"

namespace pieces {

double occupation_energy(const ChainDecomposition& decomp, const LevelPool& pool,
                         const Occupation& occ, const Potential& U, const SolverConfig& cfg) {
    double e = 0.0;
    for (std::size_t ord = 0; ord < pool.chain_ids.size(); ++ord) {
        const Chain& ch = decomp.chains[pool.chain_ids[ord]];
        std::vector<int> split(ch.size());
        int kappa = 0;
        for (std::size_t j = 0; j < ch.size(); ++j) {
            split[j] = occ.counts[ch.piece_indices[j]];
            kappa += split[j];
        }
        if (kappa == 0) continue;
        const ChainLevels& lv = pool.chain_levels[ord];
        if (kappa <= static_cast<int>(lv.F.size()) &&
            split == lv.splits[static_cast<std::size_t>(kappa - 1)]) {
            e += lv.F[static_cast<std::size_t>(kappa - 1)];
        } else {
            e += chain_split_energy(ch, U, split, cfg, nullptr);
        }
    }
    for (std::size_t piece : decomp.leftover_pieces) {
        e += free_ground_energy(decomp.piece_lengths[piece], occ.counts[piece]);
    }
    return e;
}

SeedRun run_seed(double rho, double box_length, std::uint64_t seed, const Potential& U, int p,
                 double delta, const SolverConfig& cfg, const AsymptoticFit& fits) {
    const ModelParams params = model_params(rho, U.range());
    const PieceConfiguration pcfg = sample_pieces(box_length, seed);
    const ChainDecomposition decomp = decompose(pcfg, params, p);
    const LevelPool pool = build_level_pool(decomp, U, p, cfg);
    const long n = std::lround(rho * box_length);

    SeedRun run;
    run.seed = seed;
    run.n = n;
    run.piece_count = pcfg.piece_count();
    run.chain_count = decomp.small_chains.size();
    run.pool_size = pool.entries.size();

    const GroundStateEstimate greedy = greedy_fill(pool, n, decomp);
    run.energy_greedy_per_n = greedy.total_energy() / static_cast<double>(n);

    const FermiSolution fermi = fermi_level(rho, params, U, fits);
    run.lambda_rho = fermi.lambda_rho;
    run.delta_rho = fermi.delta_rho;
    const Occupation test_occ = build_test_occupation(decomp, fermi, fits, U, n);
    run.energy_test_per_n =
        occupation_energy(decomp, pool, test_occ, U, cfg) / static_cast<double>(n);

    run.weighted_J_over_rho = weighted_level_integral(fermi.lambda_rho, params, U, fits) / rho;
    run.gap_greedy = std::fabs(run.energy_greedy_per_n - run.weighted_J_over_rho);
    run.gap_test = std::fabs(run.energy_test_per_n - run.weighted_J_over_rho);

    const LeftoverReport lo = leftover_checks(decomp, greedy.occupation, p, delta, params, U);
    run.leftover_fraction = lo.fraction;
    return run;
}

ExperimentReport energy_per_particle_experiment(double rho, double box_length,
                                                const std::vector<std::uint64_t>& seeds,
                                                const Potential& U, int p, double delta,
                                                const SolverConfig& cfg,
                                                const AsymptoticFit& fits) {
    ExperimentReport rep;
    rep.rho = rho;
    rep.box_length = box_length;
    rep.runs.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        rep.runs[i] = run_seed(rho, box_length, seeds[i], U, p, delta, cfg, fits);
    });
    const double m = static_cast<double>(seeds.size());
    for (const SeedRun& r : rep.runs) {
        rep.mean_energy_greedy += r.energy_greedy_per_n / m;
        rep.mean_energy_test += r.energy_test_per_n / m;
        rep.mean_gap_greedy += r.gap_greedy / m;
        rep.mean_gap_test += r.gap_test / m;
    }
    double var = 0.0;
    for (const SeedRun& r : rep.runs) {
        var += (r.energy_greedy_per_n - rep.mean_energy_greedy) *
               (r.energy_greedy_per_n - rep.mean_energy_greedy);
    }
    if (seeds.size() > 1) {
        rep.stderr_energy_greedy = std::sqrt(var / (m * (m - 1.0)));
    }
    return rep;
}

CountingExperiment counting_experiment(double rho, double box_length,
                                       const std::vector<std::uint64_t>& seeds,
                                       const Potential& U, const SolverConfig& cfg,
                                       const AsymptoticFit& fits, int grid_points) {
    const ModelParams params = model_params(rho, U.range());
    const FermiSolution fermi = fermi_level(rho, params, U, fits);

    CountingExperiment ce;
    ce.grid.resize(static_cast<std::size_t>(grid_points));
    for (int j = 1; j <= grid_points; ++j) {
        ce.grid[static_cast<std::size_t>(j - 1)] =
            fermi.lambda_rho * j / std::max(1, grid_points - 5);
    }
    ce.closed_form.reserve(ce.grid.size());
    for (double lam : ce.grid) ce.closed_form.push_back(closed_form_J(lam, params, U, fits));

    ce.empirical.resize(seeds.size());
    ce.sup_gaps.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        const PieceConfiguration pcfg = sample_pieces(box_length, seeds[i]);
        const ChainDecomposition decomp = decompose(pcfg, params, 2);
        const LevelPool pool = build_level_pool(decomp, U, 2, cfg);
        ce.empirical[i] = empirical_counting(pool, box_length, ce.grid);
        double sup = 0.0;
        for (std::size_t j = 0; j < ce.grid.size(); ++j) {
            sup = std::max(sup, std::fabs(ce.empirical[i][j] - ce.closed_form[j]));
        }
        ce.sup_gaps[i] = sup;
    });
    for (double s : ce.sup_gaps) ce.mean_sup_gap += s / static_cast<double>(seeds.size());
    return ce;
}

Grid chain_grid(const Chain& chain, const ChainDecomposition& decomp, double nodes_per_unit) {
    std::vector<std::pair<double, double>> intervals;
    for (std::size_t j = 0; j < chain.size(); ++j) {
        const double left = decomp.piece_lefts[chain.piece_indices[j]];
        intervals.emplace_back(left, left + chain.lengths[j]);
    }
    return make_grid(intervals, nodes_per_unit);
}

namespace {

Eigen::VectorXd block_mode(const Grid& grid, std::size_t block, int mode, bool mirrored) {
    if (!mirrored) return sine_on_grid(grid, block, mode);
    const Grid::Block& b = grid.blocks[block];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<long>(grid.size()));
    for (int i = 0; i < b.n; ++i) {
        const double t = grid.nodes[b.offset + i] - b.left;
        v(static_cast<long>(b.offset + i)) =
            std::sqrt(2.0 / b.length) * std::sin(mode * kPi * (b.length - t) / b.length);
    }
    return v;
}

}  // namespace

DensityKernel chain_one_density(const Chain& chain, const std::vector<int>& split,
                                const Potential& U, const SolverConfig& cfg, const Grid& grid) {
    if (split.size() != chain.size()) {
        throw std::invalid_argument("chain_one_density: split size mismatch");
    }
    const long G = static_cast<long>(grid.size());
    DensityKernel k;
    k.order = 1;
    k.grid = grid;
    k.matrix = Eigen::MatrixXd::Zero(G, G);
    const int kappa = std::accumulate(split.begin(), split.end(), 0);
    if (kappa == 0) {
        k.trace = 0.0;
        return k;
    }

    // interacting (1,1) across two pieces with a gap below the range
    std::vector<std::size_t> occupied;
    for (std::size_t j = 0; j < chain.size(); ++j) {
        if (split[j] > 0) occupied.push_back(j);
    }
    const bool interacting_pair =
        kappa == 2 && occupied.size() == 2 && !U.is_zero() &&
        chain.distance(occupied[0], occupied[1]) < U.range();
    const bool same_piece_pair = kappa == 2 && occupied.size() == 1 && !U.is_zero();

    if (interacting_pair) {
        const std::size_t f = occupied[0], s = occupied[1];
        const double lf = chain.lengths[f], ls = chain.lengths[s];
        const double d = chain.distance(f, s);
        const double lshort = std::min(lf, ls), llong = std::max(lf, ls);
        const TwoParticleSolution sol =
            solve_two_piece_pair(lshort, llong / lshort, d, U, cfg.n_modes, cfg);
        const Eigen::MatrixXd rhoL = sol.coefficients * sol.coefficients.transpose();
        const Eigen::MatrixXd rhoR = sol.coefficients.transpose() * sol.coefficients;
        // solver left piece = the longer one, facing endpoint at its right edge
        const bool first_is_long = lf >= ls;
        const std::size_t long_block = first_is_long ? f : s;
        const std::size_t short_block = first_is_long ? s : f;
        const bool mirrored = !first_is_long;
        const int nL = static_cast<int>(rhoL.rows());
        const int nR = static_cast<int>(rhoR.rows());
        Eigen::MatrixXd mL(G, nL), mR(G, nR);
        for (int m = 1; m <= nL; ++m) mL.col(m - 1) = block_mode(grid, long_block, m, mirrored);
        for (int m = 1; m <= nR; ++m) mR.col(m - 1) = block_mode(grid, short_block, m, mirrored);
        k.matrix = mL * rhoL * mL.transpose() + mR * rhoR * mR.transpose();
        k.trace = kernel_trace(k);
        return k;
    }
    if (same_piece_pair) {
        const std::size_t j = occupied[0];
        const TwoParticleSolution sol = solve_same_piece_pair(chain.lengths[j], U, cfg.n_modes, cfg);
        const int n = static_cast<int>(sol.coefficients.rows());
        Eigen::MatrixXd mj(G, n);
        for (int m = 1; m <= n; ++m) mj.col(m - 1) = sine_on_grid(grid, j, m);
        k.matrix = mj * (2.0 * sol.coefficients * sol.coefficients.transpose()) * mj.transpose();
        k.trace = kernel_trace(k);
        return k;
    }
    // free Slater product per piece (no interaction or kappa >= 3 perturbative)
    for (std::size_t j = 0; j < chain.size(); ++j) {
        for (int m = 1; m <= split[j]; ++m) {
            const Eigen::VectorXd phi = sine_on_grid(grid, j, m);
            k.matrix += phi * phi.transpose();
        }
    }
    k.trace = kernel_trace(k);
    return k;
}

StateComparison compare_states(const ChainDecomposition& decomp, const LevelPool& pool,
                               const GroundStateEstimate& greedy, const Occupation& test_occ,
                               const Potential& U, const SolverConfig& cfg,
                               double nodes_per_unit) {
    StateComparison out;
    out.n = greedy.occupation.total;

    std::vector<int> greedy_kappa(pool.chain_ids.size(), 0);
    for (const PoolEntry& e : greedy.levels_used) greedy_kappa[e.chain_ord] += 1;

    for (std::size_t ord = 0; ord < pool.chain_ids.size(); ++ord) {
        const Chain& ch = decomp.chains[pool.chain_ids[ord]];
        std::vector<int> split_g(ch.size(), 0), split_t(ch.size(), 0);
        const int kg = greedy_kappa[ord];
        if (kg > 0) split_g = pool.chain_levels[ord].splits[static_cast<std::size_t>(kg - 1)];
        int kt = 0;
        for (std::size_t j = 0; j < ch.size(); ++j) {
            split_t[j] = test_occ.counts[ch.piece_indices[j]];
            kt += split_t[j];
        }
        if (split_g == split_t) continue;
        out.disagreeing_chains += 1;
        const Grid grid = chain_grid(ch, decomp, nodes_per_unit);
        const DensityKernel g1 = chain_one_density(ch, split_g, U, cfg, grid);
        const DensityKernel t1 = chain_one_density(ch, split_t, U, cfg, grid);
        out.one_distance += trace_norm_distance(g1, t1);
        out.two_gap_bound += 0.5 * kg * (kg - 1) + kg * kg + 0.5 * kt * (kt - 1) + kt * kt;
    }
    for (std::size_t piece : decomp.leftover_pieces) {
        const int qg = greedy.occupation.counts[piece];
        const int qt = test_occ.counts[piece];
        if (qg == qt) continue;
        out.disagreeing_pieces += 1;
        // nested Slater projectors differ by a projector of rank |qg - qt|
        out.one_distance += std::abs(qg - qt);
        out.two_gap_bound += 0.5 * qg * (qg - 1) + qg * qg + 0.5 * qt * (qt - 1) + qt * qt;
    }
    out.two_gap_bound += 2.0 * static_cast<double>(out.n) * out.one_distance;
    return out;
}

}  // namespace pieces
