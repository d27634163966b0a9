#pragma once

#include <cstdint>
#include <vector>

#include "pieces/chains.hpp"
#include "pieces/densities.hpp"
#include "pieces/optimizer.hpp"
#include "pieces/potential.hpp"
#include "pieces/thermo.hpp"

namespace pieces {

struct SeedRun {
    std::uint64_t seed = 0;
    long n = 0;
    std::size_t piece_count = 0;
    std::size_t chain_count = 0;      // P_p chains
    std::size_t pool_size = 0;        // #Gamma_p
    double energy_greedy_per_n = 0.0;
    double energy_test_per_n = 0.0;
    double weighted_J_over_rho = 0.0;  // (1/rho) curly-J(lambda_rho)
    double lambda_rho = 0.0;
    double delta_rho = 0.0;
    double gap_greedy = 0.0;  // |E_greedy/n - (1/rho) curly-J|
    double gap_test = 0.0;
    double leftover_fraction = 0.0;
};

SeedRun run_seed(double rho, double box_length, std::uint64_t seed, const Potential& U, int p,
                 double delta, const SolverConfig& cfg, const AsymptoticFit& fits);

struct ExperimentReport {
    double rho = 0.0;
    double box_length = 0.0;
    std::vector<SeedRun> runs;
    double mean_energy_greedy = 0.0;
    double stderr_energy_greedy = 0.0;
    double mean_energy_test = 0.0;
    double mean_gap_greedy = 0.0;
    double mean_gap_test = 0.0;
};

ExperimentReport energy_per_particle_experiment(double rho, double box_length,
                                                const std::vector<std::uint64_t>& seeds,
                                                const Potential& U, int p, double delta,
                                                const SolverConfig& cfg,
                                                const AsymptoticFit& fits);

// Energy of an admissible occupation in the chain model (interacting on the
// P_p chains, free on the leftover pieces).
double occupation_energy(const ChainDecomposition& decomp, const LevelPool& pool,
                         const Occupation& occ, const Potential& U, const SolverConfig& cfg);

struct CountingExperiment {
    std::vector<double> grid;
    std::vector<double> closed_form;
    std::vector<std::vector<double>> empirical;  // per seed
    std::vector<double> sup_gaps;
    double mean_sup_gap = 0.0;
};

CountingExperiment counting_experiment(double rho, double box_length,
                                       const std::vector<std::uint64_t>& seeds,
                                       const Potential& U, const SolverConfig& cfg,
                                       const AsymptoticFit& fits, int grid_points = 50);

struct StateComparison {
    long n = 0;
    long disagreeing_chains = 0;
    long disagreeing_pieces = 0;  // leftover pieces with different counts
    double one_distance = 0.0;    // ||gamma1_greedy - gamma1_test||_tr, exact blockwise
    double two_gap_bound = 0.0;   // certified bound on the order-2 gap
};

StateComparison compare_states(const ChainDecomposition& decomp, const LevelPool& pool,
                               const GroundStateEstimate& greedy, const Occupation& test_occ,
                               const Potential& U, const SolverConfig& cfg,
                               double nodes_per_unit = 20.0);

// One-particle density of a chain for a fixed split, on a grid blocked per
// chain piece (lab coordinates).
DensityKernel chain_one_density(const Chain& chain, const std::vector<int>& split,
                                const Potential& U, const SolverConfig& cfg, const Grid& grid);

Grid chain_grid(const Chain& chain, const ChainDecomposition& decomp, double nodes_per_unit);

}  // namespace pieces
