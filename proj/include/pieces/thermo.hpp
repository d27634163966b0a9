#pragma once

#include <vector>

#include "pieces/chains.hpp"
#include "pieces/optimizer.hpp"
#include "pieces/potential.hpp"
#include "pieces/spectra.hpp"

namespace pieces {

// Integrated density of states of the free pieces' model.
double ids_free(double energy);
// Unique solution of ids_free(E) = rho.
double fermi_energy(double rho);
// Free-model ground state energy per particle, by quadrature of E dN(E).
double free_energy_per_particle(double rho, double rel_tol = 1e-8);

// Counting function of the level pool evaluated on a grid (levels per unit
// length at or below each lambda; right-continuous step function).
std::vector<double> empirical_counting(const LevelPool& pool, double box_length,
                                       const std::vector<double>& lambda_grid);

struct CountingFunction {
    std::vector<double> grid;
    std::vector<double> empirical;
    std::vector<double> closed_form;
};

// Closed-form thermodynamic counting function J(lambda) built from the
// fitted interaction constants.
double closed_form_J(double lambda, const ModelParams& params, const Potential& U,
                     const AsymptoticFit& fits);

// Level-weighted analogue of J; (1/rho) * this at lambda_rho approximates the
// ground-state energy per particle.
double weighted_level_integral(double lambda, const ModelParams& params, const Potential& U,
                               const AsymptoticFit& fits);

struct FermiSolution {
    double lambda_rho = 0.0;
    double delta_rho = 0.0;  // pi / sqrt(lambda_rho)
    double residual = 0.0;   // |J(lambda_rho) - rho|
};

FermiSolution fermi_level(double rho, const ModelParams& params, const Potential& U,
                          const AsymptoticFit& fits);

// Threshold-rule occupation at the Fermi level, completed on the leftover
// pieces with the lowest free levels so that the total is n.
Occupation build_test_occupation(const ChainDecomposition& decomp, const FermiSolution& fermi,
                                 const AsymptoticFit& fits, const Potential& U, long n);

struct LeftoverReport {
    long leftover_particles = 0;
    double fraction = 0.0;       // (1/n) sum over N_p
    double lower_band = 0.0;     // rho^{p+delta}
    double upper_band = 0.0;     // rho^{p-delta}
    double energy = 0.0;         // free + first-order energy of N_p occupants
    double energy_bound = 0.0;   // n rho^{p-delta}
    double max_per_particle = 0.0;
    double per_particle_bound = 0.0;  // pi^2 / l_{rho,U}^2
};

LeftoverReport leftover_checks(const ChainDecomposition& decomp, const Occupation& occ, int p,
                               double delta, const ModelParams& params, const Potential& U);

}  // namespace pieces
