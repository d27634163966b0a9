#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pieces/chains.hpp"
#include "pieces/potential.hpp"

namespace pieces {

// Dirichlet levels i^2 pi^2 / l^2, i = 1..k_max.
std::vector<double> free_levels(double l, int k_max);

// Ground energy of k free fermions on a piece of length l.
double free_ground_energy(double l, int k);

struct SolverConfig {
    int n_modes = 12;          // sine modes per piece for chain-level solves
    double quad_tol = 1e-10;   // absolute tolerance per interaction element
    double eig_tol = 1e-12;    // eigenvalue convergence (relative)
    bool allow_perturbative = true;  // kappa >= 3 via free + first order
    bool strict_capacity = false;    // error when kappa exceeds the chain cap
    int max_dense_dim = 220;         // direct eigensolver threshold
};

// Wedge-density interaction integrals (two fermions, one or two pieces).
double interaction_element_same(double l, int p, int q, const Potential& U,
                                double tol = 1e-10);
double interaction_element_two(double l, double lprime, double d, int p, int q,
                               const Potential& U, double tol = 1e-10);

struct TwoParticleSolution {
    double energy = 0.0;
    // same piece: antisymmetric n x n mode matrix A, psi = sum A_pq phi_p(x) phi_q(y);
    // two pieces: N_L x N_R tensor coefficients of the left x right product basis.
    Eigen::MatrixXd coefficients;
    int basis_size = 0;
    double residual = 0.0;
};

// Two interacting fermions on [0, l] in the antisymmetric sine basis.
TwoParticleSolution solve_same_piece_pair(double l, const Potential& U, int n_modes,
                                          const SolverConfig& cfg = {});

// One fermion on [-a l, 0], one on [d, d + l], product sine basis.
TwoParticleSolution solve_two_piece_pair(double l, double a, double d, const Potential& U,
                                         int n_modes, const SolverConfig& cfg = {});

// Fitted asymptotic constants: same-piece correction gamma / l^3 and
// two-piece correction sigma(d) / (a^3 l^6).
struct AsymptoticFit {
    double gamma = 0.0;
    std::vector<double> sigma_d;    // increasing separations
    std::vector<double> sigma_val;  // fitted sigma at each separation
    double range = 0.0;             // sigma clamps to 0 beyond this
    std::vector<double> fit_lengths;
    std::vector<double> fit_residuals;
    std::vector<double> raw_gamma_corrections;        // (E - 5 pi^2/l^2) l^3 per length
    std::vector<std::vector<double>> raw_sigma_corrections;  // per d, per length, * a^3 l^6

    double sigma(double d) const;
    static AsymptoticFit zero();
};

AsymptoticFit fit_gamma(const Potential& U, const std::vector<double>& l_grid, int n_modes_base,
                        const SolverConfig& cfg = {});
void fit_sigma(AsymptoticFit& fit, const Potential& U, const std::vector<double>& d_grid,
               const std::vector<double>& l_grid, double a, int n_modes_base,
               const SolverConfig& cfg = {});

// Mode counts used by the fits (scaled with the piece length so the
// captured interaction fraction is length independent).
int same_piece_fit_modes(double l, int base);
int two_piece_fit_modes(double l, int base);

struct ChainLevels {
    std::vector<double> f;  // f(I, kappa), kappa = 1..kappa_max
    std::vector<double> F;  // cumulative minima, F[0] = f[0]
    std::vector<std::vector<int>> splits;     // argmin occupation per kappa
    std::vector<char> approximate;            // perturbative energies
    std::vector<char> beyond_capacity;        // kappa exceeds the chain cap
};

ChainLevels chain_levels(const Chain& chain, const Potential& U, int kappa_max,
                         const SolverConfig& cfg);

// Ground energy of the chain for one fixed occupation split (exact for
// <= 2 particles, free + first order beyond).
double chain_split_energy(const Chain& chain, const Potential& U,
                          const std::vector<int>& split, const SolverConfig& cfg,
                          bool* approximate = nullptr);

}  // namespace pieces
