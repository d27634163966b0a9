#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "pieces/spectra.hpp"

namespace pieces {

// Uniform midpoint quadrature, blocked per piece.
struct Grid {
    struct Block {
        double left = 0.0;
        double length = 0.0;
        int n = 0;
        std::size_t offset = 0;
    };
    std::vector<Block> blocks;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    std::size_t pair_count() const { return size() * (size() - 1) / 2; }
    std::size_t pair_index(std::size_t i, std::size_t j) const {  // i < j
        return i * size() - i * (i + 1) / 2 + (j - i - 1);
    }
};

Grid make_grid(const std::vector<std::pair<double, double>>& intervals,
               double nodes_per_unit = 20.0);

// Samples of the k-th Dirichlet sine mode of one block, zero elsewhere.
Eigen::VectorXd sine_on_grid(const Grid& grid, std::size_t block, int mode);

// Kernel samples: order 1 on the grid, order 2 on ordered pairs (i < j).
struct DensityKernel {
    int order = 1;
    Grid grid;
    Eigen::MatrixXd matrix;
    double trace = 0.0;
};

double kernel_trace(const DensityKernel& k);
double trace_norm(const DensityKernel& k);
double trace_norm_distance(const DensityKernel& a, const DensityKernel& b);

// gamma^(1) of a Slater determinant of the given orthonormal orbitals.
DensityKernel slater_one_density(const std::vector<Eigen::VectorXd>& orbitals, const Grid& grid);
// gamma^(2) of the same determinant (exact pair formula).
DensityKernel slater_two_density(const std::vector<Eigen::VectorXd>& orbitals, const Grid& grid);

struct PairGeometry {
    bool same_piece = true;
    double l = 0.0;
    double a = 1.0;  // two-piece: left length a*l
    double d = 0.0;  // two-piece: gap
};

// Densities of a numerical two-particle ground state. For same-piece
// geometry the grid must hold one block of length l; for two-piece
// geometry two blocks of lengths a*l and l.
DensityKernel pair_state_one_density(const TwoParticleSolution& sol, const PairGeometry& geom,
                                     const Grid& grid);
DensityKernel pair_state_two_density(const TwoParticleSolution& sol, const PairGeometry& geom,
                                     const Grid& grid);

// One factor of a product state: densities supported on a subset of blocks.
struct FactorComponent {
    std::vector<std::size_t> blocks;
    Eigen::MatrixXd one;  // order-1 samples on the union grid
    Eigen::MatrixXd two;  // order-2 samples on union pairs
    int particles = 0;
};

// Densities of the wedge of the components (disjoint supports): order 1 is
// additive, order 2 combines the one-particle factors with the swap term.
std::pair<DensityKernel, DensityKernel> factorized_densities(
    const Grid& grid, const std::vector<FactorComponent>& components);

// Lift kernels computed on a sub-grid whose nodes sit at `node_offset`
// within the union grid.
Eigen::MatrixXd embed_one(const Grid& union_grid, const Eigen::MatrixXd& sub,
                          std::size_t node_offset);
Eigen::MatrixXd embed_two(const Grid& union_grid, const Grid& sub_grid,
                          const Eigen::MatrixXd& sub, std::size_t node_offset);

}  // namespace pieces
