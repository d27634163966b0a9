#include "pieces/densities.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pieces/common.hpp"

namespace pieces {

Grid make_grid(const std::vector<std::pair<double, double>>& intervals, double nodes_per_unit) {
    Grid g;
    for (const auto& [left, right] : intervals) {
        if (!(right > left)) throw std::invalid_argument("make_grid: empty interval");
        Grid::Block b;
        b.left = left;
        b.length = right - left;
        b.n = std::max(8, static_cast<int>(std::ceil(b.length * nodes_per_unit)));
        b.offset = g.nodes.size();
        const double h = b.length / b.n;
        for (int i = 0; i < b.n; ++i) {
            g.nodes.push_back(left + (i + 0.5) * h);
            g.weights.push_back(h);
        }
        g.blocks.push_back(b);
    }
    return g;
}

Eigen::VectorXd sine_on_grid(const Grid& grid, std::size_t block, int mode) {
    if (block >= grid.blocks.size()) throw std::invalid_argument("sine_on_grid: bad block");
    const Grid::Block& b = grid.blocks[block];
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<long>(grid.size()));
    for (int i = 0; i < b.n; ++i) {
        const double x = grid.nodes[b.offset + i] - b.left;
        v(static_cast<long>(b.offset + i)) =
            std::sqrt(2.0 / b.length) * std::sin(mode * kPi * x / b.length);
    }
    return v;
}

namespace {

bool same_grid(const Grid& a, const Grid& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::fabs(a.nodes[i] - b.nodes[i]) > 1e-12) return false;
    }
    return true;
}

Eigen::MatrixXd weighted_symmetric(const DensityKernel& k) {
    const std::size_t G = k.grid.size();
    if (k.order == 1) {
        Eigen::VectorXd s(static_cast<long>(G));
        for (std::size_t i = 0; i < G; ++i) s(static_cast<long>(i)) = std::sqrt(k.grid.weights[i]);
        return s.asDiagonal() * k.matrix * s.asDiagonal();
    }
    const std::size_t P = k.grid.pair_count();
    Eigen::VectorXd s(static_cast<long>(P));
    for (std::size_t i = 0; i < G; ++i) {
        for (std::size_t j = i + 1; j < G; ++j) {
            s(static_cast<long>(k.grid.pair_index(i, j))) =
                std::sqrt(2.0 * k.grid.weights[i] * k.grid.weights[j]);
        }
    }
    return s.asDiagonal() * k.matrix * s.asDiagonal();
}

}  // namespace

double kernel_trace(const DensityKernel& k) {
    const std::size_t G = k.grid.size();
    double t = 0.0;
    if (k.order == 1) {
        for (std::size_t i = 0; i < G; ++i) {
            t += k.grid.weights[i] * k.matrix(static_cast<long>(i), static_cast<long>(i));
        }
        return t;
    }
    for (std::size_t i = 0; i < G; ++i) {
        for (std::size_t j = i + 1; j < G; ++j) {
            const long pj = static_cast<long>(k.grid.pair_index(i, j));
            t += 2.0 * k.grid.weights[i] * k.grid.weights[j] * k.matrix(pj, pj);
        }
    }
    return t;
}

double trace_norm(const DensityKernel& k) {
    Eigen::MatrixXd m = weighted_symmetric(k);
    m = 0.5 * (m + m.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double trace_norm_distance(const DensityKernel& a, const DensityKernel& b) {
    if (a.order != b.order || !same_grid(a.grid, b.grid)) {
        throw std::invalid_argument("trace_norm_distance: kernels live on different spaces");
    }
    DensityKernel diff = a;
    diff.matrix -= b.matrix;
    return trace_norm(diff);
}

DensityKernel slater_one_density(const std::vector<Eigen::VectorXd>& orbitals, const Grid& grid) {
    if (orbitals.empty()) throw std::invalid_argument("slater_one_density: no orbitals");
    const long G = static_cast<long>(grid.size());
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(grid.weights.data(), G);
    double defect = 0.0;
    for (std::size_t i = 0; i < orbitals.size(); ++i) {
        for (std::size_t j = i; j < orbitals.size(); ++j) {
            const double g = orbitals[i].cwiseProduct(w).dot(orbitals[j]);
            defect = std::max(defect, std::fabs(g - (i == j ? 1.0 : 0.0)));
        }
    }
    if (defect > 1e-8) {
        throw std::invalid_argument("slater_one_density: orbitals not orthonormal, Gram defect " +
                                    std::to_string(defect));
    }
    DensityKernel k;
    k.order = 1;
    k.grid = grid;
    k.matrix = Eigen::MatrixXd::Zero(G, G);
    for (const auto& phi : orbitals) k.matrix += phi * phi.transpose();
    k.trace = kernel_trace(k);
    return k;
}

DensityKernel slater_two_density(const std::vector<Eigen::VectorXd>& orbitals, const Grid& grid) {
    DensityKernel one = slater_one_density(orbitals, grid);
    const std::size_t G = grid.size();
    DensityKernel k;
    k.order = 2;
    k.grid = grid;
    const long P = static_cast<long>(grid.pair_count());
    k.matrix.resize(P, P);
    for (std::size_t i = 0; i < G; ++i) {
        for (std::size_t j = i + 1; j < G; ++j) {
            const long row = static_cast<long>(grid.pair_index(i, j));
            for (std::size_t a = 0; a < G; ++a) {
                for (std::size_t b = a + 1; b < G; ++b) {
                    const long col = static_cast<long>(grid.pair_index(a, b));
                    k.matrix(row, col) =
                        0.5 * (one.matrix(i, a) * one.matrix(j, b) -
                               one.matrix(i, b) * one.matrix(j, a));
                }
            }
        }
    }
    k.trace = kernel_trace(k);
    return k;
}

namespace {

// Wavefunction samples of a two-particle solution on ordered grid pairs.
Eigen::VectorXd pair_wave_samples(const TwoParticleSolution& sol, const PairGeometry& geom,
                                  const Grid& grid) {
    const std::size_t G = grid.size();
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<long>(grid.pair_count()));
    if (geom.same_piece) {
        if (grid.blocks.size() != 1 || std::fabs(grid.blocks[0].length - geom.l) > 1e-9) {
            throw std::invalid_argument("pair_state densities: grid does not match the piece");
        }
        const int n = static_cast<int>(sol.coefficients.rows());
        Eigen::MatrixXd modes(static_cast<long>(G), n);
        for (int m = 1; m <= n; ++m) modes.col(m - 1) = sine_on_grid(grid, 0, m);
        Eigen::MatrixXd W = modes * sol.coefficients * modes.transpose();
        for (std::size_t i = 0; i < G; ++i) {
            for (std::size_t j = i + 1; j < G; ++j) {
                psi(static_cast<long>(grid.pair_index(i, j))) = W(static_cast<long>(i),
                                                                  static_cast<long>(j));
            }
        }
        return psi;
    }
    if (grid.blocks.size() != 2) {
        throw std::invalid_argument("pair_state densities: two-piece grid needs two blocks");
    }
    const int nL = static_cast<int>(sol.coefficients.rows());
    const int nR = static_cast<int>(sol.coefficients.cols());
    Eigen::MatrixXd mL(static_cast<long>(G), nL), mR(static_cast<long>(G), nR);
    for (int m = 1; m <= nL; ++m) mL.col(m - 1) = sine_on_grid(grid, 0, m);
    for (int m = 1; m <= nR; ++m) mR.col(m - 1) = sine_on_grid(grid, 1, m);
    Eigen::MatrixXd W = mL * sol.coefficients * mR.transpose();  // psi(x in L, y in R)
    for (std::size_t i = 0; i < G; ++i) {
        for (std::size_t j = i + 1; j < G; ++j) {
            // antisymmetrized state: (psi(x,y) - psi(y,x)) / sqrt(2)
            psi(static_cast<long>(grid.pair_index(i, j))) =
                (W(static_cast<long>(i), static_cast<long>(j)) -
                 W(static_cast<long>(j), static_cast<long>(i))) / std::sqrt(2.0);
        }
    }
    return psi;
}

}  // namespace

DensityKernel pair_state_one_density(const TwoParticleSolution& sol, const PairGeometry& geom,
                                     const Grid& grid) {
    const long G = static_cast<long>(grid.size());
    DensityKernel k;
    k.order = 1;
    k.grid = grid;
    if (geom.same_piece) {
        const int n = static_cast<int>(sol.coefficients.rows());
        Eigen::MatrixXd modes(G, n);
        for (int m = 1; m <= n; ++m) modes.col(m - 1) = sine_on_grid(grid, 0, m);
        // gamma^(1) = 2 A A^T in mode space
        Eigen::MatrixXd rho = 2.0 * sol.coefficients * sol.coefficients.transpose();
        k.matrix = modes * rho * modes.transpose();
    } else {
        const int nL = static_cast<int>(sol.coefficients.rows());
        const int nR = static_cast<int>(sol.coefficients.cols());
        Eigen::MatrixXd mL(G, nL), mR(G, nR);
        for (int m = 1; m <= nL; ++m) mL.col(m - 1) = sine_on_grid(grid, 0, m);
        for (int m = 1; m <= nR; ++m) mR.col(m - 1) = sine_on_grid(grid, 1, m);
        const Eigen::MatrixXd rhoL = sol.coefficients * sol.coefficients.transpose();
        const Eigen::MatrixXd rhoR = sol.coefficients.transpose() * sol.coefficients;
        k.matrix = mL * rhoL * mL.transpose() + mR * rhoR * mR.transpose();
    }
    k.trace = kernel_trace(k);
    return k;
}

DensityKernel pair_state_two_density(const TwoParticleSolution& sol, const PairGeometry& geom,
                                     const Grid& grid) {
    DensityKernel k;
    k.order = 2;
    k.grid = grid;
    const Eigen::VectorXd psi = pair_wave_samples(sol, geom, grid);
    k.matrix = psi * psi.transpose();
    k.trace = kernel_trace(k);
    return k;
}

std::pair<DensityKernel, DensityKernel> factorized_densities(
    const Grid& grid, const std::vector<FactorComponent>& components) {
    if (components.empty()) throw std::invalid_argument("factorized_densities: no components");
    std::set<std::size_t> used;
    for (const auto& c : components) {
        for (std::size_t b : c.blocks) {
            if (!used.insert(b).second) {
                throw std::invalid_argument("factorized_densities: overlapping supports");
            }
            if (b >= grid.blocks.size()) {
                throw std::invalid_argument("factorized_densities: unknown block");
            }
        }
    }
    const long G = static_cast<long>(grid.size());
    DensityKernel one;
    one.order = 1;
    one.grid = grid;
    one.matrix = Eigen::MatrixXd::Zero(G, G);
    for (const auto& c : components) one.matrix += c.one;
    one.trace = kernel_trace(one);

    DensityKernel two;
    two.order = 2;
    two.grid = grid;
    const long P = static_cast<long>(grid.pair_count());
    two.matrix = Eigen::MatrixXd::Zero(P, P);
    for (const auto& c : components) {
        if (c.two.rows() == P) two.matrix += c.two;
    }
    // assemble the tensor terms: for each component subtract
    // (1/2) g1_i (x) g1_i - (1/2)(g1_i (x) g1_i) o tau, then add the same
    // combination of the full one-particle density
    const std::size_t Gs = grid.size();
    auto add_tensor = [&](const Eigen::MatrixXd& A, double coef) {
        for (std::size_t i = 0; i < Gs; ++i) {
            for (std::size_t j = i + 1; j < Gs; ++j) {
                const long row = static_cast<long>(grid.pair_index(i, j));
                for (std::size_t a = 0; a < Gs; ++a) {
                    for (std::size_t b = a + 1; b < Gs; ++b) {
                        const long col = static_cast<long>(grid.pair_index(a, b));
                        two.matrix(row, col) +=
                            coef * (A(static_cast<long>(i), static_cast<long>(a)) *
                                        A(static_cast<long>(j), static_cast<long>(b)) -
                                    A(static_cast<long>(i), static_cast<long>(b)) *
                                        A(static_cast<long>(j), static_cast<long>(a)));
                    }
                }
            }
        }
    };
    for (const auto& c : components) add_tensor(c.one, -0.5);
    add_tensor(one.matrix, 0.5);
    two.trace = kernel_trace(two);
    return {one, two};
}

Eigen::MatrixXd embed_one(const Grid& union_grid, const Eigen::MatrixXd& sub,
                          std::size_t node_offset) {
    const long G = static_cast<long>(union_grid.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(G, G);
    out.block(static_cast<long>(node_offset), static_cast<long>(node_offset), sub.rows(),
              sub.cols()) = sub;
    return out;
}

Eigen::MatrixXd embed_two(const Grid& union_grid, const Grid& sub_grid,
                          const Eigen::MatrixXd& sub, std::size_t node_offset) {
    const long P = static_cast<long>(union_grid.pair_count());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(P, P);
    const std::size_t g = sub_grid.size();
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = i + 1; j < g; ++j) {
            const long row_sub = static_cast<long>(sub_grid.pair_index(i, j));
            const long row = static_cast<long>(
                union_grid.pair_index(i + node_offset, j + node_offset));
            for (std::size_t a = 0; a < g; ++a) {
                for (std::size_t b = a + 1; b < g; ++b) {
                    out(row, static_cast<long>(
                                 union_grid.pair_index(a + node_offset, b + node_offset))) =
                        sub(row_sub, static_cast<long>(sub_grid.pair_index(a, b)));
                }
            }
        }
    }
    return out;
}

}  // namespace pieces
