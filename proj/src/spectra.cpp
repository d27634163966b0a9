#include "pieces/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pieces/common.hpp"

namespace pieces {

std::vector<double> free_levels(double l, int k_max) {
    if (!(l > 0.0)) throw std::invalid_argument("free_levels: l must be positive");
    if (k_max < 1) throw std::invalid_argument("free_levels: k_max must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(k_max));
    for (int i = 1; i <= k_max; ++i) {
        out[static_cast<std::size_t>(i - 1)] = kPiSq * i * i / (l * l);
    }
    return out;
}

double free_ground_energy(double l, int k) {
    if (k <= 0) return 0.0;
    const double kk = static_cast<double>(k);
    return kPiSq * kk * (kk + 1.0) * (2.0 * kk + 1.0) / (6.0 * l * l);
}

namespace {

// ---------------------------------------------------------------- quadrature

struct GaussRule {
    std::vector<double> x, w;  // on [-1, 1]
};

GaussRule make_gauss(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        r.x[i] = x;
        r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return r;
}

const GaussRule& gauss24() { static const GaussRule r = make_gauss(24); return r; }
const GaussRule& gauss12() { static const GaussRule r = make_gauss(12); return r; }

// Nodes covering [lo, hi], chunked so that `freq` (max angular frequency of
// the integrand) stays resolvable by a 24-point rule per chunk
// (four wavelengths per chunk keeps the rule in its exponential regime).
void chunked_nodes(double lo, double hi, double freq, std::vector<double>& xs,
                   std::vector<double>& ws, int oversample = 1) {
    if (hi <= lo) return;
    const GaussRule& g = gauss24();
    const double len = hi - lo;
    int nsub = std::max(1, static_cast<int>(std::ceil(freq * len / (2.0 * kPi) / 4.0)));
    nsub *= oversample;
    for (int s = 0; s < nsub; ++s) {
        const double a = lo + len * s / nsub;
        const double b = lo + len * (s + 1) / nsub;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            xs.push_back(0.5 * (b - a) * g.x[i] + 0.5 * (a + b));
            ws.push_back(0.5 * (b - a) * g.w[i]);
        }
    }
}

// Antiderivative of s_b s_d on a piece of length l in local coordinates,
// s_k(y) = sqrt(2/l) sin(k pi y / l).
double sine_pair_antiderivative(int b, int d, double l, double y) {
    if (b == d) {
        return (y - l / (2.0 * b * kPi) * std::sin(2.0 * b * kPi * y / l)) / l;
    }
    const double t1 = l / ((b - d) * kPi) * std::sin((b - d) * kPi * y / l);
    const double t2 = l / ((b + d) * kPi) * std::sin((b + d) * kPi * y / l);
    return (t1 - t2) / l;
}

double sine_mode(int k, double l, double y) {
    return std::sqrt(2.0 / l) * std::sin(k * kPi * y / l);
}

// Integral of U(y - x) s_b(y) s_d(y) dy over [ylo, yhi] in local coordinates
// of a piece whose left end sits at `offset` in the frame of x.
// In that frame the mode argument is (y - offset).
double inner_potential_integral(const Potential& U, double x, double ylo, double yhi,
                                double offset, int b, int d, double piece_len) {
    if (yhi <= ylo) return 0.0;
    if (U.kind() == Potential::Kind::step) {
        const double v = U.magnitude();
        if (v == 0.0) return 0.0;
        return v * (sine_pair_antiderivative(b, d, piece_len, yhi - offset) -
                    sine_pair_antiderivative(b, d, piece_len, ylo - offset));
    }
    // Tabulated potential: piecewise linear in |y - x|. Split at the kinks
    // y = x +- t for each table node t, then subdivide for the sine frequency.
    std::vector<double> brk{ylo, yhi};
    for (double t : U.table_nodes()) {
        for (double y : {x + t, x - t}) {
            if (y > ylo && y < yhi) brk.push_back(y);
        }
    }
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
    const GaussRule& g = gauss12();
    const double wavelength = piece_len / (b + d);
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < brk.size(); ++s) {
        const double lo = brk[s], hi = brk[s + 1];
        if (hi <= lo) continue;
        const int nsub = std::max(1, static_cast<int>(std::ceil((hi - lo) / wavelength)));
        for (int sub = 0; sub < nsub; ++sub) {
            const double a = lo + (hi - lo) * sub / nsub;
            const double b2 = lo + (hi - lo) * (sub + 1) / nsub;
            double acc = 0.0;
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                const double y = 0.5 * (b2 - a) * g.x[i] + 0.5 * (a + b2);
                acc += g.w[i] * U(y - x) * sine_mode(b, piece_len, y - offset) *
                       sine_mode(d, piece_len, y - offset);
            }
            total += 0.5 * (b2 - a) * acc;
        }
    }
    return total;
}

struct SymPairIndex {
    int n = 0;
    int index(int a, int c) const {  // 1-based modes, a <= c
        if (a > c) std::swap(a, c);
        return (a - 1) * n - (a - 1) * (a - 2) / 2 + (c - a);
    }
    int count() const { return n * (n + 1) / 2; }
};

// Same-piece interaction table A[(a,c),(b,d)] = int s_a s_c (x) *
// int_{|y-x|<=R} U(y-x) s_b s_d (y) dy dx on [0, l].
Eigen::MatrixXd same_piece_table(double l, const Potential& U, int n, int oversample = 1) {
    const SymPairIndex sp{n};
    const int P = sp.count();
    const double R = U.range();

    std::vector<double> xs, ws;
    const double freq = 2.0 * n * kPi / l * 2.0;  // outer x inner frequencies combined
    std::vector<double> panel{0.0, std::min(R, l), std::max(0.0, l - R), l};
    std::sort(panel.begin(), panel.end());
    panel.erase(std::unique(panel.begin(), panel.end()), panel.end());
    for (std::size_t s = 0; s + 1 < panel.size(); ++s) {
        chunked_nodes(panel[s], panel[s + 1], freq, xs, ws, oversample);
    }
    const int K = static_cast<int>(xs.size());
    if (K == 0 || U.is_zero()) return Eigen::MatrixXd::Zero(P, P);

    Eigen::MatrixXd modes(n, K);
    for (int k = 0; k < K; ++k) {
        for (int a = 1; a <= n; ++a) modes(a - 1, k) = sine_mode(a, l, xs[k]);
    }
    Eigen::MatrixXd F(K, P), T(K, P);
    const bool step_fast = U.kind() == Potential::Kind::step;
    std::vector<double> ds(static_cast<std::size_t>(2 * n + 1));
    for (int k = 0; k < K; ++k) {
        const double x = xs[k];
        const double ylo = std::max(0.0, x - R);
        const double yhi = std::min(l, x + R);
        if (step_fast) {
            // DS[m] = primitive of cos(m pi y / l) over [ylo, yhi], so the
            // inner integral of s_b s_d is u0 (DS[|b-d|] - DS[b+d]) / l
            ds[0] = yhi - ylo;
            for (int m = 1; m <= 2 * n; ++m) {
                ds[static_cast<std::size_t>(m)] =
                    l / (m * kPi) * (std::sin(m * kPi * yhi / l) - std::sin(m * kPi * ylo / l));
            }
        }
        for (int a = 1; a <= n; ++a) {
            for (int c = a; c <= n; ++c) {
                const int j = sp.index(a, c);
                F(k, j) = modes(a - 1, k) * modes(c - 1, k);
                T(k, j) = step_fast
                              ? U.magnitude() / l *
                                    (ds[static_cast<std::size_t>(c - a)] -
                                     ds[static_cast<std::size_t>(c + a)])
                              : inner_potential_integral(U, x, ylo, yhi, 0.0, a, c, l);
            }
        }
    }
    Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(ws.data(), K);
    Eigen::MatrixXd A = F.transpose() * w.asDiagonal() * T;
    A = 0.5 * (A + A.transpose()).eval();
    return A;
}

// Two-piece geometry [-al, 0] x [d, d+l]: left-piece node data and right-piece
// inner integrals at each node.
struct TwoPieceQuad {
    std::vector<double> xs, ws;          // nodes on the interacting slice of the left piece
    Eigen::MatrixXd left_modes;          // N_L x K
    std::vector<Eigen::MatrixXd> right;  // per node, N_R x N_R symmetric inner integrals
};

TwoPieceQuad two_piece_quad(double l, double a, double d, const Potential& U, int n_left,
                            int n_right, int oversample = 1) {
    TwoPieceQuad q;
    const double al = a * l;
    const double R = U.range();
    const double x0 = std::max(-al, d - R);
    if (x0 >= 0.0 || U.is_zero()) return q;
    const double freq = 2.0 * kPi * (n_left / al + n_right / l) * 1.5;
    chunked_nodes(x0, 0.0, freq, q.xs, q.ws, oversample);
    const int K = static_cast<int>(q.xs.size());
    q.left_modes.resize(n_left, K);
    for (int k = 0; k < K; ++k) {
        for (int p = 1; p <= n_left; ++p) {
            q.left_modes(p - 1, k) = sine_mode(p, al, q.xs[k] + al);
        }
    }
    q.right.resize(K);
    const bool step_fast = U.kind() == Potential::Kind::step;
    std::vector<double> ds(static_cast<std::size_t>(2 * n_right + 1));
    for (int k = 0; k < K; ++k) {
        const double x = q.xs[k];
        const double yhi = std::min(d + l, x + R);
        q.right[k].resize(n_right, n_right);
        if (step_fast) {
            const double yloc = yhi - d;  // local coordinate; lower limit is 0
            ds[0] = yloc;
            for (int m = 1; m <= 2 * n_right; ++m) {
                ds[static_cast<std::size_t>(m)] = l / (m * kPi) * std::sin(m * kPi * yloc / l);
            }
        }
        for (int b = 1; b <= n_right; ++b) {
            for (int dd = b; dd <= n_right; ++dd) {
                const double v = step_fast
                                     ? U.magnitude() / l *
                                           (ds[static_cast<std::size_t>(dd - b)] -
                                            ds[static_cast<std::size_t>(dd + b)])
                                     : inner_potential_integral(U, x, d, yhi, d, b, dd, l);
                q.right[k](b - 1, dd - 1) = v;
                q.right[k](dd - 1, b - 1) = v;
            }
        }
    }
    return q;
}

// ------------------------------------------------------------------- Lanczos

struct LanczosResult {
    double value = 0.0;
    Eigen::VectorXd vec;
    double residual = 0.0;
};

template <class Apply>
LanczosResult lanczos_smallest(int dim, const Apply& apply, const Eigen::VectorXd& start,
                               double rel_tol, int max_iter) {
    max_iter = std::min(max_iter, dim);
    std::vector<Eigen::VectorXd> basis;
    std::vector<double> alpha, beta;
    Eigen::VectorXd v = start.normalized();
    Eigen::VectorXd w(dim);
    double prev = std::numeric_limits<double>::infinity();
    double theta = prev, res = prev;
    Eigen::VectorXd tri_vec;
    int m = 0;
    for (int it = 0; it < max_iter; ++it) {
        basis.push_back(v);
        apply(v, w);
        double a = v.dot(w);
        alpha.push_back(a);
        w -= a * v;
        if (it > 0) w -= beta.back() * basis[static_cast<std::size_t>(it - 1)];
        for (const auto& u : basis) w -= u.dot(w) * u;  // full reorthogonalization
        for (const auto& u : basis) w -= u.dot(w) * u;
        const double b = w.norm();
        m = it + 1;
        const bool breakdown = b < 1e-300;
        if ((it >= 4 && it % 2 == 0) || breakdown || it == max_iter - 1) {
            Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                Tm(i, i) = alpha[static_cast<std::size_t>(i)];
                if (i + 1 < m) {
                    Tm(i, i + 1) = Tm(i + 1, i) = beta[static_cast<std::size_t>(i)];
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
            theta = es.eigenvalues()(0);
            tri_vec = es.eigenvectors().col(0);
            res = b * std::fabs(tri_vec(m - 1));
            const double scale = std::max(1.0, std::fabs(theta));
            if (breakdown || (res <= rel_tol * scale && std::fabs(theta - prev) <= rel_tol * scale)) {
                break;
            }
            prev = theta;
        }
        if (b < 1e-300) break;
        beta.push_back(b);
        v = w / b;
    }
    LanczosResult out;
    out.value = theta;
    out.residual = res;
    out.vec = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < m; ++i) out.vec += tri_vec(i) * basis[static_cast<std::size_t>(i)];
    out.vec.normalize();
    return out;
}

}  // namespace

// ------------------------------------------------------- interaction elements

double interaction_element_same(double l, int p, int q, const Potential& U, double tol) {
    if (p < 1 || q < 1) throw std::invalid_argument("interaction_element_same: modes must be >= 1");
    if (!(l > 0.0)) throw std::invalid_argument("interaction_element_same: l must be positive");
    if (U.is_zero()) return 0.0;
    const int n = std::max(p, q);
    const SymPairIndex sp{n};
    auto value_at = [&](int oversample) {
        Eigen::MatrixXd A = same_piece_table(l, U, n, oversample);
        return A(sp.index(p, p), sp.index(q, q)) - A(sp.index(p, q), sp.index(p, q));
    };
    const double v1 = value_at(1);
    const double v2 = value_at(2);
    const double err = std::fabs(v1 - v2);
    if (err > std::max(tol, 1e-9 * std::fabs(v2))) {
        throw NumericalFailure("interaction_element_same: quadrature did not converge", err);
    }
    return v2;
}

double interaction_element_two(double l, double lprime, double d, int p, int q,
                               const Potential& U, double tol) {
    if (p < 1 || q < 1) throw std::invalid_argument("interaction_element_two: modes must be >= 1");
    if (!(l > 0.0) || !(lprime > 0.0) || d < 0.0) {
        throw std::invalid_argument("interaction_element_two: bad geometry");
    }
    if (U.is_zero() || d >= U.range()) return 0.0;  // disjoint support: exactly zero
    // left piece [-lprime, 0] mode p, right piece [d, d+l] mode q
    const double a = lprime / l;
    auto value_at = [&](int oversample) {
        TwoPieceQuad quad = two_piece_quad(l, a, d, U, p, q, oversample);
        double acc = 0.0;
        for (std::size_t k = 0; k < quad.xs.size(); ++k) {
            const double fp = quad.left_modes(p - 1, static_cast<int>(k));
            acc += quad.ws[k] * fp * fp * quad.right[k](q - 1, q - 1);
        }
        return acc;
    };
    const double v1 = value_at(1);
    const double v2 = value_at(2);
    const double err = std::fabs(v1 - v2);
    if (err > std::max(tol, 1e-9 * std::fabs(v2))) {
        throw NumericalFailure("interaction_element_two: quadrature did not converge", err);
    }
    return v2;
}

// ---------------------------------------------------------------- pair solves

TwoParticleSolution solve_same_piece_pair(double l, const Potential& U, int n_modes,
                                          const SolverConfig& cfg) {
    if (n_modes < 4) throw std::invalid_argument("solve_same_piece_pair: n_modes must be >= 4");
    if (!(l > 0.0)) throw std::invalid_argument("solve_same_piece_pair: l must be positive");
    const int n = n_modes;
    const int dim = n * (n - 1) / 2;
    std::vector<std::pair<int, int>> basis;
    basis.reserve(static_cast<std::size_t>(dim));
    for (int p = 1; p <= n; ++p) {
        for (int q = p + 1; q <= n; ++q) basis.emplace_back(p, q);
    }
    const SymPairIndex sp{n};
    Eigen::MatrixXd A = same_piece_table(l, U, n);

    Eigen::MatrixXd H(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const auto [p, q] = basis[static_cast<std::size_t>(i)];
        for (int j = i; j < dim; ++j) {
            const auto [r, s] = basis[static_cast<std::size_t>(j)];
            double v = A(sp.index(p, r), sp.index(q, s)) - A(sp.index(p, s), sp.index(q, r));
            if (j == i) v += kPiSq * (p * p + q * q) / (l * l);
            H(i, j) = v;
            H(j, i) = v;
        }
    }

    TwoParticleSolution sol;
    sol.basis_size = n;
    Eigen::VectorXd ground;
    if (dim <= cfg.max_dense_dim) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.info() != Eigen::Success) {
            throw NumericalFailure("solve_same_piece_pair: eigensolver failed");
        }
        sol.energy = es.eigenvalues()(0);
        ground = es.eigenvectors().col(0);
        sol.residual = 0.0;
    } else {
        Eigen::VectorXd v0(dim);
        for (int i = 0; i < dim; ++i) v0(i) = 1.0 / (1.0 + i);
        auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = H * x; };
        LanczosResult r = lanczos_smallest(dim, apply, v0, cfg.eig_tol, 500);
        sol.energy = r.value;
        ground = r.vec;
        sol.residual = r.residual;
        const double scale = std::max(1.0, std::fabs(sol.energy));
        if (r.residual > 1e-8 * scale) {
            throw NumericalFailure("solve_same_piece_pair: Lanczos did not converge", r.residual);
        }
    }
    // antisymmetric mode matrix, |A|_F = 1
    sol.coefficients = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < dim; ++i) {
        const auto [p, q] = basis[static_cast<std::size_t>(i)];
        sol.coefficients(p - 1, q - 1) = ground(i) / std::sqrt(2.0);
        sol.coefficients(q - 1, p - 1) = -ground(i) / std::sqrt(2.0);
    }
    return sol;
}

TwoParticleSolution solve_two_piece_pair(double l, double a, double d, const Potential& U,
                                         int n_modes, const SolverConfig& cfg) {
    if (n_modes < 4) throw std::invalid_argument("solve_two_piece_pair: n_modes must be >= 4");
    if (!(l > 0.0) || a < 1.0 || d < 0.0) {
        throw std::invalid_argument("solve_two_piece_pair: need l > 0, a >= 1, d >= 0");
    }
    const int nR = n_modes;
    const int nL = static_cast<int>(std::ceil(n_modes * a));
    const double al = a * l;
    const int dim = nL * nR;

    Eigen::VectorXd dL(nL), dR(nR);
    for (int p = 1; p <= nL; ++p) dL(p - 1) = kPiSq * p * p / (al * al);
    for (int q = 1; q <= nR; ++q) dR(q - 1) = kPiSq * q * q / (l * l);

    TwoPieceQuad quad = two_piece_quad(l, a, d, U, nL, nR);
    const int K = static_cast<int>(quad.xs.size());

    TwoParticleSolution sol;
    sol.basis_size = nR;
    if (K == 0) {
        // no interacting region: exact free product ground state
        sol.energy = dL(0) + dR(0);
        sol.coefficients = Eigen::MatrixXd::Zero(nL, nR);
        sol.coefficients(0, 0) = 1.0;
        sol.residual = 0.0;
        return sol;
    }

    Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(quad.ws.data(), K);
    auto apply = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        Eigen::Map<const Eigen::MatrixXd> C(x.data(), nR, nL);  // column-major: C(q-1, p-1)
        Eigen::Map<Eigen::MatrixXd> Y(y.data(), nR, nL);
        Y = C.array().colwise() * dR.array();
        Y += C * dL.asDiagonal();
        // interaction: sum_k w_k |sL(:,k)><sL(:,k)| (x) T_k
        Eigen::MatrixXd Vk = C * quad.left_modes;  // nR x K, column k = sum_p C(:,p) sL(p,k)
        for (int k = 0; k < K; ++k) {
            Eigen::VectorXd tk = quad.right[k] * Vk.col(k);
            Y += w(k) * tk * quad.left_modes.col(k).transpose();
        }
    };

    if (dim <= cfg.max_dense_dim) {
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim), col(dim);
        for (int j = 0; j < dim; ++j) {
            e.setZero();
            e(j) = 1.0;
            apply(e, col);
            H.col(j) = col;
        }
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.info() != Eigen::Success) {
            throw NumericalFailure("solve_two_piece_pair: eigensolver failed");
        }
        sol.energy = es.eigenvalues()(0);
        Eigen::VectorXd g = es.eigenvectors().col(0);
        sol.coefficients = Eigen::Map<Eigen::MatrixXd>(g.data(), nR, nL).transpose();
        sol.residual = 0.0;
    } else {
        Eigen::VectorXd v0 = Eigen::VectorXd::Zero(dim);
        for (int i = 0; i < dim; ++i) v0(i) = 1.0 / (1.0 + i);
        v0(0) = 4.0;
        LanczosResult r = lanczos_smallest(dim, apply, v0, cfg.eig_tol, 400);
        sol.energy = r.value;
        sol.coefficients = Eigen::Map<Eigen::MatrixXd>(r.vec.data(), nR, nL).transpose();
        sol.residual = r.residual;
        const double scale = std::max(1.0, std::fabs(sol.energy));
        if (r.residual > 1e-8 * scale) {
            throw NumericalFailure("solve_two_piece_pair: Lanczos did not converge", r.residual);
        }
    }
    // fix overall sign for reproducibility
    double lead = sol.coefficients(0, 0);
    if (lead < 0.0) sol.coefficients = -sol.coefficients;
    return sol;
}

// ----------------------------------------------------------------------- fits

int same_piece_fit_modes(double l, int base) {
    return std::max(base, static_cast<int>(std::ceil(0.8 * l)));
}

int two_piece_fit_modes(double l, int base) {
    return std::max(base, static_cast<int>(std::ceil(l)));
}

double AsymptoticFit::sigma(double d) const {
    if (d >= range || sigma_d.empty()) return 0.0;
    if (d <= sigma_d.front()) return sigma_val.front();
    for (std::size_t i = 0; i + 1 < sigma_d.size(); ++i) {
        if (d <= sigma_d[i + 1]) {
            const double t = (d - sigma_d[i]) / (sigma_d[i + 1] - sigma_d[i]);
            return sigma_val[i] + t * (sigma_val[i + 1] - sigma_val[i]);
        }
    }
    // beyond the sampled grid but below the range: taper linearly to zero
    const double t = (d - sigma_d.back()) / (range - sigma_d.back());
    return sigma_val.back() * std::max(0.0, 1.0 - t);
}

AsymptoticFit AsymptoticFit::zero() {
    AsymptoticFit f;
    f.gamma = 0.0;
    f.range = 0.0;
    return f;
}

AsymptoticFit fit_gamma(const Potential& U, const std::vector<double>& l_grid, int n_modes_base,
                        const SolverConfig& cfg) {
    if (l_grid.size() < 3) throw std::invalid_argument("fit_gamma: need at least three lengths");
    for (std::size_t i = 0; i + 1 < l_grid.size(); ++i) {
        if (!(l_grid[i] < l_grid[i + 1])) throw std::invalid_argument("fit_gamma: lengths must increase");
    }
    AsymptoticFit fit;
    fit.range = U.range();
    fit.fit_lengths = l_grid;
    double num = 0.0, den = 0.0;
    std::vector<double> corr(l_grid.size());
    for (std::size_t i = 0; i < l_grid.size(); ++i) {
        const double l = l_grid[i];
        const int n = same_piece_fit_modes(l, n_modes_base);
        const TwoParticleSolution s = solve_same_piece_pair(l, U, n, cfg);
        corr[i] = s.energy - 5.0 * kPiSq / (l * l);
        num += corr[i] / (l * l * l);
        den += 1.0 / std::pow(l, 6);
        fit.raw_gamma_corrections.push_back(corr[i] * l * l * l);
    }
    if (den == 0.0) throw NumericalFailure("fit_gamma: singular fit");
    fit.gamma = num / den;
    for (std::size_t i = 0; i < l_grid.size(); ++i) {
        fit.fit_residuals.push_back(corr[i] - fit.gamma / std::pow(l_grid[i], 3));
    }
    return fit;
}

void fit_sigma(AsymptoticFit& fit, const Potential& U, const std::vector<double>& d_grid,
               const std::vector<double>& l_grid, double a, int n_modes_base,
               const SolverConfig& cfg) {
    if (d_grid.empty() || l_grid.empty()) throw std::invalid_argument("fit_sigma: empty grids");
    if (a < 1.0) throw std::invalid_argument("fit_sigma: a must be >= 1");
    fit.range = U.range();
    fit.sigma_d = d_grid;
    fit.sigma_val.assign(d_grid.size(), 0.0);
    fit.raw_sigma_corrections.assign(d_grid.size(), {});
    const double a3 = a * a * a;
    for (std::size_t di = 0; di < d_grid.size(); ++di) {
        const double d = d_grid[di];
        if (d >= U.range() || U.is_zero()) continue;  // exactly zero
        double num = 0.0, den = 0.0;
        for (double l : l_grid) {
            const int n = two_piece_fit_modes(l, n_modes_base);
            const TwoParticleSolution s = solve_two_piece_pair(l, a, d, U, n, cfg);
            const double free_sum = kPiSq / (l * l) + kPiSq / (a * a * l * l);
            const double corr = s.energy - free_sum;
            const double x = 1.0 / (a3 * std::pow(l, 6));
            num += corr * x;
            den += x * x;
            fit.raw_sigma_corrections[di].push_back(corr * a3 * std::pow(l, 6));
        }
        if (den == 0.0) throw NumericalFailure("fit_sigma: singular fit");
        fit.sigma_val[di] = num / den;
    }
}

// --------------------------------------------------------------- chain levels

double chain_split_energy(const Chain& chain, const Potential& U,
                          const std::vector<int>& split, const SolverConfig& cfg,
                          bool* approximate) {
    if (split.size() != chain.size()) {
        throw std::invalid_argument("chain_split_energy: split size mismatch");
    }
    if (approximate) *approximate = false;
    const int kappa = std::accumulate(split.begin(), split.end(), 0);
    if (kappa == 0) return 0.0;

    if (U.is_zero()) {
        double e = 0.0;
        for (std::size_t i = 0; i < chain.size(); ++i) {
            e += free_ground_energy(chain.lengths[i], split[i]);
        }
        return e;
    }

    if (kappa == 1) {
        for (std::size_t i = 0; i < chain.size(); ++i) {
            if (split[i] == 1) return kPiSq / (chain.lengths[i] * chain.lengths[i]);
        }
    }
    if (kappa == 2) {
        // one doubly occupied piece
        for (std::size_t i = 0; i < chain.size(); ++i) {
            if (split[i] == 2) {
                return solve_same_piece_pair(chain.lengths[i], U, cfg.n_modes, cfg).energy;
            }
        }
        // two singly occupied pieces
        std::size_t i = chain.size(), j = chain.size();
        for (std::size_t k = 0; k < chain.size(); ++k) {
            if (split[k] == 1) {
                if (i == chain.size()) i = k;
                else j = k;
            }
        }
        const double li = chain.lengths[i], lj = chain.lengths[j];
        const double d = chain.distance(i, j);
        if (d >= U.range()) {
            return kPiSq / (li * li) + kPiSq / (lj * lj);
        }
        const double lshort = std::min(li, lj), llong = std::max(li, lj);
        return solve_two_piece_pair(lshort, llong / lshort, d, U, cfg.n_modes, cfg).energy;
    }

    // kappa >= 3: free part plus first-order interaction
    if (!cfg.allow_perturbative) {
        throw std::invalid_argument("chain_split_energy: kappa > 2 needs the perturbative mode");
    }
    if (approximate) *approximate = true;
    double e = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        e += free_ground_energy(chain.lengths[i], split[i]);
        for (int p = 1; p <= split[i]; ++p) {
            for (int q = p + 1; q <= split[i]; ++q) {
                e += interaction_element_same(chain.lengths[i], p, q, U, cfg.quad_tol);
            }
        }
    }
    for (std::size_t i = 0; i < chain.size(); ++i) {
        for (std::size_t j = i + 1; j < chain.size(); ++j) {
            if (split[i] == 0 || split[j] == 0) continue;
            const double d = chain.distance(i, j);
            if (d >= U.range()) continue;
            for (int p = 1; p <= split[i]; ++p) {
                for (int q = 1; q <= split[j]; ++q) {
                    e += interaction_element_two(chain.lengths[j], chain.lengths[i], d, p, q, U,
                                                 cfg.quad_tol);
                }
            }
        }
    }
    return e;
}

namespace {

void enumerate_splits(const std::vector<int>& caps, int kappa, bool capped,
                      std::vector<int>& cur, std::size_t at,
                      const std::function<void(const std::vector<int>&)>& emit) {
    if (at + 1 == cur.size()) {
        const int cap = capped ? caps[at] : kappa;
        if (kappa <= cap) {
            cur[at] = kappa;
            emit(cur);
        }
        return;
    }
    const int cap = capped ? std::min(caps[at], kappa) : kappa;
    for (int q = 0; q <= cap; ++q) {
        cur[at] = q;
        enumerate_splits(caps, kappa - q, capped, cur, at + 1, emit);
    }
}

}  // namespace

ChainLevels chain_levels(const Chain& chain, const Potential& U, int kappa_max,
                         const SolverConfig& cfg) {
    if (kappa_max < 1) throw std::invalid_argument("chain_levels: kappa_max must be >= 1");
    if (chain.size() == 0) throw std::invalid_argument("chain_levels: empty chain");
    const int cap = chain.total_cap();
    if (cfg.strict_capacity && kappa_max > cap) {
        throw CapacityError("chain_levels: kappa_max exceeds the chain capacity");
    }
    if (kappa_max > 2 && !cfg.allow_perturbative) {
        throw std::invalid_argument("chain_levels: kappa_max > 2 requires the perturbative mode");
    }

    ChainLevels out;
    double prevF = 0.0;
    for (int kappa = 1; kappa <= kappa_max; ++kappa) {
        const bool capped_mode = kappa <= cap;
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> best_split;
        bool best_approx = false;
        std::vector<int> cur(chain.size(), 0);
        enumerate_splits(chain.caps, kappa, capped_mode, cur, 0,
                         [&](const std::vector<int>& split) {
                             bool approx = false;
                             const double e = chain_split_energy(chain, U, split, cfg, &approx);
                             if (e < best) {
                                 best = e;
                                 best_split = split;
                                 best_approx = approx;
                             }
                         });
        if (!std::isfinite(best)) {
            throw NumericalFailure("chain_levels: no admissible split found");
        }
        out.F.push_back(best);
        out.f.push_back(best - prevF);
        out.splits.push_back(best_split);
        out.approximate.push_back(best_approx ? 1 : 0);
        out.beyond_capacity.push_back(capped_mode ? 0 : 1);
        prevF = best;
    }
    return out;
}

}  // namespace pieces
