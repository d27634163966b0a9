#include "pieces/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pieces/common.hpp"

namespace pieces {

namespace {

struct Gauss {
    std::vector<double> x, w;
};

Gauss make_gauss_rule(int n) {
    Gauss r;
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

const Gauss& g16() { static const Gauss g = make_gauss_rule(16); return g; }
const Gauss& g32() { static const Gauss g = make_gauss_rule(32); return g; }

template <class F>
double gauss_on(const Gauss& g, double lo, double hi, const F& f) {
    if (hi <= lo) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        acc += g.w[i] * f(0.5 * (hi - lo) * g.x[i] + 0.5 * (lo + hi));
    }
    return 0.5 * (hi - lo) * acc;
}

template <class F>
double composite(const Gauss& g, double lo, double hi, int nseg, const F& f) {
    double acc = 0.0;
    for (int s = 0; s < nseg; ++s) {
        acc += gauss_on(g, lo + (hi - lo) * s / nseg, lo + (hi - lo) * (s + 1) / nseg, f);
    }
    return acc;
}

// breakpoints of sigma(t) on [0, M]: table nodes plus the sigma range
std::vector<double> sigma_segments(const AsymptoticFit& fits, double M) {
    std::vector<double> brk{0.0, M};
    for (double d : fits.sigma_d) {
        if (d > 0.0 && d < M) brk.push_back(d);
    }
    if (fits.range > 0.0 && fits.range < M) brk.push_back(fits.range);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
    return brk;
}

}  // namespace

double ids_free(double energy) {
    if (energy <= 0.0) return 0.0;
    const double e = std::exp(-kPi / std::sqrt(energy));
    return e / (1.0 - e);
}

double fermi_energy(double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("fermi_energy: rho must be positive");
    const double l_rho = -std::log(rho / (1.0 + rho));
    return (kPi / l_rho) * (kPi / l_rho);
}

double free_energy_per_particle(double rho, double rel_tol) {
    if (!(rho > 0.0)) throw std::invalid_argument("free_energy_per_particle: rho must be positive");
    const double l_rho = -std::log(rho / (1.0 + rho));
    const auto integrand = [](double s) {
        const double es = std::exp(-s);
        const double denom = 1.0 - es;
        return es / (s * s * denom * denom);
    };
    // integral of pi^2 s^-2 e^s (e^s-1)^-2 ds over [l_rho, inf), written with e^{-s}
    const double hi = l_rho + 60.0;
    const double v1 = composite(g32(), l_rho, hi, 24, integrand);
    const double v2 = composite(g32(), l_rho, hi, 48, integrand);
    if (std::fabs(v1 - v2) > rel_tol * std::fabs(v2)) {
        throw NumericalFailure("free_energy_per_particle: quadrature did not converge",
                               std::fabs(v1 - v2));
    }
    return kPiSq * v2 / rho;
}

std::vector<double> empirical_counting(const LevelPool& pool, double box_length,
                                       const std::vector<double>& lambda_grid) {
    std::vector<double> values;
    values.reserve(pool.entries.size());
    for (const PoolEntry& e : pool.entries) values.push_back(e.value);
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    out.reserve(lambda_grid.size());
    for (double lam : lambda_grid) {
        const auto it = std::upper_bound(values.begin(), values.end(), lam);
        out.push_back(static_cast<double>(it - values.begin()) / box_length);
    }
    return out;
}

double closed_form_J(double lambda, const ModelParams& params, const Potential& /*U*/,
                     const AsymptoticFit& fits) {
    if (!(lambda > 0.0)) return 0.0;
    const double lu = params.minimal_length;
    const double M = params.interaction_range;
    const double pis = kPi / std::sqrt(lambda);
    const double factor = [&] {
        const double f = 1.0 - M * std::exp(-lu);
        return f * f;
    }();

    // D1: first levels of single pieces
    double t1 = 0.0;
    {
        const double lo = std::max(lu, pis);
        if (lo < 3.0 * lu) t1 = std::exp(-lo) - std::exp(-3.0 * lu);
    }
    // D2: second levels of single pieces
    double t2 = 0.0;
    {
        const double lo = std::max(2.0 * lu, 2.0 * pis + fits.gamma / (8.0 * kPiSq));
        if (lo < 3.0 * lu) t2 = std::exp(-lo) - std::exp(-3.0 * lu);
    }
    // D3: first levels of pairs, y >= max(x, pis), box [lu, 2lu]^2, times 2,
    // integrated over the gap t in [0, M]
    double t3 = 0.0;
    {
        const double ylo = std::max(lu, pis);
        if (ylo < 2.0 * lu) {
            const double a = std::exp(-lu), b = std::exp(-2.0 * lu);
            const double ey = std::exp(-ylo);
            t3 = M * 2.0 * (a * (ey - b) - 0.5 * (ey * ey - b * b));
        }
    }
    // D4: second levels of pairs, y >= x >= max(lu, pis + sigma(t)/(2 y^3))
    double t4 = 0.0;
    if (M > 0.0) {
        const auto brk = sigma_segments(fits, M);
        for (std::size_t s = 0; s + 1 < brk.size(); ++s) {
            t4 += gauss_on(g16(), brk[s], brk[s + 1], [&](double t) {
                const double sig = fits.sigma(t);
                const auto xlo_of = [&](double y) {
                    return std::max(lu, pis + sig / (2.0 * y * y * y));
                };
                // integrand vanishes below y*, the root of xlo(y) = y
                double ylo = lu;
                if (xlo_of(2.0 * lu) > 2.0 * lu) return 0.0;
                if (xlo_of(lu) > lu) {
                    double a = lu, b = 2.0 * lu;
                    for (int it = 0; it < 80; ++it) {
                        const double mid = 0.5 * (a + b);
                        (xlo_of(mid) > mid ? a : b) = mid;
                    }
                    ylo = 0.5 * (a + b);
                }
                return 2.0 * composite(g32(), ylo, 2.0 * lu, 2, [&](double y) {
                           const double xlo = xlo_of(y);
                           if (xlo >= y) return 0.0;
                           return std::exp(-y) * (std::exp(-xlo) - std::exp(-y));
                       });
            });
        }
    }
    return factor * (t1 + t2 + t3 + t4);
}

double weighted_level_integral(double lambda, const ModelParams& params, const Potential& /*U*/,
                               const AsymptoticFit& fits) {
    if (!(lambda > 0.0)) return 0.0;
    const double lu = params.minimal_length;
    const double M = params.interaction_range;
    const double pis = kPi / std::sqrt(lambda);
    const double f0 = 1.0 - M * std::exp(-lu);
    const double factor = f0 * f0;
    const double gamma = fits.gamma;

    double t1 = 0.0;
    {
        const double lo = std::max(lu, pis);
        if (lo < 3.0 * lu) {
            t1 = composite(g32(), lo, 3.0 * lu, 4,
                           [&](double u) { return std::exp(-u) * kPiSq / (u * u); });
        }
    }
    double t2 = 0.0;
    {
        const double lo = std::max(2.0 * lu, 2.0 * pis + gamma / (8.0 * kPiSq));
        if (lo < 3.0 * lu) {
            t2 = composite(g32(), lo, 3.0 * lu, 4, [&](double u) {
                return std::exp(-u) * (4.0 * kPiSq / (u * u) + gamma / (u * u * u));
            });
        }
    }
    double t3 = 0.0;
    {
        const double ylo = std::max(lu, pis);
        if (ylo < 2.0 * lu) {
            t3 = M * composite(g32(), ylo, 2.0 * lu, 4, [&](double y) {
                return 2.0 * std::exp(-y) * (kPiSq / (y * y)) *
                       (std::exp(-lu) - std::exp(-y));
            });
        }
    }
    double t4 = 0.0;
    if (M > 0.0) {
        const auto brk = sigma_segments(fits, M);
        for (std::size_t s = 0; s + 1 < brk.size(); ++s) {
            t4 += gauss_on(g16(), brk[s], brk[s + 1], [&](double t) {
                const double sig = fits.sigma(t);
                const auto xlo_of = [&](double y) {
                    return std::max(lu, pis + sig / (2.0 * y * y * y));
                };
                if (xlo_of(2.0 * lu) > 2.0 * lu) return 0.0;
                double ylo = lu;
                if (xlo_of(lu) > lu) {
                    double a = lu, b = 2.0 * lu;
                    for (int it = 0; it < 80; ++it) {
                        const double mid = 0.5 * (a + b);
                        (xlo_of(mid) > mid ? a : b) = mid;
                    }
                    ylo = 0.5 * (a + b);
                }
                return composite(g32(), ylo, 2.0 * lu, 2, [&](double y) {
                    const double xlo = xlo_of(y);
                    if (xlo >= y) return 0.0;
                    const double inner = gauss_on(g16(), xlo, y, [&](double x) {
                        return std::exp(-x) *
                               (kPiSq / (x * x) + sig / (x * x * x * y * y * y));
                    });
                    return 2.0 * std::exp(-y) * inner;
                });
            });
        }
    }
    return factor * (t1 + t2 + t3 + t4);
}

FermiSolution fermi_level(double rho, const ModelParams& params, const Potential& U,
                          const AsymptoticFit& fits) {
    if (!(rho > 0.0)) throw std::invalid_argument("fermi_level: rho must be positive");
    const double lu = params.minimal_length;
    double lo = std::pow(kPi / (3.0 * lu), 2) * (1.0 + 1e-12);
    double hi = std::pow(kPi / lu, 2);
    int guard = 0;
    while (closed_form_J(hi, params, U, fits) < rho) {
        hi *= 2.0;
        if (++guard > 60) {
            throw NoRootError("fermi_level: J never reaches rho");
        }
    }
    if (closed_form_J(lo, params, U, fits) > rho) {
        throw NoRootError("fermi_level: rho below the range of J");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (closed_form_J(mid, params, U, fits) < rho ? lo : hi) = mid;
    }
    FermiSolution sol;
    sol.lambda_rho = 0.5 * (lo + hi);
    sol.delta_rho = kPi / std::sqrt(sol.lambda_rho);
    sol.residual = std::fabs(closed_form_J(sol.lambda_rho, params, U, fits) - rho);
    return sol;
}

Occupation build_test_occupation(const ChainDecomposition& decomp, const FermiSolution& fermi,
                                 const AsymptoticFit& fits, const Potential& /*U*/, long n) {
    const double delta = fermi.delta_rho;
    const double gamma_shift = fits.gamma / (8.0 * kPiSq);

    Occupation occ;
    occ.counts.assign(decomp.piece_lengths.size(), 0);

    struct Placed {
        double value;          // asymptotic level that justified the particle
        std::size_t piece;     // where it sits
        std::size_t position;  // deterministic tie-break
        int order;             // kappa within the chain
    };
    std::vector<Placed> placed;

    for (std::size_t ord = 0; ord < decomp.small_chains.size(); ++ord) {
        const Chain& ch = decomp.chains[decomp.small_chains[ord]];
        const std::size_t pos = ch.piece_indices.front();
        if (ch.size() == 1) {
            const double l = ch.lengths[0];
            const std::size_t piece = ch.piece_indices[0];
            if (l >= delta) {
                occ.counts[piece] = 1;
                placed.push_back({kPiSq / (l * l), piece, pos, 1});
                if (l >= 2.0 * delta + gamma_shift) {
                    occ.counts[piece] = 2;
                    placed.push_back({4.0 * kPiSq / (l * l) + fits.gamma / (l * l * l), piece, pos, 2});
                }
            }
        } else if (ch.size() == 2) {
            std::size_t j = 0, k = 1;
            if (ch.lengths[0] > ch.lengths[1]) std::swap(j, k);  // l_j <= l_k
            const double lj = ch.lengths[j], lk = ch.lengths[k];
            const double sig = fits.sigma(ch.gaps[0]);
            const std::size_t pj = ch.piece_indices[j], pk = ch.piece_indices[k];
            if (lk >= delta) {
                occ.counts[pk] = 1;
                placed.push_back({kPiSq / (lk * lk), pk, pos, 1});
                if (lj >= delta + sig / (2.0 * lk * lk * lk)) {
                    occ.counts[pj] = 1;
                    placed.push_back(
                        {kPiSq / (lj * lj) + sig / (lj * lj * lj * lk * lk * lk), pj, pos, 2});
                }
            }
        }
        // chains of size >= 3 never sit in P_2; larger p has no threshold rule
    }

    long assigned = static_cast<long>(placed.size());

    if (assigned > n) {
        // drop the highest levels (last particle of a chain first)
        std::sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) {
            if (a.value != b.value) return a.value > b.value;
            if (a.position != b.position) return a.position > b.position;
            return a.order > b.order;
        });
        for (const Placed& u : placed) {
            if (assigned == n) break;
            if (occ.counts[u.piece] >= u.order) {
                occ.counts[u.piece] -= 1;
                --assigned;
            }
        }
    } else if (assigned < n) {
        // complete on the leftover pieces with the lowest free levels
        struct FreeAtom {
            double value;
            std::size_t piece;
            int k;
        };
        std::vector<FreeAtom> atoms;
        for (std::size_t piece : decomp.leftover_pieces) {
            const double l = decomp.piece_lengths[piece];
            for (int k = 1; k <= decomp.piece_caps[piece]; ++k) {
                atoms.push_back({kPiSq * k * k / (l * l), piece, k});
            }
        }
        std::sort(atoms.begin(), atoms.end(), [](const FreeAtom& a, const FreeAtom& b) {
            if (a.value != b.value) return a.value < b.value;
            if (a.piece != b.piece) return a.piece < b.piece;
            return a.k < b.k;
        });
        for (const FreeAtom& a : atoms) {
            if (assigned == n) break;
            if (a.k == occ.counts[a.piece] + 1) {
                occ.counts[a.piece] += 1;
                ++assigned;
            }
        }
        if (assigned < n) {
            throw InfeasibleError("build_test_occupation: completion under caps is infeasible");
        }
    }
    occ.total = n;
    return occ;
}

LeftoverReport leftover_checks(const ChainDecomposition& decomp, const Occupation& occ, int p,
                               double delta, const ModelParams& params, const Potential& U) {
    LeftoverReport rep;
    const long n = occ.total;
    const double rho = params.density;
    rep.lower_band = std::pow(rho, p + delta);
    rep.upper_band = std::pow(rho, p - delta);
    rep.per_particle_bound = kPiSq / (params.minimal_length * params.minimal_length);
    rep.energy_bound = static_cast<double>(n) * std::pow(rho, p - delta);

    std::vector<char> is_leftover(decomp.piece_lengths.size(), 0);
    for (std::size_t piece : decomp.leftover_pieces) is_leftover[piece] = 1;

    for (std::size_t piece : decomp.leftover_pieces) {
        const int q = occ.counts[piece];
        if (q == 0) continue;
        rep.leftover_particles += q;
        const double e = free_ground_energy(decomp.piece_lengths[piece], q);
        rep.energy += e;
        rep.max_per_particle = std::max(rep.max_per_particle, e / q);
    }
    // first-order interaction between occupied leftover pieces of the same chain
    if (!U.is_zero()) {
        for (const Chain& ch : decomp.chains) {
            bool leftover_chain = false;
            for (std::size_t idx : ch.piece_indices) leftover_chain |= is_leftover[idx] != 0;
            if (!leftover_chain) continue;
            for (std::size_t i = 0; i < ch.size(); ++i) {
                const int qi = occ.counts[ch.piece_indices[i]];
                for (int a = 1; a <= qi; ++a) {
                    for (int b = a + 1; b <= qi; ++b) {
                        rep.energy += interaction_element_same(ch.lengths[i], a, b, U);
                    }
                }
                for (std::size_t j = i + 1; j < ch.size(); ++j) {
                    const int qj = occ.counts[ch.piece_indices[j]];
                    if (qi == 0 || qj == 0) continue;
                    const double d = ch.distance(i, j);
                    if (d >= U.range()) continue;
                    for (int a = 1; a <= qi; ++a) {
                        for (int b = 1; b <= qj; ++b) {
                            rep.energy +=
                                interaction_element_two(ch.lengths[j], ch.lengths[i], d, a, b, U);
                        }
                    }
                }
            }
        }
    }
    rep.fraction = n > 0 ? static_cast<double>(rep.leftover_particles) / static_cast<double>(n) : 0.0;
    return rep;
}

}  // namespace pieces
