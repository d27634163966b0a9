#include "pieces/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "pieces/common.hpp"
#include "pieces/parallel.hpp"

namespace pieces {

namespace {

constexpr double kTieRel = 1e-12;

bool values_tie(double a, double b) {
    return std::fabs(a - b) <= kTieRel * std::max({std::fabs(a), std::fabs(b), 1e-300});
}

// One placement step: a pool entry or a free increment on a leftover piece.
struct Atom {
    double value = 0.0;
    std::size_t position = 0;  // first piece of the chain / leftover piece index
    int kappa = 0;
    bool from_pool = false;
    std::size_t chain_ord = 0;   // pool atoms
    std::size_t piece = 0;       // leftover atoms
    std::size_t pool_index = 0;  // index into pool.entries
};

// Exact sort first, then collapse near-ties deterministically by position.
template <class T, class Value, class Pos, class Kap>
void lexical_sort(std::vector<T>& v, const Value& value, const Pos& pos, const Kap& kap) {
    std::sort(v.begin(), v.end(), [&](const T& a, const T& b) {
        if (value(a) != value(b)) return value(a) < value(b);
        if (pos(a) != pos(b)) return pos(a) < pos(b);
        return kap(a) < kap(b);
    });
    std::size_t lo = 0;
    while (lo < v.size()) {
        std::size_t hi = lo + 1;
        while (hi < v.size() && values_tie(value(v[hi - 1]), value(v[hi]))) ++hi;
        if (hi - lo > 1) {
            std::stable_sort(v.begin() + static_cast<long>(lo), v.begin() + static_cast<long>(hi),
                             [&](const T& a, const T& b) {
                                 if (pos(a) != pos(b)) return pos(a) < pos(b);
                                 return kap(a) < kap(b);
                             });
        }
        lo = hi;
    }
}

}  // namespace

LevelPool build_level_pool(const ChainDecomposition& decomp, const Potential& U, int p,
                           const SolverConfig& cfg) {
    if (p < 1) throw std::invalid_argument("build_level_pool: p must be >= 1");
    LevelPool pool;
    pool.p = p;
    const std::size_t n_small = decomp.small_chains.size();
    pool.chain_levels.resize(n_small);
    pool.chain_ids.resize(n_small);
    pool.first_piece.resize(n_small);

    SolverConfig level_cfg = cfg;
    level_cfg.strict_capacity = false;  // Gamma_p carries p levels per chain
    parallel_for(n_small, [&](std::size_t ord) {
        const std::size_t cid = decomp.small_chains[ord];
        pool.chain_ids[ord] = cid;
        pool.first_piece[ord] = decomp.chains[cid].piece_indices.front();
        pool.chain_levels[ord] = chain_levels(decomp.chains[cid], U, p, level_cfg);
    });

    pool.entries.reserve(n_small * static_cast<std::size_t>(p));
    for (std::size_t ord = 0; ord < n_small; ++ord) {
        const ChainLevels& lv = pool.chain_levels[ord];
        for (int k = 1; k <= p; ++k) {
            PoolEntry e;
            e.chain_ord = ord;
            e.kappa = k;
            e.value = lv.f[static_cast<std::size_t>(k - 1)];
            e.approximate = lv.approximate[static_cast<std::size_t>(k - 1)] != 0;
            e.beyond_capacity = lv.beyond_capacity[static_cast<std::size_t>(k - 1)] != 0;
            pool.entries.push_back(e);
        }
    }
    lexical_sort(
        pool.entries, [](const PoolEntry& e) { return e.value; },
        [&](const PoolEntry& e) { return pool.first_piece[e.chain_ord]; },
        [](const PoolEntry& e) { return e.kappa; });
    return pool;
}

GroundStateEstimate greedy_fill(const LevelPool& pool, long n, const ChainDecomposition& decomp) {
    if (n < 0) throw std::invalid_argument("greedy_fill: n must be >= 0");

    std::vector<Atom> atoms;
    atoms.reserve(pool.entries.size() + 64);
    for (std::size_t i = 0; i < pool.entries.size(); ++i) {
        const PoolEntry& e = pool.entries[i];
        Atom a;
        a.value = e.value;
        a.position = pool.first_piece[e.chain_ord];
        a.kappa = e.kappa;
        a.from_pool = true;
        a.chain_ord = e.chain_ord;
        a.pool_index = i;
        atoms.push_back(a);
    }
    for (std::size_t piece : decomp.leftover_pieces) {
        const int cap = decomp.piece_caps[piece];
        const double l = decomp.piece_lengths[piece];
        for (int k = 1; k <= cap; ++k) {
            Atom a;
            a.value = kPiSq * k * k / (l * l);
            a.position = piece;
            a.kappa = k;
            a.from_pool = false;
            a.piece = piece;
            atoms.push_back(a);
        }
    }
    lexical_sort(
        atoms, [](const Atom& a) { return a.value; },
        [](const Atom& a) { return a.position; }, [](const Atom& a) { return a.kappa; });

    GroundStateEstimate gs;
    gs.occupation.counts.assign(decomp.piece_lengths.size(), 0);
    std::vector<int> chain_count(pool.chain_ids.size(), 0);
    std::vector<int> piece_count(decomp.piece_lengths.size(), 0);
    long placed = 0;
    for (const Atom& a : atoms) {
        if (placed == n) break;
        if (a.from_pool) {
            const std::size_t cid = pool.chain_ids[a.chain_ord];
            const int cap = decomp.chains[cid].total_cap();
            if (a.kappa != chain_count[a.chain_ord] + 1 || a.kappa > cap) continue;
            chain_count[a.chain_ord] += 1;
            gs.energy_P += a.value;
            gs.levels_used.push_back(pool.entries[a.pool_index]);
        } else {
            if (a.kappa != piece_count[a.piece] + 1) continue;
            piece_count[a.piece] += 1;
            gs.energy_N += a.value;
            gs.leftover_levels_used.emplace_back(a.piece, a.value);
        }
        ++placed;
    }
    if (placed < n) {
        throw InfeasibleError("greedy_fill: n exceeds the total occupation capacity");
    }

    // expand chain counts into per-piece occupations via the minimizing splits
    for (std::size_t ord = 0; ord < pool.chain_ids.size(); ++ord) {
        const int kappa = chain_count[ord];
        if (kappa == 0) continue;
        const Chain& ch = decomp.chains[pool.chain_ids[ord]];
        const std::vector<int>& split =
            pool.chain_levels[ord].splits[static_cast<std::size_t>(kappa - 1)];
        for (std::size_t j = 0; j < ch.size(); ++j) {
            gs.occupation.counts[ch.piece_indices[j]] = split[j];
        }
    }
    for (std::size_t piece = 0; piece < piece_count.size(); ++piece) {
        if (piece_count[piece] > 0) gs.occupation.counts[piece] = piece_count[piece];
    }
    gs.occupation.total = n;
    return gs;
}

std::pair<Occupation, double> brute_force_ground(const ChainDecomposition& decomp,
                                                 const Potential& U, long n,
                                                 const SolverConfig& cfg) {
    const std::size_t m = decomp.piece_lengths.size();
    const long total_cap = std::accumulate(decomp.piece_caps.begin(), decomp.piece_caps.end(), 0L);
    if (m > 8 || total_cap > 12) {
        throw TooLargeError("brute_force_ground: instance exceeds the enumeration guard");
    }
    if (n < 0 || n > total_cap) {
        throw InfeasibleError("brute_force_ground: n outside the admissible range");
    }

    // piece -> owning P_p chain (or none)
    std::vector<long> owner(m, -1);
    std::vector<std::size_t> slot(m, 0);
    for (std::size_t s = 0; s < decomp.small_chains.size(); ++s) {
        const Chain& ch = decomp.chains[decomp.small_chains[s]];
        for (std::size_t j = 0; j < ch.size(); ++j) {
            owner[ch.piece_indices[j]] = static_cast<long>(s);
            slot[ch.piece_indices[j]] = j;
        }
    }

    // memoized chain split energies
    std::vector<std::unordered_map<long, double>> memo(decomp.small_chains.size());
    auto chain_energy = [&](std::size_t s, const std::vector<int>& split) {
        long key = 0;
        for (int q : split) key = key * 16 + q;
        auto it = memo[s].find(key);
        if (it != memo[s].end()) return it->second;
        const double e =
            chain_split_energy(decomp.chains[decomp.small_chains[s]], U, split, cfg, nullptr);
        memo[s][key] = e;
        return e;
    };

    std::vector<int> q(m, 0), best_q;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> splits(decomp.small_chains.size());
    for (std::size_t s = 0; s < decomp.small_chains.size(); ++s) {
        splits[s].assign(decomp.chains[decomp.small_chains[s]].size(), 0);
    }

    std::function<void(std::size_t, long)> rec = [&](std::size_t at, long left) {
        if (at == m) {
            if (left != 0) return;
            double e = 0.0;
            for (std::size_t s = 0; s < decomp.small_chains.size(); ++s) {
                for (std::size_t j = 0; j < splits[s].size(); ++j) {
                    const Chain& ch = decomp.chains[decomp.small_chains[s]];
                    splits[s][j] = q[ch.piece_indices[j]];
                }
                e += chain_energy(s, splits[s]);
            }
            for (std::size_t piece : decomp.leftover_pieces) {
                e += free_ground_energy(decomp.piece_lengths[piece], q[piece]);
            }
            if (e < best) {
                best = e;
                best_q = q;
            }
            return;
        }
        const int cap = decomp.piece_caps[at];
        for (int qq = 0; qq <= std::min<long>(cap, left); ++qq) {
            q[at] = qq;
            rec(at + 1, left - qq);
        }
        q[at] = 0;
    };
    rec(0, n);

    Occupation occ;
    occ.counts = best_q;
    occ.total = n;
    return {occ, best};
}

ConvexityReport convexity_check(const std::vector<std::vector<double>>& level_sequences) {
    ConvexityReport rep;
    rep.checked = level_sequences.size();
    for (std::size_t c = 0; c < level_sequences.size(); ++c) {
        const auto& f = level_sequences[c];
        for (std::size_t k = 0; k + 1 < f.size(); ++k) {
            if (!(f[k + 1] > f[k])) {
                rep.violating_chains.push_back(c);
                break;
            }
        }
    }
    return rep;
}

DegeneracyReport degeneracy_count(const LevelPool& pool, double tol) {
    if (tol < 0.0) throw std::invalid_argument("degeneracy_count: tol must be >= 0");
    DegeneracyReport rep;
    std::vector<double> values;
    values.reserve(pool.entries.size());
    for (const PoolEntry& e : pool.entries) values.push_back(e.value);
    std::sort(values.begin(), values.end());
    std::size_t lo = 0;
    while (lo < values.size()) {
        std::size_t hi = lo + 1;
        while (hi < values.size() && values[hi] - values[hi - 1] <= tol) ++hi;
        const int mult = static_cast<int>(hi - lo);
        rep.multiplicity[values[lo]] = mult;
        rep.max_multiplicity = std::max(rep.max_multiplicity, mult);
        lo = hi;
    }
    return rep;
}

StableSet stable_chains(const LevelPool& pool, long n, long window,
                        const ChainDecomposition& decomp) {
    if (window > n) throw std::invalid_argument("stable_chains: window must be <= n");
    GroundStateEstimate full = greedy_fill(pool, n, decomp);

    // counts are monotone along the greedy trajectory, so a chain's restriction
    // moved in the window iff its count differs between r = n - window and r = n
    std::vector<char> touched(pool.chain_ids.size(), 0);
    GroundStateEstimate head = greedy_fill(pool, n - window, decomp);
    std::vector<int> cnt_full(pool.chain_ids.size(), 0), cnt_head(pool.chain_ids.size(), 0);
    for (const PoolEntry& e : full.levels_used) cnt_full[e.chain_ord] += 1;
    for (const PoolEntry& e : head.levels_used) cnt_head[e.chain_ord] += 1;
    for (std::size_t ord = 0; ord < touched.size(); ++ord) {
        if (cnt_full[ord] != cnt_head[ord]) touched[ord] = 1;
    }

    StableSet out;
    for (std::size_t ord = 0; ord < pool.chain_ids.size(); ++ord) {
        if (touched[ord]) {
            out.unstable_chain_ords.push_back(ord);
            continue;
        }
        out.stable_chain_ords.push_back(ord);
        const Chain& ch = decomp.chains[pool.chain_ids[ord]];
        for (std::size_t j = 0; j < ch.size(); ++j) {
            out.occupation[ch.piece_indices[j]] = full.occupation.counts[ch.piece_indices[j]];
        }
    }
    return out;
}

}  // namespace pieces
