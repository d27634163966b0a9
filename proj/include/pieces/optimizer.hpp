#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "pieces/chains.hpp"
#include "pieces/potential.hpp"
#include "pieces/spectra.hpp"

namespace pieces {

struct PoolEntry {
    std::size_t chain_ord = 0;  // ordinal among the P_p chains of the pool
    int kappa = 0;              // 1-based level index within the chain
    double value = 0.0;         // f^U(I, kappa)
    bool approximate = false;
    bool beyond_capacity = false;  // kappa exceeds the chain occupation cap
};

// Gamma_p: the p lowest levels of every P_p chain under the lexical order:
// value (ties below 1e-12 relative collapsed), then chain position, then kappa.
struct LevelPool {
    int p = 2;
    std::vector<PoolEntry> entries;           // sorted
    std::vector<ChainLevels> chain_levels;    // per P_p chain ordinal
    std::vector<std::size_t> chain_ids;       // ordinal -> index into decomp.chains
    std::vector<std::size_t> first_piece;     // ordinal -> first piece index
};

LevelPool build_level_pool(const ChainDecomposition& decomp, const Potential& U, int p,
                           const SolverConfig& cfg);

struct Occupation {
    std::vector<int> counts;  // per piece
    long total = 0;
};

struct GroundStateEstimate {
    Occupation occupation;
    double energy_P = 0.0;  // sum of pool levels used
    double energy_N = 0.0;  // free levels used on leftover pieces
    std::vector<PoolEntry> levels_used;
    std::vector<std::pair<std::size_t, double>> leftover_levels_used;  // (piece, level)
    double total_energy() const { return energy_P + energy_N; }
};

// Places n particles at the n smallest admissible level increments: pool
// entries in the lexical order merged with the free Dirichlet increments of
// the leftover pieces, all under the occupation caps.
GroundStateEstimate greedy_fill(const LevelPool& pool, long n, const ChainDecomposition& decomp);

// Exhaustive minimum over admissible occupations; the oracle for greedy_fill.
std::pair<Occupation, double> brute_force_ground(const ChainDecomposition& decomp,
                                                 const Potential& U, long n,
                                                 const SolverConfig& cfg);

struct ConvexityReport {
    std::vector<std::size_t> violating_chains;  // chain ordinals with f(k+1) <= f(k)
    std::size_t checked = 0;
};

ConvexityReport convexity_check(const std::vector<std::vector<double>>& level_sequences);

struct DegeneracyReport {
    std::map<double, int> multiplicity;  // cluster representative -> count
    int max_multiplicity = 0;
};

DegeneracyReport degeneracy_count(const LevelPool& pool, double tol);

struct StableSet {
    std::vector<std::size_t> stable_chain_ords;          // subset of pool ordinals
    std::map<std::size_t, int> occupation;               // piece -> fixed count
    std::vector<std::size_t> unstable_chain_ords;
};

StableSet stable_chains(const LevelPool& pool, long n, long window,
                        const ChainDecomposition& decomp);

}  // namespace pieces
