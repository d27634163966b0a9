#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "pieces/disorder.hpp"

namespace pieces {

// Length and energy thresholds of the model at density rho and
// interaction range M.
struct ModelParams {
    double density = 0.0;            // rho
    double interaction_range = 0.0;  // M
    double fermi_length = 0.0;       // l_rho = -log(rho / (1+rho))
    double minimal_length = 0.0;     // l_{rho,U} = l_rho - (4M+6) rho
    double fermi_energy = 0.0;       // (pi / l_rho)^2
};

ModelParams model_params(double rho, double interaction_range);

// Maximal group of pieces of length >= l_{rho,U} whose consecutive gaps
// are <= M. Particles in distinct chains cannot interact.
struct Chain {
    std::vector<std::size_t> piece_indices;  // increasing
    std::vector<double> lengths;
    std::vector<double> gaps;  // between consecutive members, size() - 1
    std::vector<int> caps;     // floor(l_i / l_{rho,U})

    std::size_t size() const { return piece_indices.size(); }
    int total_cap() const;
    // Distance between members a and b: gap between facing endpoints,
    // intervening members included with their lengths.
    double distance(std::size_t a, std::size_t b) const;
};

struct ChainDecomposition {
    int p = 2;
    std::vector<Chain> chains;              // every chain, left to right
    std::vector<char> in_small;             // chain is in P_p
    std::vector<std::size_t> small_chains;  // indices into `chains` (P_p)
    std::vector<std::size_t> leftover_pieces;  // N_p as piece indices
    std::vector<double> piece_lengths;         // all pieces
    std::vector<double> piece_lefts;           // lab coordinates of the left endpoints
    std::vector<int> piece_caps;               // floor(l_i / l_{rho,U}), 0 for short
    double box_length = 0.0;
    double minimal_length = 0.0;
};

ChainDecomposition decompose(const PieceConfiguration& cfg, const ModelParams& params, int p = 2);

// Counts of size-1 and size-2 chains against the closed-form predictions.
struct ChainStatistics {
    struct Row {
        double lo1, hi1;       // length window (left piece for size 2)
        double lo2, hi2;       // right piece window (size 2 only)
        double gap_lo, gap_hi; // gap window (size 2 only)
        long count;
        double expected;
        double zscore;
    };
    std::vector<Row> size1;
    std::vector<Row> size2;
};

ChainStatistics chain_statistics(const ChainDecomposition& decomp, const ModelParams& params,
                                 const std::vector<double>& length_bins,
                                 const std::vector<double>& gap_bins);

}  // namespace pieces
