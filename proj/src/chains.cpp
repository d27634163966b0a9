#include "pieces/chains.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pieces/common.hpp"

namespace pieces {

ModelParams model_params(double rho, double interaction_range) {
    if (!(rho > 0.0)) throw std::invalid_argument("model_params: rho must be positive");
    if (interaction_range < 0.0) throw std::invalid_argument("model_params: M must be non-negative");
    ModelParams mp;
    mp.density = rho;
    mp.interaction_range = interaction_range;
    mp.fermi_length = -std::log(rho / (1.0 + rho));
    mp.fermi_energy = (kPi / mp.fermi_length) * (kPi / mp.fermi_length);
    mp.minimal_length = mp.fermi_length - (4.0 * interaction_range + 6.0) * rho;
    if (!(mp.minimal_length > 0.0)) {
        throw DensityTooLargeError("model_params: l_{rho,U} <= 0, construction regime violated");
    }
    return mp;
}

int Chain::total_cap() const { return std::accumulate(caps.begin(), caps.end(), 0); }

double Chain::distance(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    double d = 0.0;
    for (std::size_t k = a; k < b; ++k) d += gaps[k];
    for (std::size_t k = a + 1; k < b; ++k) d += lengths[k];
    return d;
}

ChainDecomposition decompose(const PieceConfiguration& cfg, const ModelParams& params, int p) {
    if (p < 1) throw std::invalid_argument("decompose: p must be >= 1");
    ChainDecomposition out;
    out.p = p;
    out.box_length = cfg.box_length;
    out.minimal_length = params.minimal_length;

    const std::size_t m = cfg.piece_count();
    out.piece_lengths.resize(m);
    out.piece_lefts.resize(m);
    out.piece_caps.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        out.piece_lengths[i] = cfg.piece_length(i);
        out.piece_lefts[i] = cfg.piece_left(i);
        out.piece_caps[i] = out.piece_lengths[i] >= params.minimal_length
                                ? static_cast<int>(std::floor(out.piece_lengths[i] / params.minimal_length))
                                : 0;
    }

    // Left-to-right sweep over long pieces; gap = distance between facing
    // endpoints (ties d == M interact). At M = 0 an adjacent pair only
    // touches on a null set, which supports no interaction, so it stays
    // split.
    const double M = params.interaction_range;
    Chain cur;
    double last_right = 0.0;
    auto flush = [&]() {
        if (!cur.piece_indices.empty()) {
            out.chains.push_back(cur);
            cur = Chain{};
        }
    };
    for (std::size_t i = 0; i < m; ++i) {
        if (out.piece_lengths[i] < params.minimal_length) continue;
        if (!cur.piece_indices.empty()) {
            const double gap = cfg.piece_left(i) - last_right;
            if (gap <= M && M > 0.0) {
                cur.gaps.push_back(gap);
            } else {
                flush();
            }
        }
        cur.piece_indices.push_back(i);
        cur.lengths.push_back(out.piece_lengths[i]);
        cur.caps.push_back(out.piece_caps[i]);
        last_right = cfg.piece_right(i);
    }
    flush();

    out.in_small.assign(out.chains.size(), 0);
    std::vector<char> piece_in_small(m, 0);
    for (std::size_t c = 0; c < out.chains.size(); ++c) {
        if (out.chains[c].total_cap() < p + 1) {
            out.in_small[c] = 1;
            out.small_chains.push_back(c);
            for (std::size_t i : out.chains[c].piece_indices) piece_in_small[i] = 1;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!piece_in_small[i]) out.leftover_pieces.push_back(i);
    }
    return out;
}

ChainStatistics chain_statistics(const ChainDecomposition& decomp, const ModelParams& params,
                                 const std::vector<double>& length_bins,
                                 const std::vector<double>& gap_bins) {
    if (length_bins.size() < 2) throw std::invalid_argument("chain_statistics: need length bins");
    for (std::size_t i = 0; i + 1 < length_bins.size(); ++i) {
        if (!(length_bins[i] <= length_bins[i + 1])) {
            throw std::invalid_argument("chain_statistics: bins must be sorted");
        }
    }
    const double L = decomp.box_length;
    // Exact isolation probability for a unit Poisson process: the nearest
    // long piece on one side is adjacent (probability e^{-l_u}, shared
    // point) or sits past a positive gap of unit density on (0, l_u), so
    // P(no long piece within M) = 1 - (M+1) e^{-l_u}. Needs M < l_u.
    // At M = 0 nothing interacts and every long piece is its own chain.
    const double M = params.interaction_range;
    const double iso = M > 0.0 ? 1.0 - (M + 1.0) * std::exp(-params.minimal_length) : 1.0;
    const double iso2 = iso * iso;

    ChainStatistics st;
    const auto bin_of = [](double x, const std::vector<double>& edges) -> long {
        if (edges.empty() || x < edges.front() || x >= edges.back()) return -1;
        long j = 0;
        while (static_cast<std::size_t>(j + 1) < edges.size() && x >= edges[j + 1]) ++j;
        return j;
    };

    const std::size_t nl = length_bins.size() - 1;
    std::vector<long> c1(nl, 0);
    for (std::size_t c = 0; c < decomp.chains.size(); ++c) {
        const Chain& ch = decomp.chains[c];
        if (ch.size() != 1) continue;
        long j = bin_of(ch.lengths[0], length_bins);
        if (j >= 0) c1[j] += 1;
    }
    for (std::size_t j = 0; j < nl; ++j) {
        const double a = length_bins[j], b = length_bins[j + 1];
        ChainStatistics::Row row{};
        row.lo1 = a; row.hi1 = b;
        row.count = c1[j];
        row.expected = L * iso2 * (std::exp(-a) - std::exp(-b));
        row.zscore = row.expected > 0.0 ? (row.count - row.expected) / std::sqrt(row.expected) : 0.0;
        st.size1.push_back(row);
    }

    if (gap_bins.size() >= 2) {
        const std::size_t ng = gap_bins.size() - 1;
        std::vector<long> c2(nl * nl * ng, 0);
        for (std::size_t c = 0; c < decomp.chains.size(); ++c) {
            const Chain& ch = decomp.chains[c];
            if (ch.size() != 2) continue;
            long j1 = bin_of(ch.lengths[0], length_bins);
            long j2 = bin_of(ch.lengths[1], length_bins);
            long k = bin_of(ch.gaps[0], gap_bins);
            if (j1 >= 0 && j2 >= 0 && k >= 0) {
                c2[(static_cast<std::size_t>(j1) * nl + j2) * ng + k] += 1;
            }
        }
        for (std::size_t j1 = 0; j1 < nl; ++j1) {
            for (std::size_t j2 = 0; j2 < nl; ++j2) {
                for (std::size_t k = 0; k < ng; ++k) {
                    ChainStatistics::Row row{};
                    row.lo1 = length_bins[j1]; row.hi1 = length_bins[j1 + 1];
                    row.lo2 = length_bins[j2]; row.hi2 = length_bins[j2 + 1];
                    row.gap_lo = gap_bins[k];  row.gap_hi = gap_bins[k + 1];
                    row.count = c2[(j1 * nl + j2) * ng + k];
                    // gap law: unit density on positive gaps plus an atom of
                    // mass 1 at zero (adjacent long pieces)
                    const double gap_weight =
                        (row.gap_hi - row.gap_lo) +
                        (row.gap_lo == 0.0 && row.gap_hi > row.gap_lo ? 1.0 : 0.0);
                    row.expected = L * iso2 * gap_weight *
                                   (std::exp(-row.lo1) - std::exp(-row.hi1)) *
                                   (std::exp(-row.lo2) - std::exp(-row.hi2));
                    row.zscore = row.expected > 0.0
                                     ? (row.count - row.expected) / std::sqrt(row.expected)
                                     : 0.0;
                    st.size2.push_back(row);
                }
            }
        }
    }
    return st;
}

}  // namespace pieces
