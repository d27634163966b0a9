#include "pieces/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pieces/common.hpp"
#include "pieces/rng.hpp"

namespace pieces {

PieceConfiguration sample_pieces(double box_length, std::uint64_t seed) {
    if (!(box_length > 0.0)) {
        throw std::invalid_argument("sample_pieces: box_length must be positive");
    }
    PieceConfiguration cfg;
    cfg.box_length = box_length;
    cfg.points.push_back(0.0);
    SplitMix64 rng(seed);
    double x = 0.0;
    for (;;) {
        x += rng.next_exp();
        if (x > box_length) break;
        cfg.points.push_back(x);
    }
    return cfg;
}

LengthHistogram piece_length_histogram(const PieceConfiguration& cfg,
                                       const std::vector<double>& bin_edges) {
    if (bin_edges.size() < 2) {
        throw std::invalid_argument("piece_length_histogram: need at least two edges");
    }
    for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
        if (!(bin_edges[i] <= bin_edges[i + 1]) || bin_edges[i] < 0.0) {
            throw std::invalid_argument("piece_length_histogram: edges must be sorted and non-negative");
        }
    }
    LengthHistogram h;
    h.bin_edges = bin_edges;
    const std::size_t nbins = bin_edges.size() - 1;
    h.counts.assign(nbins, 0);
    h.expected.resize(nbins);
    h.zscores.resize(nbins);
    for (std::size_t i = 0; i < cfg.piece_count(); ++i) {
        const double l = cfg.piece_length(i);
        auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), l);
        if (it == bin_edges.begin() || it == bin_edges.end()) continue;
        // l in [edge_{j}, edge_{j+1})
        std::size_t j = static_cast<std::size_t>(it - bin_edges.begin()) - 1;
        if (j < nbins) h.counts[j] += 1;
    }
    for (std::size_t j = 0; j < nbins; ++j) {
        h.expected[j] = cfg.box_length * (std::exp(-bin_edges[j]) - std::exp(-bin_edges[j + 1]));
        h.zscores[j] = h.expected[j] > 0.0
                           ? (static_cast<double>(h.counts[j]) - h.expected[j]) / std::sqrt(h.expected[j])
                           : 0.0;
    }
    return h;
}

double max_piece_length(const PieceConfiguration& cfg) {
    if (cfg.piece_count() == 0) {
        throw std::invalid_argument("max_piece_length: empty configuration");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < cfg.piece_count(); ++i) m = std::max(m, cfg.piece_length(i));
    return m;
}

PatternCount gap_pattern_count(const PieceConfiguration& cfg, const GapPattern& pattern) {
    const std::size_t r = pattern.length_windows.size();
    if (r == 0 || pattern.gap_windows.size() + 1 != r) {
        throw std::invalid_argument("gap_pattern_count: need r length windows and r-1 gap windows");
    }
    for (const auto& [a, b] : pattern.length_windows) {
        if (!(a <= b)) throw std::invalid_argument("gap_pattern_count: malformed length window");
    }
    for (const auto& [c, d] : pattern.gap_windows) {
        if (!(c <= d) || c < 0.0) throw std::invalid_argument("gap_pattern_count: malformed gap window");
    }

    // Subsequence of pieces with length >= min_length, with gaps between
    // consecutive members (intervening short pieces carry the gap). Members
    // separated by no short piece at all (gap exactly 0, shared Poisson
    // point) are excluded: the companion closed form is the smooth part of
    // the gap law, which has unit density on strictly positive gaps only.
    std::vector<double> lengths;
    std::vector<std::size_t> index;
    std::vector<double> lefts, rights;
    for (std::size_t i = 0; i < cfg.piece_count(); ++i) {
        if (cfg.piece_length(i) >= pattern.min_length) {
            lengths.push_back(cfg.piece_length(i));
            index.push_back(i);
            lefts.push_back(cfg.piece_left(i));
            rights.push_back(cfg.piece_right(i));
        }
    }

    PatternCount out;
    const auto in = [](double x, const std::pair<double, double>& w) {
        return x >= w.first && x < w.second;
    };
    if (lengths.size() >= r) {
        for (std::size_t s = 0; s + r <= lengths.size(); ++s) {
            bool ok = true;
            for (std::size_t k = 0; k < r && ok; ++k) ok = in(lengths[s + k], pattern.length_windows[k]);
            for (std::size_t k = 0; k + 1 < r && ok; ++k) {
                if (index[s + k + 1] == index[s + k] + 1) {
                    ok = false;  // adjacent long pieces: no gap to measure
                    break;
                }
                const double gap = lefts[s + k + 1] - rights[s + k];
                ok = in(gap, pattern.gap_windows[k]);
            }
            if (ok) out.count += 1;
        }
    }

    double expected = cfg.box_length;
    for (const auto& [a, b] : pattern.length_windows) expected *= std::exp(-a) - std::exp(-b);
    for (const auto& [c, d] : pattern.gap_windows) expected *= (d - c);
    out.expected = expected;
    out.zscore = expected > 0.0 ? (static_cast<double>(out.count) - expected) / std::sqrt(expected) : 0.0;
    return out;
}

double ks_statistic_exp1(const PieceConfiguration& cfg) {
    const std::size_t m = cfg.piece_count();
    if (m == 0) throw std::invalid_argument("ks_statistic_exp1: empty configuration");
    std::vector<double> ls(m);
    for (std::size_t i = 0; i < m; ++i) ls[i] = cfg.piece_length(i);
    std::sort(ls.begin(), ls.end());
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double f = 1.0 - std::exp(-ls[i]);
        const double lo = static_cast<double>(i) / m;
        const double hi = static_cast<double>(i + 1) / m;
        d = std::max(d, std::max(f - lo, hi - f));
    }
    return d;
}

}  // namespace pieces
