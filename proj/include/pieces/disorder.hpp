#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace pieces {

// Poisson points on [0, L] with x_0 = 0 and the pieces they cut out.
// The final partial interval [x_m, L] is not a piece.
struct PieceConfiguration {
    double box_length = 0.0;
    std::vector<double> points;  // x_0 = 0 < x_1 < ... <= L

    std::size_t piece_count() const { return points.size() - 1; }
    double piece_left(std::size_t i) const { return points[i]; }
    double piece_right(std::size_t i) const { return points[i + 1]; }
    double piece_length(std::size_t i) const { return points[i + 1] - points[i]; }
};

PieceConfiguration sample_pieces(double box_length, std::uint64_t seed);

struct LengthHistogram {
    std::vector<double> bin_edges;
    std::vector<long> counts;
    std::vector<double> expected;  // L (e^{-a} - e^{-b}) per bin
    std::vector<double> zscores;   // (count - expected) / sqrt(expected)
};

LengthHistogram piece_length_histogram(const PieceConfiguration& cfg,
                                       const std::vector<double>& bin_edges);

double max_piece_length(const PieceConfiguration& cfg);

// Runs of consecutive pieces of length >= min_length whose intervening gaps
// (sums of shorter pieces) fall in the given windows.
struct GapPattern {
    std::vector<std::pair<double, double>> length_windows;  // r windows [a, b)
    std::vector<std::pair<double, double>> gap_windows;     // r-1 windows [c, d)
    double min_length = 0.0;
};

struct PatternCount {
    long count = 0;
    double expected = 0.0;  // L prod (d-c) prod (e^{-a} - e^{-b})
    double zscore = 0.0;
};

PatternCount gap_pattern_count(const PieceConfiguration& cfg, const GapPattern& pattern);

// Kolmogorov-Smirnov statistic of the piece lengths against Exponential(1).
double ks_statistic_exp1(const PieceConfiguration& cfg);

}  // namespace pieces
