#include "pieces/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "pieces/common.hpp"

namespace pieces {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

std::string histogram_csv(const LengthHistogram& h) {
    std::ostringstream os;
    os << "bin_lo,bin_hi,count,expected,zscore\n";
    for (std::size_t j = 0; j + 1 < h.bin_edges.size(); ++j) {
        os << fmt(h.bin_edges[j]) << ',' << fmt(h.bin_edges[j + 1]) << ',' << h.counts[j] << ','
           << fmt(h.expected[j]) << ',' << fmt(h.zscores[j]) << '\n';
    }
    return os.str();
}

std::string chain_statistics_csv(const ChainStatistics& st) {
    std::ostringstream os;
    os << "size,len_lo,len_hi,len2_lo,len2_hi,gap_lo,gap_hi,count,expected,zscore\n";
    for (const auto& r : st.size1) {
        os << "1," << fmt(r.lo1) << ',' << fmt(r.hi1) << ",,,,," << r.count << ','
           << fmt(r.expected) << ',' << fmt(r.zscore) << '\n';
    }
    for (const auto& r : st.size2) {
        os << "2," << fmt(r.lo1) << ',' << fmt(r.hi1) << ',' << fmt(r.lo2) << ',' << fmt(r.hi2)
           << ',' << fmt(r.gap_lo) << ',' << fmt(r.gap_hi) << ',' << r.count << ','
           << fmt(r.expected) << ',' << fmt(r.zscore) << '\n';
    }
    return os.str();
}

std::string fit_csv(const AsymptoticFit& fit, double a) {
    std::ostringstream os;
    os << "l,d,raw_energy,scaled_correction,fit_value,residual\n";
    for (std::size_t i = 0; i < fit.fit_lengths.size(); ++i) {
        const double l = fit.fit_lengths[i];
        const double corr = fit.raw_gamma_corrections.empty()
                                ? 0.0
                                : fit.raw_gamma_corrections[i];
        const double raw = 5.0 * kPiSq / (l * l) + corr / (l * l * l);
        const double resid = fit.fit_residuals.empty() ? 0.0 : fit.fit_residuals[i];
        os << fmt(l) << ",," << fmt(raw) << ',' << fmt(corr) << ',' << fmt(fit.gamma) << ','
           << fmt(resid) << '\n';
    }
    for (std::size_t di = 0; di < fit.sigma_d.size(); ++di) {
        for (std::size_t li = 0; li < fit.raw_sigma_corrections[di].size(); ++li) {
            const double l = li < fit.fit_lengths.size() ? fit.fit_lengths[li] : 0.0;
            const double corr = fit.raw_sigma_corrections[di][li];
            const double free_sum = kPiSq / (l * l) + kPiSq / (a * a * l * l);
            os << fmt(l) << ',' << fmt(fit.sigma_d[di]) << ','
               << fmt(free_sum + corr / (a * a * a * std::pow(l, 6))) << ',' << fmt(corr) << ','
               << fmt(fit.sigma_val[di]) << ','
               << fmt(corr - fit.sigma_val[di]) << '\n';
        }
    }
    return os.str();
}

std::string counting_csv(const CountingExperiment& ce) {
    std::ostringstream os;
    os << "lambda,closed_form";
    for (std::size_t s = 0; s < ce.empirical.size(); ++s) os << ",empirical_" << s;
    os << '\n';
    for (std::size_t j = 0; j < ce.grid.size(); ++j) {
        os << fmt(ce.grid[j]) << ',' << fmt(ce.closed_form[j]);
        for (const auto& emp : ce.empirical) os << ',' << fmt(emp[j]);
        os << '\n';
    }
    return os.str();
}

std::string kernel_csv(const DensityKernel& k) {
    std::ostringstream os;
    os << "i,j,value\n";
    for (long i = 0; i < k.matrix.rows(); ++i) {
        for (long j = 0; j < k.matrix.cols(); ++j) {
            os << i << ',' << j << ',' << fmt(k.matrix(i, j)) << '\n';
        }
    }
    return os.str();
}

std::string pieces_csv(const PieceConfiguration& cfg) {
    std::ostringstream os;
    os << "index,left,right,length\n";
    for (std::size_t i = 0; i < cfg.piece_count(); ++i) {
        os << i << ',' << fmt(cfg.piece_left(i)) << ',' << fmt(cfg.piece_right(i)) << ','
           << fmt(cfg.piece_length(i)) << '\n';
    }
    return os.str();
}

nlohmann::json decomposition_json(const ChainDecomposition& decomp) {
    nlohmann::json j;
    j["spec_version"] = kSpecVersion;
    j["p"] = decomp.p;
    j["box_length"] = decomp.box_length;
    j["minimal_length"] = decomp.minimal_length;
    nlohmann::json chains = nlohmann::json::array();
    for (std::size_t c = 0; c < decomp.chains.size(); ++c) {
        const Chain& ch = decomp.chains[c];
        nlohmann::json jc;
        nlohmann::json members = nlohmann::json::array();
        for (std::size_t k = 0; k < ch.size(); ++k) {
            members.push_back({{"index", ch.piece_indices[k]},
                               {"length", ch.lengths[k]},
                               {"cap", ch.caps[k]}});
        }
        jc["pieces"] = members;
        jc["gaps"] = ch.gaps;
        jc["small"] = decomp.in_small[c] != 0;
        chains.push_back(jc);
    }
    j["chains"] = chains;
    j["leftover_pieces"] = decomp.leftover_pieces;
    return j;
}

nlohmann::json ground_state_json(const GroundStateEstimate& gs) {
    nlohmann::json j;
    j["spec_version"] = kSpecVersion;
    j["n"] = gs.occupation.total;
    j["energy_P"] = gs.energy_P;
    j["energy_N"] = gs.energy_N;
    j["energy_total"] = gs.total_energy();
    j["occupation"] = gs.occupation.counts;
    nlohmann::json used = nlohmann::json::array();
    for (const PoolEntry& e : gs.levels_used) {
        used.push_back({{"chain", e.chain_ord}, {"kappa", e.kappa}, {"value", e.value}});
    }
    j["levels_used"] = used;
    nlohmann::json lo = nlohmann::json::array();
    for (const auto& [piece, value] : gs.leftover_levels_used) {
        lo.push_back({{"piece", piece}, {"value", value}});
    }
    j["leftover_levels_used"] = lo;
    return j;
}

nlohmann::json fit_json(const AsymptoticFit& fit) {
    nlohmann::json j;
    j["spec_version"] = kSpecVersion;
    j["gamma"] = fit.gamma;
    j["sigma_d"] = fit.sigma_d;
    j["sigma"] = fit.sigma_val;
    j["range"] = fit.range;
    j["fit_lengths"] = fit.fit_lengths;
    j["gamma_residuals"] = fit.fit_residuals;
    j["scaled_gamma_corrections"] = fit.raw_gamma_corrections;
    j["scaled_sigma_corrections"] = fit.raw_sigma_corrections;
    return j;
}

nlohmann::json seed_run_json(const SeedRun& run, double rho, double box_length) {
    nlohmann::json j;
    j["rho"] = rho;
    j["L"] = box_length;
    j["seed"] = run.seed;
    j["n"] = run.n;
    j["E_greedy_per_n"] = run.energy_greedy_per_n;
    j["E_test_per_n"] = run.energy_test_per_n;
    j["J_lambda_over_rho"] = run.weighted_J_over_rho;
    j["gaps"] = {{"greedy", run.gap_greedy}, {"test", run.gap_test}};
    j["lambda_rho"] = run.lambda_rho;
    j["delta_rho"] = run.delta_rho;
    j["pool_size"] = run.pool_size;
    j["chain_count"] = run.chain_count;
    j["leftover_fraction"] = run.leftover_fraction;
    return j;
}

nlohmann::json experiment_json(const ExperimentReport& rep) {
    nlohmann::json j;
    j["spec_version"] = kSpecVersion;
    j["rho"] = rep.rho;
    j["L"] = rep.box_length;
    nlohmann::json runs = nlohmann::json::array();
    for (const SeedRun& r : rep.runs) runs.push_back(seed_run_json(r, rep.rho, rep.box_length));
    j["runs"] = runs;
    j["mean_E_greedy_per_n"] = rep.mean_energy_greedy;
    j["stderr_E_greedy_per_n"] = rep.stderr_energy_greedy;
    j["mean_E_test_per_n"] = rep.mean_energy_test;
    j["mean_gap_greedy"] = rep.mean_gap_greedy;
    j["mean_gap_test"] = rep.mean_gap_test;
    return j;
}

}  // namespace pieces
