// Batch front door: wires the sampling / decomposition / solver / counting
// pipeline behind subcommands and emits CSV/JSON artifacts.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pieces/chains.hpp"
#include "pieces/common.hpp"
#include "pieces/config.hpp"
#include "pieces/densities.hpp"
#include "pieces/disorder.hpp"
#include "pieces/io.hpp"
#include "pieces/optimizer.hpp"
#include "pieces/parallel.hpp"
#include "pieces/pipeline.hpp"
#include "pieces/potential.hpp"
#include "pieces/spectra.hpp"
#include "pieces/thermo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pieces;

namespace {

json meta_block(bool stamp) {
    json m;
    m["spec_version"] = kSpecVersion;
    if (stamp) {
        m["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::system_clock::now().time_since_epoch())
                             .count();
    }
    return m;
}

void write_json(const fs::path& path, json j) {
    write_text_file(path.string(), j.dump(2) + "\n");
    std::cout << "wrote " << path.string() << "\n";
}

void write_csv(const fs::path& path, const std::string& content) {
    write_text_file(path.string(), content);
    std::cout << "wrote " << path.string() << "\n";
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string tok = text.substr(pos, comma - pos);
        if (!tok.empty()) out.push_back(std::stod(tok));
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

AsymptoticFit fits_for(const Potential& U, const std::string& fit_file, const RunConfig& cfg,
                       bool quick_note, json* note) {
    if (!fit_file.empty()) {
        std::ifstream in(fit_file);
        if (!in) throw std::invalid_argument("cannot open fit file " + fit_file);
        json j;
        in >> j;
        AsymptoticFit fit;
        fit.gamma = j.at("gamma").get<double>();
        fit.sigma_d = j.at("sigma_d").get<std::vector<double>>();
        fit.sigma_val = j.at("sigma").get<std::vector<double>>();
        fit.range = j.at("range").get<double>();
        return fit;
    }
    // quick in-run fit; use the `fit` subcommand for the converged constants
    AsymptoticFit fit = fit_gamma(U, {12.0, 18.0, 24.0}, cfg.solver.n_modes, cfg.solver);
    if (U.range() > 0.0) {
        const double M = U.range();
        fit_sigma(fit, U, {0.0, 0.25 * M, 0.5 * M, 0.75 * M, M}, {12.0, 18.0, 24.0}, 1.0,
                  cfg.solver.n_modes, cfg.solver);
    }
    if (quick_note && note) (*note)["quick_fit"] = true;
    return fit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pieces: fermionic pieces' model laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = ".", fit_file;
    bool stamp = false;
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--stamp", stamp, "include a timestamp in the JSON metadata");

    double rho = -1.0, L = -1.0, delta = -1.0;
    int p = -1, n_modes = -1;
    std::string seeds_text, potential_text, lengths_text = "20,40,80", dgrid_text;
    double fit_a = 1.0;
    long n_override = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--rho", rho, "particle density");
        sub->add_option("--L", L, "box length");
        sub->add_option("--seed,--seeds", seeds_text, "seed or seed list (e.g. 1..10)");
        sub->add_option("--potential", potential_text, "step:<u0>:<M> or table:<path>");
        sub->add_option("--p", p, "chain particle bound");
        sub->add_option("--delta", delta, "error-order exponent in (0,1)");
        sub->add_option("--n-modes", n_modes, "sine modes per piece");
        sub->add_option("--fit", fit_file, "fit JSON from the `fit` subcommand");
    };

    CLI::App* c_sample = app.add_subcommand("sample", "sample a disorder realization");
    add_common(c_sample);
    CLI::App* c_decomp = app.add_subcommand("decompose", "chain decomposition of a realization");
    add_common(c_decomp);
    CLI::App* c_levels = app.add_subcommand("levels", "level pool of a realization");
    add_common(c_levels);
    CLI::App* c_fit = app.add_subcommand("fit", "fit the interaction constants gamma and sigma(d)");
    add_common(c_fit);
    c_fit->add_option("--lengths", lengths_text, "piece lengths for the fits");
    c_fit->add_option("--dgrid", dgrid_text, "separations for the sigma fit");
    c_fit->add_option("--a", fit_a, "length ratio of the two-piece geometry");
    CLI::App* c_ground = app.add_subcommand("ground", "greedy ground state of a realization");
    add_common(c_ground);
    c_ground->add_option("--n", n_override, "particle count (default round(rho L))");
    CLI::App* c_count = app.add_subcommand("counting", "empirical counting function vs J");
    add_common(c_count);
    CLI::App* c_fermi = app.add_subcommand("fermi", "Fermi level of J at the given density");
    add_common(c_fermi);
    CLI::App* c_compare = app.add_subcommand("compare", "greedy vs test state across seeds");
    add_common(c_compare);
    CLI::App* c_dens = app.add_subcommand("densities", "reduced densities of a small instance");
    add_common(c_dens);
    CLI::App* c_sweep = app.add_subcommand("sweep", "experiment sweep over (seed x rho)");
    add_common(c_sweep);
    std::string rhos_text;
    c_sweep->add_option("--rhos", rhos_text, "density list, e.g. 0.025,0.05,0.1");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (rho > 0.0) cfg.rho = rho;
        if (L > 0.0) cfg.box_length = L;
        if (!seeds_text.empty()) cfg.seeds = parse_seed_list(seeds_text);
        if (!potential_text.empty()) cfg.potential = potential_text;
        if (p > 0) cfg.p = p;
        if (delta > 0.0) cfg.delta = delta;
        if (n_modes > 0) cfg.solver.n_modes = n_modes;
        if (out_dir != ".") cfg.output_dir = out_dir;
        cfg.validate();
        fs::create_directories(cfg.output_dir);
        const fs::path out(cfg.output_dir);
        const Potential U = parse_potential(cfg.potential);

        if (*c_sample) {
            const PieceConfiguration pc = sample_pieces(cfg.box_length, cfg.seeds.front());
            write_csv(out / "pieces.csv", pieces_csv(pc));
            std::vector<double> edges;
            for (int k = 0; k <= 16; ++k) edges.push_back(0.5 * k);
            write_csv(out / "length_histogram.csv", histogram_csv(piece_length_histogram(pc, edges)));
            json j;
            j["meta"] = meta_block(stamp);
            j["L"] = cfg.box_length;
            j["seed"] = cfg.seeds.front();
            j["piece_count"] = pc.piece_count();
            j["max_piece_length"] = max_piece_length(pc);
            j["ks_statistic"] = ks_statistic_exp1(pc);
            write_json(out / "sample.json", j);
            return 0;
        }

        const ModelParams params = model_params(cfg.rho, U.range());

        if (*c_decomp) {
            const PieceConfiguration pc = sample_pieces(cfg.box_length, cfg.seeds.front());
            const ChainDecomposition decomp = decompose(pc, params, cfg.p);
            json j = decomposition_json(decomp);
            j["meta"] = meta_block(stamp);
            write_json(out / "decomposition.json", j);
            std::vector<double> lbins{params.minimal_length, 1.5 * params.minimal_length,
                                      2.0 * params.minimal_length, 3.0 * params.minimal_length};
            std::vector<double> gbins{0.0, 0.5 * U.range(), U.range()};
            write_csv(out / "chain_statistics.csv",
                      chain_statistics_csv(chain_statistics(decomp, params, lbins, gbins)));
            return 0;
        }

        if (*c_fit) {
            const std::vector<double> lengths = parse_double_list(lengths_text);
            AsymptoticFit fit = fit_gamma(U, lengths, cfg.solver.n_modes, cfg.solver);
            if (U.range() > 0.0) {
                std::vector<double> dgrid;
                if (!dgrid_text.empty()) {
                    dgrid = parse_double_list(dgrid_text);
                } else {
                    for (int k = 0; k <= 5; ++k) dgrid.push_back(U.range() * k / 5.0);
                }
                fit_sigma(fit, U, dgrid, lengths, fit_a, cfg.solver.n_modes, cfg.solver);
            }
            json j = fit_json(fit);
            j["meta"] = meta_block(stamp);
            write_json(out / "fit.json", j);
            write_csv(out / "fit.csv", fit_csv(fit, fit_a));
            return 0;
        }

        json note = json::object();
        const auto fits_lazy = [&]() { return fits_for(U, fit_file, cfg, true, &note); };

        if (*c_levels) {
            const PieceConfiguration pc = sample_pieces(cfg.box_length, cfg.seeds.front());
            const ChainDecomposition decomp = decompose(pc, params, cfg.p);
            const LevelPool pool = build_level_pool(decomp, U, cfg.p, cfg.solver);
            std::ostringstream os;
            os << "rank,chain,first_piece,kappa,value,beyond_capacity\n";
            for (std::size_t r = 0; r < pool.entries.size(); ++r) {
                const PoolEntry& e = pool.entries[r];
                os << r << ',' << pool.chain_ids[e.chain_ord] << ','
                   << pool.first_piece[e.chain_ord] << ',' << e.kappa << ','
                   << std::setprecision(17) << e.value << ',' << (e.beyond_capacity ? 1 : 0)
                   << '\n';
            }
            write_csv(out / "pool.csv", os.str());
            return 0;
        }

        if (*c_ground) {
            const PieceConfiguration pc = sample_pieces(cfg.box_length, cfg.seeds.front());
            const ChainDecomposition decomp = decompose(pc, params, cfg.p);
            const LevelPool pool = build_level_pool(decomp, U, cfg.p, cfg.solver);
            const long n = n_override > 0 ? n_override : std::lround(cfg.rho * cfg.box_length);
            const GroundStateEstimate gs = greedy_fill(pool, n, decomp);
            json j = ground_state_json(gs);
            j["meta"] = meta_block(stamp);
            j["E_per_n"] = gs.total_energy() / static_cast<double>(n);
            j.update(note);
            write_json(out / "ground.json", j);
            return 0;
        }

        if (*c_fermi) {
            const AsymptoticFit fits = fits_lazy();
            const FermiSolution fermi = fermi_level(cfg.rho, params, U, fits);
            json j;
            j["meta"] = meta_block(stamp);
            j["rho"] = cfg.rho;
            j["lambda_rho"] = fermi.lambda_rho;
            j["delta_rho"] = fermi.delta_rho;
            j["residual"] = fermi.residual;
            j["fermi_length"] = params.fermi_length;
            j["minimal_length"] = params.minimal_length;
            j["fermi_energy"] = params.fermi_energy;
            j.update(note);
            write_json(out / "fermi.json", j);
            return 0;
        }

        if (*c_count) {
            const AsymptoticFit fits = fits_lazy();
            const CountingExperiment ce =
                counting_experiment(cfg.rho, cfg.box_length, cfg.seeds, U, cfg.solver, fits);
            write_csv(out / "counting.csv", counting_csv(ce));
            json j;
            j["meta"] = meta_block(stamp);
            j["sup_gaps"] = ce.sup_gaps;
            j["mean_sup_gap"] = ce.mean_sup_gap;
            j.update(note);
            write_json(out / "counting.json", j);
            return 0;
        }

        if (*c_compare) {
            const AsymptoticFit fits = fits_lazy();
            const ExperimentReport rep = energy_per_particle_experiment(
                cfg.rho, cfg.box_length, cfg.seeds, U, cfg.p, cfg.delta, cfg.solver, fits);
            json j = experiment_json(rep);
            j["meta"] = meta_block(stamp);
            // trace-norm comparison on the first seed
            const PieceConfiguration pc = sample_pieces(cfg.box_length, cfg.seeds.front());
            const ChainDecomposition decomp = decompose(pc, params, cfg.p);
            const LevelPool pool = build_level_pool(decomp, U, cfg.p, cfg.solver);
            const long n = std::lround(cfg.rho * cfg.box_length);
            const GroundStateEstimate gs = greedy_fill(pool, n, decomp);
            const FermiSolution fermi = fermi_level(cfg.rho, params, U, fits);
            const Occupation to = build_test_occupation(decomp, fermi, fits, U, n);
            const StateComparison sc = compare_states(decomp, pool, gs, to, U, cfg.solver);
            j["trace_norm"] = {{"one_distance_per_n", sc.one_distance / sc.n},
                               {"two_gap_bound_per_n2",
                                sc.two_gap_bound / (static_cast<double>(sc.n) * sc.n)},
                               {"disagreeing_chains", sc.disagreeing_chains}};
            j.update(note);
            write_json(out / "compare.json", j);
            std::ostringstream os;
            os << "seed,n,E_greedy_per_n,E_test_per_n,J_lambda_over_rho,gap_greedy,gap_test,"
                  "lambda_rho,delta_rho,pool_size\n";
            for (const SeedRun& r : rep.runs) {
                os << r.seed << ',' << r.n << ',' << std::setprecision(17)
                   << r.energy_greedy_per_n << ',' << r.energy_test_per_n << ','
                   << r.weighted_J_over_rho << ',' << r.gap_greedy << ',' << r.gap_test << ','
                   << r.lambda_rho << ',' << r.delta_rho << ',' << r.pool_size << '\n';
            }
            write_csv(out / "compare.csv", os.str());
            return 0;
        }

        if (*c_dens) {
            // two-piece demo: interacting pair densities on a small chain
            const double l = 4.0;
            const TwoParticleSolution sol = solve_same_piece_pair(l, U, cfg.solver.n_modes, cfg.solver);
            Grid grid = make_grid({{0.0, l}});
            PairGeometry geom;
            geom.same_piece = true;
            geom.l = l;
            const DensityKernel one = pair_state_one_density(sol, geom, grid);
            write_csv(out / "pair_density_one.csv", kernel_csv(one));
            json j;
            j["meta"] = meta_block(stamp);
            j["energy"] = sol.energy;
            j["trace_gamma1"] = one.trace;
            j.update(note);
            write_json(out / "densities.json", j);
            return 0;
        }

        if (*c_sweep) {
            const AsymptoticFit fits = fits_lazy();
            std::vector<double> rhos{cfg.rho};
            if (!rhos_text.empty()) rhos = parse_double_list(rhos_text);
            struct Shard {
                double rho;
                std::uint64_t seed;
                SeedRun run;
            };
            std::vector<Shard> shards;
            for (double r : rhos) {
                for (std::uint64_t s : cfg.seeds) shards.push_back({r, s, {}});
            }
            parallel_for(shards.size(), [&](std::size_t i) {
                shards[i].run = run_seed(shards[i].rho, cfg.box_length, shards[i].seed, U, cfg.p,
                                         cfg.delta, cfg.solver, fits);
            });
            std::ostringstream os;
            os << "rho,seed,n,E_greedy_per_n,E_test_per_n,J_lambda_over_rho,gap_greedy,"
                  "lambda_rho,delta_rho,pool_size,leftover_fraction\n";
            for (const Shard& s : shards) {
                os << std::setprecision(17) << s.rho << ',' << s.seed << ',' << s.run.n << ','
                   << s.run.energy_greedy_per_n << ',' << s.run.energy_test_per_n << ','
                   << s.run.weighted_J_over_rho << ',' << s.run.gap_greedy << ','
                   << s.run.lambda_rho << ',' << s.run.delta_rho << ',' << s.run.pool_size << ','
                   << s.run.leftover_fraction << '\n';
            }
            write_csv(out / "sweep.csv", os.str());
            return 0;
        }

        std::cerr << "unknown subcommand\n";
        return 2;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << " (residual " << e.residual << ")\n";
        return 3;
    } catch (const NoRootError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 4;
    } catch (const TooLargeError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
