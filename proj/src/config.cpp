#include "pieces/config.hpp"

#include <fstream>
#include <stdexcept>

namespace pieces {

void RunConfig::validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("config: rho must be positive");
    if (!(box_length > 0.0)) throw std::invalid_argument("config: L must be positive");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    if (p < 1) throw std::invalid_argument("config: p must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta must be in (0,1)");
    if (solver.n_modes < 4) throw std::invalid_argument("config: n_modes must be >= 4");
    if (!(solver.quad_tol > 0.0) || !(solver.eig_tol > 0.0)) {
        throw std::invalid_argument("config: tolerances must be positive");
    }
}

nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["rho"] = cfg.rho;
    j["L"] = cfg.box_length;
    j["seeds"] = cfg.seeds;
    j["potential"] = cfg.potential;
    j["p"] = cfg.p;
    j["delta"] = cfg.delta;
    j["solver"] = {{"n_modes", cfg.solver.n_modes},
                   {"quad_tol", cfg.solver.quad_tol},
                   {"eig_tol", cfg.solver.eig_tol}};
    j["output_dir"] = cfg.output_dir;
    return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    if (j.contains("rho")) cfg.rho = j.at("rho").get<double>();
    if (j.contains("L")) cfg.box_length = j.at("L").get<double>();
    if (j.contains("seeds")) {
        if (j.at("seeds").is_string()) {
            cfg.seeds = parse_seed_list(j.at("seeds").get<std::string>());
        } else {
            cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        }
    }
    if (j.contains("potential")) cfg.potential = j.at("potential").get<std::string>();
    if (j.contains("p")) cfg.p = j.at("p").get<int>();
    if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        if (s.contains("n_modes")) cfg.solver.n_modes = s.at("n_modes").get<int>();
        if (s.contains("quad_tol")) cfg.solver.quad_tol = s.at("quad_tol").get<double>();
        if (s.contains("eig_tol")) cfg.solver.eig_tol = s.at("eig_tol").get<double>();
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string tok = text.substr(pos, comma - pos);
        const std::size_t dots = tok.find("..");
        if (dots != std::string::npos) {
            const std::uint64_t a = std::stoull(tok.substr(0, dots));
            const std::uint64_t b = std::stoull(tok.substr(dots + 2));
            if (b < a) throw std::invalid_argument("seed range must increase: " + tok);
            for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
        } else if (!tok.empty()) {
            seeds.push_back(std::stoull(tok));
        }
        pos = comma + 1;
    }
    if (seeds.empty()) throw std::invalid_argument("empty seed list");
    return seeds;
}

}  // namespace pieces
