#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pieces/spectra.hpp"

namespace pieces {

struct RunConfig {
    double rho = 0.05;
    double box_length = 10000.0;
    std::vector<std::uint64_t> seeds{1};
    std::string potential = "step:1:1";
    int p = 2;
    double delta = 0.5;
    SolverConfig solver;
    std::string output_dir = ".";

    void validate() const;
};

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// "3", "1,2,5" or "1..10"
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace pieces
