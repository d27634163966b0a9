#pragma once

#include <string>

#include <json.hpp>

#include "pieces/chains.hpp"
#include "pieces/densities.hpp"
#include "pieces/disorder.hpp"
#include "pieces/optimizer.hpp"
#include "pieces/pipeline.hpp"
#include "pieces/spectra.hpp"

namespace pieces {

inline constexpr const char* kSpecVersion = "1.0";

void write_text_file(const std::string& path, const std::string& content);

std::string histogram_csv(const LengthHistogram& h);
std::string chain_statistics_csv(const ChainStatistics& st);
std::string fit_csv(const AsymptoticFit& fit, double a);
std::string counting_csv(const CountingExperiment& ce);
std::string kernel_csv(const DensityKernel& k);
std::string pieces_csv(const PieceConfiguration& cfg);

nlohmann::json decomposition_json(const ChainDecomposition& decomp);
nlohmann::json ground_state_json(const GroundStateEstimate& gs);
nlohmann::json fit_json(const AsymptoticFit& fit);
nlohmann::json seed_run_json(const SeedRun& run, double rho, double box_length);
nlohmann::json experiment_json(const ExperimentReport& rep);

}  // namespace pieces
