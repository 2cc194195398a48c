#pragma once

#include "gw/analysis.hpp"
#include "gw/engine.hpp"
#include "gw/exact.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gw {

// Shortest decimal that round-trips the exact double value.
std::string fmt_double(double x);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);

nlohmann::json beta_json(const RateTriple& beta);
RateTriple beta_from_json(const nlohmann::json& j);

// CSV with header time,site_1,...,site_n; one row per scheduled snapshot.
void write_trajectory_csv(const Trajectory& t, const std::string& path);
// Sidecar describing the run: beta, boundary, seed, horizon, event_count.
void write_trajectory_sidecar(const Trajectory& t, const std::string& path);

// CSV with header h_1,...,h_{n-1},pi; one row per truncated-chain state.
void write_stationary_csv(const TruncatedChain& chain, const StationarySolve& sol,
                          const std::string& path);

nlohmann::json verdict_json(const RegionVerdict& v);
nlohmann::json speed_json(const SpeedEstimate& est);
nlohmann::json tail_json(const TailFit& fit);
nlohmann::json comb_json(const CombMatch& m);
nlohmann::json dtilde_json(const DtildeEstimate& est);
nlohmann::json shape_json(const ShapeDistribution& dist);
nlohmann::json stationary_json(const StationarySolve& sol);

void write_manifest(const std::string& path, const std::string& command,
                    const nlohmann::json& config, std::uint64_t seed,
                    const std::vector<std::string>& outputs);

}  // namespace gw
