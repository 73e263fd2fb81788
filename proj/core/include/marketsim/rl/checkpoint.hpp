#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "marketsim/rl/ppo.hpp"

namespace marketsim::rl {

// One agent's trainable state plus its sampling rng.
struct AgentNets {
  Policy policy;
  Mlp value;
  std::mt19937_64 rng;
};

// File layout: magic "MSCKPT1\n", little-endian u64 header length, JSON
// header (layer sizes, head kind, hyperparameters, rng state, caller
// metadata), then all parameters as one flat little-endian f64 block
// (policy trunk, gaussian log-std, value trunk). Save/load round-trips
// bitwise.
void save_checkpoint(const std::string& path, const AgentNets& nets,
                     const PpoConfig& config, const nlohmann::json& metadata);

struct LoadedCheckpoint {
  AgentNets nets;
  PpoConfig config;
  nlohmann::json metadata;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace marketsim::rl
