#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "marketsim/rl/policy.hpp"

namespace marketsim::rl {

struct PpoConfig {
  double clip_epsilon = 0.2;
  double discount = 0.99;  // the MDP discount, distinct from agents' reward gamma
  double gae_lambda = 0.95;
  int epochs = 4;
  int minibatch = 256;
  double learning_rate = 3e-4;  // plain SGD
  double max_grad_norm = 0.5;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  int buffer_capacity = 2048;
};

struct RolloutBuffer {
  int obs_dim = 0;
  int act_dim = 0;
  std::size_t capacity = 0;

  std::vector<double> obs;      // size * obs_dim
  std::vector<double> actions;  // size * act_dim (raw)
  std::vector<double> logp;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;

  RolloutBuffer() = default;
  RolloutBuffer(int obs_dim, int act_dim, std::size_t capacity)
      : obs_dim(obs_dim), act_dim(act_dim), capacity(capacity) {}

  std::size_t size() const { return logp.size(); }
  bool full() const { return size() >= capacity; }
  void clear();
  void push(std::span<const double> o, std::span<const double> a, double lp,
            double reward, double value, bool done);
  std::span<const double> obs_at(std::size_t i) const {
    return {obs.data() + i * obs_dim, static_cast<std::size_t>(obs_dim)};
  }
  std::span<const double> action_at(std::size_t i) const {
    return {actions.data() + i * act_dim, static_cast<std::size_t>(act_dim)};
  }
};

// delta_t = r_t + discount * v_{t+1} * (1 - done_t) - v_t
// A_t = delta_t + discount * lambda * (1 - done_t) * A_{t+1}
// returns_t = A_t + v_t
void gae(std::span<const double> rewards, std::span<const double> values,
         std::span<const std::uint8_t> dones, double bootstrap_value,
         double discount, double lambda, std::vector<double>& advantages,
         std::vector<double>& returns);

// min(r*A, clip(r, 1-eps, 1+eps)*A) for one sample.
double clipped_surrogate(double ratio, double advantage, double clip_epsilon);

struct PpoDiagnostics {
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  bool aborted = false;  // NonFiniteLoss: old parameters kept
  int updates = 0;
};

// A prepared minibatch view (indices into a buffer plus computed targets).
struct PpoBatch {
  const RolloutBuffer* buffer = nullptr;
  std::vector<std::size_t> indices;
  std::vector<double> advantages;  // aligned with buffer, already normalized
  std::vector<double> returns;
};

// Mean loss over the batch and its gradient wrt (policy params || value
// params). Exposed so tests can check it against finite differences.
double ppo_loss_and_grad(const Policy& policy, const Mlp& value_net,
                         const PpoBatch& batch, const PpoConfig& config,
                         std::span<double> grad_policy,
                         std::span<double> grad_value,
                         PpoDiagnostics* diag = nullptr);

// Runs the clipped-surrogate update over the full buffer, then clears it.
PpoDiagnostics ppo_update(Policy& policy, Mlp& value_net, RolloutBuffer& buffer,
                          const PpoConfig& config, double bootstrap_value,
                          std::mt19937_64& rng);

}  // namespace marketsim::rl
