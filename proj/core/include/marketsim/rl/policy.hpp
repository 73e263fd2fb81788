#pragma once

#include <random>
#include <span>
#include <variant>
#include <vector>

#include "marketsim/rl/mlp.hpp"

namespace marketsim::rl {

// Diagonal Gaussian with state-independent per-dimension log-std. The
// log-std entries are trainable and hard-clamped to [-5, 2] at use.
struct GaussianHead {
  static constexpr double kLogStdMin = -5.0;
  static constexpr double kLogStdMax = 2.0;

  std::vector<double> log_std;

  explicit GaussianHead(int dim = 0, double init = -0.5)
      : log_std(static_cast<std::size_t>(dim), init) {}

  int dim() const { return static_cast<int>(log_std.size()); }

  double log_prob(std::span<const double> mean,
                  std::span<const double> action) const;
  // Also fills dlogp/dmean and accumulates dlogp/dlog_std (zero where the
  // clamp saturates).
  double log_prob_grad(std::span<const double> mean,
                       std::span<const double> action, std::span<double> dmean,
                       std::span<double> dlog_std) const;
  double entropy() const;
  void entropy_grad(std::span<double> dlog_std, double scale) const;
  void sample(std::span<const double> mean, std::mt19937_64& rng,
              std::span<double> action_out) const;
};

struct CategoricalHead {
  int n = 0;

  static std::vector<double> softmax(std::span<const double> logits);
  double log_prob(std::span<const double> logits, int k) const;
  // dlogits gets dlogp/dlogits.
  double log_prob_grad(std::span<const double> logits, int k,
                       std::span<double> dlogits) const;
  double entropy(std::span<const double> logits) const;
  void entropy_grad(std::span<const double> logits, std::span<double> dlogits,
                    double scale) const;
  int sample(std::span<const double> logits, std::mt19937_64& rng,
             double& logp) const;
};

using PolicyHead = std::variant<GaussianHead, CategoricalHead>;

// One agent's policy: an MLP trunk plus an action head. Raw actions are
// stored as doubles; a categorical draw stores the index in action[0].
struct Policy {
  Mlp net;
  PolicyHead head;

  int action_dim() const;

  // Samples a raw action with its exact log-probability. `deterministic`
  // returns the mean (Gaussian) or argmax (categorical) instead.
  void act(std::span<const double> obs, std::mt19937_64& rng,
           std::vector<double>& action_out, double& logp,
           bool deterministic = false) const;

  double log_prob(std::span<const double> obs,
                  std::span<const double> action) const;

  // Trainable parameter count: trunk plus Gaussian log-std (if any).
  std::size_t param_count() const;
  void get_params(std::span<double> out) const;
  void set_params(std::span<const double> in);
};

// Standard normal draw; two fresh uniforms per call so the stream has no
// hidden cache state.
double gauss(std::mt19937_64& rng);
double uniform01(std::mt19937_64& rng);

}  // namespace marketsim::rl
