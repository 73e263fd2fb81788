#pragma once

#include <random>
#include <span>
#include <vector>

#include "marketsim/types.hpp"

namespace marketsim::rl {

// Fully connected net, tanh hidden activations, linear output. Parameters
// live in one flat 64-bit float array: per layer, row-major weights
// (out x in) followed by biases.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Uniform(-b, b) weights with b = 1/sqrt(fan_in); zero biases.
  void init_random(std::mt19937_64& rng);

  struct Cache {
    // activations[0] is the input; activations[l] the post-activation
    // output of layer l.
    std::vector<std::vector<double>> activations;
  };

  std::vector<double> forward(std::span<const double> input) const;
  std::vector<double> forward(std::span<const double> input, Cache& cache) const;

  // Accumulates dLoss/dparams into `grad` (size param_count()), given the
  // cache of the matching forward pass and dLoss/doutput.
  void backward(const Cache& cache, std::span<const double> dloss_dout,
                std::span<double> grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<double> params_;
  std::vector<std::size_t> layer_offsets_;
};

}  // namespace marketsim::rl
