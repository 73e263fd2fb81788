#include "marketsim/rl/mlp.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace marketsim::rl {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs >= 2 layers");
  std::size_t count = 0;
  for (std::size_t l = 1; l < sizes_.size(); ++l) {
    layer_offsets_.push_back(count);
    count += static_cast<std::size_t>(sizes_[l]) * sizes_[l - 1] + sizes_[l];
  }
  params_.assign(count, 0.0);
}

void Mlp::init_random(std::mt19937_64& rng) {
  for (std::size_t l = 1; l < sizes_.size(); ++l) {
    const int n_in = sizes_[l - 1];
    const int n_out = sizes_[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(n_in));
    double* w = params_.data() + layer_offsets_[l - 1];
    for (int i = 0; i < n_out * n_in; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
      w[i] = (2.0 * u - 1.0) * bound;
    }
    // biases stay zero
  }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Cache cache;
  return forward(input, cache);
}

std::vector<double> Mlp::forward(std::span<const double> input,
                                 Cache& cache) const {
  if (static_cast<int>(input.size()) != input_size())
    throw std::invalid_argument("Mlp: input dimension mismatch");
  cache.activations.assign(1, std::vector<double>(input.begin(), input.end()));
  const std::size_t n_layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int n_in = sizes_[l];
    const int n_out = sizes_[l + 1];
    const double* w = params_.data() + layer_offsets_[l];
    const double* b = w + static_cast<std::size_t>(n_out) * n_in;
    const std::vector<double>& a = cache.activations.back();
    std::vector<double> z(n_out);
    for (int i = 0; i < n_out; ++i) {
      double acc = b[i];
      const double* row = w + static_cast<std::size_t>(i) * n_in;
      for (int j = 0; j < n_in; ++j) acc += row[j] * a[j];
      z[i] = (l + 1 < n_layers) ? std::tanh(acc) : acc;
    }
    cache.activations.push_back(std::move(z));
  }
  return cache.activations.back();
}

void Mlp::backward(const Cache& cache, std::span<const double> dloss_dout,
                   std::span<double> grad) const {
  assert(grad.size() == params_.size());
  const std::size_t n_layers = sizes_.size() - 1;
  assert(cache.activations.size() == n_layers + 1);
  std::vector<double> delta(dloss_dout.begin(), dloss_dout.end());
  for (std::size_t l = n_layers; l-- > 0;) {
    const int n_in = sizes_[l];
    const int n_out = sizes_[l + 1];
    const double* w = params_.data() + layer_offsets_[l];
    double* gw = grad.data() + layer_offsets_[l];
    double* gb = gw + static_cast<std::size_t>(n_out) * n_in;
    const std::vector<double>& a_in = cache.activations[l];
    for (int i = 0; i < n_out; ++i) {
      const double d = delta[i];
      double* grow = gw + static_cast<std::size_t>(i) * n_in;
      for (int j = 0; j < n_in; ++j) grow[j] += d * a_in[j];
      gb[i] += d;
    }
    if (l == 0) break;
    std::vector<double> prev(n_in, 0.0);
    for (int j = 0; j < n_in; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n_out; ++i)
        acc += w[static_cast<std::size_t>(i) * n_in + j] * delta[i];
      // tanh' through the post-activation value of layer l
      const double a = a_in[j];
      prev[j] = acc * (1.0 - a * a);
    }
    delta = std::move(prev);
  }
}

}  // namespace marketsim::rl
