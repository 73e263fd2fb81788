#include "marketsim/rl/policy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>

namespace marketsim::rl {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

double clamp_ls(double v) {
  return std::clamp(v, GaussianHead::kLogStdMin, GaussianHead::kLogStdMax);
}
bool ls_interior(double v) {
  return v > GaussianHead::kLogStdMin && v < GaussianHead::kLogStdMax;
}
}  // namespace

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

double gauss(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1p-53;
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double GaussianHead::log_prob(std::span<const double> mean,
                              std::span<const double> action) const {
  double lp = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double ls = clamp_ls(log_std[i]);
    const double z = (action[i] - mean[i]) / std::exp(ls);
    lp += -0.5 * kLog2Pi - ls - 0.5 * z * z;
  }
  return lp;
}

double GaussianHead::log_prob_grad(std::span<const double> mean,
                                   std::span<const double> action,
                                   std::span<double> dmean,
                                   std::span<double> dlog_std) const {
  double lp = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double ls = clamp_ls(log_std[i]);
    const double inv_var = std::exp(-2.0 * ls);
    const double diff = action[i] - mean[i];
    lp += -0.5 * kLog2Pi - ls - 0.5 * diff * diff * inv_var;
    dmean[i] = diff * inv_var;
    if (ls_interior(log_std[i]))
      dlog_std[i] += -1.0 + diff * diff * inv_var;
  }
  return lp;
}

double GaussianHead::entropy() const {
  double h = 0.0;
  for (int i = 0; i < dim(); ++i)
    h += 0.5 * (kLog2Pi + 1.0) + clamp_ls(log_std[i]);
  return h;
}

void GaussianHead::entropy_grad(std::span<double> dlog_std, double scale) const {
  for (int i = 0; i < dim(); ++i)
    if (ls_interior(log_std[i])) dlog_std[i] += scale;
}

void GaussianHead::sample(std::span<const double> mean, std::mt19937_64& rng,
                          std::span<double> action_out) const {
  for (int i = 0; i < dim(); ++i)
    action_out[i] = mean[i] + std::exp(clamp_ls(log_std[i])) * gauss(rng);
}

std::vector<double> CategoricalHead::softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double CategoricalHead::log_prob(std::span<const double> logits, int k) const {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (const double l : logits) sum += std::exp(l - m);
  return logits[k] - m - std::log(sum);
}

double CategoricalHead::log_prob_grad(std::span<const double> logits, int k,
                                      std::span<double> dlogits) const {
  const std::vector<double> p = softmax(logits);
  for (int i = 0; i < n; ++i) dlogits[i] = (i == k ? 1.0 : 0.0) - p[i];
  return std::log(p[k]);
}

double CategoricalHead::entropy(std::span<const double> logits) const {
  const std::vector<double> p = softmax(logits);
  double h = 0.0;
  for (const double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

void CategoricalHead::entropy_grad(std::span<const double> logits,
                                   std::span<double> dlogits,
                                   double scale) const {
  const std::vector<double> p = softmax(logits);
  const double h = entropy(logits);
  for (int i = 0; i < n; ++i)
    dlogits[i] += scale * (-p[i] * (std::log(std::max(p[i], 1e-300)) + h));
}

int CategoricalHead::sample(std::span<const double> logits,
                            std::mt19937_64& rng, double& logp) const {
  const std::vector<double> p = softmax(logits);
  const double u = uniform01(rng);
  double acc = 0.0;
  int k = n - 1;
  for (int i = 0; i < n; ++i) {
    acc += p[i];
    if (u < acc) {
      k = i;
      break;
    }
  }
  logp = std::log(p[k]);
  return k;
}

int Policy::action_dim() const {
  if (const auto* g = std::get_if<GaussianHead>(&head)) return g->dim();
  return 1;  // categorical index
}

void Policy::act(std::span<const double> obs, std::mt19937_64& rng,
                 std::vector<double>& action_out, double& logp,
                 bool deterministic) const {
  const std::vector<double> out = net.forward(obs);
  if (const auto* g = std::get_if<GaussianHead>(&head)) {
    action_out.resize(g->dim());
    if (deterministic) {
      std::copy(out.begin(), out.end(), action_out.begin());
    } else {
      g->sample(out, rng, action_out);
    }
    logp = g->log_prob(out, action_out);
  } else {
    const auto& c = std::get<CategoricalHead>(head);
    action_out.resize(1);
    int k;
    if (deterministic) {
      k = static_cast<int>(std::max_element(out.begin(), out.end()) -
                           out.begin());
      logp = c.log_prob(out, k);
    } else {
      k = c.sample(out, rng, logp);
    }
    action_out[0] = static_cast<double>(k);
  }
}

double Policy::log_prob(std::span<const double> obs,
                        std::span<const double> action) const {
  const std::vector<double> out = net.forward(obs);
  if (const auto* g = std::get_if<GaussianHead>(&head))
    return g->log_prob(out, action);
  return std::get<CategoricalHead>(head).log_prob(
      out, static_cast<int>(action[0]));
}

std::size_t Policy::param_count() const {
  std::size_t n = net.param_count();
  if (const auto* g = std::get_if<GaussianHead>(&head)) n += g->log_std.size();
  return n;
}

void Policy::get_params(std::span<double> out) const {
  assert(out.size() == param_count());
  std::copy(net.params().begin(), net.params().end(), out.begin());
  if (const auto* g = std::get_if<GaussianHead>(&head))
    std::copy(g->log_std.begin(), g->log_std.end(),
              out.begin() + static_cast<std::ptrdiff_t>(net.param_count()));
}

void Policy::set_params(std::span<const double> in) {
  assert(in.size() == param_count());
  std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(net.param_count()),
            net.params().begin());
  if (auto* g = std::get_if<GaussianHead>(&head))
    std::copy(in.begin() + static_cast<std::ptrdiff_t>(net.param_count()),
              in.end(), g->log_std.begin());
}

}  // namespace marketsim::rl
