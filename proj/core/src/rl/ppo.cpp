#include "marketsim/rl/ppo.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace marketsim::rl {

void RolloutBuffer::clear() {
  obs.clear();
  actions.clear();
  logp.clear();
  rewards.clear();
  values.clear();
  dones.clear();
}

void RolloutBuffer::push(std::span<const double> o, std::span<const double> a,
                         double lp, double reward, double value, bool done) {
  assert(static_cast<int>(o.size()) == obs_dim);
  assert(static_cast<int>(a.size()) == act_dim);
  obs.insert(obs.end(), o.begin(), o.end());
  actions.insert(actions.end(), a.begin(), a.end());
  logp.push_back(lp);
  rewards.push_back(reward);
  values.push_back(value);
  dones.push_back(done ? 1 : 0);
}

void gae(std::span<const double> rewards, std::span<const double> values,
         std::span<const std::uint8_t> dones, double bootstrap_value,
         double discount, double lambda, std::vector<double>& advantages,
         std::vector<double>& returns) {
  const std::size_t n = rewards.size();
  assert(values.size() == n && dones.size() == n);
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t t = n; t-- > 0;) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double delta =
        rewards[t] + discount * next_value * not_done - values[t];
    next_adv = delta + discount * lambda * not_done * next_adv;
    advantages[t] = next_adv;
    returns[t] = next_adv + values[t];
    next_value = values[t];
  }
}

double clipped_surrogate(double ratio, double advantage, double clip_epsilon) {
  const double clipped =
      std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double ppo_loss_and_grad(const Policy& policy, const Mlp& value_net,
                         const PpoBatch& batch, const PpoConfig& config,
                         std::span<double> grad_policy,
                         std::span<double> grad_value, PpoDiagnostics* diag) {
  assert(grad_policy.size() == policy.param_count());
  assert(grad_value.size() == value_net.param_count());
  std::fill(grad_policy.begin(), grad_policy.end(), 0.0);
  std::fill(grad_value.begin(), grad_value.end(), 0.0);

  const RolloutBuffer& buf = *batch.buffer;
  const double inv_n = 1.0 / static_cast<double>(batch.indices.size());
  const std::size_t net_params = policy.net.param_count();
  std::span<double> grad_log_std = grad_policy.subspan(net_params);

  double total_loss = 0.0;
  double sum_ratio = 0.0;
  double sum_clipped = 0.0;
  double sum_entropy = 0.0;
  double sum_vloss = 0.0;
  double sum_piloss = 0.0;

  Mlp::Cache cache;
  Mlp::Cache vcache;
  std::vector<double> dout(policy.net.output_size());
  std::vector<double> dmean(policy.net.output_size());

  for (const std::size_t i : batch.indices) {
    const auto obs = buf.obs_at(i);
    const auto action = buf.action_at(i);
    const double adv = batch.advantages[i];
    const double ret = batch.returns[i];

    const std::vector<double> out = policy.net.forward(obs, cache);
    std::fill(dout.begin(), dout.end(), 0.0);

    double logp_new;
    double entropy;
    if (const auto* g = std::get_if<GaussianHead>(&policy.head)) {
      std::fill(dmean.begin(), dmean.end(), 0.0);
      std::vector<double> dls(g->dim(), 0.0);
      logp_new = g->log_prob_grad(out, action, dmean, dls);
      entropy = g->entropy();
      const double ratio = std::exp(logp_new - buf.logp[i]);
      const double unclipped = ratio * adv;
      const double clipped =
          std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon) *
          adv;
      const double surr = std::min(unclipped, clipped);
      // d(-surr)/dlogp: -ratio*adv on the unclipped branch, 0 when saturated.
      const double dloss_dlogp = unclipped <= clipped ? -ratio * adv : 0.0;
      for (int d = 0; d < g->dim(); ++d)
        dout[d] += dloss_dlogp * dmean[d] * inv_n;
      for (int d = 0; d < g->dim(); ++d)
        grad_log_std[d] += dloss_dlogp * dls[d] * inv_n;
      // entropy bonus: loss += -entropy_coef * H, H depends on log_std only
      std::vector<double> dh(g->dim(), 0.0);
      g->entropy_grad(dh, 1.0);
      for (int d = 0; d < g->dim(); ++d)
        grad_log_std[d] += -config.entropy_coef * dh[d] * inv_n;

      sum_ratio += ratio;
      sum_clipped += (unclipped > clipped) ? 1.0 : 0.0;
      sum_piloss += -surr;
      total_loss += -surr - config.entropy_coef * entropy;
    } else {
      const auto& c = std::get<CategoricalHead>(policy.head);
      const int k = static_cast<int>(action[0]);
      std::vector<double> dlogits(c.n, 0.0);
      logp_new = c.log_prob_grad(out, k, dlogits);
      entropy = c.entropy(out);
      const double ratio = std::exp(logp_new - buf.logp[i]);
      const double unclipped = ratio * adv;
      const double clipped =
          std::clamp(ratio, 1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon) *
          adv;
      const double surr = std::min(unclipped, clipped);
      const double dloss_dlogp = unclipped <= clipped ? -ratio * adv : 0.0;
      for (int d = 0; d < c.n; ++d) dout[d] += dloss_dlogp * dlogits[d] * inv_n;
      std::vector<double> dh(c.n, 0.0);
      c.entropy_grad(out, dh, 1.0);
      for (int d = 0; d < c.n; ++d)
        dout[d] += -config.entropy_coef * dh[d] * inv_n;

      sum_ratio += ratio;
      sum_clipped += (unclipped > clipped) ? 1.0 : 0.0;
      sum_piloss += -surr;
      total_loss += -surr - config.entropy_coef * entropy;
    }
    sum_entropy += entropy;
    policy.net.backward(cache, dout, grad_policy.subspan(0, net_params));

    // value regression on returns
    const std::vector<double> v = value_net.forward(obs, vcache);
    const double verr = v[0] - ret;
    sum_vloss += verr * verr;
    total_loss += config.value_coef * verr * verr;
    const double dv = config.value_coef * 2.0 * verr * inv_n;
    value_net.backward(vcache, std::span<const double>(&dv, 1), grad_value);
  }

  const double n = static_cast<double>(batch.indices.size());
  if (diag != nullptr) {
    diag->mean_ratio = sum_ratio / n;
    diag->clip_fraction = sum_clipped / n;
    diag->policy_loss = sum_piloss / n;
    diag->value_loss = sum_vloss / n;
    diag->entropy = sum_entropy / n;
  }
  return total_loss / n;
}

namespace {

// Clipped per network: a large value-regression error early in training
// must not scale the policy gradient toward zero.
void clip_grad_norm(std::span<double> g, double max_norm) {
  double sq = 0.0;
  for (const double v : g) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& v : g) v *= scale;
  }
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

PpoDiagnostics ppo_update(Policy& policy, Mlp& value_net, RolloutBuffer& buffer,
                          const PpoConfig& config, double bootstrap_value,
                          std::mt19937_64& rng) {
  PpoDiagnostics diag;
  const std::size_t n = buffer.size();
  if (n == 0) return diag;

  PpoBatch batch;
  batch.buffer = &buffer;
  gae(buffer.rewards, buffer.values, buffer.dones, bootstrap_value,
      config.discount, config.gae_lambda, batch.advantages, batch.returns);

  // normalize advantages to zero mean / unit variance within the batch
  double mean = std::accumulate(batch.advantages.begin(),
                                batch.advantages.end(), 0.0) /
                static_cast<double>(n);
  double var = 0.0;
  for (const double a : batch.advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  const double std_dev = std::sqrt(var) + 1e-8;
  for (double& a : batch.advantages) a = (a - mean) / std_dev;

  // snapshot for NonFiniteLoss rollback
  std::vector<double> policy_backup(policy.param_count());
  policy.get_params(policy_backup);
  const std::vector<double> value_backup(value_net.params().begin(),
                                         value_net.params().end());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad_policy(policy.param_count());
  std::vector<double> grad_value(value_net.param_count());
  std::vector<double> policy_params(policy.param_count());

  double sum_ratio = 0.0, sum_clip = 0.0, sum_pi = 0.0, sum_v = 0.0,
         sum_h = 0.0;
  int minibatches = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n;
         start += static_cast<std::size_t>(config.minibatch)) {
      const std::size_t end =
          std::min(n, start + static_cast<std::size_t>(config.minibatch));
      batch.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                           order.begin() + static_cast<std::ptrdiff_t>(end));
      PpoDiagnostics mb;
      const double loss = ppo_loss_and_grad(policy, value_net, batch, config,
                                            grad_policy, grad_value, &mb);
      if (!std::isfinite(loss) || !all_finite(grad_policy) ||
          !all_finite(grad_value)) {
        policy.set_params(policy_backup);
        std::copy(value_backup.begin(), value_backup.end(),
                  value_net.params().begin());
        diag.aborted = true;
        buffer.clear();
        return diag;
      }
      clip_grad_norm(grad_policy, config.max_grad_norm);
      clip_grad_norm(grad_value, config.max_grad_norm);

      policy.get_params(policy_params);
      for (std::size_t i = 0; i < policy_params.size(); ++i)
        policy_params[i] -= config.learning_rate * grad_policy[i];
      policy.set_params(policy_params);
      auto vp = value_net.params();
      for (std::size_t i = 0; i < vp.size(); ++i)
        vp[i] -= config.learning_rate * grad_value[i];

      sum_ratio += mb.mean_ratio;
      sum_clip += mb.clip_fraction;
      sum_pi += mb.policy_loss;
      sum_v += mb.value_loss;
      sum_h += mb.entropy;
      ++minibatches;
    }
  }

  if (minibatches > 0) {
    diag.mean_ratio = sum_ratio / minibatches;
    diag.clip_fraction = sum_clip / minibatches;
    diag.policy_loss = sum_pi / minibatches;
    diag.value_loss = sum_v / minibatches;
    diag.entropy = sum_h / minibatches;
  }
  diag.updates = minibatches;
  buffer.clear();
  return diag;
}

}  // namespace marketsim::rl
