#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "marketsim/lob/order_book.hpp"
#include "marketsim/rl/mlp.hpp"
#include "marketsim/rl/ppo.hpp"

using namespace marketsim;

namespace {

lob::Order random_order(std::mt19937_64& rng, OrderId id, std::uint64_t seq) {
  lob::Order o;
  o.id = id;
  o.agent_id = 1 + static_cast<AgentId>(rng() % 16);
  o.side = (rng() & 1) ? Side::Bid : Side::Ask;
  const bool market = rng() % 10 == 0;
  o.kind = market ? OrderKind::Market : OrderKind::Limit;
  o.price = market ? 0 : 9900 + static_cast<Ticks>(rng() % 201);
  o.quantity = 100 * (1 + static_cast<Shares>(rng() % 10));
  o.remaining = o.quantity;
  o.seq = seq;
  return o;
}

void BM_LobSubmit(benchmark::State& state) {
  std::mt19937_64 rng(42);
  lob::OrderBook book;
  OrderId next_id = 1;
  // warm book so submissions hit populated levels
  for (int i = 0; i < 2000; ++i)
    book.submit(random_order(rng, next_id++, book.next_seq()), 0);
  Step step = 1;
  for (auto _ : state) {
    const auto result =
        book.submit(random_order(rng, next_id++, book.next_seq()), step++);
    benchmark::DoNotOptimize(result.trades.size());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LobSubmit);

void BM_LobSnapshot(benchmark::State& state) {
  std::mt19937_64 rng(42);
  lob::OrderBook book;
  OrderId next_id = 1;
  for (int i = 0; i < 2000; ++i)
    book.submit(random_order(rng, next_id++, book.next_seq()), 0);
  for (auto _ : state) {
    const auto snap = book.snapshot(0);
    benchmark::DoNotOptimize(snap);
  }
}
BENCHMARK(BM_LobSnapshot);

void BM_MlpForward(benchmark::State& state) {
  std::mt19937_64 rng(7);
  rl::Mlp net({32, 64, 64, 3});
  net.init_random(rng);
  std::vector<double> input(32);
  for (double& v : input) v = rl::gauss(rng);
  for (auto _ : state) {
    const auto out = net.forward(input);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_MlpForward);

void BM_MlpBackward(benchmark::State& state) {
  std::mt19937_64 rng(7);
  rl::Mlp net({32, 64, 64, 3});
  net.init_random(rng);
  std::vector<double> input(32), dout(3);
  for (double& v : input) v = rl::gauss(rng);
  for (double& v : dout) v = rl::gauss(rng);
  std::vector<double> grad(net.param_count());
  for (auto _ : state) {
    rl::Mlp::Cache cache;
    net.forward(input, cache);
    std::fill(grad.begin(), grad.end(), 0.0);
    net.backward(cache, dout, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_MlpBackward);

void BM_PpoUpdate(benchmark::State& state) {
  std::mt19937_64 rng(9);
  rl::Policy policy;
  policy.net = rl::Mlp({32, 64, 64, 3});
  policy.head = rl::GaussianHead(3);
  policy.net.init_random(rng);
  rl::Mlp value({32, 64, 64, 1});
  value.init_random(rng);
  rl::PpoConfig config;
  config.buffer_capacity = 256;
  config.minibatch = 64;
  rl::RolloutBuffer buffer(32, 3, 256);
  std::vector<double> obs(32), action(3);
  for (auto _ : state) {
    state.PauseTiming();
    buffer.clear();
    for (int i = 0; i < 256; ++i) {
      for (double& v : obs) v = rl::gauss(rng);
      double logp;
      policy.act(obs, rng, action, logp);
      buffer.push(obs, action, logp, rl::gauss(rng), 0.0, false);
    }
    state.ResumeTiming();
    const auto diag = rl::ppo_update(policy, value, buffer, config, 0.0, rng);
    benchmark::DoNotOptimize(diag.policy_loss);
  }
}
BENCHMARK(BM_PpoUpdate);

}  // namespace

BENCHMARK_MAIN();
