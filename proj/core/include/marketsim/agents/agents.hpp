#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marketsim/agents/mm_math.hpp"
#include "marketsim/agents/observation.hpp"
#include "marketsim/exch/exchange.hpp"
#include "marketsim/rl/checkpoint.hpp"
#include "marketsim/rl/ppo.hpp"

namespace marketsim::agents {

struct StepContext {
  Step step = 0;
  const std::optional<lob::DepthSnapshot>* snapshot = nullptr;
  double mid_ticks = 0.0;  // carry-forward when the book is one-sided
  bool mid_defined = false;
  exch::Exchange* exchange = nullptr;
  const std::map<AgentId, double>* mm_provision = nullptr;
  bool training = false;
};

struct PostStepContext {
  Step step = 0;
  double mid_ticks = 0.0;  // post-match
  bool mid_defined = false;
  std::span<const exch::TradeRecord> trades;
  exch::Exchange* exchange = nullptr;
  const std::map<AgentId, double>* mm_provision = nullptr;
};

struct StepRecord {
  bool acted = false;
  std::uint64_t obs_hash = 0;
  std::vector<double> action;  // mapped action (MM) or class index (LT)
  double reward = 0.0;
};

struct TrainingEvent {
  Step step = 0;
  rl::PpoDiagnostics diag;
};

class Agent {
 public:
  virtual ~Agent() = default;

  AgentId id() const { return id_; }
  const std::string& name() const { return name_; }

  virtual void act(const StepContext& ctx) = 0;
  virtual void post_step(const PostStepContext& ctx) {}
  virtual bool is_rl() const { return false; }
  virtual bool is_market_maker() const { return false; }

  // Per-step record for the event log; reset each step by the harness.
  StepRecord& record() { return record_; }
  std::vector<TrainingEvent>& training_events() { return training_events_; }

  virtual rl::AgentNets* nets() { return nullptr; }

 protected:
  Agent(AgentId id, std::string name) : id_(id), name_(std::move(name)) {}

  AgentId id_;
  std::string name_;
  StepRecord record_;
  std::vector<TrainingEvent> training_events_;
};

// Shared PPO bookkeeping for the two RL agent classes: a pending
// transition opened in act() receives its reward in post_step(); the
// update fires in act() when the buffer is full, bootstrapping with the
// value of the current observation.
class RlAgentBase : public Agent {
 public:
  bool is_rl() const override { return true; }
  rl::AgentNets* nets() override { return &nets_; }
  const rl::PpoConfig& ppo_config() const { return ppo_; }
  void load_nets(rl::AgentNets nets) { nets_ = std::move(nets); }

 protected:
  RlAgentBase(AgentId id, std::string name, int obs_dim, int act_dim,
              rl::PpoConfig ppo, std::uint64_t seed);

  void maybe_update(std::span<const double> current_obs, Step step,
                    bool training);
  void open_transition(std::vector<double> obs, std::vector<double> action,
                       double logp, double value);
  void close_transition(double reward);
  void track_pnl(const PostStepContext& ctx, double& d_pnl,
                 double& d_pnl_inventory);

  rl::AgentNets nets_;
  rl::PpoConfig ppo_;
  rl::RolloutBuffer buffer_;
  std::mt19937_64 update_rng_;

  bool has_pending_ = false;
  std::vector<double> pending_obs_;
  std::vector<double> pending_action_;
  double pending_logp_ = 0.0;
  double pending_value_ = 0.0;

  bool pnl_initialized_ = false;
  double last_pnl_ = 0.0;
  double last_mid_ticks_ = 0.0;
  Shares last_inventory_ = 0;

 public:
  // Cumulative mark-to-mid decomposition, in dollars.
  double cum_pnl_inventory = 0.0;
  double cum_pnl_spread = 0.0;
};

class MarketMaker : public RlAgentBase {
 public:
  MarketMaker(AgentId id, MmParams params, rl::PpoConfig ppo, ObsScales scales,
              std::uint64_t seed);

  void act(const StepContext& ctx) override;
  void post_step(const PostStepContext& ctx) override;
  bool is_market_maker() const override { return true; }

  const MmParams& params() const { return params_; }

 private:
  MmParams params_;
  ObsScales scales_;
  std::deque<double> mid_history_;
  OrderId resting_bid_ = 0;
  OrderId resting_ask_ = 0;
};

class LiquidityTaker : public RlAgentBase {
 public:
  LiquidityTaker(AgentId id, LtParams params, rl::PpoConfig ppo,
                 ObsScales scales, std::uint64_t seed,
                 LtRewardMode mode = LtRewardMode::DeviationChange);

  void act(const StepContext& ctx) override;
  void post_step(const PostStepContext& ctx) override;

  LtParams& params() { return params_; }  // informed schedule updates targets
  // Executed-order counts over the trailing window, recomputable from the
  // trade tape.
  int window_buys() const;
  int window_sells() const;

 private:
  LtParams params_;
  ObsScales scales_;
  LtRewardMode mode_;
  std::deque<double> mid_history_;
  std::deque<std::pair<bool, bool>> exec_window_;  // (buy, sell) per step
  OrderId pending_order_ = 0;
  Side pending_side_ = Side::Bid;
  double dev_buy_prev_ = 0.0;
  double dev_sell_prev_ = 0.0;
};

struct ZiParams {
  double p_market = 0.1;
  double p_limit = 0.6;
  double p_cancel = 0.3;
  Ticks window_ticks = 10;
  Shares order_lots = 1;
  // Limit-price reference: the prevailing book (quotes chase the market)
  // or a fixed fundamental (quotes revert to the initial price).
  enum class Anchor { Book, Fundamental };
  Anchor anchor = Anchor::Book;
};

class ZeroIntelligence : public Agent {
 public:
  ZeroIntelligence(AgentId id, ZiParams params, std::uint64_t seed,
                   Ticks fallback_price_ticks);

  void act(const StepContext& ctx) override;

 private:
  ZiParams params_;
  std::mt19937_64 rng_;
  Ticks fallback_ticks_;     // last seen mid, for one-sided or empty books
  Ticks fundamental_ticks_;  // fixed reference for Anchor::Fundamental
};

struct FlashSaleSchedule {
  Step start_step = 0;
  Step active_steps = 5;
  Step idle_steps = 400;
  int n_events = 0;
  Shares lots_per_order = 300;

  // Nonzero while a flash event is active at `step`.
  bool active_at(Step step) const;
  std::vector<Step> event_starts() const;
};

class FlashSaleAgent : public Agent {
 public:
  FlashSaleAgent(AgentId id, FlashSaleSchedule schedule);

  void act(const StepContext& ctx) override;
  const FlashSaleSchedule& schedule() const { return schedule_; }

 private:
  FlashSaleSchedule schedule_;
};

struct InformedSchedule {
  Step phase_steps = 10000;
  // Buy/sell target pairs per phase; the last phase holds once exhausted.
  std::vector<std::pair<double, double>> phases = {
      {0.3, 0.4}, {0.4, 0.35}, {0.4, 0.4}, {0.4, 0.3}};

  std::pair<double, double> fractions_at(Step step) const;
};

}  // namespace marketsim::agents
