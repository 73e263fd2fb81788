#include "marketsim/rl/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace marketsim::rl {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'C', 'K', 'P', 'T', '1', '\n'};

nlohmann::json config_to_json(const PpoConfig& c) {
  return {{"clip_epsilon", c.clip_epsilon},
          {"discount", c.discount},
          {"gae_lambda", c.gae_lambda},
          {"epochs", c.epochs},
          {"minibatch", c.minibatch},
          {"learning_rate", c.learning_rate},
          {"max_grad_norm", c.max_grad_norm},
          {"value_coef", c.value_coef},
          {"entropy_coef", c.entropy_coef},
          {"buffer_capacity", c.buffer_capacity}};
}

PpoConfig config_from_json(const nlohmann::json& j) {
  PpoConfig c;
  c.clip_epsilon = j.at("clip_epsilon");
  c.discount = j.at("discount");
  c.gae_lambda = j.at("gae_lambda");
  c.epochs = j.at("epochs");
  c.minibatch = j.at("minibatch");
  c.learning_rate = j.at("learning_rate");
  c.max_grad_norm = j.at("max_grad_norm");
  c.value_coef = j.at("value_coef");
  c.entropy_coef = j.at("entropy_coef");
  c.buffer_capacity = j.at("buffer_capacity");
  return c;
}

void write_doubles(std::ofstream& out, std::span<const double> v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::span<double> v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated parameter block");
}

}  // namespace

void save_checkpoint(const std::string& path, const AgentNets& nets,
                     const PpoConfig& config, const nlohmann::json& metadata) {
  nlohmann::json header;
  header["policy_layers"] = nets.policy.net.layer_sizes();
  header["value_layers"] = nets.value.layer_sizes();
  if (const auto* g = std::get_if<GaussianHead>(&nets.policy.head)) {
    header["head"] = {{"kind", "gaussian"}, {"dim", g->dim()}};
  } else {
    header["head"] = {{"kind", "categorical"},
                      {"n", std::get<CategoricalHead>(nets.policy.head).n}};
  }
  header["ppo"] = config_to_json(config);
  std::ostringstream rng_state;
  rng_state << nets.rng;
  header["rng_state"] = rng_state.str();
  header["metadata"] = metadata;

  const std::string header_str = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = header_str.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header_str.data(), static_cast<std::streamsize>(len));
  write_doubles(out, nets.policy.net.params());
  if (const auto* g = std::get_if<GaussianHead>(&nets.policy.head))
    write_doubles(out, g->log_std);
  write_doubles(out, nets.value.params());
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("checkpoint: truncated header");
  const nlohmann::json header = nlohmann::json::parse(header_str);

  LoadedCheckpoint loaded;
  loaded.nets.policy.net = Mlp(header.at("policy_layers").get<std::vector<int>>());
  loaded.nets.value = Mlp(header.at("value_layers").get<std::vector<int>>());
  const auto& head = header.at("head");
  if (head.at("kind") == "gaussian") {
    loaded.nets.policy.head = GaussianHead(head.at("dim").get<int>());
  } else {
    loaded.nets.policy.head = CategoricalHead{head.at("n").get<int>()};
  }
  loaded.config = config_from_json(header.at("ppo"));
  std::istringstream rng_state(header.at("rng_state").get<std::string>());
  rng_state >> loaded.nets.rng;
  loaded.metadata = header.value("metadata", nlohmann::json::object());

  read_doubles(in, loaded.nets.policy.net.params());
  if (auto* g = std::get_if<GaussianHead>(&loaded.nets.policy.head))
    read_doubles(in, g->log_std);
  read_doubles(in, loaded.nets.value.params());
  return loaded;
}

}  // namespace marketsim::rl
