#pragma once

// Named trainable parameters with deterministic seeded initialization,
// an Adam trainer with global-norm clipping, and JSON (de)serialization
// for checkpoints.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orl/graph.hpp"

namespace orl::nn {

struct Param {
  std::string name;
  Mat value;
  Mat grad;
  // Adam state, allocated on first update
  Mat adam_m, adam_v;

  int rows() const { return static_cast<int>(value.rows()); }
  int cols() const { return static_cast<int>(value.cols()); }
};

enum class Init { zeros, uniform, glorot };

class ParamStore {
 public:
  explicit ParamStore(uint64_t seed) : seed_(seed) {}
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  // Gets the parameter, creating and initializing it if absent. Each
  // parameter's init stream is derived from (seed, name), so creation
  // order does not matter. Existing parameters are shape-checked.
  Param& ensure(const std::string& name, int rows, int cols, Init init);
  // Like ensure but the parameter must already exist (checkpoint loads).
  Param& require(const std::string& name, int rows, int cols);

  bool has(const std::string& name) const { return params_.contains(name); }
  Param& get(const std::string& name);
  std::vector<Param*> all();  // name order
  std::vector<std::string> names() const;
  void zero_grads();
  uint64_t seed() const { return seed_; }

  nlohmann::ordered_json to_json() const;
  static ParamStore from_json(const nlohmann::json& j);

 private:
  uint64_t seed_ = 0;
  std::map<std::string, std::unique_ptr<Param>> params_;
};

struct AdamTrainer {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip = 5.0;  // global gradient norm; <= 0 disables
  long steps = 0;

  void step(ParamStore& store);
};

}  // namespace orl::nn
