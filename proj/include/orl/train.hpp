#pragma once

// Teacher-forced training over oracle traces with the composite objective
// (action + pointer + role losses plus L2), Adam updates with global-norm
// clipping, and best-on-dev checkpointing.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orl/eval.hpp"
#include "orl/model.hpp"

namespace orl {

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 30;
  double l2 = 1e-6;  // coefficient of the squared-norm regularizer
  uint64_t seed = 1;
  bool syntax_enhanced = false;
  int batch_size = 1;
  double grad_clip = 5.0;
  // stop once dev exact pair F1 reaches this value; <= 0 disables
  double early_stop_f1 = -1.0;

  nlohmann::ordered_json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochStats {
  int epoch = 0;
  double loss_action = 0;
  double loss_pointer = 0;
  double loss_role = 0;
  double loss_l2 = 0;
  double loss_total = 0;
  double dev_exact_pair_f1 = 0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  double best_dev_f1 = 0;
  std::string checkpoint_path;
  int oracle_skipped_terms = 0;
  int oracle_skipped_pairs = 0;

  nlohmann::ordered_json to_json() const;
};

// Trains in place. dev may be empty, in which case the training set doubles
// as the dev set for checkpoint selection. checkpoint_path may be empty to
// skip writing. progress (if given) is called after every epoch.
TrainReport train(Model& model, const std::vector<Sentence>& train_set,
                  const std::vector<Sentence>& dev_set, const TrainConfig& cfg,
                  const std::string& checkpoint_path,
                  const std::function<void(const EpochStats&)>& progress = {});

// exact pair F1 of greedy parses against gold
double exact_pair_f1(const Model& model, const std::vector<Sentence>& sentences);

}  // namespace orl
