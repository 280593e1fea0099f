#include "orl/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace orl {

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["l2"] = l2;
  j["seed"] = seed;
  j["syntax_enhanced"] = syntax_enhanced;
  j["batch_size"] = batch_size;
  j["grad_clip"] = grad_clip;
  j["early_stop_f1"] = early_stop_f1;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.l2 = j.value("l2", c.l2);
  c.seed = j.value("seed", c.seed);
  c.syntax_enhanced = j.value("syntax_enhanced", c.syntax_enhanced);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.early_stop_f1 = j.value("early_stop_f1", c.early_stop_f1);
  return c;
}

nlohmann::ordered_json TrainReport::to_json() const {
  nlohmann::ordered_json j;
  auto es = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    nlohmann::ordered_json ej;
    ej["epoch"] = e.epoch;
    ej["loss_action"] = e.loss_action;
    ej["loss_pointer"] = e.loss_pointer;
    ej["loss_role"] = e.loss_role;
    ej["loss_l2"] = e.loss_l2;
    ej["loss_total"] = e.loss_total;
    ej["dev_exact_pair_f1"] = e.dev_exact_pair_f1;
    es.push_back(std::move(ej));
  }
  j["epochs"] = std::move(es);
  j["best_epoch"] = best_epoch;
  j["best_dev_f1"] = best_dev_f1;
  j["checkpoint"] = checkpoint_path;
  j["oracle_skipped_terms"] = oracle_skipped_terms;
  j["oracle_skipped_pairs"] = oracle_skipped_pairs;
  return j;
}

double exact_pair_f1(const Model& model, const std::vector<Sentence>& sentences) {
  std::vector<std::vector<OpinionRolePair>> pred, gold;
  for (const auto& s : sentences) {
    pred.push_back(model.parse(s).pairs);
    gold.push_back(s.gold);
  }
  return evaluate(pred, gold).at(PredObject::pairs, MetricKind::exact).f1;
}

TrainReport train(Model& model, const std::vector<Sentence>& train_set,
                  const std::vector<Sentence>& dev_set, const TrainConfig& cfg,
                  const std::string& checkpoint_path,
                  const std::function<void(const EpochStats&)>& progress) {
  if (cfg.epochs <= 0 || cfg.learning_rate <= 0)
    throw Error("Internal", "epochs and learning rate must be positive");
  if (cfg.l2 < 0) throw Error("Internal", "l2 coefficient must be non-negative");

  TrainReport report;
  std::vector<OracleTrace> traces;
  traces.reserve(train_set.size());
  for (const auto& s : train_set) {
    require_valid(s);
    traces.push_back(oracle(s));
    report.oracle_skipped_terms += traces.back().notes.skipped_terms;
    report.oracle_skipped_pairs += traces.back().notes.skipped_pairs;
  }

  const std::vector<Sentence>& dev = dev_set.empty() ? train_set : dev_set;
  nn::AdamTrainer trainer;
  trainer.learning_rate = cfg.learning_rate;
  trainer.clip = cfg.grad_clip;

  std::vector<int> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ull + epoch));
    std::shuffle(order.begin(), order.end(), rng);

    EpochStats stats;
    stats.epoch = epoch;
    for (size_t at = 0; at < order.size();) {
      nn::Tape tape;
      std::vector<nn::Expr> losses;
      LossParts parts;
      for (int b = 0; b < cfg.batch_size && at < order.size(); ++b, ++at) {
        const int si = order[at];
        losses.push_back(
            model.sentence_loss(tape, train_set[si], traces[si].actions, &parts));
      }
      if (cfg.l2 > 0) {
        nn::Expr reg = model.l2_term(tape, cfg.l2);
        stats.loss_l2 += reg.scalar();
        losses.push_back(reg);
      }
      nn::Expr total = nn::sum(losses);
      const double value = total.scalar();
      if (!std::isfinite(value))
        throw Error("DivergedLoss", "non-finite loss at epoch " +
                                        std::to_string(epoch) + ", batch ending at " +
                                        std::to_string(at));
      stats.loss_action += parts.action;
      stats.loss_pointer += parts.pointer;
      stats.loss_role += parts.role;
      stats.loss_total += value;
      tape.backward(total);
      trainer.step(model.params());
    }

    stats.dev_exact_pair_f1 = exact_pair_f1(model, dev);
    if (report.best_epoch < 0 || stats.dev_exact_pair_f1 > report.best_dev_f1) {
      report.best_epoch = epoch;
      report.best_dev_f1 = stats.dev_exact_pair_f1;
      if (!checkpoint_path.empty()) {
        model.save(checkpoint_path);
        report.checkpoint_path = checkpoint_path;
      }
    }
    report.epochs.push_back(stats);
    if (progress) progress(stats);
    if (cfg.early_stop_f1 > 0 && stats.dev_exact_pair_f1 >= cfg.early_stop_f1) break;
  }
  return report;
}

}  // namespace orl
