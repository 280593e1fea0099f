#pragma once

// The neural transition model: token representations (word embedding +
// char CNN), a BiLSTM over the sentence, stack/lambda/action-history
// encoders feeding the masked action classifier, the pointer for term end
// indices and the role typer. With syntax_enhanced on, POS features and a
// boundary differential enter the pointer, and the unified dependency-
// opinion graph is re-encoded with RCGA whenever a pair is detected; its
// pooled vector extends the state and a triaffine head types the roles.

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "orl/core.hpp"
#include "orl/data.hpp"
#include "orl/encoders.hpp"
#include "orl/scorers.hpp"
#include "orl/transition.hpp"
#include "orl/udog.hpp"

namespace orl {

struct Vocab {
  std::vector<std::string> words;  // id 0 is the trained UNK row
  std::vector<std::string> chars;  // id 0 padding, id 1 unknown
  std::vector<std::string> pos_tags;
  std::vector<std::string> dep_labels;
  std::unordered_map<std::string, int> word_ids;
  std::unordered_map<std::string, int> char_ids;
  std::unordered_map<std::string, int> pos_ids;

  static Vocab build(const std::vector<Sentence>& sentences,
                     const CorpusHeader& header);
  void finish();  // rebuilds the lookup maps

  int word_id(const std::string& w) const;
  int char_id(const std::string& c) const;
  int pos_id(const std::string& p) const;  // throws on unknown tag

  nlohmann::ordered_json to_json() const;
  static Vocab from_json(const nlohmann::json& j);
};

struct ModelConfig {
  int word_dim = 100;
  int char_dim = 50;
  std::vector<int> char_filters = {17, 17, 16};  // kernel widths 3, 4, 5
  int enc_hidden = 150;                          // BiLSTM size per direction
  int span_dim = 300;
  int stack_hidden = 300;
  int lambda_hidden = 300;
  int action_dim = 50;
  int action_hidden = 100;
  int pointer_dim = 150;
  int mlp_hidden = 150;
  int len_dim = 50;
  int len_buckets = 10;
  int pos_dim = 50;
  int label_dim = 50;
  int rcga_layers = 2;
  double leaky_slope = 0.01;
  bool syntax_enhanced = false;
  // re-encode the graph once per SHIFT instead of after every pair
  bool rcga_per_shift = false;

  int token_dim() const { return 2 * enc_hidden; }

  static ModelConfig tiny();  // small dims for tests and gradient checks
  nlohmann::ordered_json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

struct ParseOutput {
  std::vector<OpinionRolePair> pairs;
  std::vector<Action> actions;
};

struct StepLoss {
  double action = 0;
  double pointer = 0;
  double role = 0;
};

struct LossParts {
  double action = 0;
  double pointer = 0;
  double role = 0;
  double total() const { return action + pointer + role; }
};

class Model {
 public:
  Model(ModelConfig cfg, Vocab vocab, uint64_t seed);

  void save(const std::string& path) const;
  static Model load(const std::string& path);

  // greedy decoding through the transition executor
  ParseOutput parse(const Sentence& s) const;

  // teacher-forced loss; parts (if given) accumulates the three components
  nn::Expr sentence_loss(nn::Tape& tape, const Sentence& s,
                         const std::vector<Action>& gold, LossParts* parts) const;
  std::vector<StepLoss> step_losses(const Sentence& s,
                                    const std::vector<Action>& gold) const;
  // (eta/2) * ||theta||^2 over every parameter
  nn::Expr l2_term(nn::Tape& tape, double eta) const;

  const ModelConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  nn::ParamStore& params() const { return store_; }

 private:
  Model(ModelConfig cfg, Vocab vocab, nn::ParamStore&& store, bool strict);
  void wire(bool strict);
  int label_slot(const std::string& label, bool incoming) const;

  ModelConfig cfg_;
  Vocab vocab_;
  mutable nn::ParamStore store_;
  std::unordered_map<std::string, int> label_ids_;

  struct Wiring {
    nn::Param* word_emb = nullptr;
    nn::CharCnn char_cnn;
    nn::BiLstm encoder;
    nn::Param* beta_empty = nullptr;
    nn::SpanHead span;
    nn::LstmCell lambda_cell, stack_o_cell, stack_r_cell, action_cell;
    nn::Param* lambda_empty = nullptr;
    nn::Param* stack_o_empty = nullptr;
    nn::Param* stack_r_empty = nullptr;
    nn::Param* action_empty = nullptr;
    nn::Param* action_emb = nullptr;
    nn::ActionMlp mlp;
    nn::PointerHead pointer;
    nn::PosPointerHead pos_pointer;
    nn::Param* pos_emb = nullptr;  // tags + left/right sentinel columns
    nn::BiaffineHead biaffine;
    nn::RcgaHead rcga;
    nn::TriaffineHead triaffine;
  } w_;

  friend struct ModelWalker;
};

inline constexpr const char* kCheckpointFormat = "orl-checkpoint";

}  // namespace orl
