#include "orl/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace orl {

using nn::Expr;
using nn::Tape;
using namespace nn;

Vocab Vocab::build(const std::vector<Sentence>& sentences,
                   const CorpusHeader& header) {
  Vocab v;
  std::set<std::string> word_set, char_set;
  for (const auto& s : sentences)
    for (const auto& t : s.tokens) {
      word_set.insert(t.surface);
      for (const auto& c : t.chars) char_set.insert(c);
    }
  v.words.push_back("<unk>");
  v.words.insert(v.words.end(), word_set.begin(), word_set.end());
  v.chars.push_back("<pad>");
  v.chars.push_back("<unk>");
  v.chars.insert(v.chars.end(), char_set.begin(), char_set.end());
  v.pos_tags = header.pos_tags;
  v.dep_labels = header.dep_labels;
  v.finish();
  return v;
}

void Vocab::finish() {
  word_ids.clear();
  char_ids.clear();
  pos_ids.clear();
  for (size_t i = 0; i < words.size(); ++i) word_ids.emplace(words[i], i);
  for (size_t i = 0; i < chars.size(); ++i) char_ids.emplace(chars[i], i);
  for (size_t i = 0; i < pos_tags.size(); ++i) pos_ids.emplace(pos_tags[i], i);
}

int Vocab::word_id(const std::string& w) const {
  auto it = word_ids.find(w);
  return it == word_ids.end() ? 0 : it->second;
}

int Vocab::char_id(const std::string& c) const {
  auto it = char_ids.find(c);
  return it == char_ids.end() ? 1 : it->second;
}

int Vocab::pos_id(const std::string& p) const {
  auto it = pos_ids.find(p);
  if (it == pos_ids.end())
    throw Error("ParseError", "POS tag '" + p + "' not in the model tagset");
  return it->second;
}

nlohmann::ordered_json Vocab::to_json() const {
  nlohmann::ordered_json j;
  j["words"] = words;
  j["chars"] = chars;
  j["pos_tags"] = pos_tags;
  j["dep_labels"] = dep_labels;
  return j;
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  Vocab v;
  v.words = j.at("words").get<std::vector<std::string>>();
  v.chars = j.at("chars").get<std::vector<std::string>>();
  v.pos_tags = j.at("pos_tags").get<std::vector<std::string>>();
  v.dep_labels = j.at("dep_labels").get<std::vector<std::string>>();
  v.finish();
  return v;
}

ModelConfig ModelConfig::tiny() {
  ModelConfig c;
  c.word_dim = 12;
  c.char_dim = 8;
  c.char_filters = {3, 3, 2};
  c.enc_hidden = 7;
  c.span_dim = 10;
  c.stack_hidden = 9;
  c.lambda_hidden = 9;
  c.action_dim = 5;
  c.action_hidden = 7;
  c.pointer_dim = 8;
  c.mlp_hidden = 11;
  c.len_dim = 5;
  c.len_buckets = 4;
  c.pos_dim = 5;
  c.label_dim = 6;
  return c;
}

nlohmann::ordered_json ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["word_dim"] = word_dim;
  j["char_dim"] = char_dim;
  j["char_filters"] = char_filters;
  j["enc_hidden"] = enc_hidden;
  j["span_dim"] = span_dim;
  j["stack_hidden"] = stack_hidden;
  j["lambda_hidden"] = lambda_hidden;
  j["action_dim"] = action_dim;
  j["action_hidden"] = action_hidden;
  j["pointer_dim"] = pointer_dim;
  j["mlp_hidden"] = mlp_hidden;
  j["len_dim"] = len_dim;
  j["len_buckets"] = len_buckets;
  j["pos_dim"] = pos_dim;
  j["label_dim"] = label_dim;
  j["rcga_layers"] = rcga_layers;
  j["leaky_slope"] = leaky_slope;
  j["syntax_enhanced"] = syntax_enhanced;
  j["rcga_per_shift"] = rcga_per_shift;
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.word_dim = j.at("word_dim").get<int>();
  c.char_dim = j.at("char_dim").get<int>();
  c.char_filters = j.at("char_filters").get<std::vector<int>>();
  c.enc_hidden = j.at("enc_hidden").get<int>();
  c.span_dim = j.at("span_dim").get<int>();
  c.stack_hidden = j.at("stack_hidden").get<int>();
  c.lambda_hidden = j.at("lambda_hidden").get<int>();
  c.action_dim = j.at("action_dim").get<int>();
  c.action_hidden = j.at("action_hidden").get<int>();
  c.pointer_dim = j.at("pointer_dim").get<int>();
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.len_dim = j.at("len_dim").get<int>();
  c.len_buckets = j.at("len_buckets").get<int>();
  c.pos_dim = j.at("pos_dim").get<int>();
  c.label_dim = j.at("label_dim").get<int>();
  c.rcga_layers = j.at("rcga_layers").get<int>();
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.syntax_enhanced = j.at("syntax_enhanced").get<bool>();
  c.rcga_per_shift = j.at("rcga_per_shift").get<bool>();
  return c;
}

Model::Model(ModelConfig cfg, Vocab vocab, uint64_t seed)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), store_(seed) {
  wire(/*strict=*/false);
}

Model::Model(ModelConfig cfg, Vocab vocab, nn::ParamStore&& store, bool strict)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), store_(std::move(store)) {
  wire(strict);
}

void Model::wire(bool strict) {
  using nn::Init;
  auto emb = [&](const std::string& name, int rows, int cols) -> nn::Param& {
    return strict ? store_.require(name, rows, cols)
                  : store_.ensure(name, rows, cols, Init::uniform);
  };
  const int n_words = static_cast<int>(vocab_.words.size());
  const int n_chars = static_cast<int>(vocab_.chars.size());
  const int n_tags = static_cast<int>(vocab_.pos_tags.size());

  w_.word_emb = &emb("emb.word", cfg_.word_dim, n_words);
  w_.char_cnn = nn::CharCnn::wire(store_, "char_cnn", cfg_.char_dim, n_chars,
                                  cfg_.char_filters, strict);
  const int tok_in = cfg_.word_dim + w_.char_cnn.out_dim;
  w_.encoder = nn::BiLstm::wire(store_, "enc", tok_in, cfg_.enc_hidden, strict);
  const int tok = cfg_.token_dim();

  w_.beta_empty = &emb("state.beta_empty", tok, 1);
  w_.span = nn::SpanHead::wire(store_, "span", tok, cfg_.len_dim,
                               cfg_.len_buckets, cfg_.span_dim, strict);
  w_.lambda_cell =
      nn::LstmCell::wire(store_, "lambda", cfg_.span_dim, cfg_.lambda_hidden, strict);
  w_.lambda_empty = &emb("state.lambda_empty", cfg_.lambda_hidden, 1);
  w_.stack_o_cell =
      nn::LstmCell::wire(store_, "stack_o", cfg_.span_dim, cfg_.stack_hidden, strict);
  w_.stack_o_empty = &emb("state.stack_o_empty", cfg_.stack_hidden, 1);
  w_.stack_r_cell =
      nn::LstmCell::wire(store_, "stack_r", cfg_.span_dim, cfg_.stack_hidden, strict);
  w_.stack_r_empty = &emb("state.stack_r_empty", cfg_.stack_hidden, 1);
  w_.action_emb = &emb("emb.action", cfg_.action_dim, kNumActionTags);
  w_.action_cell =
      nn::LstmCell::wire(store_, "act", cfg_.action_dim, cfg_.action_hidden, strict);
  w_.action_empty = &emb("state.action_empty", cfg_.action_hidden, 1);

  int state_dim =
      cfg_.lambda_hidden + 2 * cfg_.stack_hidden + cfg_.action_hidden + tok;
  if (cfg_.syntax_enhanced) state_dim += tok;
  w_.mlp = nn::ActionMlp::wire(store_, "action_mlp", state_dim, cfg_.mlp_hidden,
                               kNumActionTags, strict);

  label_ids_.clear();
  for (const auto& l : vocab_.dep_labels)
    label_ids_.emplace(l, static_cast<int>(label_ids_.size()));
  for (const char* l : {"hd", "tg", "opn", "role", "self"})
    label_ids_.emplace(l, static_cast<int>(label_ids_.size()));

  if (cfg_.syntax_enhanced) {
    w_.pos_emb = &emb("emb.pos", cfg_.pos_dim, n_tags + 2);  // last 2: sentinels
    w_.pos_pointer = nn::PosPointerHead::wire(store_, "pos_ptr", tok, cfg_.pos_dim,
                                              cfg_.pointer_dim, strict);
    w_.rcga = nn::RcgaHead::wire(store_, "rcga", tok, cfg_.label_dim,
                                 static_cast<int>(label_ids_.size()) * 2,
                                 cfg_.rcga_layers, strict);
    w_.rcga.leaky_slope = cfg_.leaky_slope;
    w_.triaffine =
        nn::TriaffineHead::wire(store_, "role_tri", cfg_.span_dim, tok, strict);
  } else {
    w_.pointer = nn::PointerHead::wire(store_, "ptr", tok, cfg_.pointer_dim, strict);
    w_.biaffine = nn::BiaffineHead::wire(store_, "role_bi", cfg_.span_dim, strict);
  }
}

int Model::label_slot(const std::string& label, bool incoming) const {
  auto it = label_ids_.find(label);
  if (it == label_ids_.end())
    throw Error("Internal", "edge label '" + label + "' has no embedding slot");
  return it->second * 2 + (incoming ? 1 : 0);
}

namespace {

std::vector<int> candidate_ids(const std::set<ActionTag>& valid) {
  std::vector<int> out;
  for (ActionTag t : valid) out.push_back(static_cast<int>(t));
  std::sort(out.begin(), out.end());
  return out;
}

int index_in(const std::vector<int>& candidates, int value) {
  auto it = std::find(candidates.begin(), candidates.end(), value);
  if (it == candidates.end())
    throw Error("Internal", "gold action missing from candidate set");
  return static_cast<int>(it - candidates.begin());
}

}  // namespace

// Mirrors the transition executor step by step, keeping the neural view of
// the state (encoders, current token representations, the opinion graph)
// in sync with the symbolic state.
struct ModelWalker {
  const Model& m;
  Tape& tape;
  const Sentence& sent;
  std::vector<Expr> base_h;  // BiLSTM outputs, fixed per sentence
  std::vector<Expr> h;       // current token reprs (RCGA outputs when enhanced)
  nn::StackEncoder so, sr;
  nn::IncrementalEncoder lam, act;
  std::vector<Expr> sigma_o_reprs, sigma_r_reprs;
  std::vector<Expr> alpha_o_reprs, alpha_r_reprs;
  std::optional<Expr> lambda_repr;
  Udog graph;
  Expr pooled;
  bool graph_dirty = false;

  ModelWalker(const Model& model, Tape& t, const Sentence& s)
      : m(model),
        tape(t),
        sent(s),
        so(t, model.w_.stack_o_cell, *model.w_.stack_o_empty),
        sr(t, model.w_.stack_r_cell, *model.w_.stack_r_empty),
        lam(t, model.w_.lambda_cell, *model.w_.lambda_empty),
        act(t, model.w_.action_cell, *model.w_.action_empty) {
    const int T = sent.size();
    if (T == 0) return;
    std::vector<Expr> xs(T);
    for (int i = 0; i < T; ++i) xs[i] = token_repr(sent.tokens[i]);
    base_h = m.w_.encoder.encode(tape, xs);
    h = base_h;
    if (m.cfg_.syntax_enhanced) {
      graph = build_udog(sent, {});
      refresh_graph();
    }
  }

  Expr token_repr(const Token& t) {
    std::vector<int> char_ids;
    for (const auto& c : t.chars) char_ids.push_back(m.vocab_.char_id(c));
    if (char_ids.empty()) char_ids.push_back(1);
    return concat({tape.lookup(*m.w_.word_emb, m.vocab_.word_id(t.surface)),
                   m.w_.char_cnn.encode(tape, char_ids)});
  }

  Expr pos_at(int k) {
    const int n_tags = static_cast<int>(m.vocab_.pos_tags.size());
    int col;
    if (k < 0)
      col = n_tags;  // left sentinel
    else if (k >= sent.size())
      col = n_tags + 1;  // right sentinel
    else
      col = m.vocab_.pos_id(sent.tokens[k].pos);
    return tape.lookup(*m.w_.pos_emb, col);
  }

  Expr span_repr(int i, int j) { return m.w_.span.repr(tape, h, i, j); }

  void refresh_graph() {
    h = nn::rcga_encode(
        tape, m.w_.rcga,
        [this](const std::string& l, bool in) { return m.label_slot(l, in); },
        graph, base_h);
    pooled = nn::graph_pool(tape, h);
  }

  Expr state_repr(const TransitionState& st) {
    std::vector<Expr> parts = {
        lam.summary(), so.summary(), sr.summary(), act.summary(),
        st.buffer_empty() ? tape.param(*m.w_.beta_empty) : h[st.buffer_front]};
    if (m.cfg_.syntax_enhanced) parts.push_back(pooled);
    return concat(parts);
  }

  Expr pointer_logits(int start) {
    if (m.cfg_.syntax_enhanced)
      return m.w_.pos_pointer.logits(
          tape, h, [this](int k) { return pos_at(k); }, start);
    return m.w_.pointer.logits(tape, h, start);
  }

  // raw 2-vector of role-type scores for <opinion, role>
  Expr role_scores(const TermSpan& opinion, const TermSpan& role) {
    Expr a_o = span_repr(opinion.start, opinion.end);
    Expr a_r = span_repr(role.start, role.end);
    if (m.cfg_.syntax_enhanced)
      return m.w_.triaffine.scores(tape, a_o, a_r, pooled);
    return m.w_.biaffine.scores(tape, a_o, a_r);
  }

  // the pair an ARC would create in this state
  OpinionRolePair arc_pair(const TransitionState& st, RoleType type) const {
    OpinionRolePair p;
    if (st.lambda->kind == SpanKind::opinion) {
      p.opinion = *st.lambda;
      p.role = st.sigma_r.back();
    } else {
      p.opinion = st.sigma_o.back();
      p.role = *st.lambda;
    }
    p.role_type = type;
    return p;
  }

  void after_action(const TransitionState& before, const Action& a) {
    switch (a.tag) {
      case ActionTag::O_START:
      case ActionTag::R_START: {
        lambda_repr = span_repr(before.buffer_front, *a.end_index);
        lam.push(*lambda_repr);
        break;
      }
      case ActionTag::NO_START:
        break;
      case ActionTag::ARC:
      case ActionTag::NO_ARC: {
        const bool lambda_is_opinion = before.lambda->kind == SpanKind::opinion;
        if (lambda_is_opinion) {
          sr.pop();
          alpha_r_reprs.push_back(sigma_r_reprs.back());
          sigma_r_reprs.pop_back();
        } else {
          so.pop();
          alpha_o_reprs.push_back(sigma_o_reprs.back());
          sigma_o_reprs.pop_back();
        }
        if (a.tag == ActionTag::ARC && m.cfg_.syntax_enhanced) {
          add_pair(graph, arc_pair(before, *a.role_type));
          if (m.cfg_.rcga_per_shift)
            graph_dirty = true;
          else
            refresh_graph();
        }
        break;
      }
      case ActionTag::SHIFT: {
        while (!alpha_o_reprs.empty()) {
          so.push(alpha_o_reprs.back());
          sigma_o_reprs.push_back(alpha_o_reprs.back());
          alpha_o_reprs.pop_back();
        }
        while (!alpha_r_reprs.empty()) {
          sr.push(alpha_r_reprs.back());
          sigma_r_reprs.push_back(alpha_r_reprs.back());
          alpha_r_reprs.pop_back();
        }
        if (before.lambda->kind == SpanKind::opinion) {
          so.push(*lambda_repr);
          sigma_o_reprs.push_back(*lambda_repr);
        } else {
          sr.push(*lambda_repr);
          sigma_r_reprs.push_back(*lambda_repr);
        }
        lam.reset();
        lambda_repr.reset();
        if (graph_dirty) {
          refresh_graph();
          graph_dirty = false;
        }
        break;
      }
    }
    act.push(tape.lookup(*m.w_.action_emb, static_cast<int>(a.tag)));
  }

  Action decide(const TransitionState& st) {
    const auto candidates = candidate_ids(valid_actions(st));
    auto dist = nn::masked_log_softmax(
        tape, m.w_.mlp.logits(tape, state_repr(st)), candidates);
    const auto tag = static_cast<ActionTag>(nn::argmax_candidate(dist));
    switch (tag) {
      case ActionTag::O_START:
      case ActionTag::R_START: {
        const Expr logits = pointer_logits(st.buffer_front);
        const nn::Mat& v = logits.val();
        int best = 0;
        for (int k = 1; k < v.rows(); ++k)
          if (v(k, 0) > v(best, 0)) best = k;
        const int end = st.buffer_front + best;
        return tag == ActionTag::O_START ? Action::start_opinion(end)
                                         : Action::start_role(end);
      }
      case ActionTag::ARC: {
        const auto probe = arc_pair(st, RoleType::holder);
        const Expr scores = role_scores(probe.opinion, probe.role);
        // ties resolve to holder
        const RoleType type = scores.val()(0, 0) >= scores.val()(1, 0)
                                  ? RoleType::holder
                                  : RoleType::target;
        return Action::arc(type);
      }
      case ActionTag::NO_START:
        return Action::no_start();
      case ActionTag::NO_ARC:
        return Action::no_arc();
      case ActionTag::SHIFT:
        return Action::shift();
    }
    throw Error("Internal", "unreachable action tag");
  }
};

ParseOutput Model::parse(const Sentence& s) const {
  require_valid(s);
  Tape tape;
  ModelWalker walker(*this, tape, s);
  auto result = run(s, [&](const TransitionState& st) {
    Action a = walker.decide(st);
    walker.after_action(st, a);
    return a;
  });
  return {std::move(result.pairs), std::move(result.actions)};
}

nn::Expr Model::sentence_loss(Tape& tape, const Sentence& s,
                              const std::vector<Action>& gold,
                              LossParts* parts) const {
  ModelWalker walker(*this, tape, s);
  TransitionState st = initial_state(s);
  std::vector<Expr> terms;
  for (const Action& a : gold) {
    const auto valid = valid_actions(st);
    if (!valid.contains(a.tag))
      throw Error("IllegalGoldAction",
                  std::string(to_string(a.tag)) + " is illegal at step " +
                      std::to_string(st.history.size()));
    StepLoss step;
    const auto candidates = candidate_ids(valid);
    auto dist = nn::masked_log_softmax(
        tape, w_.mlp.logits(tape, walker.state_repr(st)), candidates);
    Expr la = neg(pick(dist.log_probs,
                       index_in(candidates, static_cast<int>(a.tag))));
    step.action = la.scalar();
    terms.push_back(la);

    if (a.tag == ActionTag::O_START || a.tag == ActionTag::R_START) {
      Expr lp = log_softmax(walker.pointer_logits(st.buffer_front));
      Expr l = neg(pick(lp, *a.end_index - st.buffer_front));
      step.pointer = l.scalar();
      terms.push_back(l);
    } else if (a.tag == ActionTag::ARC) {
      const auto pair = walker.arc_pair(st, *a.role_type);
      Expr scores = walker.role_scores(pair.opinion, pair.role);
      const int gold_row = a.role_type == RoleType::holder ? 0 : 1;
      Expr l;
      if (cfg_.syntax_enhanced) {
        // per-class binary cross-entropy against the sigmoid scores
        Expr s_gold = pick(scores, gold_row);
        Expr s_other = pick(scores, 1 - gold_row);
        l = add(softplus(neg(s_gold)), softplus(s_other));
      } else {
        l = neg(pick(log_softmax(scores), gold_row));
      }
      step.role = l.scalar();
      terms.push_back(l);
    }
    walker.after_action(st, a);
    st = apply(st, a);
    if (parts) {
      parts->action += step.action;
      parts->pointer += step.pointer;
      parts->role += step.role;
    }
  }
  if (terms.empty()) return tape.scalar_constant(0.0);
  return sum(terms);
}

std::vector<StepLoss> Model::step_losses(const Sentence& s,
                                         const std::vector<Action>& gold) const {
  // same walk as sentence_loss, recording per-step values
  std::vector<StepLoss> out;
  Tape tape;
  ModelWalker walker(*this, tape, s);
  TransitionState st = initial_state(s);
  for (const Action& a : gold) {
    const auto valid = valid_actions(st);
    if (!valid.contains(a.tag))
      throw Error("IllegalGoldAction",
                  std::string(to_string(a.tag)) + " is illegal at step " +
                      std::to_string(st.history.size()));
    StepLoss step;
    const auto candidates = candidate_ids(valid);
    auto dist = nn::masked_log_softmax(
        tape, w_.mlp.logits(tape, walker.state_repr(st)), candidates);
    step.action =
        -dist.log_probs.val()(index_in(candidates, static_cast<int>(a.tag)), 0);
    if (a.tag == ActionTag::O_START || a.tag == ActionTag::R_START) {
      Expr lp = log_softmax(walker.pointer_logits(st.buffer_front));
      step.pointer = -lp.val()(*a.end_index - st.buffer_front, 0);
    } else if (a.tag == ActionTag::ARC) {
      const auto pair = walker.arc_pair(st, *a.role_type);
      Expr scores = walker.role_scores(pair.opinion, pair.role);
      const int gold_row = a.role_type == RoleType::holder ? 0 : 1;
      if (cfg_.syntax_enhanced) {
        Expr s_gold = pick(scores, gold_row);
        Expr s_other = pick(scores, 1 - gold_row);
        step.role = add(softplus(neg(s_gold)), softplus(s_other)).scalar();
      } else {
        step.role = -log_softmax(scores).val()(gold_row, 0);
      }
    }
    walker.after_action(st, a);
    st = apply(st, a);
    out.push_back(step);
  }
  return out;
}

nn::Expr Model::l2_term(Tape& tape, double eta) const {
  std::vector<Expr> norms;
  for (nn::Param* p : store_.all())
    norms.push_back(squared_norm(tape.param(*p)));
  return scale(sum(norms), eta / 2.0);
}

void Model::save(const std::string& path) const {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = 1;
  j["config"] = cfg_.to_json();
  j["vocab"] = vocab_.to_json();
  j["params"] = store_.to_json();
  std::ofstream out(path);
  if (!out) throw Error("IoError", "cannot write checkpoint " + path);
  out << j.dump();
  out << "\n";
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("CheckpointMismatch", path + ": " + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat || j.value("version", 0) != 1)
    throw Error("CheckpointMismatch", path + " is not a version-1 checkpoint");
  ModelConfig cfg = ModelConfig::from_json(j.at("config"));
  Vocab vocab = Vocab::from_json(j.at("vocab"));
  nn::ParamStore store = nn::ParamStore::from_json(j.at("params"));
  return Model(std::move(cfg), std::move(vocab), std::move(store), /*strict=*/true);
}

}  // namespace orl
