#include "orl/gradcheck.hpp"

#include <cmath>
#include <random>

#include "orl/encoders.hpp"
#include "orl/model.hpp"
#include "orl/scorers.hpp"
#include "orl/train.hpp"
#include "orl/udog.hpp"

namespace orl::nn {

double grad_check(const std::function<Expr(Tape&)>& build,
                  const std::vector<Param*>& params,
                  const GradCheckOptions& opts, std::string* worst_param) {
  for (Param* p : params) p->grad.setZero();
  {
    Tape tape;
    Expr loss = build(tape);
    tape.backward(loss);
  }
  std::vector<Mat> analytic;
  analytic.reserve(params.size());
  for (Param* p : params) analytic.push_back(p->grad);
  if (opts.corrupt != 0.0 && !params.empty() && analytic[0].size() > 0)
    analytic[0](0, 0) += opts.corrupt;

  double max_err = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    Param* p = params[i];
    for (int c = 0; c < p->cols(); ++c)
      for (int r = 0; r < p->rows(); ++r) {
        const double orig = p->value(r, c);
        p->value(r, c) = orig + opts.step;
        Tape t1;
        const double f_plus = build(t1).scalar();
        p->value(r, c) = orig - opts.step;
        Tape t2;
        const double f_minus = build(t2).scalar();
        p->value(r, c) = orig;
        const double numeric = (f_plus - f_minus) / (2.0 * opts.step);
        const double a = analytic[i](r, c);
        const double err =
            std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        if (err > max_err) {
          max_err = err;
          if (worst_param) *worst_param = p->name;
        }
      }
    p->grad.setZero();
  }
  return max_err;
}

namespace {

Mat rand_mat(std::mt19937_64& rng, int r, int c, double range = 0.5) {
  std::uniform_real_distribution<double> dist(-range, range);
  Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = dist(rng);
  return m;
}

// two short annotated sentences driving the composite-loss checks
std::vector<Sentence> fixture_sentences() {
  auto tok = [](int i, const char* w, const char* p) { return Token::make(i, w, p); };
  Sentence s1;
  s1.id = "g1";
  s1.doc = "d1";
  s1.tokens = {tok(0, "ana", "NN"), tok(1, "likes", "VB"), tok(2, "trees", "NN"),
               tok(3, "now", "XX")};
  s1.deps = {{0, 1, "dep"}, {1, kRootHead, "dep"}, {2, 1, "mod"}, {3, 1, "mod"}};
  s1.gold = {make_pair_spans(1, 1, 0, 0, RoleType::holder),
             make_pair_spans(1, 1, 2, 2, RoleType::target)};
  Sentence s2;
  s2.id = "g2";
  s2.doc = "d1";
  s2.tokens = {tok(0, "bo", "NN"), tok(1, "really", "XX"), tok(2, "hates", "VB"),
               tok(3, "rain", "NN")};
  s2.deps = {{0, 2, "dep"}, {1, 2, "mod"}, {2, kRootHead, "dep"}, {3, 2, "mod"}};
  s2.gold = {make_pair_spans(1, 2, 0, 0, RoleType::holder),
             make_pair_spans(1, 2, 3, 3, RoleType::target)};
  return {s1, s2};
}

CorpusHeader fixture_header() {
  CorpusHeader h;
  h.pos_tags = {"NN", "VB", "XX"};
  h.dep_labels = {"dep", "mod"};
  return h;
}

ModelConfig gradcheck_config() {
  ModelConfig c;
  c.word_dim = 6;
  c.char_dim = 4;
  c.char_filters = {2, 2, 2};
  c.enc_hidden = 4;
  c.span_dim = 6;
  c.stack_hidden = 6;
  c.lambda_hidden = 6;
  c.action_dim = 3;
  c.action_hidden = 5;
  c.pointer_dim = 5;
  c.mlp_hidden = 7;
  c.len_dim = 3;
  c.len_buckets = 3;
  c.pos_dim = 3;
  c.label_dim = 4;
  return c;
}

double composite_loss_check(uint64_t seed, bool enhanced,
                            const GradCheckOptions& opts) {
  auto sentences = fixture_sentences();
  Vocab vocab = Vocab::build(sentences, fixture_header());
  ModelConfig cfg = gradcheck_config();
  cfg.syntax_enhanced = enhanced;
  Model model(cfg, vocab, seed);
  std::vector<OracleTrace> traces;
  for (const auto& s : sentences) traces.push_back(oracle(s));

  auto build = [&](Tape& tape) {
    std::vector<Expr> losses;
    for (size_t i = 0; i < sentences.size(); ++i)
      losses.push_back(
          model.sentence_loss(tape, sentences[i], traces[i].actions, nullptr));
    losses.push_back(model.l2_term(tape, 1e-2));
    return sum(losses);
  };
  return grad_check(build, model.params().all(), opts);
}

}  // namespace

std::vector<HeadCheck> gradcheck_heads(uint64_t seed, const GradCheckOptions& opts,
                                       const std::vector<std::string>& only) {
  std::vector<HeadCheck> out;
  std::mt19937_64 rng(seed);
  auto want = [&only](const char* name) {
    if (only.empty()) return true;
    for (const auto& o : only)
      if (o == name) return true;
    return false;
  };

  if (want("char_cnn")) {
    ParamStore store(seed);
    CharCnn cnn = CharCnn::wire(store, "char_cnn", 5, 9, {2, 2, 2}, false);
    const std::vector<int> ids = {2, 7, 1, 4};
    const Mat probe = rand_mat(rng, cnn.out_dim, 1);
    out.push_back({"char_cnn", grad_check(
                                   [&](Tape& t) {
                                     return dot(t.constant(probe),
                                                cnn.encode(t, ids));
                                   },
                                   store.all(), opts)});
  }
  if (want("bi_encoder")) {
    ParamStore store(seed + 1);
    BiLstm enc = BiLstm::wire(store, "enc", 4, 3, false);
    const std::vector<Mat> xs = {rand_mat(rng, 4, 1), rand_mat(rng, 4, 1),
                                 rand_mat(rng, 4, 1)};
    const Mat probe = rand_mat(rng, 6, 1);
    out.push_back({"bi_encoder", grad_check(
                                     [&](Tape& t) {
                                       std::vector<Expr> in;
                                       for (const auto& x : xs)
                                         in.push_back(t.constant(x));
                                       auto hs = enc.encode(t, in);
                                       std::vector<Expr> dots;
                                       for (const auto& h : hs)
                                         dots.push_back(dot(t.constant(probe), h));
                                       return sum(dots);
                                     },
                                     store.all(), opts)});
  }
  if (want("stack_encoder")) {
    ParamStore store(seed + 2);
    LstmCell cell = LstmCell::wire(store, "stack", 4, 5, false);
    Param& empty = store.ensure("stack.empty", 5, 1, Init::uniform);
    const Mat a = rand_mat(rng, 4, 1), b = rand_mat(rng, 4, 1),
              c = rand_mat(rng, 4, 1);
    const Mat probe = rand_mat(rng, 5, 1);
    out.push_back({"stack_encoder", grad_check(
                                        [&](Tape& t) {
                                          StackEncoder se(t, cell, empty);
                                          se.push(t.constant(a));
                                          se.push(t.constant(b));
                                          se.pop();
                                          se.push(t.constant(c));
                                          return dot(t.constant(probe),
                                                     se.summary());
                                        },
                                        store.all(), opts)});
  }
  if (want("action_mlp")) {
    ParamStore store(seed + 3);
    ActionMlp mlp = ActionMlp::wire(store, "action_mlp", 10, 7, 6, false);
    const Mat state = rand_mat(rng, 10, 1);
    out.push_back({"action_mlp", grad_check(
                                     [&](Tape& t) {
                                       auto dist = masked_log_softmax(
                                           t, mlp.logits(t, t.constant(state)),
                                           {0, 2, 5});
                                       return neg(pick(dist.log_probs, 1));
                                     },
                                     store.all(), opts)});
  }
  if (want("pointer")) {
    ParamStore store(seed + 4);
    PointerHead head = PointerHead::wire(store, "ptr", 6, 5, false);
    std::vector<Mat> hs;
    for (int i = 0; i < 5; ++i) hs.push_back(rand_mat(rng, 6, 1));
    out.push_back({"pointer", grad_check(
                                  [&](Tape& t) {
                                    std::vector<Expr> h;
                                    for (const auto& x : hs)
                                      h.push_back(t.constant(x));
                                    Expr lp = log_softmax(head.logits(t, h, 1));
                                    return neg(pick(lp, 2));
                                  },
                                  store.all(), opts)});
  }
  if (want("pointer_pos_bde")) {
    ParamStore store(seed + 5);
    PosPointerHead head = PosPointerHead::wire(store, "pos_ptr", 6, 3, 5, false);
    Param& pos = store.ensure("emb.pos", 3, 6, Init::uniform);  // 4 tags + sentinels
    std::vector<Mat> hs;
    for (int i = 0; i < 4; ++i) hs.push_back(rand_mat(rng, 6, 1));
    const std::vector<int> tags = {0, 3, 1, 2};
    out.push_back(
        {"pointer_pos_bde",
         grad_check(
             [&](Tape& t) {
               std::vector<Expr> h;
               for (const auto& x : hs) h.push_back(t.constant(x));
               auto pos_at = [&](int k) {
                 if (k < 0) return t.lookup(pos, 4);
                 if (k >= static_cast<int>(tags.size())) return t.lookup(pos, 5);
                 return t.lookup(pos, tags[k]);
               };
               Expr lp = log_softmax(head.logits(t, h, pos_at, 0));
               return neg(pick(lp, 1));
             },
             store.all(), opts)});
  }
  if (want("span_repr")) {
    ParamStore store(seed + 6);
    SpanHead head = SpanHead::wire(store, "span", 5, 4, 3, 6, false);
    std::vector<Mat> hs;
    for (int i = 0; i < 4; ++i) hs.push_back(rand_mat(rng, 5, 1));
    const Mat probe = rand_mat(rng, 6, 1);
    out.push_back({"span_repr", grad_check(
                                    [&](Tape& t) {
                                      std::vector<Expr> h;
                                      for (const auto& x : hs)
                                        h.push_back(t.constant(x));
                                      return dot(t.constant(probe),
                                                 head.repr(t, h, 1, 3));
                                    },
                                    store.all(), opts)});
  }
  if (want("biaffine")) {
    ParamStore store(seed + 7);
    BiaffineHead head = BiaffineHead::wire(store, "role_bi", 5, false);
    const Mat ao = rand_mat(rng, 5, 1), ar = rand_mat(rng, 5, 1);
    out.push_back({"biaffine", grad_check(
                                   [&](Tape& t) {
                                     Expr scores = head.scores(
                                         t, t.constant(ao), t.constant(ar));
                                     return neg(pick(log_softmax(scores), 0));
                                   },
                                   store.all(), opts)});
  }
  if (want("rcga")) {
    ParamStore store(seed + 8);
    auto sentences = fixture_sentences();
    Udog g = build_udog(sentences[0], sentences[0].gold);
    RcgaHead head = RcgaHead::wire(store, "rcga", 5, 4, 16, 2, false);
    auto slot = [](const std::string& label, bool incoming) {
      const std::vector<std::string> labels = {"dep", "mod", "hd", "tg",
                                               "opn", "role", "self"};
      for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return static_cast<int>(i) * 2 + (incoming ? 1 : 0);
      throw Error("Internal", "unknown label " + label);
    };
    std::vector<Mat> hs;
    for (int i = 0; i < g.num_nodes; ++i) hs.push_back(rand_mat(rng, 5, 1));
    const Mat probe = rand_mat(rng, 5, 1);
    out.push_back({"rcga", grad_check(
                               [&](Tape& t) {
                                 std::vector<Expr> h;
                                 for (const auto& x : hs)
                                   h.push_back(t.constant(x));
                                 auto enc = rcga_encode(t, head, slot, g, h);
                                 return add(dot(t.constant(probe),
                                                graph_pool(t, enc)),
                                            dot(t.constant(probe), enc[1]));
                               },
                               store.all(), opts)});
  }
  if (want("triaffine")) {
    ParamStore store(seed + 9);
    TriaffineHead head = TriaffineHead::wire(store, "role_tri", 5, 4, false);
    const Mat ao = rand_mat(rng, 5, 1), ar = rand_mat(rng, 5, 1),
              g = rand_mat(rng, 4, 1);
    out.push_back(
        {"triaffine",
         grad_check(
             [&](Tape& t) {
               Expr scores = head.scores(t, t.constant(ao), t.constant(ar),
                                         t.constant(g));
               return add(softplus(neg(pick(scores, 0))),
                          softplus(pick(scores, 1)));
             },
             store.all(), opts)});
  }

  if (want("composite_loss"))
    out.push_back({"composite_loss", composite_loss_check(seed + 10, false, opts)});
  if (want("composite_loss_syntax"))
    out.push_back(
        {"composite_loss_syntax", composite_loss_check(seed + 11, true, opts)});
  return out;
}

}  // namespace orl::nn
