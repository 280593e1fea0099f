#include "orl/scorers.hpp"

#include <algorithm>

namespace orl::nn {

namespace {

Param& wire_param(ParamStore& store, const std::string& name, int rows, int cols,
                  Init init, bool strict) {
  return strict ? store.require(name, rows, cols)
                : store.ensure(name, rows, cols, init);
}

}  // namespace

ActionMlp ActionMlp::wire(ParamStore& store, const std::string& prefix,
                          int state_dim, int hidden, int num_actions, bool strict) {
  ActionMlp m;
  m.hidden_w = &wire_param(store, prefix + ".hidden.w", hidden, state_dim,
                           Init::glorot, strict);
  m.hidden_b = &wire_param(store, prefix + ".hidden.b", hidden, 1, Init::zeros, strict);
  m.out_w = &wire_param(store, prefix + ".out.w", num_actions, hidden,
                        Init::glorot, strict);
  m.out_b = &wire_param(store, prefix + ".out.b", num_actions, 1, Init::zeros, strict);
  return m;
}

Expr ActionMlp::logits(Tape& tape, Expr state) const {
  Expr hid = tanh(add(matmul(tape.param(*hidden_w), state), tape.param(*hidden_b)));
  return add(matmul(tape.param(*out_w), hid), tape.param(*out_b));
}

MaskedDist masked_log_softmax(Tape& tape, Expr logits,
                              const std::vector<int>& candidates) {
  if (candidates.empty())
    throw Error("EmptyMask", "masked softmax with no candidates");
  MaskedDist d;
  d.candidates = candidates;
  std::sort(d.candidates.begin(), d.candidates.end());
  d.log_probs = log_softmax(gather(logits, d.candidates));
  return d;
}

std::vector<double> dense_probs(const MaskedDist& d, int n) {
  std::vector<double> out(n, 0.0);
  const Mat& lp = d.log_probs.val();
  for (size_t i = 0; i < d.candidates.size(); ++i)
    out[d.candidates[i]] = std::exp(lp(static_cast<int>(i), 0));
  return out;
}

int argmax_candidate(const MaskedDist& d) {
  const Mat& lp = d.log_probs.val();
  int best = 0;
  for (int i = 1; i < lp.rows(); ++i)
    if (lp(i, 0) > lp(best, 0)) best = i;
  return d.candidates[best];
}

PointerHead PointerHead::wire(ParamStore& store, const std::string& prefix,
                              int token_dim, int inner_dim, bool strict) {
  PointerHead p;
  p.start_w = &wire_param(store, prefix + ".start.w", inner_dim, token_dim,
                          Init::glorot, strict);
  p.end_w = &wire_param(store, prefix + ".end.w", inner_dim, token_dim,
                        Init::glorot, strict);
  p.score_v = &wire_param(store, prefix + ".score", inner_dim, 1, Init::glorot, strict);
  return p;
}

Expr PointerHead::logits(Tape& tape, std::span<const Expr> h, int start) const {
  const int T = static_cast<int>(h.size());
  if (start < 0 || start >= T) throw Error("Internal", "pointer start out of range");
  Expr from_start = matmul(tape.param(*start_w), h[start]);
  Expr v = tape.param(*score_v);
  std::vector<Expr> scores;
  scores.reserve(T - start);
  for (int k = start; k < T; ++k) {
    Expr u = tanh(add(from_start, matmul(tape.param(*end_w), h[k])));
    scores.push_back(dot(v, u));
  }
  return concat(scores);
}

PosPointerHead PosPointerHead::wire(ParamStore& store, const std::string& prefix,
                                    int token_dim, int pos_dim, int inner_dim,
                                    bool strict) {
  PosPointerHead p;
  p.start_w = &wire_param(store, prefix + ".start.w", inner_dim,
                          token_dim + pos_dim, Init::glorot, strict);
  p.end_w = &wire_param(store, prefix + ".end.w", inner_dim, token_dim + pos_dim,
                        Init::glorot, strict);
  p.diff_w = &wire_param(store, prefix + ".diff.w", inner_dim, 2 * pos_dim,
                         Init::glorot, strict);
  p.score_v = &wire_param(store, prefix + ".score", inner_dim, 1, Init::glorot, strict);
  return p;
}

Expr PosPointerHead::logits(Tape& tape, std::span<const Expr> h,
                            const std::function<Expr(int)>& pos_at,
                            int start) const {
  const int T = static_cast<int>(h.size());
  if (start < 0 || start >= T) throw Error("Internal", "pointer start out of range");
  Expr from_start =
      matmul(tape.param(*start_w), concat({h[start], pos_at(start)}));
  Expr v = tape.param(*score_v);
  std::vector<Expr> scores;
  scores.reserve(T - start);
  for (int k = start; k < T; ++k) {
    Expr pk = pos_at(k);
    Expr boundary = matmul(tape.param(*diff_w),
                           concat({sub(pk, pos_at(k - 1)), sub(pos_at(k + 1), pk)}));
    Expr u = tanh(sum({from_start,
                       matmul(tape.param(*end_w), concat({h[k], pk})), boundary}));
    scores.push_back(dot(v, u));
  }
  return concat(scores);
}

SpanHead SpanHead::wire(ParamStore& store, const std::string& prefix,
                        int token_dim, int len_dim, int buckets, int out_dim,
                        bool strict) {
  SpanHead s;
  s.buckets = buckets;
  s.proj = &wire_param(store, prefix + ".proj", out_dim, 2 * token_dim + len_dim,
                       Init::glorot, strict);
  s.len_table = &wire_param(store, prefix + ".len", len_dim, buckets,
                            Init::uniform, strict);
  return s;
}

Expr SpanHead::repr(Tape& tape, std::span<const Expr> h, int i, int j) const {
  if (i > j) throw Error("Internal", "span with end before start");
  Expr len = tape.lookup(*len_table, bucket_of(j - i + 1));
  return matmul(tape.param(*proj), concat({h[i], h[j], len}));
}

BiaffineHead BiaffineHead::wire(ParamStore& store, const std::string& prefix,
                                int span_dim, bool strict) {
  BiaffineHead b;
  b.mat_hd = &wire_param(store, prefix + ".hd", span_dim, span_dim, Init::glorot, strict);
  b.mat_tg = &wire_param(store, prefix + ".tg", span_dim, span_dim, Init::glorot, strict);
  return b;
}

Expr BiaffineHead::scores(Tape& tape, Expr a_o, Expr a_r) const {
  Expr s_hd = tanh(dot(a_o, matmul(tape.param(*mat_hd), a_r)));
  Expr s_tg = tanh(dot(a_o, matmul(tape.param(*mat_tg), a_r)));
  return concat({s_hd, s_tg});
}

}  // namespace orl::nn
