#pragma once

// Per-decision scoring heads: masked action classifier, plain and POS-aware
// pointer for term end indices, span representation, and the biaffine role
// typer. All heads are pure functions of ParamStore + inputs.

#include <functional>
#include <span>
#include <vector>

#include "orl/graph.hpp"
#include "orl/params.hpp"

namespace orl::nn {

struct ActionMlp {
  Param* hidden_w = nullptr;
  Param* hidden_b = nullptr;
  Param* out_w = nullptr;
  Param* out_b = nullptr;

  static ActionMlp wire(ParamStore& store, const std::string& prefix,
                        int state_dim, int hidden, int num_actions, bool strict);
  Expr logits(Tape& tape, Expr state) const;
};

// Softmax restricted to a candidate subset. Non-candidates carry exactly
// zero probability and receive no gradient.
struct MaskedDist {
  std::vector<int> candidates;  // indices into the logit vector, ascending
  Expr log_probs;               // |candidates| x 1, aligned with candidates
};
MaskedDist masked_log_softmax(Tape& tape, Expr logits,
                              const std::vector<int>& candidates);
// dense probabilities with zeros at non-candidates
std::vector<double> dense_probs(const MaskedDist& d, int n);
int argmax_candidate(const MaskedDist& d);

struct PointerHead {
  Param* start_w = nullptr;
  Param* end_w = nullptr;
  Param* score_v = nullptr;  // reduces the tanh feature to a scalar

  static PointerHead wire(ParamStore& store, const std::string& prefix,
                          int token_dim, int inner_dim, bool strict);
  // logits over end candidates k in [start, T); row k-start corresponds to k
  Expr logits(Tape& tape, std::span<const Expr> h, int start) const;
};

// POS-aware pointer with the boundary differential feature built from
// adjacent POS embedding differences. pos_at(k) must be valid for
// k in [-1, T]; the out-of-range rows are the boundary sentinels.
struct PosPointerHead {
  Param* start_w = nullptr;
  Param* end_w = nullptr;
  Param* diff_w = nullptr;
  Param* score_v = nullptr;

  static PosPointerHead wire(ParamStore& store, const std::string& prefix,
                             int token_dim, int pos_dim, int inner_dim,
                             bool strict);
  Expr logits(Tape& tape, std::span<const Expr> h,
              const std::function<Expr(int)>& pos_at, int start) const;
};

struct SpanHead {
  Param* proj = nullptr;
  Param* len_table = nullptr;  // len_dim x buckets
  int buckets = 0;

  static SpanHead wire(ParamStore& store, const std::string& prefix,
                       int token_dim, int len_dim, int buckets, int out_dim,
                       bool strict);
  int bucket_of(int length) const { return std::min(length, buckets) - 1; }
  Expr repr(Tape& tape, std::span<const Expr> h, int i, int j) const;
};

struct BiaffineHead {
  Param* mat_hd = nullptr;
  Param* mat_tg = nullptr;

  static BiaffineHead wire(ParamStore& store, const std::string& prefix,
                           int span_dim, bool strict);
  // 2x1 tanh-squashed bilinear scores, row 0 = holder, row 1 = target
  Expr scores(Tape& tape, Expr a_o, Expr a_r) const;
};

}  // namespace orl::nn
