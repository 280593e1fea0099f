#include "orl/encoders.hpp"

#include <algorithm>

namespace orl::nn {

namespace {

Param& wire_param(ParamStore& store, const std::string& name, int rows, int cols,
                  Init init, bool strict) {
  return strict ? store.require(name, rows, cols)
                : store.ensure(name, rows, cols, init);
}

}  // namespace

LstmCell LstmCell::wire(ParamStore& store, const std::string& prefix, int input,
                        int hidden, bool strict) {
  LstmCell c;
  c.hidden = hidden;
  c.wx = &wire_param(store, prefix + ".wx", 4 * hidden, input, Init::glorot, strict);
  c.wh = &wire_param(store, prefix + ".wh", 4 * hidden, hidden, Init::glorot, strict);
  c.bias = &wire_param(store, prefix + ".b", 4 * hidden, 1, Init::zeros, strict);
  return c;
}

std::pair<Expr, Expr> LstmCell::step(Tape& tape, Expr x, Expr h, Expr c) const {
  Expr z = sum({matmul(tape.param(*wx), x), matmul(tape.param(*wh), h),
                tape.param(*bias)});
  Expr gi = sigmoid(rows(z, 0, hidden));
  Expr gf = sigmoid(rows(z, hidden, hidden));
  Expr go = sigmoid(rows(z, 2 * hidden, hidden));
  Expr gc = tanh(rows(z, 3 * hidden, hidden));
  Expr c_next = add(cmult(gf, c), cmult(gi, gc));
  Expr h_next = cmult(go, tanh(c_next));
  return {h_next, c_next};
}

BiLstm BiLstm::wire(ParamStore& store, const std::string& prefix, int input,
                    int hidden, bool strict) {
  BiLstm b;
  b.fwd = LstmCell::wire(store, prefix + ".fwd", input, hidden, strict);
  b.bwd = LstmCell::wire(store, prefix + ".bwd", input, hidden, strict);
  return b;
}

std::vector<Expr> BiLstm::encode(Tape& tape, std::span<const Expr> xs) const {
  const int T = static_cast<int>(xs.size());
  if (T == 0) return {};
  std::vector<Expr> hf(T), hb(T);
  Expr h = tape.zeros(fwd.hidden), c = tape.zeros(fwd.hidden);
  for (int t = 0; t < T; ++t) {
    std::tie(h, c) = fwd.step(tape, xs[t], h, c);
    hf[t] = h;
  }
  h = tape.zeros(bwd.hidden);
  c = tape.zeros(bwd.hidden);
  for (int t = T - 1; t >= 0; --t) {
    std::tie(h, c) = bwd.step(tape, xs[t], h, c);
    hb[t] = h;
  }
  std::vector<Expr> out(T);
  for (int t = 0; t < T; ++t) out[t] = concat({hf[t], hb[t]});
  return out;
}

StackEncoder::StackEncoder(Tape& tape, const LstmCell& cell, Param& empty_summary)
    : tape_(&tape), cell_(&cell), empty_(&empty_summary) {}

void StackEncoder::push(Expr v) {
  Expr h = frames_.empty() ? tape_->zeros(cell_->hidden) : frames_.back().first;
  Expr c = frames_.empty() ? tape_->zeros(cell_->hidden) : frames_.back().second;
  frames_.push_back(cell_->step(*tape_, v, h, c));
}

void StackEncoder::pop() {
  if (frames_.empty()) throw Error("PopOnEmpty", "pop on empty stack encoder");
  frames_.pop_back();
}

Expr StackEncoder::summary() const {
  return frames_.empty() ? tape_->param(*empty_) : frames_.back().first;
}

IncrementalEncoder::IncrementalEncoder(Tape& tape, const LstmCell& cell,
                                       Param& empty_summary)
    : tape_(&tape), cell_(&cell), empty_(&empty_summary) {}

void IncrementalEncoder::push(Expr v) {
  Expr h = frames_.empty() ? tape_->zeros(cell_->hidden) : frames_.back().first;
  Expr c = frames_.empty() ? tape_->zeros(cell_->hidden) : frames_.back().second;
  frames_.push_back(cell_->step(*tape_, v, h, c));
}

Expr IncrementalEncoder::summary() const {
  return frames_.empty() ? tape_->param(*empty_) : frames_.back().first;
}

CharCnn CharCnn::wire(ParamStore& store, const std::string& prefix, int char_dim,
                      int char_vocab, const std::vector<int>& filters, bool strict) {
  const std::vector<int> widths = {3, 4, 5};
  if (filters.size() != widths.size())
    throw Error("Internal", "char cnn expects one filter count per width 3/4/5");
  CharCnn cnn;
  cnn.emb = &wire_param(store, prefix + ".emb", char_dim, char_vocab,
                        Init::uniform, strict);
  for (size_t k = 0; k < widths.size(); ++k) {
    Kernel kr;
    kr.width = widths[k];
    const std::string kp = prefix + ".k" + std::to_string(widths[k]);
    kr.w = &wire_param(store, kp + ".w", filters[k], char_dim * widths[k],
                       Init::glorot, strict);
    kr.b = &wire_param(store, kp + ".b", filters[k], 1, Init::zeros, strict);
    cnn.kernels.push_back(kr);
    cnn.out_dim += filters[k];
  }
  return cnn;
}

Expr CharCnn::encode(Tape& tape, std::span<const int> char_ids) const {
  if (char_ids.empty()) throw Error("Internal", "char cnn on empty sequence");
  int max_width = 0;
  for (const auto& k : kernels) max_width = std::max(max_width, k.width);
  std::vector<int> ids(char_ids.begin(), char_ids.end());
  while (static_cast<int>(ids.size()) < max_width) ids.push_back(0);  // pad

  std::vector<Expr> cols(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) cols[i] = tape.lookup(*emb, ids[i]);

  std::vector<Expr> pooled;
  for (const auto& k : kernels) {
    std::vector<Expr> maps;
    const int positions = static_cast<int>(ids.size()) - k.width + 1;
    for (int p = 0; p < positions; ++p) {
      std::vector<Expr> window(cols.begin() + p, cols.begin() + p + k.width);
      maps.push_back(
          add(matmul(tape.param(*k.w), concat(window)), tape.param(*k.b)));
    }
    pooled.push_back(emax(maps));
  }
  return concat(pooled);
}

}  // namespace orl::nn
