#pragma once

// Recurrent building blocks: a gated LSTM cell, a BiLSTM sequence encoder,
// a stack encoder with pop-rewind semantics, an incremental unidirectional
// encoder, and the character CNN.

#include <span>
#include <string>
#include <vector>

#include "orl/graph.hpp"
#include "orl/params.hpp"

namespace orl::nn {

struct LstmCell {
  Param* wx = nullptr;  // 4H x input, gate order [input; forget; output; cell]
  Param* wh = nullptr;  // 4H x H
  Param* bias = nullptr;
  int hidden = 0;

  static LstmCell wire(ParamStore& store, const std::string& prefix, int input,
                       int hidden, bool strict);
  // one step; (h, c) in, (h, c) out
  std::pair<Expr, Expr> step(Tape& tape, Expr x, Expr h, Expr c) const;
};

struct BiLstm {
  LstmCell fwd, bwd;

  static BiLstm wire(ParamStore& store, const std::string& prefix, int input,
                     int hidden, bool strict);
  // per-token states, each 2H (forward half on top)
  std::vector<Expr> encode(Tape& tape, std::span<const Expr> xs) const;
};

// Stack-structured encoder: push runs one cell step from the current top;
// pop rewinds to the state before the matching push. summary() of an empty
// stack is a learned embedding.
class StackEncoder {
 public:
  StackEncoder(Tape& tape, const LstmCell& cell, Param& empty_summary);

  void push(Expr v);
  void pop();  // throws PopOnEmpty
  Expr summary() const;
  size_t size() const { return frames_.size(); }

 private:
  Tape* tape_;
  const LstmCell* cell_;
  Param* empty_;
  std::vector<std::pair<Expr, Expr>> frames_;  // (h, c)
};

// Grows forward only; reset() drops everything (used for the lambda slot).
class IncrementalEncoder {
 public:
  IncrementalEncoder(Tape& tape, const LstmCell& cell, Param& empty_summary);

  void push(Expr v);
  void reset() { frames_.clear(); }
  Expr summary() const;
  size_t size() const { return frames_.size(); }

 private:
  Tape* tape_;
  const LstmCell* cell_;
  Param* empty_;
  std::vector<std::pair<Expr, Expr>> frames_;
};

struct CharCnn {
  Param* emb = nullptr;  // char_dim x char vocab; column 0 is padding
  struct Kernel {
    Param* w = nullptr;  // filters x (char_dim * width)
    Param* b = nullptr;
    int width = 0;
  };
  std::vector<Kernel> kernels;  // widths 3, 4, 5
  int out_dim = 0;

  static CharCnn wire(ParamStore& store, const std::string& prefix, int char_dim,
                      int char_vocab, const std::vector<int>& filters, bool strict);
  // concatenated max-pooled feature maps; short words are padded
  Expr encode(Tape& tape, std::span<const int> char_ids) const;
};

}  // namespace orl::nn
