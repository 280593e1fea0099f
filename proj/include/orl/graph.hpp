#pragma once

// Small reverse-mode autodiff tape over Eigen matrices, double precision.
// A Tape owns the nodes of one computation; Expr is a cheap handle into it.
// Forward values are computed eagerly; backward() walks the tape in reverse
// and accumulates gradients into the referenced Params.

#include <Eigen/Dense>

#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "orl/core.hpp"

namespace orl::nn {

using Mat = Eigen::MatrixXd;

struct Param;
class Tape;

class Expr {
 public:
  Expr() = default;
  Expr(Tape* tape, int id) : tape_(tape), id_(id) {}
  bool valid() const { return tape_ != nullptr; }
  const Mat& val() const;
  double scalar() const;
  int rows() const { return static_cast<int>(val().rows()); }
  int cols() const { return static_cast<int>(val().cols()); }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using BackFn = std::function<void(Tape&, int self)>;

  Expr constant(Mat v);
  Expr scalar_constant(double v);
  Expr zeros(int rows, int cols = 1);
  // whole parameter matrix; gradient accumulates into p.grad
  Expr param(Param& p);
  // single column of an embedding table
  Expr lookup(Param& table, int column);

  // backward from a 1x1 loss node; may be called once per tape
  void backward(const Expr& loss);

  Expr make(Mat value, std::vector<int> args, BackFn back);

  const Mat& value(int id) const { return nodes_[id].value; }
  const Mat& grad_of(int id) const { return nodes_[id].grad; }
  void accumulate(int id, const Mat& g);
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;  // empty until first touched during backward
    std::vector<int> args;
    BackFn back;
    Param* param = nullptr;
    int lookup_col = -1;
  };
  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// arithmetic
Expr add(Expr a, Expr b);
Expr sum(const std::vector<Expr>& xs);
Expr sub(Expr a, Expr b);
Expr neg(Expr a);
Expr scale(Expr a, double c);
Expr cmult(Expr a, Expr b);
// scalar expr times matrix expr
Expr smul(Expr s, Expr v);
Expr matmul(Expr w, Expr x);
Expr transpose(Expr a);
Expr dot(Expr a, Expr b);

// structure
Expr concat(const std::vector<Expr>& parts);
Expr rows(Expr a, int first, int count);
Expr reshape(Expr a, int r, int c);
Expr pick(Expr v, int index);
Expr gather(Expr v, std::vector<int> indices);
// elementwise max over same-shaped inputs; gradient goes to the first argmax
Expr emax(const std::vector<Expr>& xs);

// nonlinearities
Expr tanh(Expr a);
Expr sigmoid(Expr a);
Expr leaky_relu(Expr a, double slope);
Expr softplus(Expr a);
Expr log_softmax(Expr v);
Expr softmax(Expr v);

// reductions
Expr sum_elems(Expr a);
Expr squared_norm(Expr a);

}  // namespace orl::nn
