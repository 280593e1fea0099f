#include "orl/graph.hpp"

#include <algorithm>
#include <cmath>

#include "orl/params.hpp"

namespace orl::nn {

const Mat& Expr::val() const {
  if (!tape_) throw Error("Internal", "empty Expr dereferenced");
  return tape_->value(id_);
}

double Expr::scalar() const {
  const Mat& v = val();
  if (v.size() != 1) throw Error("Internal", "scalar() on non-scalar expr");
  return v(0, 0);
}

Expr Tape::constant(Mat v) { return make(std::move(v), {}, nullptr); }

Expr Tape::scalar_constant(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

Expr Tape::zeros(int rows, int cols) { return constant(Mat::Zero(rows, cols)); }

Expr Tape::param(Param& p) {
  Expr e = make(p.value, {}, nullptr);
  nodes_[e.id()].param = &p;
  return e;
}

Expr Tape::lookup(Param& table, int column) {
  if (column < 0 || column >= table.value.cols())
    throw Error("Internal", "lookup column " + std::to_string(column) +
                                " out of range for " + table.name);
  Expr e = make(table.value.col(column), {}, nullptr);
  nodes_[e.id()].param = &table;
  nodes_[e.id()].lookup_col = column;
  return e;
}

Expr Tape::make(Mat value, std::vector<int> args, BackFn back) {
  Node n;
  n.value = std::move(value);
  n.args = std::move(args);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Expr(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Mat& g) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  n.grad += g;
}

void Tape::backward(const Expr& loss) {
  if (backward_done_) throw Error("Internal", "backward called twice on one tape");
  backward_done_ = true;
  if (loss.tape() != this || loss.val().size() != 1)
    throw Error("Internal", "backward needs a scalar node on this tape");
  accumulate(loss.id(), Mat::Ones(1, 1));
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;  // does not influence the loss
    if (n.param) {
      if (n.lookup_col >= 0)
        n.param->grad.col(n.lookup_col) += n.grad;
      else
        n.param->grad += n.grad;
    }
    if (n.back) n.back(*this, id);
  }
}

namespace {

Tape& same_tape(std::initializer_list<Expr> xs) {
  Tape* t = nullptr;
  for (const Expr& e : xs) {
    if (!e.valid()) throw Error("Internal", "empty Expr passed to op");
    if (t && e.tape() != t) throw Error("Internal", "exprs from different tapes");
    t = e.tape();
  }
  return *t;
}

void check_same_shape(const Expr& a, const Expr& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("Internal", std::string(op) + ": shape mismatch");
}

}  // namespace

Expr add(Expr a, Expr b) {
  Tape& t = same_tape({a, b});
  check_same_shape(a, b, "add");
  return t.make(a.val() + b.val(), {a.id(), b.id()},
                [ia = a.id(), ib = b.id()](Tape& t, int self) {
                  const Mat& g = t.grad_of(self);
                  t.accumulate(ia, g);
                  t.accumulate(ib, g);
                });
}

Expr sum(const std::vector<Expr>& xs) {
  if (xs.empty()) throw Error("Internal", "sum of no exprs");
  if (xs.size() == 1) return xs[0];
  Tape& t = *xs[0].tape();
  Mat v = xs[0].val();
  std::vector<int> ids;
  ids.reserve(xs.size());
  for (const Expr& e : xs) {
    check_same_shape(xs[0], e, "sum");
    ids.push_back(e.id());
  }
  for (size_t i = 1; i < xs.size(); ++i) v += xs[i].val();
  return t.make(std::move(v), ids, [ids](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    for (int id : ids) t.accumulate(id, g);
  });
}

Expr sub(Expr a, Expr b) {
  Tape& t = same_tape({a, b});
  check_same_shape(a, b, "sub");
  return t.make(a.val() - b.val(), {a.id(), b.id()},
                [ia = a.id(), ib = b.id()](Tape& t, int self) {
                  const Mat& g = t.grad_of(self);
                  t.accumulate(ia, g);
                  t.accumulate(ib, -g);
                });
}

Expr neg(Expr a) { return scale(a, -1.0); }

Expr scale(Expr a, double c) {
  Tape& t = same_tape({a});
  return t.make(c * a.val(), {a.id()}, [ia = a.id(), c](Tape& t, int self) {
    t.accumulate(ia, c * t.grad_of(self));
  });
}

Expr cmult(Expr a, Expr b) {
  Tape& t = same_tape({a, b});
  check_same_shape(a, b, "cmult");
  return t.make(a.val().cwiseProduct(b.val()), {a.id(), b.id()},
                [ia = a.id(), ib = b.id()](Tape& t, int self) {
                  const Mat& g = t.grad_of(self);
                  t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                  t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                });
}

Expr smul(Expr s, Expr v) {
  Tape& t = same_tape({s, v});
  if (s.val().size() != 1) throw Error("Internal", "smul: first arg not scalar");
  return t.make(s.scalar() * v.val(), {s.id(), v.id()},
                [is = s.id(), iv = v.id()](Tape& t, int self) {
                  const Mat& g = t.grad_of(self);
                  Mat gs(1, 1);
                  gs(0, 0) = g.cwiseProduct(t.value(iv)).sum();
                  t.accumulate(is, gs);
                  t.accumulate(iv, t.value(is)(0, 0) * g);
                });
}

Expr matmul(Expr w, Expr x) {
  Tape& t = same_tape({w, x});
  if (w.cols() != x.rows()) throw Error("Internal", "matmul: inner dims differ");
  return t.make(w.val() * x.val(), {w.id(), x.id()},
                [iw = w.id(), ix = x.id()](Tape& t, int self) {
                  const Mat& g = t.grad_of(self);
                  t.accumulate(iw, g * t.value(ix).transpose());
                  t.accumulate(ix, t.value(iw).transpose() * g);
                });
}

Expr transpose(Expr a) {
  Tape& t = same_tape({a});
  return t.make(a.val().transpose(), {a.id()}, [ia = a.id()](Tape& t, int self) {
    t.accumulate(ia, t.grad_of(self).transpose());
  });
}

Expr dot(Expr a, Expr b) {
  Tape& t = same_tape({a, b});
  check_same_shape(a, b, "dot");
  Mat v(1, 1);
  v(0, 0) = a.val().cwiseProduct(b.val()).sum();
  return t.make(std::move(v), {a.id(), b.id()},
                [ia = a.id(), ib = b.id()](Tape& t, int self) {
                  const double g = t.grad_of(self)(0, 0);
                  t.accumulate(ia, g * t.value(ib));
                  t.accumulate(ib, g * t.value(ia));
                });
}

Expr concat(const std::vector<Expr>& parts) {
  if (parts.empty()) throw Error("Internal", "concat of no exprs");
  Tape& t = *parts[0].tape();
  const int cols = parts[0].cols();
  int total = 0;
  std::vector<int> ids, offsets;
  for (const Expr& e : parts) {
    if (e.cols() != cols) throw Error("Internal", "concat: column mismatch");
    ids.push_back(e.id());
    offsets.push_back(total);
    total += e.rows();
  }
  Mat v(total, cols);
  for (size_t i = 0; i < parts.size(); ++i)
    v.middleRows(offsets[i], parts[i].rows()) = parts[i].val();
  return t.make(std::move(v), ids, [ids, offsets](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    for (size_t i = 0; i < ids.size(); ++i) {
      const int n = static_cast<int>(t.value(ids[i]).rows());
      t.accumulate(ids[i], g.middleRows(offsets[i], n));
    }
  });
}

Expr rows(Expr a, int first, int count) {
  Tape& t = same_tape({a});
  if (first < 0 || first + count > a.rows())
    throw Error("Internal", "rows: slice out of range");
  return t.make(a.val().middleRows(first, count), {a.id()},
                [ia = a.id(), first, count](Tape& t, int self) {
                  Mat g = Mat::Zero(t.value(ia).rows(), t.value(ia).cols());
                  g.middleRows(first, count) = t.grad_of(self);
                  t.accumulate(ia, g);
                });
}

Expr reshape(Expr a, int r, int c) {
  Tape& t = same_tape({a});
  if (a.rows() * a.cols() != r * c) throw Error("Internal", "reshape: size mismatch");
  Mat v = Eigen::Map<const Mat>(a.val().data(), r, c);
  return t.make(std::move(v), {a.id()}, [ia = a.id()](Tape& t, int self) {
    const Mat& src = t.value(ia);
    Mat g = Eigen::Map<const Mat>(t.grad_of(self).data(), src.rows(), src.cols());
    t.accumulate(ia, g);
  });
}

Expr pick(Expr v, int index) {
  Tape& t = same_tape({v});
  if (v.cols() != 1 || index < 0 || index >= v.rows())
    throw Error("Internal", "pick: bad index");
  Mat out(1, 1);
  out(0, 0) = v.val()(index, 0);
  return t.make(std::move(out), {v.id()}, [iv = v.id(), index](Tape& t, int self) {
    Mat g = Mat::Zero(t.value(iv).rows(), 1);
    g(index, 0) = t.grad_of(self)(0, 0);
    t.accumulate(iv, g);
  });
}

Expr gather(Expr v, std::vector<int> indices) {
  Tape& t = same_tape({v});
  if (v.cols() != 1) throw Error("Internal", "gather: needs a column vector");
  Mat out(static_cast<int>(indices.size()), 1);
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= v.rows())
      throw Error("Internal", "gather: index out of range");
    out(static_cast<int>(i), 0) = v.val()(indices[i], 0);
  }
  return t.make(std::move(out), {v.id()},
                [iv = v.id(), indices](Tape& t, int self) {
                  Mat g = Mat::Zero(t.value(iv).rows(), 1);
                  const Mat& gs = t.grad_of(self);
                  for (size_t i = 0; i < indices.size(); ++i)
                    g(indices[i], 0) += gs(static_cast<int>(i), 0);
                  t.accumulate(iv, g);
                });
}

Expr emax(const std::vector<Expr>& xs) {
  if (xs.empty()) throw Error("Internal", "emax of no exprs");
  if (xs.size() == 1) return xs[0];
  Tape& t = *xs[0].tape();
  std::vector<int> ids;
  for (const Expr& e : xs) {
    check_same_shape(xs[0], e, "emax");
    ids.push_back(e.id());
  }
  Mat v = xs[0].val();
  Eigen::MatrixXi which = Eigen::MatrixXi::Zero(v.rows(), v.cols());
  for (size_t k = 1; k < xs.size(); ++k) {
    const Mat& x = xs[k].val();
    for (int j = 0; j < v.cols(); ++j)
      for (int i = 0; i < v.rows(); ++i)
        if (x(i, j) > v(i, j)) {
          v(i, j) = x(i, j);
          which(i, j) = static_cast<int>(k);
        }
  }
  return t.make(std::move(v), ids, [ids, which](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    std::vector<Mat> gs(ids.size());
    for (size_t k = 0; k < ids.size(); ++k)
      gs[k] = Mat::Zero(g.rows(), g.cols());
    for (int j = 0; j < g.cols(); ++j)
      for (int i = 0; i < g.rows(); ++i)
        gs[which(i, j)](i, j) = g(i, j);
    for (size_t k = 0; k < ids.size(); ++k) t.accumulate(ids[k], gs[k]);
  });
}

Expr tanh(Expr a) {
  Tape& t = same_tape({a});
  return t.make(a.val().array().tanh().matrix(), {a.id()},
                [ia = a.id()](Tape& t, int self) {
                  const Mat& y = t.value(self);
                  t.accumulate(ia, t.grad_of(self).cwiseProduct(
                                       (1.0 - y.array().square()).matrix()));
                });
}

Expr sigmoid(Expr a) {
  Tape& t = same_tape({a});
  Mat y = a.val().unaryExpr([](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  });
  return t.make(std::move(y), {a.id()}, [ia = a.id()](Tape& t, int self) {
    const Mat& y = t.value(self);
    t.accumulate(ia, t.grad_of(self).cwiseProduct(
                         y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Expr leaky_relu(Expr a, double slope) {
  Tape& t = same_tape({a});
  Mat y = a.val().unaryExpr([slope](double x) { return x >= 0 ? x : slope * x; });
  return t.make(std::move(y), {a.id()}, [ia = a.id(), slope](Tape& t, int self) {
    Mat d = t.value(ia).unaryExpr([slope](double x) { return x >= 0 ? 1.0 : slope; });
    t.accumulate(ia, t.grad_of(self).cwiseProduct(d));
  });
}

Expr softplus(Expr a) {
  Tape& t = same_tape({a});
  Mat y = a.val().unaryExpr(
      [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); });
  return t.make(std::move(y), {a.id()}, [ia = a.id()](Tape& t, int self) {
    Mat d = t.value(ia).unaryExpr([](double x) {
      return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    });
    t.accumulate(ia, t.grad_of(self).cwiseProduct(d));
  });
}

Expr log_softmax(Expr v) {
  Tape& t = same_tape({v});
  if (v.cols() != 1) throw Error("Internal", "log_softmax: needs a column vector");
  const Mat& x = v.val();
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  return t.make((x.array() - lse).matrix(), {v.id()},
                [iv = v.id()](Tape& t, int self) {
                  const Mat& y = t.value(self);
                  const Mat& g = t.grad_of(self);
                  const double gsum = g.sum();
                  t.accumulate(iv, g - gsum * y.array().exp().matrix());
                });
}

Expr softmax(Expr v) {
  Tape& t = same_tape({v});
  if (v.cols() != 1) throw Error("Internal", "softmax: needs a column vector");
  const Mat& x = v.val();
  const double m = x.maxCoeff();
  Mat y = (x.array() - m).exp().matrix();
  y /= y.sum();
  return t.make(std::move(y), {v.id()}, [iv = v.id()](Tape& t, int self) {
    const Mat& y = t.value(self);
    const Mat& g = t.grad_of(self);
    const double yg = y.cwiseProduct(g).sum();
    t.accumulate(iv, y.cwiseProduct((g.array() - yg).matrix()));
  });
}

Expr sum_elems(Expr a) {
  Tape& t = same_tape({a});
  Mat v(1, 1);
  v(0, 0) = a.val().sum();
  return t.make(std::move(v), {a.id()}, [ia = a.id()](Tape& t, int self) {
    const double g = t.grad_of(self)(0, 0);
    t.accumulate(ia, Mat::Constant(t.value(ia).rows(), t.value(ia).cols(), g));
  });
}

Expr squared_norm(Expr a) {
  Tape& t = same_tape({a});
  Mat v(1, 1);
  v(0, 0) = a.val().squaredNorm();
  return t.make(std::move(v), {a.id()}, [ia = a.id()](Tape& t, int self) {
    const double g = t.grad_of(self)(0, 0);
    t.accumulate(ia, 2.0 * g * t.value(ia));
  });
}

}  // namespace orl::nn
