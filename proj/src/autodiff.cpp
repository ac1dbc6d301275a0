#include "mvn/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace mvn::ad {
namespace {

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

void check_finite(const Mat& m, const char* op) {
  if (!m.allFinite()) throw std::domain_error(std::string(op) + ": non-finite values");
}

}  // namespace

Tape::Node& Tape::node(Var v) {
  if (v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size()) {
    throw std::invalid_argument("Tape: invalid Var handle");
  }
  return nodes_[static_cast<size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size()) {
    throw std::invalid_argument("Tape: invalid Var handle");
  }
  return nodes_[static_cast<size_t>(v.id)];
}

Var Tape::push(Mat value, std::function<void(Tape&, const Node&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::leaf(Mat value) { return push(std::move(value)); }

Var Tape::param(Parameter& p) {
  Var v = push(p.value);
  nodes_.back().bound = &p;
  return v;
}

double Tape::scalar(Var v) const {
  const Mat& m = node(v).value;
  if (m.rows() != 1 || m.cols() != 1) throw std::invalid_argument("scalar: node is not 1x1");
  return m(0, 0);
}

Var Tape::add(Var a, Var b) {
  check_same_shape(node(a).value, node(b).value, "add");
  Mat v = node(a).value + node(b).value;
  return push(std::move(v), [a, b](Tape& t, const Node& self) {
    t.add_grad(a, self.grad);
    t.add_grad(b, self.grad);
  });
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(node(a).value, node(b).value, "sub");
  Mat v = node(a).value - node(b).value;
  return push(std::move(v), [a, b](Tape& t, const Node& self) {
    t.add_grad(a, self.grad);
    t.node(b).grad -= self.grad;
  });
}

Var Tape::mul(Var a, Var b) {
  check_same_shape(node(a).value, node(b).value, "mul");
  Mat v = node(a).value.cwiseProduct(node(b).value);
  return push(std::move(v), [a, b](Tape& t, const Node& self) {
    t.node(a).grad += self.grad.cwiseProduct(t.node(b).value);
    t.node(b).grad += self.grad.cwiseProduct(t.node(a).value);
  });
}

Var Tape::scale(Var a, double c) {
  Mat v = c * node(a).value;
  return push(std::move(v), [a, c](Tape& t, const Node& self) {
    t.node(a).grad += c * self.grad;
  });
}

Var Tape::add_scalar(Var a, double c) {
  Mat v = (node(a).value.array() + c).matrix();
  return push(std::move(v), [a](Tape& t, const Node& self) { t.add_grad(a, self.grad); });
}

Var Tape::exp(Var a) {
  Mat v = node(a).value.array().exp().matrix();
  check_finite(v, "exp");
  return push(std::move(v), [a](Tape& t, const Node& self) {
    t.node(a).grad += self.grad.cwiseProduct(self.value);
  });
}

Var Tape::log(Var a) {
  if ((node(a).value.array() <= 0.0).any()) {
    throw std::domain_error("log: input must be strictly positive");
  }
  Mat v = node(a).value.array().log().matrix();
  check_finite(v, "log");
  return push(std::move(v), [a](Tape& t, const Node& self) {
    t.node(a).grad.array() += self.grad.array() / t.node(a).value.array();
  });
}

Var Tape::elementwise(EwOp op, Var a, Var b) {
  switch (op) {
    case EwOp::add: return add(a, b);
    case EwOp::sub: return sub(a, b);
    case EwOp::mul: return mul(a, b);
    default: throw std::invalid_argument("elementwise: op requires a scalar operand");
  }
}

Var Tape::elementwise(EwOp op, Var a, double b) {
  switch (op) {
    case EwOp::add: return add_scalar(a, b);
    case EwOp::sub: return add_scalar(a, -b);
    case EwOp::mul:
    case EwOp::scale: return scale(a, b);
    default: throw std::invalid_argument("elementwise: op takes no scalar operand");
  }
}

Var Tape::elementwise(EwOp op, Var a) {
  switch (op) {
    case EwOp::exp: return exp(a);
    case EwOp::log: return log(a);
    default: throw std::invalid_argument("elementwise: op requires a second operand");
  }
}

Var Tape::matmul(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.cols() != bv.rows()) {
    throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                std::to_string(av.cols()) + " vs " + std::to_string(bv.rows()) + ")");
  }
  Mat v = av * bv;
  return push(std::move(v), [a, b](Tape& t, const Node& self) {
    t.node(a).grad.noalias() += self.grad * t.node(b).value.transpose();
    t.node(b).grad.noalias() += t.node(a).value.transpose() * self.grad;
  });
}

Var Tape::transpose(Var a) {
  Mat v = node(a).value.transpose();
  return push(std::move(v), [a](Tape& t, const Node& self) {
    t.node(a).grad += self.grad.transpose();
  });
}

Var Tape::softmax_rows(Var a) {
  check_finite(node(a).value, "softmax_rows");
  const Mat& x = node(a).value;
  Mat y(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    y.row(i) = (x.row(i).array() - m).exp().matrix();
    y.row(i) /= y.row(i).sum();
  }
  return push(std::move(y), [a](Tape& t, const Node& self) {
    const Mat& y = self.value;
    const Mat& g = self.grad;
    Mat dx(y.rows(), y.cols());
    for (Index i = 0; i < y.rows(); ++i) {
      const double dot = g.row(i).dot(y.row(i));
      dx.row(i) = y.row(i).cwiseProduct((g.row(i).array() - dot).matrix());
    }
    t.node(a).grad += dx;
  });
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Mat& xv = node(x).value;
  const Mat& gv = node(gamma).value;
  const Mat& bv = node(beta).value;
  if (eps <= 0.0) throw std::invalid_argument("layer_norm: eps must be positive");
  if (gv.rows() != 1 || bv.rows() != 1 || gv.cols() != xv.cols() || bv.cols() != xv.cols()) {
    throw std::invalid_argument("layer_norm: gamma/beta must be 1 x cols(x)");
  }
  const Index n = xv.rows(), d = xv.cols();
  Mat xhat(n, d);
  Vec inv_s(n);
  for (Index i = 0; i < n; ++i) {
    const double mu = xv.row(i).mean();
    const double var = (xv.row(i).array() - mu).square().mean();
    inv_s(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = ((xv.row(i).array() - mu) * inv_s(i)).matrix();
  }
  Mat y(n, d);
  for (Index i = 0; i < n; ++i) {
    y.row(i) = xhat.row(i).cwiseProduct(gv.row(0)) + bv.row(0);
  }
  return push(std::move(y), [x, gamma, beta, xhat, inv_s](Tape& t, const Node& self) {
    const Mat& g = self.grad;
    const Mat& gv = t.node(gamma).value;
    const Index n = g.rows(), d = g.cols();
    t.node(gamma).grad += g.cwiseProduct(xhat).colwise().sum();
    t.node(beta).grad += g.colwise().sum();
    Mat dx(n, d);
    for (Index i = 0; i < n; ++i) {
      const Eigen::RowVectorXd dxhat = g.row(i).cwiseProduct(gv.row(0));
      const double m1 = dxhat.mean();
      const double m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
      dx.row(i) = (inv_s(i) * (dxhat.array() - m1 - xhat.row(i).array() * m2)).matrix();
    }
    t.node(x).grad += dx;
  });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var Tape::gelu(Var a) {
  check_finite(node(a).value, "gelu");
  const Mat& x = node(a).value;
  Mat u = (kGeluC * (x.array() + kGeluA * x.array().cube())).matrix();
  Mat v = (0.5 * x.array() * (1.0 + u.array().tanh())).matrix();
  return push(std::move(v), [a, u](Tape& t, const Node& self) {
    const Mat& x = t.node(a).value;
    const Eigen::ArrayXXd th = u.array().tanh();
    const Eigen::ArrayXXd sech2 = 1.0 - th.square();
    const Eigen::ArrayXXd du = kGeluC * (1.0 + 3.0 * kGeluA * x.array().square());
    Mat dx = (self.grad.array() * (0.5 * (1.0 + th) + 0.5 * x.array() * sech2 * du)).matrix();
    t.node(a).grad += dx;
  });
}

Var Tape::slice_cols(Var a, Index start, Index n) {
  const Mat& av = node(a).value;
  if (start < 0 || n < 0 || start + n > av.cols()) {
    throw std::invalid_argument("slice_cols: range out of bounds");
  }
  Mat v = av.middleCols(start, n);
  return push(std::move(v), [a, start, n](Tape& t, const Node& self) {
    t.node(a).grad.middleCols(start, n) += self.grad;
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const Index rows = node(parts[0]).value.rows();
  Index cols = 0;
  for (const Var p : parts) {
    if (node(p).value.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += node(p).value.cols();
  }
  Mat v(rows, cols);
  Index off = 0;
  for (const Var p : parts) {
    const Mat& pv = node(p).value;
    v.middleCols(off, pv.cols()) = pv;
    off += pv.cols();
  }
  return push(std::move(v), [parts](Tape& t, const Node& self) {
    Index off = 0;
    for (const Var p : parts) {
      const Index c = t.node(p).value.cols();
      t.node(p).grad += self.grad.middleCols(off, c);
      off += c;
    }
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  const Index cols = node(parts[0]).value.cols();
  Index rows = 0;
  for (const Var p : parts) {
    if (node(p).value.cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
    rows += node(p).value.rows();
  }
  Mat v(rows, cols);
  Index off = 0;
  for (const Var p : parts) {
    const Mat& pv = node(p).value;
    v.middleRows(off, pv.rows()) = pv;
    off += pv.rows();
  }
  return push(std::move(v), [parts](Tape& t, const Node& self) {
    Index off = 0;
    for (const Var p : parts) {
      const Index r = t.node(p).value.rows();
      t.node(p).grad += self.grad.middleRows(off, r);
      off += r;
    }
  });
}

Var Tape::add_rowvec(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw std::invalid_argument("add_rowvec: b must be 1 x cols(a)");
  }
  Mat v = av.rowwise() + bv.row(0);
  return push(std::move(v), [a, b](Tape& t, const Node& self) {
    t.add_grad(a, self.grad);
    t.node(b).grad += self.grad.colwise().sum();
  });
}

Var Tape::rowwise_cosine(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  check_same_shape(av, bv, "rowwise_cosine");
  const Index n = av.rows();
  Mat c(n, 1);
  for (Index i = 0; i < n; ++i) {
    const double na = av.row(i).norm();
    const double nb = bv.row(i).norm();
    if (na == 0.0 || nb == 0.0) {
      throw std::domain_error("rowwise_cosine: zero-norm row " + std::to_string(i));
    }
    c(i, 0) = av.row(i).dot(bv.row(i)) / (na * nb);
  }
  return push(std::move(c), [a, b](Tape& t, const Node& self) {
    const Mat& av = t.node(a).value;
    const Mat& bv = t.node(b).value;
    for (Index i = 0; i < av.rows(); ++i) {
      const double g = self.grad(i, 0);
      if (g == 0.0) continue;
      const double na = av.row(i).norm();
      const double nb = bv.row(i).norm();
      const double c = self.value(i, 0);
      t.node(a).grad.row(i) += g * (bv.row(i) / (na * nb) - c * av.row(i) / (na * na));
      t.node(b).grad.row(i) += g * (av.row(i) / (na * nb) - c * bv.row(i) / (nb * nb));
    }
  });
}

Var Tape::sum(Var a) {
  Mat v(1, 1);
  v(0, 0) = node(a).value.sum();
  return push(std::move(v), [a](Tape& t, const Node& self) {
    t.node(a).grad.array() += self.grad(0, 0);
  });
}

Var Tape::colmean(Var a) {
  const Mat& av = node(a).value;
  if (av.rows() == 0) throw std::invalid_argument("colmean: empty input");
  Mat v = av.colwise().mean();
  return push(std::move(v), [a](Tape& t, const Node& self) {
    const double inv_n = 1.0 / static_cast<double>(t.node(a).value.rows());
    t.node(a).grad += inv_n * self.grad.replicate(t.node(a).value.rows(), 1);
  });
}

Var Tape::cosine_sim(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.rows() != 1 || bv.rows() != 1) {
    throw std::invalid_argument("cosine_sim: inputs must be 1 x d row vectors");
  }
  return rowwise_cosine(a, b);
}

void Tape::backward(Var loss) {
  Node& top = node(loss);
  if (top.value.rows() != 1 || top.value.cols() != 1) {
    throw std::invalid_argument("backward: loss must be scalar (1x1)");
  }
  for (Node& n : nodes_) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  top.grad(0, 0) = 1.0;
  for (int32_t i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.backprop) n.backprop(*this, n);
    if (n.bound) n.bound->grad += n.grad;
  }
}

MhaOut multi_head_attention(Tape& t, Var q, Var k, Var v, const MhaWeights& w, int heads) {
  const Index d = t.value(q).cols();
  if (heads <= 0 || d % heads != 0) {
    throw std::invalid_argument("multi_head_attention: dim " + std::to_string(d) +
                                " not divisible by heads " + std::to_string(heads));
  }
  if (t.value(k).cols() != d || t.value(v).cols() != d) {
    throw std::invalid_argument("multi_head_attention: K/V feature dim mismatch");
  }
  if (t.value(k).rows() != t.value(v).rows()) {
    throw std::invalid_argument("multi_head_attention: K and V row counts differ");
  }
  const Index dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  Var qp = t.matmul(q, w.wq);
  Var kp = t.matmul(k, w.wk);
  Var vp = t.matmul(v, w.wv);

  std::vector<Var> head_out;
  Var attn_sum{};
  for (int h = 0; h < heads; ++h) {
    Var qh = t.slice_cols(qp, h * dh, dh);
    Var kh = t.slice_cols(kp, h * dh, dh);
    Var vh = t.slice_cols(vp, h * dh, dh);
    Var scores = t.scale(t.matmul(qh, t.transpose(kh)), inv_sqrt);
    Var a = t.softmax_rows(scores);
    head_out.push_back(t.matmul(a, vh));
    attn_sum = (h == 0) ? a : t.add(attn_sum, a);
  }
  Var concat = (heads == 1) ? head_out[0] : t.concat_cols(head_out);
  MhaOut out;
  out.out = t.matmul(concat, w.wo);
  out.attn = (heads == 1) ? attn_sum : t.scale(attn_sum, 1.0 / heads);
  return out;
}

Var ffn_forward(Tape& t, Var x, const FfnWeights& w) {
  Var h = t.gelu(t.add_rowvec(t.matmul(x, w.w1), w.b1));
  return t.add_rowvec(t.matmul(h, w.w2), w.b2);
}

}  // namespace mvn::ad
