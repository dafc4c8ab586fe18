#include "gian/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gian::ad {

const Matrix& Var::value() const { return tape->val(id); }

Matrix Var::grad() const {
  const Matrix& v = tape->val(id);
  if (!tape->grad_allocated(id)) return Matrix::zeros(v.rows(), v.cols());
  return tape->grad_mut(id);
}

int Var::rows() const { return value().rows(); }
int Var::cols() const { return value().cols(); }

Var Tape::leaf(Matrix value, std::string name) {
  return emplace(std::move(value), true, std::move(name), nullptr);
}

Var Tape::constant(Matrix value, std::string name) {
  return emplace(std::move(value), false, std::move(name), nullptr);
}

Var Tape::emplace(Matrix value, bool requires_grad, std::string name,
                  std::function<void(Tape&, const Matrix&)> backward_fn,
                  std::vector<int> input_ids) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.name = std::move(name);
  node.input_ids = std::move(input_ids);
  node.backward_fn = std::move(backward_fn);
  if (node.backward_fn) ++op_count_;
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

double Tape::kink_margin() const {
  // log_clamped is excluded: its kink sits at the 1e-12 floor, far below any
  // value a desk-scale softmax produces.
  double margin = std::numeric_limits<double>::infinity();
  for (const Node& n : nodes_) {
    const bool kinked = n.name == "relu" || n.name == "abs" || n.name == "binarize_st" ||
                        n.name == "rsqrt_clamp0" || n.name == "sqrt_clamp0" ||
                        n.name == "inv_clamp0";
    if (!kinked) continue;
    for (int id : n.input_ids) {
      for (double x : nodes_[id].value.data()) {
        margin = std::min(margin, std::fabs(x));
      }
    }
  }
  return margin;
}

Matrix& Tape::grad_mut(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) {
    n.grad = Matrix::zeros(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

void Tape::backward(Var root) {
  if (root.tape != this) throw std::invalid_argument("backward: var from another tape");
  const Matrix& rv = nodes_[root.id].value;
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw std::invalid_argument("backward: root must be 1x1, got " + rv.shape_str());
  }
  grad_mut(root.id)(0, 0) = 1.0;
  backward_visits_ = 0;
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.backward_fn) continue;
    ++backward_visits_;
    if (n.grad.empty()) continue;  // nothing accumulated; propagating zeros is a no-op
    n.backward_fn(*this, n.grad);
  }
}

std::pair<int, std::string> Tape::first_non_finite() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].value.all_finite()) {
      return {static_cast<int>(i), nodes_[i].name};
    }
  }
  return {-1, ""};
}

// --- op helpers -------------------------------------------------------------

namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw std::invalid_argument("op on invalid Var");
  return *a.tape;
}

void require_same_tape(Var a, Var b, const char* op) {
  if (a.tape != b.tape) throw std::invalid_argument(std::string(op) + ": vars from different tapes");
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
  }
}

void accum(Tape& t, int id, const Matrix& delta) {
  if (!t.wants_grad(id)) return;
  Matrix& g = t.grad_mut(id);
  for (std::size_t i = 0; i < g.size(); ++i) g.at(i) += delta.at(i);
}

// Elementwise unary op with value map `fwd` and local derivative `dfn`
// (as a function of the input value x).
template <class Fwd, class Dfn>
Var unary_elementwise(Var a, const char* name, Fwd fwd, Dfn dfn) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  Matrix y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y.at(i) = fwd(x.at(i));
  if (!t.wants_grad(a.id)) return t.constant(std::move(y), name);
  const int aid = a.id;
  return t.emplace(
      std::move(y), true, name,
      [aid, dfn](Tape& tp, const Matrix& g) {
        if (!tp.wants_grad(aid)) return;
        const Matrix& x2 = tp.val(aid);
        Matrix& ag = tp.grad_mut(aid);
        for (std::size_t i = 0; i < ag.size(); ++i) ag.at(i) += g.at(i) * dfn(x2.at(i));
      },
      {aid});
}

}  // namespace

// --- core ops ---------------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_tape(a, b, "matmul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch " + av.shape_str() + " * " +
                                bv.shape_str());
  }
  Matrix y = gian::matmul(av, bv);
  const bool req = t.wants_grad(a.id) || t.wants_grad(b.id);
  if (!req) return t.constant(std::move(y), "matmul");
  const int aid = a.id, bid = b.id;
  return t.emplace(
      std::move(y), true, "matmul",
      [aid, bid](Tape& tp, const Matrix& g) {
        if (tp.wants_grad(aid)) accum(tp, aid, gian::matmul(g, gian::transpose(tp.val(bid))));
        if (tp.wants_grad(bid)) accum(tp, bid, gian::matmul(gian::transpose(tp.val(aid)), g));
      },
      {aid, bid});
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  Matrix y = gian::transpose(a.value());
  if (!t.wants_grad(a.id)) return t.constant(std::move(y), "transpose");
  const int aid = a.id;
  return t.emplace(
      std::move(y), true, "transpose",
      [aid](Tape& tp, const Matrix& g) { accum(tp, aid, gian::transpose(g)); }, {aid});
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Matrix y = gian::add(a.value(), b.value());
  const bool req = t.wants_grad(a.id) || t.wants_grad(b.id);
  if (!req) return t.constant(std::move(y), "add");
  const int aid = a.id, bid = b.id;
  return t.emplace(
      std::move(y), true, "add",
      [aid, bid](Tape& tp, const Matrix& g) {
        accum(tp, aid, g);
        accum(tp, bid, g);
      },
      {aid, bid});
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Matrix y = gian::sub(a.value(), b.value());
  const bool req = t.wants_grad(a.id) || t.wants_grad(b.id);
  if (!req) return t.constant(std::move(y), "sub");
  const int aid = a.id, bid = b.id;
  return t.emplace(
      std::move(y), true, "sub",
      [aid, bid](Tape& tp, const Matrix& g) {
        accum(tp, aid, g);
        if (tp.wants_grad(bid)) accum(tp, bid, gian::scale(g, -1.0));
      },
      {aid, bid});
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Matrix y = gian::hadamard(a.value(), b.value());
  const bool req = t.wants_grad(a.id) || t.wants_grad(b.id);
  if (!req) return t.constant(std::move(y), "mul");
  const int aid = a.id, bid = b.id;
  return t.emplace(
      std::move(y), true, "mul",
      [aid, bid](Tape& tp, const Matrix& g) {
        if (tp.wants_grad(aid)) accum(tp, aid, gian::hadamard(g, tp.val(bid)));
        if (tp.wants_grad(bid)) accum(tp, bid, gian::hadamard(g, tp.val(aid)));
      },
      {aid, bid});
}

Var relu(Var a) {
  return unary_elementwise(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

static double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var sigmoid(Var a) {
  return unary_elementwise(
      a, "sigmoid", [](double x) { return sigmoid_scalar(x); },
      [](double x) {
        const double s = sigmoid_scalar(x);
        return s * (1.0 - s);
      });
}

Var exp(Var a) {
  return unary_elementwise(
      a, "exp", [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var log(Var a) {
  for (double v : a.value().data()) {
    if (!(v > 0.0)) {
      throw std::domain_error("log: non-positive entry " + std::to_string(v));
    }
  }
  return unary_elementwise(
      a, "log", [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Var log_clamped(Var a) {
  return unary_elementwise(
      a, "log_clamped", [](double x) { return std::log(std::max(x, kLogClampFloor)); },
      [](double x) { return x > kLogClampFloor ? 1.0 / x : 0.0; });
}

Var abs(Var a) {
  return unary_elementwise(
      a, "abs", [](double x) { return std::fabs(x); },
      [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var scale(Var a, double s) {
  return unary_elementwise(
      a, "scale", [s](double x) { return s * x; }, [s](double) { return s; });
}

Var add_scalar(Var a, double s) {
  return unary_elementwise(
      a, "add_scalar", [s](double x) { return x + s; }, [](double) { return 1.0; });
}

// Degrees at or below the floor count as zero (pseudo-inverse convention);
// the floor also keeps the x^-3/2 and x^-2 backward factors representable.
Var rsqrt_clamp0(Var a) {
  return unary_elementwise(
      a, "rsqrt_clamp0",
      [](double x) { return x > kClampFloor ? 1.0 / std::sqrt(x) : 0.0; },
      [](double x) {
        if (x <= kClampFloor) return 0.0;
        const double r = 1.0 / std::sqrt(x);
        return -0.5 * r * r * r;
      });
}

Var sqrt_clamp0(Var a) {
  return unary_elementwise(
      a, "sqrt_clamp0", [](double x) { return x > kClampFloor ? std::sqrt(x) : 0.0; },
      [](double x) { return x > kClampFloor ? 0.5 / std::sqrt(x) : 0.0; });
}

Var inv_clamp0(Var a) {
  return unary_elementwise(
      a, "inv_clamp0", [](double x) { return x > kClampFloor ? 1.0 / x : 0.0; },
      [](double x) { return x > kClampFloor ? -1.0 / (x * x) : 0.0; });
}

Var softmax_rows(Var a) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    double m = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < x.cols(); ++c) m = std::max(m, x(r, c));
    double denom = 0.0;
    for (int c = 0; c < x.cols(); ++c) {
      y(r, c) = std::exp(x(r, c) - m);
      denom += y(r, c);
    }
    for (int c = 0; c < x.cols(); ++c) y(r, c) /= denom;
  }
  if (!t.wants_grad(a.id)) return t.constant(std::move(y), "softmax_rows");
  const int aid = a.id;
  const int oid = static_cast<int>(t.size());
  // dx_rc = y_rc * (g_rc - sum_c'(g_rc' * y_rc'))
  return t.emplace(
      std::move(y), true, "softmax_rows",
      [aid, oid](Tape& tp, const Matrix& g) {
        const Matrix& yv = tp.val(oid);
        Matrix& ag = tp.grad_mut(aid);
        for (int r = 0; r < yv.rows(); ++r) {
          double dot = 0.0;
          for (int c = 0; c < yv.cols(); ++c) dot += g(r, c) * yv(r, c);
          for (int c = 0; c < yv.cols(); ++c) ag(r, c) += yv(r, c) * (g(r, c) - dot);
        }
      },
      {aid});
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  double s = 0.0;
  for (double v : x.data()) s += v;
  Matrix y(1, 1);
  y(0, 0) = s;
  if (!t.wants_grad(a.id)) return t.constant(std::move(y), "sum");
  const int aid = a.id;
  return t.emplace(
      std::move(y), true, "sum",
      [aid](Tape& tp, const Matrix& g) {
        Matrix& ag = tp.grad_mut(aid);
        for (std::size_t i = 0; i < ag.size(); ++i) ag.at(i) += g(0, 0);
      },
      {aid});
}

Var mean(Var a) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  if (x.size() == 0) throw std::invalid_argument("mean: empty matrix");
  double s = 0.0;
  for (double v : x.data()) s += v;
  Matrix y(1, 1);
  y(0, 0) = s / static_cast<double>(x.size());
  if (!t.wants_grad(a.id)) return t.constant(std::move(y), "mean");
  const int aid = a.id;
  const double inv_n = 1.0 / static_cast<double>(x.size());
  return t.emplace(
      std::move(y), true, "mean",
      [aid, inv_n](Tape& tp, const Matrix& g) {
        Matrix& ag = tp.grad_mut(aid);
        for (std::size_t i = 0; i < ag.size(); ++i) ag.at(i) += g(0, 0) * inv_n;
      },
      {aid});
}

Var row_mean(Var a) {
  Tape& t = tape_of(a);
  const Matrix& x = a.value();
  if (x.cols() == 0) throw std::invalid_argument("row_mean: zero columns");
  Matrix y(x.rows(), 1);
  for (int r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (int c = 0; c < x.cols(); ++c) s += x(r, c);
    y(r, 0) = s / x.cols();
  }
  if (!t.wants_grad(a.id)) return t.constant(std::move(y), "row_mean");
  const int aid = a.id;
  const double inv_c = 1.0 / x.cols();
  return t.emplace(
      std::move(y), true, "row_mean",
      [aid, inv_c](Tape& tp, const Matrix& g) {
        Matrix& ag = tp.grad_mut(aid);
        for (int r = 0; r < ag.rows(); ++r) {
          for (int c = 0; c < ag.cols(); ++c) ag(r, c) += g(r, 0) * inv_c;
        }
      },
      {aid});
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
  Tape& t = tape_of(parts[0]);
  int cols = parts[0].value().cols();
  int rows = 0;
  bool req = false;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p, "concat_rows");
    if (p.value().cols() != cols) {
      throw std::invalid_argument("concat_rows: column mismatch " + parts[0].value().shape_str() +
                                  " vs " + p.value().shape_str());
    }
    rows += p.value().rows();
    req = req || t.wants_grad(p.id);
  }
  Matrix y(rows, cols);
  int off = 0;
  std::vector<int> ids;
  std::vector<int> offsets;
  for (const Var& p : parts) {
    const Matrix& pv = p.value();
    for (int r = 0; r < pv.rows(); ++r) {
      for (int c = 0; c < cols; ++c) y(off + r, c) = pv(r, c);
    }
    ids.push_back(p.id);
    offsets.push_back(off);
    off += pv.rows();
  }
  if (!req) return t.constant(std::move(y), "concat_rows");
  return t.emplace(
      std::move(y), true, "concat_rows",
      [ids, offsets](Tape& tp, const Matrix& g) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (!tp.wants_grad(ids[k])) continue;
          Matrix& pg = tp.grad_mut(ids[k]);
          const int o = offsets[k];
          for (int r = 0; r < pg.rows(); ++r) {
            for (int c = 0; c < pg.cols(); ++c) pg(r, c) += g(o + r, c);
          }
        }
      },
      ids);
}

namespace {

void require_colvec(const Matrix& a, const Matrix& v, const char* op) {
  if (v.cols() != 1 || v.rows() != a.rows()) {
    throw std::invalid_argument(std::string(op) + ": expected " + std::to_string(a.rows()) +
                                "x1 column vector, got " + v.shape_str());
  }
}

void require_rowvec(const Matrix& a, const Matrix& v, const char* op) {
  if (v.rows() != 1 || v.cols() != a.cols()) {
    throw std::invalid_argument(std::string(op) + ": expected 1x" + std::to_string(a.cols()) +
                                " row vector, got " + v.shape_str());
  }
}

}  // namespace

Var mul_colvec(Var a, Var v) {
  Tape& t = tape_of(a);
  require_same_tape(a, v, "mul_colvec");
  require_colvec(a.value(), v.value(), "mul_colvec");
  const Matrix& av = a.value();
  const Matrix& vv = v.value();
  Matrix y(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    for (int c = 0; c < av.cols(); ++c) y(r, c) = av(r, c) * vv(r, 0);
  }
  const bool req = t.wants_grad(a.id) || t.wants_grad(v.id);
  if (!req) return t.constant(std::move(y), "mul_colvec");
  const int aid = a.id, vid = v.id;
  return t.emplace(std::move(y), true, "mul_colvec", [aid, vid](Tape& tp, const Matrix& g) {
    const Matrix& a2 = tp.val(aid);
    const Matrix& v2 = tp.val(vid);
    if (tp.wants_grad(aid)) {
      Matrix& ag = tp.grad_mut(aid);
      for (int r = 0; r < ag.rows(); ++r) {
        for (int c = 0; c < ag.cols(); ++c) ag(r, c) += g(r, c) * v2(r, 0);
      }
    }
    if (tp.wants_grad(vid)) {
      Matrix& vg = tp.grad_mut(vid);
      for (int r = 0; r < a2.rows(); ++r) {
        double s = 0.0;
        for (int c = 0; c < a2.cols(); ++c) s += g(r, c) * a2(r, c);
        vg(r, 0) += s;
      }
    }
  }, {aid, vid});
}

Var mul_rowvec(Var a, Var v) {
  Tape& t = tape_of(a);
  require_same_tape(a, v, "mul_rowvec");
  require_rowvec(a.value(), v.value(), "mul_rowvec");
  const Matrix& av = a.value();
  const Matrix& vv = v.value();
  Matrix y(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    for (int c = 0; c < av.cols(); ++c) y(r, c) = av(r, c) * vv(0, c);
  }
  const bool req = t.wants_grad(a.id) || t.wants_grad(v.id);
  if (!req) return t.constant(std::move(y), "mul_rowvec");
  const int aid = a.id, vid = v.id;
  return t.emplace(std::move(y), true, "mul_rowvec", [aid, vid](Tape& tp, const Matrix& g) {
    const Matrix& a2 = tp.val(aid);
    const Matrix& v2 = tp.val(vid);
    if (tp.wants_grad(aid)) {
      Matrix& ag = tp.grad_mut(aid);
      for (int r = 0; r < ag.rows(); ++r) {
        for (int c = 0; c < ag.cols(); ++c) ag(r, c) += g(r, c) * v2(0, c);
      }
    }
    if (tp.wants_grad(vid)) {
      Matrix& vg = tp.grad_mut(vid);
      for (int c = 0; c < a2.cols(); ++c) {
        double s = 0.0;
        for (int r = 0; r < a2.rows(); ++r) s += g(r, c) * a2(r, c);
        vg(0, c) += s;
      }
    }
  }, {aid, vid});
}

Var add_colvec(Var a, Var v) {
  Tape& t = tape_of(a);
  require_same_tape(a, v, "add_colvec");
  require_colvec(a.value(), v.value(), "add_colvec");
  const Matrix& av = a.value();
  const Matrix& vv = v.value();
  Matrix y(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    for (int c = 0; c < av.cols(); ++c) y(r, c) = av(r, c) + vv(r, 0);
  }
  const bool req = t.wants_grad(a.id) || t.wants_grad(v.id);
  if (!req) return t.constant(std::move(y), "add_colvec");
  const int aid = a.id, vid = v.id;
  return t.emplace(std::move(y), true, "add_colvec", [aid, vid](Tape& tp, const Matrix& g) {
    accum(tp, aid, g);
    if (tp.wants_grad(vid)) {
      Matrix& vg = tp.grad_mut(vid);
      for (int r = 0; r < g.rows(); ++r) {
        double s = 0.0;
        for (int c = 0; c < g.cols(); ++c) s += g(r, c);
        vg(r, 0) += s;
      }
    }
  }, {aid, vid});
}

Var add_rowvec(Var a, Var v) {
  Tape& t = tape_of(a);
  require_same_tape(a, v, "add_rowvec");
  require_rowvec(a.value(), v.value(), "add_rowvec");
  const Matrix& av = a.value();
  const Matrix& vv = v.value();
  Matrix y(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    for (int c = 0; c < av.cols(); ++c) y(r, c) = av(r, c) + vv(0, c);
  }
  const bool req = t.wants_grad(a.id) || t.wants_grad(v.id);
  if (!req) return t.constant(std::move(y), "add_rowvec");
  const int aid = a.id, vid = v.id;
  return t.emplace(std::move(y), true, "add_rowvec", [aid, vid](Tape& tp, const Matrix& g) {
    accum(tp, aid, g);
    if (tp.wants_grad(vid)) {
      Matrix& vg = tp.grad_mut(vid);
      for (int c = 0; c < g.cols(); ++c) {
        double s = 0.0;
        for (int r = 0; r < g.rows(); ++r) s += g(r, c);
        vg(0, c) += s;
      }
    }
  }, {aid, vid});
}

Var binarize_st(Var a, double temperature) {
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("binarize_st: temperature must be positive");
  }
  const double inv_t = 1.0 / temperature;
  return unary_elementwise(
      a, "binarize_st", [](double x) { return x >= 0.0 ? 1.0 : 0.0; },
      [inv_t](double x) {
        const double s = sigmoid_scalar(x * inv_t);
        return s * (1.0 - s) * inv_t;
      });
}

Var detach(Var a) {
  return tape_of(a).constant(a.value(), "detach");
}

// --- gradient checking ------------------------------------------------------

namespace {

double eval_scalar(const ScalarFn& f, const std::vector<Matrix>& point) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (const Matrix& m : point) leaves.push_back(tape.leaf(m));
  Var root = f(tape, leaves);
  if (root.rows() != 1 || root.cols() != 1) {
    throw std::invalid_argument("grad_check: f must return a 1x1 scalar");
  }
  const double v = root.value()(0, 0);
  if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite evaluation");
  return v;
}

}  // namespace

double grad_check(const ScalarFn& f, const std::vector<Matrix>& point,
                  const GradCheckOptions& opts) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(point.size());
  for (const Matrix& m : point) leaves.push_back(tape.leaf(m));
  Var root = f(tape, leaves);
  if (root.rows() != 1 || root.cols() != 1) {
    throw std::invalid_argument("grad_check: f must return a 1x1 scalar");
  }
  if (!std::isfinite(root.value()(0, 0))) {
    throw std::runtime_error("grad_check: non-finite evaluation at base point");
  }
  tape.backward(root);
  std::vector<Matrix> analytic;
  analytic.reserve(leaves.size());
  for (const Var& l : leaves) analytic.push_back(l.grad());

  std::vector<std::pair<int, std::size_t>> coords = opts.subset;
  if (coords.empty()) {
    for (std::size_t p = 0; p < point.size(); ++p) {
      for (std::size_t e = 0; e < point[p].size(); ++e) {
        coords.emplace_back(static_cast<int>(p), e);
      }
    }
  }

  std::vector<Matrix> probe = point;
  double max_rel = 0.0;
  for (const auto& [pi, ei] : coords) {
    const double orig = probe[pi].at(ei);
    probe[pi].at(ei) = orig + opts.step;
    const double vp = eval_scalar(f, probe);
    probe[pi].at(ei) = orig - opts.step;
    const double vm = eval_scalar(f, probe);
    probe[pi].at(ei) = orig;
    const double fd = (vp - vm) / (2.0 * opts.step);
    const double an = analytic[pi].at(ei);
    const double rel =
        std::fabs(an - fd) / std::max({1.0, std::fabs(an), std::fabs(fd)});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace gian::ad
