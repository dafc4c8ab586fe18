#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gian/matrix.hpp"

namespace gian::ad {

class Tape;

// Handle into a tape. Cheap to copy; valid for the lifetime of its tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Matrix& value() const;
  // Accumulated gradient after backward(); zeros if this node was never
  // reached (or is a constant).
  Matrix grad() const;
  int rows() const;
  int cols() const;
};

// Reverse-mode tape over dense matrices. One tape per forward pass; records
// are appended in execution order, so every input of record k comes from a
// record with index < k. backward() walks the records once, in reverse.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Tracked leaf (a parameter): participates in gradients.
  Var leaf(Matrix value, std::string name = "leaf");
  // Untracked leaf (data, detached features): gradients never flow into it.
  Var constant(Matrix value, std::string name = "const");

  // root must be 1x1. Seeds its gradient with 1 and replays the tape in
  // reverse; each record's backward rule runs exactly once.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }
  std::size_t op_count() const { return op_count_; }
  std::size_t backward_visits() const { return backward_visits_; }

  // Diagnostics: index and name of the first node holding a non-finite
  // value, or -1 if all values are finite.
  std::pair<int, std::string> first_non_finite() const;

  // Smallest distance of any kinked op's input (relu, abs, binarize_st,
  // clamped roots/inverse/log) from its kink. Finite-difference probes are
  // only trustworthy when this clears the step size comfortably.
  double kink_margin() const;

  const Matrix& val(int id) const { return nodes_[id].value; }
  const std::string& name(int id) const { return nodes_[id].name; }
  bool wants_grad(int id) const { return nodes_[id].requires_grad; }
  // Lazily allocates the gradient buffer (zeros, same shape as the value).
  Matrix& grad_mut(int id);
  bool grad_allocated(int id) const { return !nodes_[id].grad.empty() || nodes_[id].value.empty(); }

  // Low-level record constructor the ops build on.
  Var emplace(Matrix value, bool requires_grad, std::string name,
              std::function<void(Tape&, const Matrix&)> backward_fn,
              std::vector<int> input_ids = {});

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // empty until touched by backward
    bool requires_grad = false;
    std::string name;
    std::vector<int> input_ids;
    std::function<void(Tape&, const Matrix& out_grad)> backward_fn;  // null for leaves
  };

  std::vector<Node> nodes_;
  std::size_t op_count_ = 0;
  std::size_t backward_visits_ = 0;
};

// --- ops ------------------------------------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var a);

// Elementwise; binary ops require equal shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var relu(Var a);      // subgradient 0 at exactly 0
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);       // domain error on any entry <= 0
Var log_clamped(Var a);  // log(max(x, 1e-12)); zero gradient at the floor
Var abs(Var a);       // subgradient 0 at exactly 0
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var rsqrt_clamp0(Var a);  // x > floor ? x^-1/2 : 0 (pseudo-inverse convention)
Var sqrt_clamp0(Var a);   // x > floor ? x^1/2 : 0
Var inv_clamp0(Var a);    // x > floor ? 1/x : 0

// Row-wise softmax with max subtraction.
Var softmax_rows(Var a);

// Reductions. sum/mean produce 1x1; row_mean produces rows x 1.
Var sum(Var a);
Var mean(Var a);
Var row_mean(Var a);

// Stacks parts (equal column counts) in argument order.
Var concat_rows(const std::vector<Var>& parts);

// Broadcasts: v is rows x 1 (colvec) or 1 x cols (rowvec).
Var mul_colvec(Var a, Var v);
Var mul_rowvec(Var a, Var v);
Var add_colvec(Var a, Var v);
Var add_rowvec(Var a, Var v);

// Straight-through step: forward x >= 0 ? 1 : 0, backward through the
// sigmoid(x/temperature) surrogate. Intentionally not a true derivative.
Var binarize_st(Var a, double temperature);

// Detached copy (constant on the same tape).
Var detach(Var a);

constexpr double kLogClampFloor = 1e-12;
constexpr double kClampFloor = 1e-12;  // zero threshold of the clamped roots/inverse

// --- gradient checking ------------------------------------------------------

// Builds a scalar Var from leaves created out of `point`, in order.
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckOptions {
  double step = 1e-5;
  // When non-empty, only these (param index, flat entry) coordinates are
  // probed; otherwise every entry of every parameter.
  std::vector<std::pair<int, std::size_t>> subset;
};

// Max over probed coordinates of
//   |analytic - central_difference| / max(1, |analytic|, |central_difference|).
// Throws if f evaluates non-finite at any probe point.
double grad_check(const ScalarFn& f, const std::vector<Matrix>& point,
                  const GradCheckOptions& opts = {});

}  // namespace gian::ad
