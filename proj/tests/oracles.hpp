// Independent straight-line reference implementations used only by tests.
// These deliberately avoid the library's kernels and autodiff path.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gian/matrix.hpp"

namespace oracle {

using gian::Matrix;

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

inline Matrix softmax_rows(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    double m = x(r, 0);
    for (int c = 1; c < x.cols(); ++c) m = std::max(m, x(r, c));
    double denom = 0.0;
    for (int c = 0; c < x.cols(); ++c) denom += std::exp(x(r, c) - m);
    for (int c = 0; c < x.cols(); ++c) y(r, c) = std::exp(x(r, c) - m) / denom;
  }
  return y;
}

// Normalized hypergraph adjacency D^-1/2 H W B^-1 H^T D^-1/2 evaluated
// entry by entry, with the zero-degree clamp (degrees <= 1e-12 are treated
// as zero, matching the library convention).
inline Matrix hypergraph_adjacency(const Matrix& h, const std::vector<double>& w) {
  const int T = h.rows(), M = h.cols();
  const double floor = 1e-12;
  std::vector<double> d(T, 0.0), b(M, 0.0);
  for (int t = 0; t < T; ++t) {
    for (int e = 0; e < M; ++e) d[t] += w[e] * h(t, e);
  }
  for (int e = 0; e < M; ++e) {
    for (int t = 0; t < T; ++t) b[e] += h(t, e);
  }
  Matrix adj(T, T);
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < T; ++s) {
      double sum = 0.0;
      for (int e = 0; e < M; ++e) {
        const double b_inv = b[e] > floor ? 1.0 / b[e] : 0.0;
        sum += h(t, e) * w[e] * b_inv * h(s, e);
      }
      const double rt = d[t] > floor ? 1.0 / std::sqrt(d[t]) : 0.0;
      const double rs = d[s] > floor ? 1.0 / std::sqrt(d[s]) : 0.0;
      adj(t, s) = rt * sum * rs;
    }
  }
  return adj;
}

// Mean over rows of 0.5 KL(P||M) + 0.5 KL(Q||M), rows softmax-normalized,
// natural log with the library's 1e-12 clamp semantics.
inline double js_divergence(const Matrix& fa, const Matrix& fb) {
  const Matrix p = softmax_rows(fa);
  const Matrix q = softmax_rows(fb);
  const double floor = 1e-12;
  double total = 0.0;
  for (int r = 0; r < p.rows(); ++r) {
    double kl_pm = 0.0, kl_qm = 0.0;
    for (int c = 0; c < p.cols(); ++c) {
      const double m = 0.5 * (p(r, c) + q(r, c));
      kl_pm += p(r, c) * (std::log(std::max(p(r, c), floor)) - std::log(std::max(m, floor)));
      kl_qm += q(r, c) * (std::log(std::max(q(r, c), floor)) - std::log(std::max(m, floor)));
    }
    total += 0.5 * (kl_pm + kl_qm);
  }
  return total / p.rows();
}

// Cyclic Jacobi eigendecomposition for a symmetric matrix; returns the
// eigenvalues and checks its own reconstruction.
inline std::vector<double> symmetric_eigenvalues(Matrix a, double* reconstruction_err = nullptr) {
  const int n = a.rows();
  Matrix v = Matrix::identity(n);
  const Matrix original = a;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (reconstruction_err != nullptr) {
    // || V diag(a) V^T - original ||_max
    Matrix recon(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += v(i, k) * a(k, k) * v(j, k);
        recon(i, j) = s;
      }
    }
    *reconstruction_err = gian::max_abs_diff(recon, original);
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  return eig;
}

// Ordinary least squares via normal equations and Gaussian elimination.
// Returns predictions X w for the fitted w (with intercept column appended).
inline std::vector<double> least_squares_predictions(const Matrix& x,
                                                     const std::vector<double>& y) {
  const int n = x.rows();
  const int p = x.cols() + 1;  // + intercept
  Matrix xa(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < x.cols(); ++j) xa(i, j) = x(i, j);
    xa(i, p - 1) = 1.0;
  }
  // Normal equations with a tiny ridge so collinear (duplicated) columns
  // stay solvable; the residual check is unaffected at exact-fit problems.
  Matrix g(p, p);
  std::vector<double> rhs(p, 0.0);
  for (int a2 = 0; a2 < p; ++a2) {
    for (int b2 = 0; b2 < p; ++b2) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += xa(i, a2) * xa(i, b2);
      g(a2, b2) = s + (a2 == b2 ? 1e-9 : 0.0);
    }
    for (int i = 0; i < n; ++i) rhs[a2] += xa(i, a2) * y[i];
  }
  // Gaussian elimination with partial pivoting.
  std::vector<int> perm(p);
  for (int i = 0; i < p; ++i) perm[i] = i;
  for (int col = 0; col < p; ++col) {
    int pivot = col;
    for (int r = col + 1; r < p; ++r) {
      if (std::fabs(g(r, col)) > std::fabs(g(pivot, col))) pivot = r;
    }
    if (pivot != col) {
      for (int c = 0; c < p; ++c) std::swap(g(col, c), g(pivot, c));
      std::swap(rhs[col], rhs[pivot]);
    }
    const double d = g(col, col);
    if (std::fabs(d) < 1e-300) throw std::runtime_error("least squares: singular system");
    for (int r = col + 1; r < p; ++r) {
      const double f = g(r, col) / d;
      for (int c = col; c < p; ++c) g(r, c) -= f * g(col, c);
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> w(p, 0.0);
  for (int r = p - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int c = r + 1; c < p; ++c) s -= g(r, c) * w[c];
    w[r] = s / g(r, r);
  }
  std::vector<double> preds(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) preds[i] += xa(i, j) * w[j];
  }
  return preds;
}

// Row-wise layernorm, gain 1 bias 0, eps matching the library.
inline Matrix layer_norm_plain(const Matrix& x, double eps = 1e-5) {
  Matrix y(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    double mean = 0.0;
    for (int c = 0; c < x.cols(); ++c) mean += x(r, c);
    mean /= x.cols();
    double var = 0.0;
    for (int c = 0; c < x.cols(); ++c) var += (x(r, c) - mean) * (x(r, c) - mean);
    var /= x.cols();
    const double rstd = 1.0 / std::sqrt(var + eps);
    for (int c = 0; c < x.cols(); ++c) y(r, c) = (x(r, c) - mean) * rstd;
  }
  return y;
}

}  // namespace oracle
