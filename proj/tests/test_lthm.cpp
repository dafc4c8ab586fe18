#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gian/encoding.hpp"
#include "gian/lthm.hpp"
#include "gian/rng.hpp"
#include "oracles.hpp"

using namespace gian;

namespace {

Matrix random_matrix(CounterRng& rng, int r, int c, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.at(i) = rng.next_uniform(lo, hi);
  return m;
}

LthmParams random_params(CounterRng& rng, int d_m, int d_proj, int M, int d_h) {
  LthmParams p;
  p.psi = random_matrix(rng, d_m, d_proj);
  p.lambda_diag = random_matrix(rng, 1, d_proj, 0.5, 1.5);
  p.omega = random_matrix(rng, d_m, M);
  p.theta = random_matrix(rng, d_m, d_h);
  p.w = random_matrix(rng, 1, M, 0.5, 1.5);
  return p;
}

LthmVars to_vars(ad::Tape& t, const LthmParams& p) {
  return {t.leaf(p.psi, "psi"), t.leaf(p.lambda_diag, "lambda"), t.leaf(p.omega, "omega"),
          t.leaf(p.theta, "theta"), t.leaf(p.w, "w")};
}

}  // namespace

TEST_CASE("zero input: H is all 0.5, D = 0.5 sum(W), B = T/2") {
  CounterRng rng(1);
  const int T = 6, M = 4;
  const LthmParams p = random_params(rng, 3, 4, M, 3);
  ad::Tape t;
  const HypergraphVars g = learn_incidence(t.constant(Matrix::zeros(T, 3)), to_vars(t, p), {});

  double w_sum = 0.0;
  for (int e = 0; e < M; ++e) w_sum += p.w(0, e);
  for (std::size_t i = 0; i < g.H.value().size(); ++i) CHECK(g.H.value().at(i) == 0.5);
  for (int r = 0; r < T; ++r) {
    CHECK(g.D.value()(r, 0) == doctest::Approx(0.5 * w_sum).epsilon(1e-12));
  }
  for (int e = 0; e < M; ++e) {
    CHECK(g.B.value()(0, e) == doctest::Approx(T / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("T=1: each incidence entry is sigmoid of a scalar raw score") {
  CounterRng rng(2);
  const int d_m = 3, d_proj = 2, M = 4;
  const LthmParams p = random_params(rng, d_m, d_proj, M, 2);
  const Matrix x = random_matrix(rng, 1, d_m);
  const double tau = 0.7;

  ad::Tape t;
  LthmConfig cfg;
  cfg.temperature = tau;
  const HypergraphVars g = learn_incidence(t.constant(x), to_vars(t, p), cfg);

  // straight-line scalar evaluation
  std::vector<double> proj(d_proj, 0.0);
  for (int j = 0; j < d_proj; ++j) {
    for (int k = 0; k < d_m; ++k) proj[j] += x(0, k) * p.psi(k, j);
  }
  double s = 0.0;
  for (int j = 0; j < d_proj; ++j) s += proj[j] * p.lambda_diag(0, j) * proj[j];
  for (int e = 0; e < M; ++e) {
    double omega_col = 0.0;
    for (int k = 0; k < d_m; ++k) omega_col += x(0, k) * p.omega(k, e);
    const double raw = s * omega_col;
    const double expected = 1.0 / (1.0 + std::exp(-raw / tau));
    CHECK(g.H.value()(0, e) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("hard mode produces exactly step(raw)") {
  CounterRng rng(3);
  const LthmParams p = random_params(rng, 3, 4, 5, 3);
  const Matrix x = random_matrix(rng, 4, 3);

  ad::Tape t1, t2;
  LthmConfig soft_cfg;
  LthmConfig hard_cfg;
  hard_cfg.hard_incidence = true;
  const HypergraphVars soft = learn_incidence(t1.constant(x), to_vars(t1, p), soft_cfg);
  const HypergraphVars hard = learn_incidence(t2.constant(x), to_vars(t2, p), hard_cfg);
  for (std::size_t i = 0; i < hard.H.value().size(); ++i) {
    const double h = hard.H.value().at(i);
    CHECK((h == 0.0 || h == 1.0));
    // step(raw) == round of sigmoid(raw): sigmoid >= 0.5 iff raw >= 0
    CHECK(h == (soft.H.value().at(i) >= 0.5 ? 1.0 : 0.0));
  }
}

TEST_CASE("zero incidence reduces the operator to the identity") {
  CounterRng rng(4);
  const int T = 5, d_m = 3, d_h = 4;
  LthmParams p = random_params(rng, d_m, 4, 3, d_h);
  const Matrix x = random_matrix(rng, T, d_m);

  ad::Tape t;
  const LthmVars pv = to_vars(t, p);
  HypergraphVars g;
  g.H = t.constant(Matrix::zeros(T, 3));
  g.W = pv.w;
  g.M = 3;
  g.D = ad::matmul(g.H, ad::transpose(pv.w));
  g.B = ad::matmul(t.constant(Matrix::ones(1, T)), g.H);

  const ad::Var out = hypergraph_convolve(t.constant(x), g, pv, {});
  CHECK(out.value() == oracle::matmul(x, p.theta));
}

TEST_CASE("T=1, M=1, H=1, W=1: operator is 1 - 1 = 0") {
  ad::Tape t;
  LthmVars pv;
  pv.psi = t.leaf(Matrix{{1.0}});
  pv.lambda_diag = t.leaf(Matrix{{1.0}});
  pv.omega = t.leaf(Matrix{{1.0}});
  pv.theta = t.leaf(Matrix{{2.0}});
  pv.w = t.leaf(Matrix{{1.0}});
  HypergraphVars g;
  g.H = t.constant(Matrix{{1.0}});
  g.W = pv.w;
  g.M = 1;
  g.D = ad::matmul(g.H, ad::transpose(pv.w));
  g.B = ad::matmul(t.constant(Matrix::ones(1, 1)), g.H);

  const ad::Var out = hypergraph_convolve(t.constant(Matrix{{3.0}}), g, pv, {});
  CHECK(out.value()(0, 0) == 0.0);
}

TEST_CASE("random input matches the brute-force operator chain") {
  CounterRng rng(5);
  const int T = 4, d_m = 3, M = 5, d_h = 3;
  const LthmParams p = random_params(rng, d_m, 4, M, d_h);
  const Matrix x = random_matrix(rng, T, d_m);

  ad::Tape t;
  const ad::Var out = lthm_forward(t.constant(x), to_vars(t, p), {});

  // independent evaluation: incidence, degrees, adjacency, Laplacian product
  const Matrix proj = oracle::matmul(x, p.psi);
  Matrix scaled = proj;
  for (int r = 0; r < T; ++r) {
    for (int c = 0; c < 4; ++c) scaled(r, c) *= p.lambda_diag(0, c);
  }
  const Matrix sim = oracle::matmul(scaled, oracle::transpose(proj));
  const Matrix raw = oracle::matmul(sim, oracle::matmul(x, p.omega));
  Matrix h(T, M);
  for (std::size_t i = 0; i < h.size(); ++i) {
    h.at(i) = 1.0 / (1.0 + std::exp(-raw.at(i)));
  }
  std::vector<double> w(M);
  for (int e = 0; e < M; ++e) w[e] = p.w(0, e);
  const Matrix adjacency = oracle::hypergraph_adjacency(h, w);
  const Matrix projected = oracle::matmul(x, p.theta);
  Matrix expected = projected;
  const Matrix mixed = oracle::matmul(adjacency, projected);
  for (std::size_t i = 0; i < expected.size(); ++i) expected.at(i) -= mixed.at(i);

  CHECK(max_abs_diff(out.value(), expected) <= 1e-10);
}

TEST_CASE("Laplacian is symmetric to 1e-12") {
  CounterRng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 3 + static_cast<int>(rng.next_below(5));
    const int M = 1 + static_cast<int>(rng.next_below(6));
    Matrix h(T, M);
    for (std::size_t i = 0; i < h.size(); ++i) h.at(i) = rng.next_double() < 0.4 ? 1.0 : 0.0;
    std::vector<double> w(M);
    for (int e = 0; e < M; ++e) w[e] = rng.next_uniform(0.1, 2.0);
    const Matrix adjacency = oracle::hypergraph_adjacency(h, w);
    // L = I - adjacency; symmetry of L equals symmetry of the adjacency
    CHECK(max_abs_diff(adjacency, oracle::transpose(adjacency)) <= 1e-12);
  }
}

TEST_CASE("normalized adjacency eigenvalues lie in [0, 1] for binary incidence") {
  CounterRng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int T = 2 + static_cast<int>(rng.next_below(7));
    const int M = 1 + static_cast<int>(rng.next_below(5));
    Matrix h(T, M);
    for (std::size_t i = 0; i < h.size(); ++i) h.at(i) = rng.next_double() < 0.5 ? 1.0 : 0.0;
    std::vector<double> w(M);
    for (int e = 0; e < M; ++e) w[e] = rng.next_uniform(0.1, 2.0);
    const Matrix adjacency = oracle::hypergraph_adjacency(h, w);
    double recon_err = 0.0;
    const std::vector<double> eig = oracle::symmetric_eigenvalues(adjacency, &recon_err);
    CHECK(recon_err <= 1e-10);
    for (double e : eig) {
      CHECK(e >= -1e-9);
      CHECK(e <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("degree vectors recomputed from H and W match the stored ones") {
  CounterRng rng(8);
  const LthmParams p = random_params(rng, 3, 4, 4, 3);
  const Matrix x = random_matrix(rng, 5, 3);
  ad::Tape t;
  const HypergraphVars g = learn_incidence(t.constant(x), to_vars(t, p), {});
  const Matrix& h = g.H.value();
  for (int r = 0; r < 5; ++r) {
    double d = 0.0;
    for (int e = 0; e < 4; ++e) d += p.w(0, e) * h(r, e);
    CHECK(g.D.value()(r, 0) == doctest::Approx(d).epsilon(1e-12));
  }
  for (int e = 0; e < 4; ++e) {
    double b = 0.0;
    for (int r = 0; r < 5; ++r) b += h(r, e);
    CHECK(g.B.value()(0, e) == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("permuting rows permutes the output; positional encoding breaks it") {
  CounterRng rng(9);
  const int T = 5, d_m = 3;
  const LthmParams p = random_params(rng, d_m, 4, 3, 3);
  const Matrix x = random_matrix(rng, T, d_m);

  // reversal permutation
  Matrix xp(T, d_m);
  for (int r = 0; r < T; ++r) {
    for (int c = 0; c < d_m; ++c) xp(r, c) = x(T - 1 - r, c);
  }

  ad::Tape t1, t2;
  const Matrix out = lthm_forward(t1.constant(x), to_vars(t1, p), {}).value();
  const Matrix out_p = lthm_forward(t2.constant(xp), to_vars(t2, p), {}).value();
  for (int r = 0; r < T; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(out_p(r, c) == doctest::Approx(out(T - 1 - r, c)).epsilon(1e-9));
    }
  }

  // with PE first, equivariance must break
  ad::Tape t3, t4;
  const Matrix enc = lthm_forward(t3.constant(positional_encode(x)), to_vars(t3, p), {}).value();
  const Matrix enc_p =
      lthm_forward(t4.constant(positional_encode(xp)), to_vars(t4, p), {}).value();
  double max_diff = 0.0;
  for (int r = 0; r < T; ++r) {
    for (int c = 0; c < 3; ++c) {
      max_diff = std::max(max_diff, std::fabs(enc_p(r, c) - enc(T - 1 - r, c)));
    }
  }
  CHECK(max_diff > 1e-6);
}

TEST_CASE("soft and hard modes agree in the saturation regime") {
  // Construct raw scores far past +-5*temperature by scaling the metric.
  CounterRng rng(10);
  const int T = 3, d_m = 2, M = 2, d_h = 2;
  LthmParams p;
  p.psi = Matrix{{1.0, 0.0}, {0.0, 1.0}};
  p.lambda_diag = Matrix{{60.0, 60.0}};
  p.omega = random_matrix(rng, d_m, M, 0.8, 1.2);
  p.theta = random_matrix(rng, d_m, d_h, -0.5, 0.5);
  p.w = Matrix::ones(1, M);
  const Matrix x = random_matrix(rng, T, d_m, 0.7, 1.3);  // all-positive raw scores

  LthmConfig soft_cfg;
  LthmConfig hard_cfg;
  hard_cfg.hard_incidence = true;

  ad::Tape t0;
  const HypergraphVars g = learn_incidence(t0.constant(x), to_vars(t0, p), soft_cfg);
  double min_raw = 1e300;
  for (std::size_t i = 0; i < g.H.value().size(); ++i) {
    // invert sigmoid to recover |raw|
    const double h = g.H.value().at(i);
    min_raw = std::min(min_raw, std::fabs(std::log(h / (1.0 - h))));
  }
  REQUIRE(min_raw > 5.0);  // saturation regime premise

  ad::Tape t1, t2;
  const Matrix soft = lthm_forward(t1.constant(x), to_vars(t1, p), soft_cfg).value();
  const Matrix hard = lthm_forward(t2.constant(x), to_vars(t2, p), hard_cfg).value();
  CHECK(max_abs_diff(soft, hard) <= 1e-2);
}

TEST_CASE("eq2_literal flag reproduces the unnormalized left scaling") {
  CounterRng rng(11);
  const LthmParams p = random_params(rng, 3, 4, 3, 3);
  const Matrix x = random_matrix(rng, 4, 3);
  LthmConfig literal;
  literal.eq2_literal = true;
  ad::Tape t1, t2;
  const Matrix standard = lthm_forward(t1.constant(x), to_vars(t1, p), {}).value();
  const Matrix lit = lthm_forward(t2.constant(x), to_vars(t2, p), literal).value();
  CHECK(max_abs_diff(standard, lit) > 1e-8);
}

TEST_CASE("temperature must be positive") {
  ad::Tape t;
  CounterRng rng(12);
  const LthmParams p = random_params(rng, 2, 2, 2, 2);
  LthmConfig cfg;
  cfg.temperature = 0.0;
  CHECK_THROWS_AS(learn_incidence(t.constant(Matrix::zeros(2, 2)), to_vars(t, p), cfg),
                  std::invalid_argument);
}
