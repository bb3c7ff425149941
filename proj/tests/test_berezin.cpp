#include <doctest.h>

#include "dtn/berezin.hpp"
#include "test_util.hpp"

using namespace dtn;
using testutil::uniform;

namespace {
BlockOperator random_block(int k, bool hermitian) {
  BlockOperator b;
  b.k = k;
  b.M = Eigen::MatrixXcd::Zero(2 * k + 1, 2 * k + 1);
  for (int i = 0; i <= 2 * k; ++i)
    for (int j = 0; j <= 2 * k; ++j) b.M(i, j) = cplx(uniform(), uniform());
  if (hermitian) b.M = 0.5 * (b.M + b.M.adjoint()).eval();
  b.hermitian = hermitian;
  return b;
}

BlockOperator identity_block(int k) { return {k, Eigen::MatrixXcd::Identity(2 * k + 1, 2 * k + 1), true}; }

CoherentFrame standard_frame() { return CoherentFrame{}; }
}  // namespace

TEST_CASE("Berezin symbol examples") {
  for (int k : {1, 4, 9}) {
    const auto fr = testutil::random_frame();
    CHECK(std::abs(berezin_symbol(identity_block(k), fr) - 1.0) < 1e-13);
  }
  const auto A0 = assemble_dtn(make_potential({}), 8, 1);
  for (int k : {0, 3, 8}) CHECK(std::abs(berezin_symbol(A0, testutil::random_frame(), k) - double(k)) < 1e-12);
  const auto z2 = analyze_function([](const Vec3& x) { return cplx(x[2] * x[2]); }, 2);
  for (int k : {1, 5, 12, 20}) {
    const auto M = multiplication_block(z2, k);
    CHECK(M.hermitian);
    CHECK(std::abs(berezin_symbol(M, standard_frame()) - 1.0 / (2 * k + 3)) < 1e-13);
  }
  CHECK_THROWS_AS(berezin_symbol(A0, standard_frame(), 9), PreconditionError);
}

TEST_CASE("Berezin symbol depends only on the orbit") {
  const auto B = random_block(6, false);
  for (int t = 0; t < 10; ++t) {
    const auto fr = testutil::random_frame();
    CHECK(std::abs(berezin_symbol(B, fr) - berezin_symbol(B, fr.phase_shifted(uniform(0, 6.3)))) < 1e-10);
  }
}

TEST_CASE("full-matrix symbol equals the block symbol") {
  const auto A = assemble_dtn(make_potential({{0, 0, 2, 1.0}, {1, 0, 0, 0.5}}), 8, 3);
  const int k = 5;
  const auto fr = testutil::random_frame();
  const auto c = coherent_coefficients(fr, k);
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(A.A.rows());
  for (int m = -k; m <= k; ++m) full[flat_index(k, m)] = c[m + k];
  const cplx s_full = full.dot(A.A * full) / alpha_norms(k).first;
  CHECK(std::abs(s_full - berezin_symbol(A, fr, k)) < 1e-13);
}

TEST_CASE("trace identity") {
  for (int k : {2, 5}) {
    auto B = random_block(k, true);
    const auto q = quadrature_s2(2 * k);
    cplx s = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
      s += q.weights[i] / (4 * kPi) * berezin_symbol(B, CoherentFrame::from_momentum(q.nodes[i]));
    CHECK(std::abs(s - B.M.trace() / double(2 * k + 1)) < 1e-12);
  }
}

TEST_CASE("expansion fits") {
  std::vector<double> ks;
  for (int k = 10; k <= 60; k += 2) ks.push_back(k);
  const int n = static_cast<int>(ks.size());
  Eigen::MatrixXcd y(3, n);
  for (int i = 0; i < n; ++i) {
    y(0, i) = 0.7 - 1.3 / ks[i] + 1e-12 * uniform();
    y(1, i) = 1.0 / (2 * ks[i] + 3);
    y(2, i) = cplx(2.5, -1);
  }
  const auto f1 = fit_series(ks, y.row(0), 1);
  CHECK(std::abs(f1.coeffs(0, 0) - 0.7) < 1e-9);
  CHECK(std::abs(f1.coeffs(0, 1) + 1.3) < 1e-9);
  const auto f3 = fit_series(ks, y, 3);
  CHECK(!f3.ill_conditioned);
  CHECK(std::abs(f3.coeffs(1, 0)) < 1e-5);
  CHECK(std::abs(f3.coeffs(1, 1) - 0.5) < 1e-3);
  CHECK(std::abs(f3.coeffs(1, 2) + 0.75) < 5e-2);
  CHECK(std::abs(f3.coeffs(2, 0) - cplx(2.5, -1)) < 1e-12);
  for (int j = 1; j <= 3; ++j) CHECK(std::abs(f3.coeffs(2, j)) < 1e-8);
  const auto f2 = fit_series(ks, y.row(2), 2);
  for (int j = 1; j <= 2; ++j) CHECK(std::abs(f2.coeffs(0, j)) < 1e-10);
  double prev = 1e300;
  for (int J = 0; J <= 4; ++J) {
    const auto f = fit_series(ks, y.row(1), J);
    CHECK(f.residual[0] < prev);
    prev = f.residual[0];
  }
  CHECK(fit_series(ks, y.row(1), 12).ill_conditioned);
  CHECK_THROWS_AS(fit_series({10, 12, 14}, Eigen::MatrixXcd::Zero(1, 3), 1), PreconditionError);
}

TEST_CASE("Berezin kernel and transform") {
  for (int k : {0, 3, 10}) {
    const auto p = testutil::random_unit();
    CHECK(berezin_kernel(p, p, k) == doctest::Approx(2 * k + 1).epsilon(1e-14));
    const auto q = quadrature_s2(2 * k);
    double s = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] / (4 * kPi) * berezin_kernel(p, q.nodes[i], k);
    CHECK(std::abs(s - 1) < 1e-12);
    CHECK(funk_hecke_eigenvalue(k, 0) == 1.0);
  }
  for (int k = 1; k <= 64; ++k) CHECK(std::abs(funk_hecke_eigenvalue(k, 1) - k / (k + 1.0)) < 1e-14);
  const auto f = testutil::random_complex_sph(5);
  const int k = 7;
  const auto Bf = berezin_transform(f, k);
  for (int t = 0; t < 5; ++t) {
    const auto mu = testutil::random_unit();
    CHECK(std::abs(berezin_transform_quadrature(f, k, mu, 2 * k + 5) - synthesize_at(Bf, mu)) < 1e-12);
  }
  // E_0 + E_1/k + E_2/k^2 on each degree
  for (int l = 0; l <= 4; ++l) {
    const double L2 = l * (l + 1.0);
    std::vector<double> ks, res;
    for (int kk = 8; kk <= 64; kk += 4) {
      ks.push_back(kk);
      res.push_back(funk_hecke_eigenvalue(kk, l) - (1 - L2 / (2 * kk) + L2 * (L2 + 2) / 8 / (double(kk) * kk)));
    }
    if (l > 0) CHECK(loglog_slope(ks, res) == doctest::Approx(-3.0).epsilon(0.1));
  }
}

TEST_CASE("star-product operators") {
  const auto f = testutil::random_real_sph(5), g = testutil::random_real_sph(6);
  SphFunction c(0);
  c.at(0, 0) = 2.0;
  for (int t = 0; t < 10; ++t) {
    const auto mu = testutil::random_unit();
    const auto h = harmonic_jets(6, chart_rotation(mu));
    const auto jf = chart_jet(f, h), jg = chart_jet(g, h);
    CHECK(std::abs(D1(f, g, mu) + D1(g, f, mu) - grad_dot(jf, jg)) < 1e-8);
    CHECK(std::abs(D1(f, g, mu) - D1(g, f, mu) + cplx(0, 1) * poisson_O(f, g, mu)) < 1e-10);
    CHECK(std::abs(D2(f, c, mu)) < 1e-13);
    CHECK(std::abs(D2(c, g, mu)) < 1e-13);
  }
  // the D2 formula is chart independent: evaluate away from the centre of a fixed chart
  const auto R = testutil::random_rotation();
  for (int t = 0; t < 10; ++t) {
    const double x = uniform(-0.8, 0.8), y = uniform(-0.8, 0.8);
    const auto h = harmonic_jets(6, R, x, y);
    const double d = 1 + x * x + y * y;
    const Vec3 mu = R * Vec3(2 * x / d, 2 * y / d, (1 - x * x - y * y) / d);
    const cplx w(x, y);
    CHECK(std::abs(D2_chart(chart_jet(f, h), chart_jet(g, h), w) - D2(f, g, mu)) < 1e-10);
    CHECK(std::abs(D1_chart(chart_jet(f, h), chart_jet(g, h), w) - D1(f, g, mu)) < 1e-10);
  }
}

TEST_CASE("exact composition formula") {
  const auto grid = orbit_grid(12);
  for (int k : {4, 6}) {
    CHECK(exact_composition_check(identity_block(k), identity_block(k), grid, 4 * k + 2) < 1e-10);
    const auto A = random_block(k, false), B = random_block(k, false);
    CHECK(exact_composition_check(A, B, grid, 4 * k + 2) < 1e-9);
    BlockOperator L0 = identity_block(k);
    L0.M *= double(k);
    for (const auto& o : grid)
      CHECK(std::abs(berezin_symbol({k, L0.M * B.M, false}, o.frame) - double(k) * berezin_symbol(B, o.frame)) < 1e-12);
    CHECK_THROWS_AS(exact_composition_check(A, B, grid, 4 * k + 1), PreconditionError);
  }
}

TEST_CASE("exponential symbol coefficients") {
  const auto q0 = testutil::random_real_sph(3), q1 = testutil::random_real_sph(3), q2 = testutil::random_real_sph(2);
  const auto in = make_exp_symbol_input(q0, q1, q2);
  const auto mu = testutil::random_unit();
  const auto e0 = exp_symbol_coeffs(in, 0.0, mu);
  CHECK(std::abs(e0.a0 - 1.0) < 1e-15);
  CHECK(std::abs(e0.a1) < 1e-15);
  CHECK(std::abs(e0.a2) < 1e-15);
  // d a1/dt at t = 0 equals i q1
  const double h = 1e-5;
  const cplx da1 = (exp_symbol_coeffs(in, h, mu).a1 - exp_symbol_coeffs(in, -h, mu).a1) / (2 * h);
  CHECK(std::abs(da1 - cplx(0, 1) * synthesize_at(q1, mu)) < 1e-8);
  // gradient-free q0
  SphFunction c(0);
  c.at(0, 0) = 0.9;
  const auto ic = make_exp_symbol_input(c, q1, q2);
  const double t = 0.8, c0 = 0.9 / std::sqrt(4 * kPi);
  const auto ec = exp_symbol_coeffs(ic, t, mu);
  CHECK(std::abs(ec.a1 - std::exp(cplx(0, t * c0)) * cplx(0, t) * synthesize_at(q1, mu)) < 1e-13);
}

TEST_CASE("numeric exponential symbol trivial cases") {
  const auto B = random_block(5, true);
  const auto fr = testutil::random_frame();
  CHECK(std::abs(numeric_exp_symbol(B, 0.0, fr) - 1.0) < 1e-13);
  BlockOperator Z{5, Eigen::MatrixXcd::Zero(11, 11), true};
  CHECK(std::abs(numeric_exp_symbol(Z, 2.3, fr) - 1.0) < 1e-13);
  // scalar block: exp(i t k c)
  BlockOperator S{5, 0.3 * Eigen::MatrixXcd::Identity(11, 11), true};
  CHECK(std::abs(numeric_exp_symbol(S, 1.1, fr) - std::exp(cplx(0, 1.1 * 5 * 0.3))) < 1e-13);
}

TEST_CASE("leading symbol of the DtN perturbation is half the Radon transform") {
  const auto q = make_potential({{0, 0, 2, 1.0}});
  const auto A = assemble_dtn(q, 30, 4);
  std::vector<int> ks;
  for (int k = 10; k <= 28; k += 2) ks.push_back(k);
  const auto grid = orbit_grid(10);
  const auto S = sample_symbols(grid, ks, [&](int k) {
    auto b = dtn_block(A, k);
    b.M -= double(k) * Eigen::MatrixXcd::Identity(2 * k + 1, 2 * k + 1);
    return b;
  }, 1.0);
  const auto fit = expansion_fit(S, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double mu3 = grid[i].momentum()[2];
    CHECK(std::abs(fit.coeffs(i, 0) - (1 - mu3 * mu3) / 4) < 1e-4);
  }
}
