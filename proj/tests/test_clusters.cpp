#include <doctest.h>

#include "dtn/clusters.hpp"
#include "test_util.hpp"

#include <cstdio>
#include <fstream>

using namespace dtn;
using testutil::uniform;

namespace {
DtNMatrix dtn_of(const Potential& q, int L) {
  AssembleOptions o;
  o.J = 6;
  o.tol = 1e-14;
  return assemble_dtn(q, L, o);
}

const DtNMatrix& x3sq_60() {
  static const DtNMatrix A = dtn_of(make_potential({{0, 0, 2, 1.0}}), 60);
  return A;
}

Eigen::MatrixXcd random_unitary(int n) {
  Eigen::MatrixXcd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = cplx(uniform(), uniform());
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(M).householderQ();
}
}  // namespace

TEST_CASE("averaged blocks") {
  const auto A0 = dtn_of(make_potential({}), 12);
  for (int order : {1, 2}) CHECK(averaged_block(A0, 7, order).M.norm() == 0.0);

  const double c = 1.0;
  const auto Ac = dtn_of(constant_potential(c), 30);
  for (int k : {5, 10, 20}) {
    const auto b = averaged_block(Ac, k, 1);
    const double mu = dtn_constant_oracle(c, k) - k;
    CHECK((b.M - mu * Eigen::MatrixXcd::Identity(2 * k + 1, 2 * k + 1)).norm() < 1e-10);
  }

  const auto& A = x3sq_60();
  const int k = 15;
  const Eigen::MatrixXcd corr = averaged_block(A, k, 2).M - averaged_block(A, k, 1).M;
  CHECK(corr.norm() > 1e-8);
  // the raw correction sum is Hermitian before any symmetrization
  Eigen::MatrixXcd raw = Eigen::MatrixXcd::Zero(2 * k + 1, 2 * k + 1);
  for (int kp = 0; kp <= A.L; ++kp)
    if (kp != k) {
      const Eigen::MatrixXcd Skp = A.A.block(flat_index(k, -k), flat_index(kp, -kp), 2 * k + 1, 2 * kp + 1);
      const Eigen::MatrixXcd Spk = A.A.block(flat_index(kp, -kp), flat_index(k, -k), 2 * kp + 1, 2 * k + 1);
      raw += Skp * Spk / double(k - kp);
    }
  CHECK((raw - raw.adjoint()).norm() < 1e-9);
  CHECK((raw - corr).norm() < 1e-12);
  CHECK_THROWS_AS(averaged_block(A, 61, 1), PreconditionError);
  CHECK_THROWS_AS(averaged_block(A, 5, 3), PreconditionError);
}

TEST_CASE("full spectrum clusters") {
  const auto s0 = full_spectrum_clusters(dtn_of(make_potential({}), 20));
  CHECK(s0.k_max == 16);
  for (const auto& [k, mu] : s0.mu) {
    CHECK(mu.size() == std::size_t(2 * k + 1));
    for (double m : mu) CHECK(std::abs(m) < 1e-14);
  }

  const auto s1 = full_spectrum_clusters(dtn_of(constant_potential(1.0), 40));
  double e = 0;
  for (const auto& [k, mu] : s1.mu)
    for (double m : mu) e = std::max(e, std::abs(m - (dtn_constant_oracle(1.0, k) - k)));
  CHECK(e < 1e-8);

  // small potential: clusters of size O(1/k)
  const auto q = make_potential({{0, 0, 2, 0.3}, {1, 0, 1, 0.2}, {0, 1, 0, 0.1}});
  const auto s2 = full_spectrum_clusters(dtn_of(q, 30));
  double worst = 0;
  for (const auto& [k, mu] : s2.mu)
    for (double m : mu) worst = std::max(worst, std::abs(m) * k);
  CHECK(worst < q.sup_bound);

  // an injected eigenvalue breaks the count at k = 6
  auto bad = dtn_of(make_potential({}), 10);
  bad.A(flat_index(6, 0), flat_index(6, 0)) = 7.0;
  try {
    full_spectrum_clusters(bad);
    FAIL("expected a NumericalGuard");
  } catch (const NumericalGuard& g) {
    const std::string w = g.what();
    CHECK(w.find("k=6") != std::string::npos);
    CHECK(w.find("k=7") != std::string::npos);
  }
  auto asym = dtn_of(make_potential({}), 6);
  asym.asymmetry = 1e-6;
  CHECK_THROWS_AS(full_spectrum_clusters(asym), NumericalGuard);
}

TEST_CASE("averaged route agrees with the dense spectrum") {
  const auto& A = x3sq_60();
  const auto F = full_spectrum_clusters(A);
  const auto S2 = averaged_spectrum(A, 2);
  std::vector<double> ks, d;
  for (int k = 8; k <= 48; k += 4) {
    double e = 0;
    for (std::size_t j = 0; j < F.mu.at(k).size(); ++j) e = std::max(e, std::abs(F.mu.at(k)[j] - S2.mu.at(k)[j]));
    ks.push_back(k);
    d.push_back(e * k * k * k);
  }
  const double slope = loglog_slope(ks, d);
  MESSAGE("route difference k^3 slope " << slope);
  CHECK(slope <= -1.0);
}

TEST_CASE("moments") {
  const auto s0 = full_spectrum_clusters(dtn_of(make_potential({}), 20));
  const auto g = TestFunction::gauss(0.7);
  for (double T : moments(s0, g, 1).T) CHECK(T == doctest::Approx(1.0).epsilon(1e-15));
  const auto& A = x3sq_60();
  const auto F = full_spectrum_clusters(A);
  for (double T : moments(F, TestFunction::one(), 1).T) CHECK(T == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(moments(F, g, 2), PreconditionError);

  const double c = 1.0;
  const auto sc = full_spectrum_clusters(dtn_of(constant_potential(c), 40));
  const auto mc = moments(sc, TestFunction::identity(), 1);
  for (std::size_t i = 0; i < mc.ks.size(); ++i) {
    const int k = mc.ks[i];
    CHECK(mc.T[i] == doctest::Approx(k * (dtn_constant_oracle(c, k) - k)).epsilon(1e-10));
    CHECK(std::abs(mc.T[i] - (c / 2 - 3 * c / (4.0 * k))) < 1.0 / (k * k));
  }

  // moments depend only on the block spectrum
  const int k = 12;
  const auto b = averaged_block(A, k, 2);
  const auto U = random_unitary(2 * k + 1);
  ClusterSpectrum a, u;
  a.mu[k] = u.mu[k] = {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e1(b.M, Eigen::EigenvaluesOnly),
      e2(U * b.M * U.adjoint(), Eigen::EigenvaluesOnly);
  for (int j = 0; j <= 2 * k; ++j) {
    a.mu[k].push_back(e1.eigenvalues()[j]);
    u.mu[k].push_back(e2.eigenvalues()[j]);
  }
  CHECK(moments(a, g, 1).T[0] == doctest::Approx(moments(u, g, 1).T[0]).epsilon(1e-12));
}

TEST_CASE("asymptotic fit") {
  MomentSeries syn;
  for (int k = 5; k <= 30; ++k) {
    syn.ks.push_back(k);
    syn.T.push_back(0.3 - 1.1 / k + 2.5 / (double(k) * k));
  }
  const auto f = asymptotic_fit(syn);
  CHECK(std::abs(f.beta[0] - 0.3) < 1e-9);
  CHECK(std::abs(f.beta[1] + 1.1) < 1e-9);
  CHECK(std::abs(f.beta[2] - 2.5) < 1e-9);
  CHECK_FALSE(f.ill_conditioned);

  const auto sc = full_spectrum_clusters(dtn_of(constant_potential(1.0), 40), 1, {10, -1});
  const auto fc = asymptotic_fit(moments(sc, TestFunction::identity(), 1));
  CHECK(std::abs(fc.beta[0] - 0.5) < 1e-3);
  CHECK(std::abs(fc.beta[1] + 0.75) < 2e-2);

  const auto s0 = full_spectrum_clusters(dtn_of(make_potential({}), 20));
  const auto g = TestFunction::gauss(0.7);
  const auto f0 = asymptotic_fit(moments(s0, g, 1));
  CHECK(std::abs(f0.beta[0] - 1.0) < 1e-12);
  CHECK(std::abs(f0.beta[1]) < 1e-10);
  CHECK(std::abs(f0.beta[2]) < 1e-10);

  MomentSeries shortser;
  shortser.ks = {5, 6, 7};
  shortser.T = {1, 1, 1};
  CHECK_THROWS_AS(asymptotic_fit(shortser), PreconditionError);
}

TEST_CASE("cluster localization bound") {
  const auto b0 = cluster_bound_check(dtn_of(make_potential({}), 20));
  CHECK(b0.normB == 0.0);
  CHECK(b0.max_defect < 1e-12);
  CHECK(b0.holds);

  const auto bc = cluster_bound_check(dtn_of(constant_potential(1.0), 30));
  MESSAGE("constant potential: |B| = " << bc.normB << ", defect = " << bc.max_defect);
  CHECK(bc.holds);
  CHECK(bc.checked > 0);

  const auto bx = cluster_bound_check(x3sq_60());
  CHECK(bx.holds);

  const auto q1 = make_potential({{0, 0, 2, 0.01}, {1, 0, 0, 0.01}});
  const auto q2 = make_potential({{0, 0, 2, 0.02}, {1, 0, 0, 0.02}});
  const double r = cluster_bound_check(dtn_of(q2, 24)).normB / cluster_bound_check(dtn_of(q1, 24)).normB;
  CHECK(std::abs(r - 2.0) < 0.2);
}

TEST_CASE("odd potential clusters shrink like 1/k^2") {
  // x3 + (1 - r^2) x3^2: odd on the sphere, with a normal derivative that survives the Radon transform
  const auto q = make_potential({{0, 0, 1, 1}, {0, 0, 2, 1}, {2, 0, 2, -1}, {0, 2, 2, -1}, {0, 0, 4, -1}});
  REQUIRE(q.restriction_odd);
  const auto F = full_spectrum_clusters(dtn_of(q, 50), 2);
  std::vector<double> ks, m;
  for (const auto& [k, mu] : F.mu) {
    if (k < 8) continue;
    double e = 0;
    for (double x : mu) e = std::max(e, std::abs(x));
    ks.push_back(k);
    m.push_back(e * k * k);
  }
  const double slope = loglog_slope(ks, m);
  MESSAGE("odd potential max|mu| k^2 slope " << slope << ", last " << m.back());
  // k^2 mu rises towards sup q0~ = 1/4 from below; O(1/k) clusters would give slope 1
  CHECK(*std::max_element(m.begin(), m.end()) <= 0.25 * 1.05);
  CHECK(slope < 0.5);
  CHECK(m.back() > 0.15);
}

TEST_CASE("exponential symbol matches the measured jet") {
  // the jet of k Q_k is measured from the order-2 averaged blocks themselves
  const auto q = make_potential({{0, 0, 2, 1.0}});
  const auto A = dtn_of(q, 70);
  std::vector<int> ks;
  for (int k = 10; k <= 56; k += 2) ks.push_back(k);
  std::vector<BlockOperator> Q(ks.size());
  parallel_for(ks.size(), [&](std::size_t i) { Q[i] = averaged_block(A, ks[i], 2); });
  const std::vector<double> kd(ks.begin(), ks.end());
  std::vector<OFunction> jet(3);
  for (int c = 0; c < 3; ++c)
    jet[c] = project_O(
        [&](const Vec3& mu) {
          const auto fr = CoherentFrame::from_momentum(mu);
          Eigen::MatrixXcd v(1, static_cast<Eigen::Index>(ks.size()));
          for (std::size_t i = 0; i < ks.size(); ++i) v(0, i) = double(ks[i]) * berezin_symbol(Q[i], fr);
          return fit_series(kd, v, 5).coeffs(0, c);
        },
        10);
  const Vec3 mu = Vec3(0.6, 0.3, 0.5).normalized();
  CHECK(std::abs(synthesize_at(jet[0], mu).real() - (1 - mu[2] * mu[2]) / 4) < 1e-6);
  const auto in = make_exp_symbol_input(jet[0], jet[1], jet[2]);
  const auto a = exp_symbol_coeffs(in, 1.0, mu);
  const auto fr = CoherentFrame::from_momentum(mu);
  std::vector<double> xs, rs;
  for (int k = 10; k <= 40; k += 2) {
    const cplx num = numeric_exp_symbol(averaged_block(A, k, 2), 1.0, fr);
    xs.push_back(k);
    rs.push_back(std::abs(num - (a.a0 + a.a1 / double(k) + a.a2 / double(k * k))));
  }
  const double slope = loglog_slope(xs, rs);
  MESSAGE("exponential symbol residual slope " << slope);
  CHECK(slope == doctest::Approx(-3.0).epsilon(0.1));
}

TEST_CASE("spectrum and moment CSV") {
  const auto s = full_spectrum_clusters(dtn_of(constant_potential(0.5), 12), 1, {3, 5});
  const std::string p1 = "test_clusters_spectrum.csv", p2 = "test_clusters_moments.csv";
  write_spectrum_csv(p1, s, "hash=abc");
  write_moments_csv(p2, moments(s, TestFunction::identity(), 1), "hash=abc");
  std::ifstream f1(p1), f2(p2);
  std::string l;
  std::getline(f1, l);
  CHECK(l == "# hash=abc");
  std::getline(f1, l);
  CHECK(l == "k,j,mu");
  int rows = 0;
  while (std::getline(f1, l)) ++rows;
  CHECK(rows == 7 + 9 + 11);
  std::getline(f2, l);
  std::getline(f2, l);
  CHECK(l == "k,T_k");
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}
