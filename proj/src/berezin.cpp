#include "dtn/berezin.hpp"

#include <cstdio>

namespace dtn {

BlockOperator dtn_block(const DtNMatrix& A, int k) {
  if (k < 0 || k > A.L) throw PreconditionError("dtn_block: k outside 0..L");
  BlockOperator b;
  b.k = k;
  b.M = A.A.block(flat_index(k, -k), flat_index(k, -k), 2 * k + 1, 2 * k + 1);
  b.hermitian = true;
  return b;
}

BlockOperator multiplication_block(const SphFunction& f, int k) {
  BlockOperator b;
  b.k = k;
  b.M = Eigen::MatrixXcd::Zero(2 * k + 1, 2 * k + 1);
  for (int l = 0; l <= std::min(f.L, 2 * k); ++l)
    for (int m = -l; m <= l; ++m) {
      const cplx c = f.at(l, m);
      if (c == cplx{}) continue;
      for (int m2 = -k; m2 <= k; ++m2) {
        const int m1 = m + m2;
        if (std::abs(m1) > k) continue;
        b.M(m1 + k, m2 + k) += c * gaunt(l, m, k, m2, k, m1);
      }
    }
  b.hermitian = f.reality_defect() < 1e-14;
  return b;
}

namespace {
Eigen::VectorXcd coherent_vector(const CoherentFrame& frame, int k) {
  const auto c = coherent_coefficients(frame, k);
  return Eigen::Map<const Eigen::VectorXcd>(c.data(), 2 * k + 1);
}
}  // namespace

cplx berezin_symbol(const BlockOperator& T, const CoherentFrame& frame) {
  const Eigen::VectorXcd c = coherent_vector(frame, T.k);
  return c.dot(T.M * c) / alpha_norms(T.k).first;
}

cplx berezin_symbol(const DtNMatrix& A, const CoherentFrame& frame, int k) {
  return berezin_symbol(dtn_block(A, k), frame);
}

FitResult fit_series(const std::vector<double>& ks, const Eigen::MatrixXcd& values, int J) {
  const int n = static_cast<int>(ks.size());
  if (J < 0) throw PreconditionError("fit_series: J must be >= 0");
  if (n < J + 3) throw PreconditionError("fit_series: need at least J+3 distinct k values");
  if (values.cols() != n) throw PreconditionError("fit_series: values must have one column per k");
  Eigen::MatrixXd X(n, J + 1);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = std::pow(ks[i], J);
    for (int j = 0; j <= J; ++j) X(i, j) = w[i] * std::pow(ks[i], -j);
  }
  // equilibrate columns; the condition number refers to the scaled design
  const Eigen::VectorXd cs = X.colwise().norm().cwiseInverse().transpose();
  X = X * cs.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  FitResult r;
  r.J = J;
  r.condition = sv[0] / sv[sv.size() - 1];
  r.ill_conditioned = !(r.condition <= 1e10);
  const Eigen::MatrixXcd Y = (values * w.asDiagonal()).transpose();  // n x rows
  const Eigen::MatrixXcd C = cs.asDiagonal() * svd.solve(Y);          // (J+1) x rows
  r.coeffs = C.transpose();
  r.residual.resize(values.rows());
  for (int s = 0; s < values.rows(); ++s) {
    double e = 0;
    for (int i = 0; i < n; ++i) {
      cplx p = 0;
      for (int j = 0; j <= J; ++j) p += r.coeffs(s, j) * std::pow(ks[i], -j);
      e += std::norm(values(s, i) - p);
    }
    r.residual[s] = std::sqrt(e);
  }
  return r;
}

FitResult expansion_fit(const SymbolSamples& samples, int J) {
  std::vector<double> ks(samples.ks.begin(), samples.ks.end());
  return fit_series(ks, samples.values, J);
}

SymbolSamples sample_symbols(const std::vector<OrbitPoint>& orbits, const std::vector<int>& ks,
                             const std::function<BlockOperator(int)>& block, double scale_power) {
  SymbolSamples s;
  s.orbits = orbits;
  s.ks = ks;
  s.values.resize(static_cast<Eigen::Index>(orbits.size()), static_cast<Eigen::Index>(ks.size()));
  parallel_for(ks.size(), [&](std::size_t j) {
    const BlockOperator b = block(ks[j]);
    const double sc = std::pow(static_cast<double>(ks[j]), scale_power);
    for (std::size_t i = 0; i < orbits.size(); ++i) s.values(i, j) = sc * berezin_symbol(b, orbits[i].frame);
  });
  return s;
}

std::vector<OrbitPoint> orbit_grid(int n) {
  std::vector<OrbitPoint> g;
  const double ga = kPi * (3 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1 - (2 * i + 1.0) / n, r = std::sqrt(std::max(0.0, 1 - z * z));
    g.push_back(OrbitPoint::from_momentum(Vec3(r * std::cos(ga * i), r * std::sin(ga * i), z)));
  }
  return g;
}

double berezin_kernel(const Vec3& a, const Vec3& b, int k) {
  const double c = std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0);
  return (2 * k + 1) * std::pow((1 + c) / 2, 2 * k);
}

double berezin_kernel(const OrbitPoint& p, const OrbitPoint& q, int k) {
  return berezin_kernel(p.momentum(), q.momentum(), k);
}

double funk_hecke_eigenvalue(int k, int l) {
  if (k < 0 || l < 0) throw PreconditionError("funk_hecke_eigenvalue: k, l must be >= 0");
  // int_0^1 P_l(2s-1) s^n ds = n(n-1)..(n-l+1) / ((n+1)..(n+l+1)), here n = 2k
  double v = 1.0;
  for (int i = 0; i < l; ++i) v *= (2.0 * k - i) / (2.0 * k + i + 2);
  return v;
}

OFunction berezin_transform(const OFunction& f, int k) {
  OFunction r = f;
  for (int l = 0; l <= f.L; ++l) {
    const double lam = funk_hecke_eigenvalue(k, l);
    for (int m = -l; m <= l; ++m) r.at(l, m) *= lam;
  }
  return r;
}

cplx berezin_transform_quadrature(const OFunction& f, int k, const Vec3& mu, int exactness) {
  const auto q = quadrature_s2(exactness);
  std::vector<cplx> part(q.nodes.size());
  for (std::size_t i = 0; i < q.nodes.size(); ++i)
    part[i] = q.weights[i] / (4 * kPi) * berezin_kernel(mu, q.nodes[i], k) * synthesize_at(f, q.nodes[i]);
  return pairwise_sum(part.data(), part.size());
}

cplx D1_chart(const ChartJet& f, const ChartJet& g, cplx w) {
  const double nu = 1 + std::norm(w);
  return 0.5 * nu * nu * f.z() * g.zb();
}

cplx D2_chart(const ChartJet& f, const ChartJet& g, cplx w) {
  const double nu = 1 + std::norm(w);
  const cplx s = nu * nu * nu * nu * f.zz() * g.zbzb() +
                 2 * nu * nu * nu * (std::conj(w) * f.z() * g.zbzb() + w * f.zz() * g.zb()) +
                 4 * std::norm(w) * nu * nu * f.z() * g.zb();
  return s / 8.0;
}

cplx D1(const OFunction& f, const OFunction& g, const Vec3& mu) {
  const auto h = harmonic_jets(std::max(f.L, g.L), chart_rotation(mu));
  return D1_chart(chart_jet(f, h), chart_jet(g, h), 0.0);
}

cplx D2(const OFunction& f, const OFunction& g, const Vec3& mu) {
  const auto h = harmonic_jets(std::max(f.L, g.L), chart_rotation(mu));
  return D2_chart(chart_jet(f, h), chart_jet(g, h), 0.0);
}

double exact_composition_check(const BlockOperator& A, const BlockOperator& B, const std::vector<OrbitPoint>& grid,
                               int exactness) {
  if (A.k != B.k) throw PreconditionError("exact_composition_check: blocks of different degree");
  const int k = A.k;
  if (exactness < 4 * k + 2) throw PreconditionError("exact_composition_check: exactness must be >= 4k+2");
  const double ns = alpha_norms(k).first;
  const auto quad = quadrature_s2(exactness);
  const std::size_t nq = quad.nodes.size();
  const int d = 2 * k + 1;
  // columns: coherent vectors at the quadrature orbits
  Eigen::MatrixXcd Cq(d, static_cast<Eigen::Index>(nq));
  for (std::size_t i = 0; i < nq; ++i) Cq.col(i) = coherent_vector(CoherentFrame::from_momentum(quad.nodes[i]), k);
  const Eigen::MatrixXcd AB = A.M * B.M;
  const Eigen::MatrixXcd ACq = A.M * Cq;
  std::vector<double> err(grid.size());
  parallel_for(grid.size(), [&](std::size_t g) {
    const Eigen::VectorXcd cp = coherent_vector(grid[g].frame, k);
    const cplx lhs = cp.dot(AB * cp) / ns;
    const Eigen::VectorXcd Bcp = B.M * cp;
    std::vector<cplx> part(nq);
    for (std::size_t i = 0; i < nq; ++i) {
      const cplx b = Cq.col(i).dot(Bcp);   // <B a_p, a_q>
      const cplx a = cp.dot(ACq.col(i));   // <A a_q, a_p>
      part[i] = quad.weights[i] / (4 * kPi) * b * a;
    }
    const cplx rhs = static_cast<double>(d) * pairwise_sum(part.data(), nq) / (ns * ns);
    err[g] = std::abs(lhs - rhs);
  });
  return err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
}

ExpSymbolInput make_exp_symbol_input(const OFunction& q0, const OFunction& q1, const OFunction& q2) {
  return {q0, q1, q2, grad_norm_sq_field(q0)};
}

ExpSymbol exp_symbol_coeffs(const ExpSymbolInput& in, double t, const Vec3& mu) {
  const int L = std::max({in.q0.L, in.q1.L, in.q2.L, in.grad2.L});
  const auto h = harmonic_jets(L, chart_rotation(mu));
  const ChartJet j0 = chart_jet(in.q0, h), j1 = chart_jet(in.q1, h), jg = chart_jet(in.grad2, h);
  const cplx q0 = j0.v, q1 = j1.v, q2 = chart_jet(in.q2, h).v, G = jg.v;
  const cplx I(0, 1);
  const cplx e = std::exp(I * t * q0);
  ExpSymbol r;
  r.a0 = e;
  r.a1 = e * (-(t * t / 4) * G + I * t * q1);
  const cplx third = grad_dot(j0, jg) + 0.5 * G * laplace_O_at(j0) + 3.0 * q1 * G;
  const cplx second = q1 * q1 + grad_dot(j0, j1) + D2_chart(j0, j0, 0.0);
  r.a2 = e * (std::pow(t, 4) / 32 * G * G - I * (std::pow(t, 3) / 12) * third - (t * t / 2) * second + I * t * q2);
  return r;
}

cplx numeric_exp_symbol(const BlockOperator& Q, double t, const CoherentFrame& frame) {
  Eigen::MatrixXcd M = Q.M;
  const double n = M.norm();
  if (n > 0) {
    const double asym = (M - M.adjoint()).norm() / n;
    if (asym > 1e-8) std::fprintf(stderr, "warning: numeric_exp_symbol symmetrizes a block with asymmetry %.3g\n", asym);
  }
  M = 0.5 * (M + M.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  const Eigen::VectorXcd ph =
      (cplx(0, t * Q.k) * es.eigenvalues().cast<cplx>()).array().exp().matrix();
  BlockOperator E;
  E.k = Q.k;
  E.M = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  return berezin_symbol(E, frame);
}

}  // namespace dtn
