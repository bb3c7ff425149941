#include "dtn/clusters.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

namespace dtn {

namespace {

void check_quality(const DtNMatrix& A) {
  if (A.asymmetry > 1e-8) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "DtN matrix asymmetry %.3g exceeds 1e-8", A.asymmetry);
    throw NumericalGuard(buf);
  }
}

int window_max(const DtNMatrix& A, const ClusterOptions& opt) {
  const int km = opt.k_max >= 0 ? opt.k_max : static_cast<int>(std::floor(0.8 * A.L));
  return std::min(km, A.L);
}

Eigen::MatrixXcd block(const Eigen::MatrixXcd& M, int k, int kp) {
  return M.block(flat_index(k, -k), flat_index(kp, -kp), 2 * k + 1, 2 * kp + 1);
}

// Index sets of the connected components of the nonzero pattern of A.
std::vector<std::vector<int>> components(const Eigen::MatrixXcd& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < j; ++i)
      if (A(i, j) != cplx{} || A(j, i) != cplx{}) {
        const int a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [r, g] : groups) out.push_back(std::move(g));
  return out;
}

Eigen::MatrixXcd submatrix(const Eigen::MatrixXcd& M, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXcd s(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s(i, j) = M(idx[i], idx[j]);
  return s;
}

std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

// Eigenvalues of M, component by component, in a deterministic order.
std::vector<double> eigenvalues_by_component(const Eigen::MatrixXcd& M,
                                             const std::vector<std::vector<int>>& comps) {
  std::vector<std::vector<double>> parts(comps.size());
  parallel_for(comps.size(), [&](std::size_t c) { parts[c] = hermitian_eigenvalues(submatrix(M, comps[c])); });
  std::vector<double> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

std::vector<int> ClusterSpectrum::ks() const {
  std::vector<int> r;
  for (const auto& [k, v] : mu) r.push_back(k);
  return r;
}

BlockOperator averaged_block(const DtNMatrix& A, int k, int order) {
  if (k < 0 || k > A.L) throw PreconditionError("averaged_block: k outside 0..L");
  if (order != 1 && order != 2) throw PreconditionError("averaged_block: order must be 1 or 2");
  BlockOperator b;
  b.k = k;
  b.M = block(A.A, k, k) - double(k) * Eigen::MatrixXcd::Identity(2 * k + 1, 2 * k + 1);
  if (order == 2)
    for (int kp = 0; kp <= A.L; ++kp) {
      if (kp == k) continue;
      const Eigen::MatrixXcd Skp = block(A.A, k, kp);
      if (Skp.norm() == 0) continue;
      b.M += Skp * Skp.adjoint() / double(k - kp);
    }
  b.M = 0.5 * (b.M + b.M.adjoint()).eval();
  b.hermitian = true;
  return b;
}

ClusterSpectrum full_spectrum_clusters(const DtNMatrix& A, int alpha, const ClusterOptions& opt) {
  check_quality(A);
  const auto ev = eigenvalues_by_component(A.A, components(A.A));
  ClusterSpectrum s;
  s.alpha = alpha;
  s.route = "full";
  s.k_min = std::max(0, opt.k_min);
  s.k_max = window_max(A, opt);
  for (double lam : ev) {
    const int k = static_cast<int>(std::lround(lam));
    if (k >= s.k_min && k <= s.k_max) s.mu[k].push_back(lam - k);
  }
  std::string bad;
  for (int k = s.k_min; k <= s.k_max; ++k) {
    const auto it = s.mu.find(k);
    const std::size_t n = it == s.mu.end() ? 0 : it->second.size();
    if (n != static_cast<std::size_t>(2 * k + 1)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%sk=%d (%zu of %d)", bad.empty() ? "" : ", ", k, n, 2 * k + 1);
      bad += buf;
    }
  }
  if (!bad.empty()) throw NumericalGuard("cluster count mismatch or overlap at " + bad);
  return s;
}

ClusterSpectrum averaged_spectrum(const DtNMatrix& A, int order, int alpha, const ClusterOptions& opt) {
  check_quality(A);
  ClusterSpectrum s;
  s.alpha = alpha;
  s.route = "averaged";
  s.k_min = std::max(0, opt.k_min);
  s.k_max = window_max(A, opt);
  const int n = std::max(0, s.k_max - s.k_min + 1);
  std::vector<std::vector<double>> vals(n);
  parallel_for(n, [&](std::size_t i) {
    const int k = s.k_min + static_cast<int>(i);
    const auto b = averaged_block(A, k, order);
    vals[i] = eigenvalues_by_component(b.M, components(b.M));
  });
  for (int i = 0; i < n; ++i) s.mu[s.k_min + i] = vals[i];
  return s;
}

MomentSeries moments(const ClusterSpectrum& spec, const TestFunction& phi, int alpha) {
  if (alpha != spec.alpha) throw PreconditionError("moments: alpha does not match the spectrum scaling");
  MomentSeries m;
  m.phi = phi.name;
  m.alpha = alpha;
  for (const auto& [k, mu] : spec.mu) {
    const double sc = std::pow(double(k), alpha);
    std::vector<double> v(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) v[j] = phi.f(sc * mu[j]);
    m.ks.push_back(k);
    m.T.push_back(pairwise_sum(v.data(), v.size()) / (2 * k + 1));
  }
  return m;
}

AsymptoticFit asymptotic_fit(const MomentSeries& ms, int J) {
  if (ms.ks.size() < 6) throw PreconditionError("asymptotic_fit: need at least 6 k values");
  std::vector<double> ks(ms.ks.begin(), ms.ks.end());
  Eigen::MatrixXcd vals(1, static_cast<Eigen::Index>(ks.size()));
  for (std::size_t i = 0; i < ks.size(); ++i) vals(0, i) = ms.T[i];
  const FitResult f = fit_series(ks, vals, J);
  AsymptoticFit r;
  for (int j = 0; j <= J; ++j) r.beta.push_back(f.coeffs(0, j).real());
  r.residual = f.residual[0];
  r.condition = f.condition;
  r.ill_conditioned = f.ill_conditioned;
  return r;
}

nlohmann::ordered_json AsymptoticFit::to_json() const {
  return {{"beta", beta}, {"residual", residual}, {"condition", condition}, {"ill_conditioned", ill_conditioned}};
}

BoundReport cluster_bound_check(const DtNMatrix& A, const ClusterOptions& opt) {
  check_quality(A);
  const auto comps = components(A.A);
  const int N = static_cast<int>(A.A.rows());
  Eigen::VectorXd lam0(N);
  for (int i = 0; i < N; ++i) {
    int l, m;
    unflat(i, l, m);
    lam0[i] = l;
  }
  std::vector<double> normB(comps.size());
  std::vector<std::vector<double>> ev(comps.size());
  parallel_for(comps.size(), [&](std::size_t c) {
    const auto& idx = comps[c];
    const Eigen::MatrixXcd Ac = submatrix(A.A, idx);
    Eigen::VectorXd d(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) d[i] = lam0[idx[i]];
    const Eigen::MatrixXcd S = Ac - Eigen::MatrixXcd(d.cast<cplx>().asDiagonal());
    Eigen::MatrixXcd B = d.cast<cplx>().asDiagonal() * S + S * d.cast<cplx>().asDiagonal() + S * S;
    B = 0.5 * (B + B.adjoint()).eval();
    const auto eb = hermitian_eigenvalues(B);
    normB[c] = eb.empty() ? 0.0 : std::max(std::abs(eb.front()), std::abs(eb.back()));
    ev[c] = hermitian_eigenvalues(Ac);
  });
  BoundReport r;
  r.normB = normB.empty() ? 0.0 : *std::max_element(normB.begin(), normB.end());
  const int kmin = std::max(0, opt.k_min), kmax = window_max(A, opt);
  for (const auto& e : ev)
    for (double lam : e) {
      const int k = static_cast<int>(std::lround(lam));
      if (k < kmin || k > kmax) continue;
      // nearest k^2 to lambda^2 among nonnegative integers
      double best = std::abs(lam * lam - double(k) * k);
      for (int kk : {k - 1, k + 1})
        if (kk >= 0) best = std::min(best, std::abs(lam * lam - double(kk) * kk));
      r.max_defect = std::max(r.max_defect, best);
      ++r.checked;
    }
  // A^2 = Lambda0^2 + B holds exactly on the truncated space; slack covers rounding
  r.slack = 1e-9 * std::max(1.0, r.normB) + 1e-12 * A.L * A.L;
  r.holds = r.max_defect <= r.normB + r.slack;
  return r;
}

void write_spectrum_csv(const std::string& path, const ClusterSpectrum& spec, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "k,j,mu\n";
  char buf[64];
  for (const auto& [k, mu] : spec.mu)
    for (std::size_t j = 0; j < mu.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%d,%zu,%.17g\n", k, j, mu[j]);
      out << buf;
    }
}

void write_moments_csv(const std::string& path, const MomentSeries& ms, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "k,T_k\n";
  char buf[64];
  for (std::size_t i = 0; i < ms.ks.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", ms.ks[i], ms.T[i]);
    out << buf;
  }
}

}  // namespace dtn
