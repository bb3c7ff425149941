#include "dtn/ballsolver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>

namespace dtn {

void BallFunction::add(int n, int p, int l, int m, cplx c) {
  if (c == cplx{}) return;
  terms[BallKey{n, p, l, m}] += c;
}

BallFunction& BallFunction::operator+=(const BallFunction& o) {
  for (const auto& [k, c] : o.terms) terms[k] += c;
  return *this;
}

BallFunction& BallFunction::operator*=(cplx s) {
  for (auto& kv : terms) kv.second *= s;
  return *this;
}

int BallFunction::max_l() const {
  int r = 0;
  for (const auto& kv : terms) r = std::max(r, kv.first.l);
  return r;
}
int BallFunction::max_n() const {
  int r = 0;
  for (const auto& kv : terms) r = std::max(r, kv.first.n);
  return r;
}
int BallFunction::min_n() const {
  if (terms.empty()) return 0;
  int r = terms.begin()->first.n;
  for (const auto& kv : terms) r = std::min(r, kv.first.n);
  return r;
}
int BallFunction::max_p() const {
  int r = 0;
  for (const auto& kv : terms) r = std::max(r, kv.first.p);
  return r;
}

void BallFunction::prune(double tol) {
  for (auto it = terms.begin(); it != terms.end();) {
    if (std::abs(it->second) <= tol)
      it = terms.erase(it);
    else
      ++it;
  }
}

cplx BallFunction::eval_scaled(double r, const Vec3& unit, int shift) const {
  if (terms.empty()) return 0.0;
  const auto Y = eval_harmonics(max_l(), unit);
  const double lr = std::log(r);
  cplx s = 0;
  for (const auto& [k, c] : terms)
    s += c * std::pow(r, k.n - shift) * std::pow(lr, k.p) * Y[flat_index(k.l, k.m)];
  return s;
}

cplx BallFunction::eval(double r, const Vec3& unit) const { return eval_scaled(r, unit, 0); }

BallFunction BallFunction::laplacian() const {
  BallFunction out;
  for (const auto& [k, c] : terms) {
    const double s = k.n, a = k.p, ll = k.l * (k.l + 1.0);
    out.add(k.n - 2, k.p, k.l, k.m, c * (s * (s + 1) - ll));
    if (k.p >= 1) out.add(k.n - 2, k.p - 1, k.l, k.m, c * a * (2 * s + 1));
    if (k.p >= 2) out.add(k.n - 2, k.p - 2, k.l, k.m, c * a * (a - 1));
  }
  out.prune(0.0);
  return out;
}

// ---------------------------------------------------------------------------

double Potential::value(const Vec3& x) const {
  double s = 0;
  for (const auto& mo : monomials)
    s += mo.coeff * std::pow(x[0], mo.a) * std::pow(x[1], mo.b) * std::pow(x[2], mo.c);
  return s;
}

Vec3 Potential::gradient(const Vec3& x) const {
  auto pw = [](double b, int e) { return e <= 0 ? (e == 0 ? 1.0 : 0.0) : std::pow(b, e); };
  Vec3 g = Vec3::Zero();
  for (const auto& mo : monomials) {
    g[0] += mo.coeff * mo.a * pw(x[0], mo.a - 1) * pw(x[1], mo.b) * pw(x[2], mo.c);
    g[1] += mo.coeff * mo.b * pw(x[0], mo.a) * pw(x[1], mo.b - 1) * pw(x[2], mo.c);
    g[2] += mo.coeff * mo.c * pw(x[0], mo.a) * pw(x[1], mo.b) * pw(x[2], mo.c - 1);
  }
  return g;
}

std::uint64_t Potential::hash() const {
  auto ms = monomials;
  std::sort(ms.begin(), ms.end(), [](const Monomial& u, const Monomial& v) {
    return std::tie(u.a, u.b, u.c) < std::tie(v.a, v.b, v.c);
  });
  std::uint64_t h = fnv1a("potential", 9);
  for (const auto& m : ms) {
    const int abc[3] = {m.a, m.b, m.c};
    h = fnv1a(abc, sizeof abc, h);
    h = fnv1a(&m.coeff, sizeof m.coeff, h);
  }
  return h;
}

Potential make_potential(const std::vector<Monomial>& monomials) {
  Potential q;
  q.monomials = monomials;
  for (const auto& mo : monomials) {
    if (mo.a < 0 || mo.b < 0 || mo.c < 0) throw PreconditionError("monomial exponents must be >= 0");
    if (mo.coeff == 0) continue;
    const int d = mo.a + mo.b + mo.c;
    q.degree = std::max(q.degree, d);
    q.sup_bound += std::abs(mo.coeff);
    // x^a y^b z^c = r^d * (angular polynomial of degree d, parity d)
    const auto ang = analyze_function(
        [&](const Vec3& x) {
          return cplx(std::pow(x[0], mo.a) * std::pow(x[1], mo.b) * std::pow(x[2], mo.c), 0.0);
        },
        d);
    double big = 0;
    for (const auto& c : ang.coeffs) big = std::max(big, std::abs(c));
    for (int l = d % 2; l <= d; l += 2)
      for (int m = -l; m <= l; ++m) {
        cplx c = ang.at(l, m);
        if (std::abs(c) <= 1e-13 * big) continue;
        // drop rounding-level imaginary or real parts
        if (std::abs(c.real()) <= 1e-14 * big) c.real(0);
        if (std::abs(c.imag()) <= 1e-14 * big) c.imag(0);
        q.f.add(d, 0, l, m, mo.coeff * c);
      }
  }
  // cancellation across monomials (r^2 = x^2 + y^2 + z^2) leaves rounding residue
  q.f.prune(1e-14 * q.sup_bound);
  q.lmax = q.f.max_l();
  // boundary parity
  const SphFunction b = trace(q.f, q.lmax);
  double even = 0, odd = 0;
  for (int l = 0; l <= b.L; ++l)
    for (int m = -l; m <= l; ++m) (l % 2 ? odd : even) = std::max(l % 2 ? odd : even, std::abs(b.at(l, m)));
  q.restriction_odd = odd > 0 && even <= 1e-12 * odd;
  return q;
}

Potential constant_potential(double c) { return make_potential({Monomial{0, 0, 0, c}}); }

SphFunction trace(const BallFunction& u, int L) {
  SphFunction s(L);
  for (const auto& [k, c] : u.terms)
    if (k.p == 0 && k.l <= L) s.at(k.l, k.m) += c;
  return s;
}

SphFunction normal_derivative(const BallFunction& u, int L) {
  SphFunction s(L);
  for (const auto& [k, c] : u.terms) {
    if (k.l > L) continue;
    if (k.p == 0)
      s.at(k.l, k.m) += c * static_cast<double>(k.n);
    else if (k.p == 1)
      s.at(k.l, k.m) += c;
  }
  return s;
}

BallFunction harmonic_extension(const SphFunction& f) {
  BallFunction u;
  for (int l = 0; l <= f.L; ++l)
    for (int m = -l; m <= l; ++m) u.add(l, 0, l, m, f.at(l, m));
  return u;
}

BallFunction multiply(const BallFunction& a, const BallFunction& b, const GauntTable& table) {
  BallFunction out;
  for (const auto& [ka, ca] : a.terms) {
    for (const auto& [kb, cb] : b.terms) {
      if (!table.covers(ka.l, kb.l))
        throw PreconditionError("multiply_potential: Gaunt table too small for degrees " +
                                std::to_string(ka.l) + ", " + std::to_string(kb.l));
      auto [beg, end] = table.row(ka.l, ka.m, kb.l, kb.m);
      const cplx c = ca * cb;
      for (auto* e = beg; e != end; ++e) out.add(ka.n + kb.n, ka.p + kb.p, e->l3, ka.m + kb.m, c * e->value);
    }
  }
  return out;
}

BallFunction multiply_potential(const Potential& q, const BallFunction& u, const GauntTable& table) {
  return multiply(q.f, u, table);
}

BallFunction solve_R0(const BallFunction& F) {
  BallFunction u;
  for (const auto& [k, c] : F.terms) {
    const int s = k.n + 2, l = k.l, p = k.p;
    const double D = static_cast<double>(s - l) * (s + l + 1);
    const double t = 2.0 * s + 1;
    if (D != 0.0) {
      std::vector<double> a(p + 3, 0.0);
      a[p] = 1.0 / D;
      for (int j = p - 1; j >= 0; --j) a[j] = -((j + 1) * t * a[j + 1] + (j + 2.0) * (j + 1) * a[j + 2]) / D;
      for (int j = 0; j <= p; ++j) u.add(s, j, l, k.m, c * a[j]);
      u.add(l, 0, l, k.m, -c * a[0]);  // harmonic correction restores zero trace
    } else {
      std::vector<double> a(p + 3, 0.0);
      a[p + 1] = 1.0 / ((p + 1) * t);
      for (int j = p - 1; j >= 0; --j) a[j + 1] = -(j + 2.0) * a[j + 2] / t;
      for (int j = 1; j <= p + 1; ++j) u.add(s, j, l, k.m, c * a[j]);
    }
  }
  u.prune(0.0);
  return u;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXcd DtNMatrix::S() const {
  Eigen::MatrixXcd s = A;
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) s(flat_index(l, m), flat_index(l, m)) -= static_cast<double>(l);
  return s;
}

DtNMatrix assemble_dtn(const Potential& q, int L, const AssembleOptions& opt) {
  if (opt.J < 0) throw PreconditionError("assemble_dtn: J must be >= 0");
  if (L < 0) throw PreconditionError("assemble_dtn: L must be >= 0");
  const int N = num_coeffs(L);
  DtNMatrix out;
  out.L = L;
  out.q_hash = q.hash();
  out.q_even = !q.restriction_odd;
  out.A = Eigen::MatrixXcd::Zero(N, N);
  const int Lu = L + std::max(0, opt.J - 1) * q.lmax;
  const GauntTable table(q.lmax, Lu);
  std::vector<double> col_res(N, 0.0);
  std::vector<int> col_depth(N, 0);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t col) {
    int l, m;
    unflat(static_cast<int>(col), l, m);
    out.A(col, col) += static_cast<double>(l);
    BallFunction v;
    v.add(l, 0, l, m, 1.0);
    double res = 0;
    int depth = 0;
    for (int j = 1; j <= opt.J && !q.is_zero(); ++j) {
      v = solve_R0(multiply_potential(q, v, table));
      const SphFunction d = normal_derivative(v, L);
      double nrm = 0;
      for (int i = 0; i < N; ++i) {
        out.A(i, col) += d.coeffs[i];
        nrm += std::norm(d.coeffs[i]);
      }
      res = std::sqrt(nrm);
      depth = j;
      if (opt.tol > 0 && res < opt.tol) break;
    }
    col_res[col] = res;
    col_depth[col] = depth;
  });
  out.residual = *std::max_element(col_res.begin(), col_res.end());
  out.J = *std::max_element(col_depth.begin(), col_depth.end());
  out.residual_flag = out.residual > opt.warn_tol;
  const double nA = out.A.norm();
  out.asymmetry = nA > 0 ? (out.A - out.A.adjoint()).norm() / nA : 0.0;
  out.A = 0.5 * (out.A + out.A.adjoint()).eval();
  return out;
}

DtNMatrix assemble_dtn(const Potential& q, int L, int J) {
  AssembleOptions o;
  o.J = J;
  return assemble_dtn(q, L, o);
}

double dtn_constant_oracle(double c, int k) {
  if (!(c > 0)) throw PreconditionError("dtn_constant_oracle: c must be > 0");
  // i_k(x) ~ sum_j a_j x^{k+2j}; x i_k'(x) ~ sum_j (k+2j) a_j x^{k+2j}, x^2 = c
  double a = 1.0, s0 = 1.0, s1 = k;
  for (int j = 0; j < 100000; ++j) {
    a *= (c / 2.0) / ((j + 1.0) * (2.0 * k + 2.0 * j + 3.0));
    s0 += a;
    s1 += (k + 2.0 * (j + 1)) * a;
    if (a < 1e-16 * s0) break;
  }
  return s1 / s0;
}

// ---------------------------------------------------------------------------

void gauss_jacobi01(int n, double beta, std::vector<double>& t, std::vector<double>& w) {
  // Jacobi matrix for (1-x)^0 (1+x)^beta on [-1,1], mapped by t = (1+x)/2
  const double a = 0.0, b = beta;
  Eigen::VectorXd diag(n), off(std::max(0, n - 1));
  for (int i = 0; i < n; ++i) {
    const double s = 2.0 * i + a + b;
    diag[i] = (i == 0) ? (b - a) / (a + b + 2) : (b * b - a * a) / (s * (s + 2));
    if (i >= 1) {
      const double k = i;
      const double r = 4 * k * (k + a) * (k + b) * (k + a + b) / ((s * s) * (s + 1) * (s - 1));
      off[i - 1] = std::sqrt(r);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  t.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    t[i] = 0.5 * (1 + es.eigenvalues()[i]);
    const double v0 = es.eigenvectors()(0, i);
    w[i] = v0 * v0 / (beta + 1);
  }
}

cplx berezin_matrix_element(const Potential& q, const CoherentFrame& frame, int k, int J) {
  if (J < 0) throw PreconditionError("berezin_matrix_element: J must be >= 0");
  const auto [ns, nb] = alpha_norms(k);
  (void)nb;
  const auto c = coherent_coefficients(frame, k);
  BallFunction alpha;
  for (int m = -k; m <= k; ++m) alpha.add(k, 0, k, m, c[m + k]);
  alpha.prune(0.0);
  cplx total = static_cast<double>(k) * ns;
  if (q.is_zero()) return total;

  const GauntTable table(q.lmax, k + J * q.lmax);
  BallFunction v = alpha;
  const int nq_min = q.f.min_n(), nq_max = q.f.max_n();
  for (int j = 0; j <= J; ++j) {
    if (j > 0) v = solve_R0(multiply_potential(q, v, table));
    if (v.empty()) break;
    const int nv_min = v.min_n(), nv_max = v.max_n();
    const double beta = nv_min + nq_min + k + 2.0;
    const int span = (nv_max - nv_min) + (nq_max - nq_min);
    const int nr = span / 2 + 1 + (v.max_p() > 0 ? 12 : 0);
    const int ang = v.max_l() + q.lmax + k;
    const auto quad = quadrature_s2(ang);
    if (quad.nodes.size() * static_cast<std::size_t>(nr) > 40'000'000)
      throw ResourceError("berezin_matrix_element: node budget exceeded at k = " + std::to_string(k));
    std::vector<double> rt, rw;
    gauss_jacobi01(nr, beta, rt, rw);
    const int Lh = std::max({v.max_l(), q.lmax, k});
    std::vector<cplx> part(quad.nodes.size());
    parallel_for(quad.nodes.size(), [&](std::size_t i) {
      const auto Y = eval_harmonics(Lh, quad.nodes[i]);
      cplx abar = 0;
      for (int m = -k; m <= k; ++m) abar += c[m + k] * Y[flat_index(k, m)];
      abar = std::conj(abar);
      cplx acc = 0;
      for (int ir = 0; ir < nr; ++ir) {
        const double r = rt[ir], lr = std::log(r);
        cplx vv = 0, qq = 0;
        for (const auto& [key, cc] : v.terms)
          vv += cc * std::pow(r, key.n - nv_min) * std::pow(lr, key.p) * Y[flat_index(key.l, key.m)];
        for (const auto& [key, cc] : q.f.terms) qq += cc * std::pow(r, key.n - nq_min) * Y[flat_index(key.l, key.m)];
        acc += rw[ir] * vv * qq;
      }
      part[i] = quad.weights[i] * acc * abar;
    });
    total += pairwise_sum(part.data(), part.size());
  }
  return total;
}

// ---------------------------------------------------------------------------

namespace {
RadialMoment radial_moment(const std::vector<double>& poly, int k, double c_fp) {
  double f1 = 0, fp = 0, fpp = 0, exact = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const double a = poly[i], d = static_cast<double>(i);
    f1 += a;
    fp += d * a;
    fpp += d * (d - 1) * a;
    exact += a / (2.0 * k + 3 + d);
  }
  const double K = 2.0 * k;
  RadialMoment r;
  r.terms = {f1 / K, -(3 * f1 + fp) / (K * K), (9 * f1 + c_fp * fp + fpp) / (K * K * K)};
  r.expansion = r.terms[0] + r.terms[1] + r.terms[2];
  r.exact = exact;
  return r;
}
}  // namespace

RadialMoment radial_moment_check(const std::vector<double>& poly, int k) { return radial_moment(poly, k, 7.0); }
RadialMoment radial_moment_check_printed(const std::vector<double>& poly, int k) {
  return radial_moment(poly, k, 5.0);
}

void export_dtn(const DtNMatrix& A, const std::string& bin_path, const std::string& json_path,
                const std::string& config_hash) {
  const int N = static_cast<int>(A.A.rows());
  std::vector<double> buf(static_cast<std::size_t>(N) * N * 2);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      buf[2 * (static_cast<std::size_t>(i) * N + j)] = A.A(i, j).real();
      buf[2 * (static_cast<std::size_t>(i) * N + j) + 1] = A.A(i, j).imag();
    }
  std::ofstream f(bin_path, std::ios::binary);
  if (!f) throw std::runtime_error("export_dtn: cannot open " + bin_path);
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["L"] = A.L;
  j["J"] = A.J;
  j["residual"] = A.residual;
  j["residual_flag"] = A.residual_flag;
  j["q_hash"] = hex64(A.q_hash);
  j["layout"] = "row-major complex128 as interleaved (re, im) f64, little-endian, flat index l*l+l+m";
  std::ofstream js(json_path);
  js << j.dump(2) << "\n";
}

}  // namespace dtn
