#include "dtn/geodesics.hpp"

#include "dtn/jet.hpp"

#include <cstdio>
#include <fstream>

namespace dtn {

namespace {
int effective_degree(const SphFunction& f) {
  int d = 0;
  for (int l = 0; l <= f.L; ++l)
    for (int m = -l; m <= l; ++m)
      if (f.at(l, m) != cplx{}) d = l;
  return d;
}

// Harmonic jets from the Cartesian recurrence evaluated on jet coordinates.
std::vector<ChartJet> jets_from_coords(int L, const Jet2& x1, const Jet2& x2, const Jet2& x3) {
  std::vector<Jet2> Q, C, S;
  sh_cartesian_parts<Jet2>(L, x1, x2, x3, Jet2(1.0), Q, C, S);
  std::vector<ChartJet> out(num_coeffs(L));
  auto combine = [](const Jet2& re, const Jet2& im) {
    ChartJet j;
    j.v = {re.v, im.v};
    j.x = {re.x, im.x};
    j.y = {re.y, im.y};
    j.xx = {re.xx, im.xx};
    j.xy = {re.xy, im.xy};
    j.yy = {re.yy, im.yy};
    return j;
  };
  for (int l = 0; l <= L; ++l)
    for (int m = 0; m <= l; ++m) {
      const Jet2 re = Q[tri_index(l, m)] * C[m], im = Q[tri_index(l, m)] * S[m];
      out[flat_index(l, m)] = combine(re, im);
      if (m > 0) {
        const double s = (m % 2) ? -1.0 : 1.0;
        out[flat_index(l, -m)] = combine(s * re, -s * im);
      }
    }
  return out;
}
}  // namespace

cplx radon(const SphFunction& f, const OrbitPoint& orbit, int Ns) {
  const int d = effective_degree(f);
  if (Ns < 2 * d + 2) throw PreconditionError("radon: Ns must be >= 2*degree+2");
  std::vector<cplx> vals(Ns);
  for (int j = 0; j < Ns; ++j) {
    const double s = 2 * kPi * j / Ns;
    vals[j] = synthesize_at(f, orbit.frame.xi * std::cos(s) + orbit.frame.eta * std::sin(s));
  }
  return pairwise_sum(vals.data(), vals.size()) / static_cast<double>(Ns);
}

double legendre_at_zero(int l) {
  if (l % 2) return 0.0;
  double v = 1.0;
  for (int i = 1; i <= l / 2; ++i) v *= -(2.0 * i - 1) / (2.0 * i);
  return v;
}

OFunction radon_field(const SphFunction& f) {
  OFunction r = f;
  for (int l = 0; l <= f.L; ++l) {
    const double p = legendre_at_zero(l);
    for (int m = -l; m <= l; ++m) r.at(l, m) *= p;
  }
  return r;
}

OFunction laplace_O(const OFunction& f) { return laplace_s2(f); }

Eigen::Matrix3d chart_rotation(const Vec3& center) {
  Vec3 u, v;
  const Vec3 n = center.normalized();
  orthonormal_completion(n, u, v);
  Eigen::Matrix3d R;
  R.col(0) = u;
  R.col(1) = v;
  R.col(2) = n;
  return R;
}

std::vector<ChartJet> harmonic_jets(int L, const Eigen::Matrix3d& R, double x0, double y0) {
  const Jet2 wx = Jet2::var_x(x0), wy = Jet2::var_y(y0);
  const Jet2 inv = inverse(1.0 + wx * wx + wy * wy);
  const Jet2 s[3] = {2.0 * wx * inv, 2.0 * wy * inv, (1.0 - wx * wx - wy * wy) * inv};
  Jet2 mu[3];
  for (int i = 0; i < 3; ++i) mu[i] = R(i, 0) * s[0] + R(i, 1) * s[1] + R(i, 2) * s[2];
  return jets_from_coords(L, mu[0], mu[1], mu[2]);
}

ChartJet chart_jet(const OFunction& f, const std::vector<ChartJet>& h) {
  ChartJet r;
  const std::size_t n = std::min(f.coeffs.size(), h.size());
  for (std::size_t i = 0; i < n; ++i) {
    const cplx c = f.coeffs[i];
    if (c == cplx{}) continue;
    r.v += c * h[i].v;
    r.x += c * h[i].x;
    r.y += c * h[i].y;
    r.xx += c * h[i].xx;
    r.xy += c * h[i].xy;
    r.yy += c * h[i].yy;
  }
  return r;
}

ChartJet chart_jet(const OFunction& f, const Vec3& mu) {
  return chart_jet(f, harmonic_jets(f.L, chart_rotation(mu)));
}

// At the chart centre the metric is 4|dw|^2, so g^{ij} = delta/4.
cplx grad_dot(const ChartJet& f, const ChartJet& g) { return 0.25 * (f.x * g.x + f.y * g.y); }
cplx laplace_O_at(const ChartJet& f) { return -0.25 * (f.xx + f.yy); }
cplx poisson_O_at(const ChartJet& f, const ChartJet& g) { return 0.25 * (f.y * g.x - f.x * g.y); }

double grad_norm_sq(const OFunction& f, const Vec3& mu) {
  const auto j = chart_jet(f, mu);
  return 0.25 * (std::norm(j.x) + std::norm(j.y));
}

OFunction project_O(const std::function<cplx(const Vec3&)>& fn, int L) {
  const auto q = quadrature_s2(2 * L);
  std::vector<cplx> vals(q.nodes.size());
  parallel_for(q.nodes.size(), [&](std::size_t i) { vals[i] = fn(q.nodes[i]); });
  return analyze(q, vals, L);
}

OFunction grad_norm_sq_field(const OFunction& f) {
  return project_O([&](const Vec3& mu) { return cplx(grad_norm_sq(f, mu)); }, 2 * f.L);
}

cplx poisson_O(const OFunction& f, const OFunction& g, const Vec3& mu) {
  const auto h = harmonic_jets(std::max(f.L, g.L), chart_rotation(mu));
  return poisson_O_at(chart_jet(f, h), chart_jet(g, h));
}

PhasePoint phase_flow(const PhasePoint& pt, double t) {
  const double np = pt.p.norm();
  if (!(np > 0)) throw DomainError("phase_flow: |p| must be > 0");
  const double c = std::cos(t), s = std::sin(t);
  return {pt.x * c + (pt.p / np) * s, pt.p * c - np * pt.x * s};
}

double poisson_TstarS2(const PhaseFn& f, const PhaseFn& g, const PhasePoint& pt) {
  const Vec3 e1 = pt.x.normalized();
  Vec3 e2 = pt.p - pt.p.dot(e1) * e1;
  if (e2.norm() > 1e-12) {
    e2.normalize();
  } else {
    Vec3 u, v;
    orthonormal_completion(e1, u, v);
    e2 = u;
  }
  const Vec3 e3 = e1.cross(e2);
  // (theta, phi, p_theta, p_phi) with the base point at theta = pi/2, phi = 0
  auto lift = [&](const double c[4], Vec3& x, Vec3& p) {
    const double st = std::sin(c[0]), ct = std::cos(c[0]), sp = std::sin(c[1]), cp = std::cos(c[1]);
    x = st * cp * e1 + st * sp * e2 + ct * e3;
    const Vec3 et = ct * cp * e1 + ct * sp * e2 - st * e3;
    const Vec3 ep = -sp * e1 + cp * e2;
    p = c[2] * et + (c[3] / st) * ep;
  };
  const double base[4] = {kPi / 2, 0.0, pt.p.dot(-e3), pt.p.dot(e2)};
  auto deriv = [&](const PhaseFn& F, int i) {
    auto central = [&](double h) {
      double cp[4], cm[4];
      for (int j = 0; j < 4; ++j) cp[j] = cm[j] = base[j];
      cp[i] += h;
      cm[i] -= h;
      Vec3 x, p;
      lift(cp, x, p);
      const double fp = F(x, p);
      lift(cm, x, p);
      const double fm = F(x, p);
      return (fp - fm) / (2 * h);
    };
    const double h = 1e-4;
    return (4 * central(h / 2) - central(h)) / 3;
  };
  double r = 0;
  for (int i = 0; i < 2; ++i) r += deriv(f, i) * deriv(g, i + 2) - deriv(f, i + 2) * deriv(g, i);
  return r;
}

double W_integral(const std::function<double(const Vec3&)>& qb, const OrbitPoint& orbit, const WOptions& opt) {
  if (opt.Nt < 1 || opt.Ns < 1) throw PreconditionError("W_integral: Nt, Ns must be >= 1");
  std::vector<double> tn, tw;
  gauss_legendre(opt.Nt, tn, tw);
  const PhasePoint z{orbit.frame.xi, orbit.frame.eta};
  auto F = [&](const Vec3& x, const Vec3& p) { return qb(x) / p.norm(); };
  std::vector<double> rows(opt.Nt);
  parallel_for(static_cast<std::size_t>(opt.Nt), [&](std::size_t it) {
    const double t = kPi * (tn[it] + 1), wt = kPi * tw[it];
    std::vector<double> inner(opt.Ns);
    for (int js = 0; js < opt.Ns; ++js) {
      const double s = 2 * kPi * js / opt.Ns;
      const PhaseFn f1 = [&](const Vec3& x, const Vec3& p) {
        const auto y = phase_flow({x, p}, t + s);
        return F(y.x, y.p);
      };
      const PhaseFn f2 = [&](const Vec3& x, const Vec3& p) {
        const auto y = phase_flow({x, p}, s);
        return F(y.x, y.p);
      };
      inner[js] = poisson_TstarS2(f1, f2, z);
    }
    rows[it] = wt * t * (2 * kPi / opt.Ns) * pairwise_sum(inner.data(), inner.size());
  });
  return -pairwise_sum(rows.data(), rows.size()) / (32 * kPi * kPi);
}

double dirac_bracket(const Vec3& x, const Vec3& p, const Vec3& fx, const Vec3& fp, const Vec3& gx,
                     const Vec3& gp) {
  auto P = [&](const Vec3& v) { return Vec3(v - x * x.dot(v)); };
  return fx.dot(P(gp)) - fp.dot(P(gx)) + fp.dot(p) * x.dot(gp) - fp.dot(x) * p.dot(gp);
}

double W_integral(const Potential& q, const OrbitPoint& orbit, const WOptions& opt) {
  if (opt.Nt < 1 || opt.Ns < 1) throw PreconditionError("W_integral: Nt, Ns must be >= 1");
  std::vector<double> tn, tw;
  gauss_legendre(opt.Nt, tn, tw);
  const PhasePoint z{orbit.frame.xi, orbit.frame.eta};
  // {F o phi_{t+s}, F o phi_s}(z) = {F o phi_t, F}(phi_s z)
  struct Base {
    Vec3 x, p, ph, Fx, Fp;
    double np;
  };
  std::vector<Base> base(opt.Ns);
  for (int js = 0; js < opt.Ns; ++js) {
    const auto w = phase_flow(z, 2 * kPi * js / opt.Ns);
    Base& b = base[js];
    b.x = w.x;
    b.p = w.p;
    b.np = w.p.norm();
    b.ph = w.p / b.np;
    b.Fx = q.gradient(w.x) / b.np;
    b.Fp = -q.value(w.x) * w.p / (b.np * b.np * b.np);
  }
  std::vector<double> rows(opt.Nt);
  parallel_for(static_cast<std::size_t>(opt.Nt), [&](std::size_t it) {
    const double t = kPi * (tn[it] + 1), wt = kPi * tw[it];
    const double c = std::cos(t), s = std::sin(t);
    std::vector<double> inner(opt.Ns);
    for (int js = 0; js < opt.Ns; ++js) {
      const Base& b = base[js];
      const Vec3 g = b.x * c + b.ph * s;
      const Vec3 dq = q.gradient(g);
      const Vec3 Gx = c * dq / b.np;
      const Vec3 Gp = s * (dq - b.ph * b.ph.dot(dq)) / (b.np * b.np) - q.value(g) * b.p / (b.np * b.np * b.np);
      inner[js] = dirac_bracket(b.x, b.p, Gx, Gp, b.Fx, b.Fp);
    }
    rows[it] = wt * t * (2 * kPi / opt.Ns) * pairwise_sum(inner.data(), inner.size());
  });
  return -pairwise_sum(rows.data(), rows.size()) / (32 * kPi * kPi);
}

OFunction W_field(const Potential& q, int L, const WOptions& opt) {
  const SphFunction b = trace(q.f, q.lmax);
  double nonconst = 0;
  for (int l = 1; l <= b.L; ++l)
    for (int m = -l; m <= l; ++m) nonconst = std::max(nonconst, std::abs(b.at(l, m)));
  if (nonconst <= 1e-14 * std::max(1.0, q.sup_bound)) return OFunction(L);
  return project_O([&](const Vec3& mu) { return cplx(W_integral(q, OrbitPoint::from_momentum(mu), opt)); }, L);
}

cplx equator_polar_second_mean(const SphFunction& f) {
  const int L = f.L;
  const int Ns = 2 * L + 2;
  // polar angle pi/2 + e: sin = cos e, cos = -sin e, as second-order jets in e
  Jet2 sp(1.0), cp(0.0);
  sp.xx = -1;
  cp.x = -1;
  std::vector<cplx> vals(Ns);
  for (int j = 0; j < Ns; ++j) {
    const double th = 2 * kPi * j / Ns;
    const auto h = jets_from_coords(L, sp * std::cos(th), sp * std::sin(th), cp);
    vals[j] = chart_jet(f, h).xx;
  }
  return pairwise_sum(vals.data(), vals.size()) / static_cast<double>(Ns);
}

void write_orbit_csv(const std::string& path, const std::vector<Vec3>& mus, const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& cols, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "mu1,mu2,mu3";
  for (const auto& n : names) out << "," << n;
  out << "\n";
  char buf[64];
  for (std::size_t i = 0; i < mus.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      std::snprintf(buf, sizeof buf, "%s%.17g", c ? "," : "", mus[i][c]);
      out << buf;
    }
    for (const auto& col : cols) {
      std::snprintf(buf, sizeof buf, ",%.17g", col[i]);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace dtn
