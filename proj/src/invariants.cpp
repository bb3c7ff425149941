#include "dtn/invariants.hpp"

#include <cstdio>
#include <sstream>

namespace dtn {

std::string Conventions::tag() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "kappa=%g,phi=%s,delta=%c", kappa, phi_arg == PhiArg::Q0 ? "q0" : "qhat",
                delta_sign < 0 ? '-' : '+');
  return buf;
}

nlohmann::ordered_json Conventions::to_json() const {
  return {{"kappa_delta", kappa},
          {"phi_arg", phi_arg == PhiArg::Q0 ? "q0" : "qhat"},
          {"delta_s2_sign", delta_sign < 0 ? "-" : "+"}};
}

namespace {

// Boundary value of sum_n w(n) c_{n,l,m} r^n Y_lm for a p = 0 ball function.
SphFunction radial_weighted(const BallFunction& f, int L, const std::function<double(int n, int l)>& w) {
  SphFunction s(L);
  for (const auto& [key, c] : f.terms) {
    if (key.p != 0) throw PreconditionError("boundary_fields: logarithmic terms are not supported");
    if (key.l <= L) s.at(key.l, key.m) += w(key.n, key.l) * c;
  }
  return s;
}

int effective_degree(const SphFunction& f) {
  for (int l = f.L; l > 0; --l)
    for (int m = -l; m <= l; ++m)
      if (f.at(l, m) != cplx{}) return l;
  return 0;
}

SphFunction realify(SphFunction f) {
  // drop the imaginary residue of fields that are real by construction
  SphFunction r = f;
  for (int l = 0; l <= f.L; ++l)
    for (int m = -l; m <= l; ++m) {
      const double s = (m % 2 == 0) ? 1.0 : -1.0;
      r.at(l, m) = 0.5 * (f.at(l, m) + s * std::conj(f.at(l, -m)));
    }
  return r;
}

}  // namespace

BoundaryFields boundary_fields(const Potential& q, int delta_sign) {
  const int L = q.lmax, L2 = 2 * q.lmax;
  const double ds = delta_sign < 0 ? -1.0 : 1.0;
  BoundaryFields b;
  b.q = radial_weighted(q.f, L2, [](int, int) { return 1.0; });
  b.dr = radial_weighted(q.f, L2, [](int n, int) { return double(n); });
  b.drr = radial_weighted(q.f, L2, [](int n, int) { return double(n) * (n - 1); });
  b.lap = radial_weighted(q.f, L2, [ds](int, int l) { return ds * l * (l + 1.0); });
  b.lap2 = radial_weighted(q.f, L2, [](int, int l) { return std::pow(l * (l + 1.0), 2); });
  b.dr_lap = radial_weighted(q.f, L2, [ds](int n, int l) { return ds * n * l * (l + 1.0); });
  if (q.is_zero()) {
    b.sq = SphFunction(L2);
  } else {
    const GauntTable table(L, L);
    b.sq = trace(multiply(q.f, q.f, table), L2);
  }
  return b;
}

SymbolJet symbol_jet(const Potential& q, int L, const Conventions& conv, const JetOptions& opt) {
  if (L < 2 * q.lmax) throw PreconditionError("symbol_jet: L must be >= twice the angular degree of q");
  const BoundaryFields b = boundary_fields(q, conv.delta_sign);
  auto I = [L](const SphFunction& f) { return radon_field(f.resized(L)); };
  SymbolJet j;
  j.L = L;
  j.conv = conv;
  j.q0 = 0.5 * I(b.q);
  j.q1 = 0.25 * I(-3.0 * b.q - b.dr + conv.kappa * b.lap);
  j.W = (opt.include_W && !q.is_zero()) ? W_field(q, L, opt.w) : SphFunction(L);
  j.q2 = 0.125 * I((307.0 / 32) * b.q + 2.0 * b.sq + 5.0 * b.dr + b.drr - (9.0 / 8) * b.lap +
                   (1.0 / 8) * b.lap2 - 0.5 * b.dr_lap) +
         j.W;
  j.q0 = realify(j.q0);
  j.q1 = realify(j.q1);
  j.q2 = realify(j.q2);
  return j;
}

GammaTerms gamma_terms(const SymbolJet& jet) {
  GammaTerms g;
  const OFunction lq0 = laplace_O(jet.q0);
  g.gamma1 = realify(jet.q2 - 0.25 * laplace_O(jet.q1) - (7.0 / 96) * laplace_O(lq0));
  // Gamma2 is a polynomial of degree <= 2d in mu, d the larger degree of q0, q1
  const int d = std::max(effective_degree(jet.q0), effective_degree(jet.q1));
  const OFunction q0 = jet.q0.resized(d), q1 = jet.q1.resized(d);
  const OFunction lapG = laplace_O(grad_norm_sq_field(q0));
  const int Lh = std::max(d, lapG.L);
  g.gamma2 = realify(project_O(
      [&](const Vec3& mu) {
        const auto h = harmonic_jets(Lh, chart_rotation(mu));
        const ChartJet j0 = chart_jet(q0, h), j1 = chart_jet(q1, h);
        const cplx l0 = laplace_O_at(j0);
        return (7.0 / 96) * l0 * l0 + (5.0 / 96) * chart_jet(lapG, h).v + 0.25 * j1.v * l0 +
               0.5 * (j1.v * j1.v + grad_dot(j0, j1) + D2_chart(j0, j0, 0.0));
      },
      2 * d));
  return g;
}

TestFunction TestFunction::one() {
  return {"one", [](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

TestFunction TestFunction::identity() {
  return {"id", [](double s) { return s; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

TestFunction TestFunction::square() {
  return {"square", [](double s) { return s * s; }, [](double s) { return 2 * s; }, [](double) { return 2.0; }};
}

TestFunction TestFunction::gauss(double sigma) {
  if (!(sigma > 0)) throw PreconditionError("gauss: sigma must be positive");
  const double a = 1.0 / (2 * sigma * sigma);
  return {"gauss(" + shortest(sigma) + ")", [a](double s) { return std::exp(-a * s * s); },
          [a](double s) { return -2 * a * s * std::exp(-a * s * s); },
          [a](double s) { return (4 * a * a * s * s - 2 * a) * std::exp(-a * s * s); }};
}

TestFunction TestFunction::polynomial(const std::vector<double>& c) {
  std::string name = "poly(";
  for (std::size_t i = 0; i < c.size(); ++i) name += (i ? "," : "") + shortest(c[i]);
  name += ")";
  auto horner = [](const std::vector<double>& a, double s) {
    double v = 0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) v = v * s + *it;
    return v;
  };
  std::vector<double> d1, d2;
  for (std::size_t i = 1; i < c.size(); ++i) d1.push_back(double(i) * c[i]);
  for (std::size_t i = 1; i < d1.size(); ++i) d2.push_back(double(i) * d1[i]);
  return {name, [c, horner](double s) { return horner(c, s); }, [d1, horner](double s) { return horner(d1, s); },
          [d2, horner](double s) { return horner(d2, s); }};
}

double TestFunction::derivative_defect() const {
  double worst = 0;
  for (int i = 0; i <= 80; ++i) {
    const double s = -2 + 0.05 * i;
    const double h1 = 1e-4, h2 = 2e-4;
    const double fd1 = (f(s + h1) - f(s - h1)) / (2 * h1);
    const double fd2 = (f(s + h2) - 2 * f(s) + f(s - h2)) / (h2 * h2);
    worst = std::max(worst, std::abs(fd1 - df(s)) / std::max(1.0, std::abs(df(s))));
    worst = std::max(worst, std::abs(fd2 - d2f(s)) / std::max(1.0, std::abs(d2f(s))));
  }
  return worst;
}

TestFunction parse_test_function(const std::string& spec) {
  if (spec == "one") return TestFunction::one();
  if (spec == "id" || spec == "identity") return TestFunction::identity();
  if (spec == "square") return TestFunction::square();
  auto args = [&](const std::string& head) {
    if (spec.rfind(head + "(", 0) != 0 || spec.back() != ')')
      throw PreconditionError("unknown test function '" + spec + "'");
    std::vector<double> v;
    std::stringstream ss(spec.substr(head.size() + 1, spec.size() - head.size() - 2));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      double x;
      try {
        x = std::stod(tok, &pos);
      } catch (const std::exception&) {
        throw PreconditionError("bad number in test function '" + spec + "'");
      }
      if (tok.find_first_not_of(" \t", pos) != std::string::npos)
        throw PreconditionError("bad number in test function '" + spec + "'");
      v.push_back(x);
    }
    return v;
  };
  if (spec.rfind("gauss(", 0) == 0) {
    const auto v = args("gauss");
    if (v.size() != 1) throw PreconditionError("gauss takes one argument");
    return TestFunction::gauss(v[0]);
  }
  if (spec.rfind("poly(", 0) == 0) {
    const auto v = args("poly");
    if (v.empty()) throw PreconditionError("poly needs at least one coefficient");
    return TestFunction::polynomial(v);
  }
  throw PreconditionError("unknown test function '" + spec + "'");
}

OIntegral integrate_O(const std::function<std::vector<double>(const Vec3&)>& fn, int start_exactness, double tol,
                      int max_exactness) {
  OIntegral out;
  std::vector<double> prev;
  for (int e = std::max(start_exactness, 1);; e *= 2) {
    const auto quad = quadrature_s2(e);
    const std::size_t n = quad.nodes.size();
    std::vector<std::vector<double>> vals(n);
    parallel_for(n, [&](std::size_t i) { vals[i] = fn(quad.nodes[i]); });
    const std::size_t nc = vals.empty() ? 0 : vals[0].size();
    std::vector<double> cur(nc), part(n);
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t i = 0; i < n; ++i) part[i] = quad.weights[i] / (4 * kPi) * vals[i][c];
      cur[c] = pairwise_sum(part.data(), n);
    }
    out.values = cur;
    out.exactness = e;
    if (!prev.empty()) {
      out.drift = 0;
      for (std::size_t c = 0; c < nc; ++c) out.drift = std::max(out.drift, std::abs(cur[c] - prev[c]));
      if (out.drift < tol || 2 * e > max_exactness) return out;
    } else if (2 * e > max_exactness) {
      return out;
    }
    prev = cur;
  }
}

namespace {

struct FieldSet {
  std::vector<const OFunction*> fields;
  int L = 0;
  explicit FieldSet(std::vector<const OFunction*> f) : fields(std::move(f)) {
    for (auto* p : fields) L = std::max(L, p->L);
  }
  std::vector<double> at(const Vec3& mu) const {
    const auto y = eval_harmonics(L, mu);
    std::vector<double> v;
    for (auto* p : fields) {
      cplx s = 0;
      for (int i = 0; i < num_coeffs(p->L); ++i) s += p->coeffs[i] * y[i];
      v.push_back(s.real());
    }
    return v;
  }
};

}  // namespace

InvariantReport beta_predict(const SymbolJet& jet, const GammaTerms& g, const TestFunction& phi) {
  const OFunction lq0 = laplace_O(jet.q0);
  const FieldSet fs({&jet.q0, &lq0, &jet.q1, &g.gamma1, &g.gamma2});
  const double scale = jet.conv.phi_arg == PhiArg::QHat ? 2.0 : 1.0;
  const OIntegral I = integrate_O(
      [&](const Vec3& mu) {
        const auto v = fs.at(mu);
        const double u = scale * v[0], d1 = phi.df(u), d2 = phi.d2f(u);
        return std::vector<double>{phi.f(u), d1 * 0.25 * v[1], d1 * v[2], d2 * v[4], d1 * v[3]};
      },
      2 * jet.L + 8);
  InvariantReport r;
  r.phi = phi.name;
  r.conv = jet.conv;
  r.L = jet.L;
  r.beta0 = I.values[0];
  r.beta1_lap = I.values[1];
  r.beta1_q1 = I.values[2];
  r.beta2_gamma2 = I.values[3];
  r.beta2_gamma1 = I.values[4];
  r.beta1 = r.beta1_lap + r.beta1_q1;
  r.beta2 = r.beta2_gamma2 + r.beta2_gamma1;
  r.exactness = I.exactness;
  r.drift = I.drift;
  return r;
}

InvariantReport beta_predict(const SymbolJet& jet, const TestFunction& phi) {
  return beta_predict(jet, gamma_terms(jet), phi);
}

nlohmann::ordered_json InvariantReport::to_json() const {
  return {{"phi", phi},
          {"conventions", conv.to_json()},
          {"beta0", beta0},
          {"beta1", beta1},
          {"beta2", beta2},
          {"terms",
           {{"beta1_laplace_q0", beta1_lap},
            {"beta1_q1", beta1_q1},
            {"beta2_gamma2", beta2_gamma2},
            {"beta2_gamma1", beta2_gamma1}}},
          {"quadrature", {{"L", L}, {"exactness", exactness}, {"drift", drift}}}};
}

OddJet odd_jet(const Potential& q, int L, const Conventions& conv, const JetOptions& opt) {
  if (!q.restriction_odd) throw PreconditionError("odd_jet: boundary restriction of q is not odd");
  if (L < 2 * q.lmax) throw PreconditionError("odd_jet: L must be >= twice the angular degree of q");
  const BoundaryFields b = boundary_fields(q, conv.delta_sign);
  auto I = [L](const SphFunction& f) { return radon_field(f.resized(L)); };
  OddJet j;
  j.L = L;
  j.radon_dr = realify(I(b.dr));
  j.q0 = -0.25 * j.radon_dr;
  j.W = (opt.include_W && !q.is_zero()) ? W_field(q, L, opt.w) : SphFunction(L);
  j.q1 = realify(0.125 * I(2.0 * b.sq + 5.0 * b.dr + b.drr - 0.5 * b.dr_lap) + j.W);
  return j;
}

OddReport odd_predict(const OddJet& jet, const TestFunction& phi) {
  const OFunction lr = laplace_O(jet.radon_dr);
  const FieldSet fs({&jet.q0, &lr, &jet.q1});
  const OIntegral I = integrate_O(
      [&](const Vec3& mu) {
        const auto v = fs.at(mu);
        return std::vector<double>{phi.f(v[0]), phi.df(v[0]) * (-v[1] / 16 + v[2])};
      },
      2 * jet.L + 8);
  OddReport r;
  r.phi = phi.name;
  r.beta0 = I.values[0];
  r.beta1 = I.values[1];
  r.exactness = I.exactness;
  r.drift = I.drift;
  return r;
}

OddReport odd_predict(const Potential& q, const TestFunction& phi, int L, const Conventions& conv,
                      const JetOptions& opt) {
  return odd_predict(odd_jet(q, L, conv, opt), phi);
}

nlohmann::ordered_json OddReport::to_json() const {
  return {{"phi", phi},
          {"beta0_odd", beta0},
          {"beta1_odd", beta1},
          {"quadrature", {{"exactness", exactness}, {"drift", drift}}}};
}

}  // namespace dtn
