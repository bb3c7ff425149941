#include <doctest.h>

#include "dtn/geodesics.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>

using namespace dtn;
using testutil::uniform;

namespace {
OrbitPoint random_orbit() { return {testutil::random_frame()}; }

Potential random_poly(int deg) {
  std::vector<Monomial> ms;
  for (int a = 0; a <= deg; ++a)
    for (int b = 0; a + b <= deg; ++b)
      for (int c = 0; a + b + c <= deg; ++c) ms.push_back({a, b, c, uniform()});
  return make_potential(ms);
}

// Value of f at the chart point w, for finite-difference oracles.
cplx chart_value(const OFunction& f, const Eigen::Matrix3d& R, double x, double y) {
  const double d = 1 + x * x + y * y;
  const Vec3 s(2 * x / d, 2 * y / d, (1 - x * x - y * y) / d);
  return synthesize_at(f, R * s);
}
}  // namespace

TEST_CASE("radon transform examples") {
  SphFunction one(0);
  one.at(0, 0) = std::sqrt(4 * kPi);
  const auto o = random_orbit();
  CHECK(std::abs(radon(one, o, 4) - 1.0) < 1e-14);
  for (int m = -1; m <= 1; ++m) {
    SphFunction y(1);
    y.at(1, m) = 1.0;
    CHECK(std::abs(radon(y, random_orbit(), 4)) < 1e-15);
  }
  const auto z2 = analyze_function([](const Vec3& x) { return cplx(x[2] * x[2]); }, 2);
  for (int t = 0; t < 10; ++t) {
    const auto orb = random_orbit();
    const double mu3 = orb.momentum()[2];
    CHECK(std::abs(radon(z2, orb, 6) - (1 - mu3 * mu3) / 2) < 1e-14);
  }
  CHECK_THROWS_AS(radon(z2, o, 5), PreconditionError);
}

TEST_CASE("radon field multiplies by P_l(0)") {
  CHECK(legendre_at_zero(0) == 1.0);
  CHECK(legendre_at_zero(2) == -0.5);
  CHECK(legendre_at_zero(4) == doctest::Approx(3.0 / 8).epsilon(1e-15));
  CHECK(legendre_at_zero(6) == doctest::Approx(-5.0 / 16).epsilon(1e-15));
  CHECK(legendre_at_zero(7) == 0.0);
  const auto f = testutil::random_complex_sph(12);
  const auto F = radon_field(f);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const auto orb = random_orbit();
    worst = std::max(worst, std::abs(radon(f, orb, 26) - synthesize_at(F, orb.momentum())));
  }
  CHECK(worst < 1e-10);
  SphFunction odd = testutil::random_complex_sph(9);
  for (int l = 0; l <= 9; l += 2)
    for (int m = -l; m <= l; ++m) odd.at(l, m) = 0;
  for (auto c : radon_field(odd).coeffs) CHECK(c == cplx{});
}

TEST_CASE("chart jets agree with finite differences") {
  const auto f = testutil::random_complex_sph(6);
  const auto R = testutil::random_rotation();
  const double x0 = 0.3, y0 = -0.2, h = 1e-4;
  const auto j = chart_jet(f, harmonic_jets(6, R, x0, y0));
  auto F = [&](double x, double y) { return chart_value(f, R, x, y); };
  CHECK(std::abs(j.v - F(x0, y0)) < 1e-12);
  CHECK(std::abs(j.x - (F(x0 + h, y0) - F(x0 - h, y0)) / (2 * h)) < 1e-5);
  CHECK(std::abs(j.y - (F(x0, y0 + h) - F(x0, y0 - h)) / (2 * h)) < 1e-5);
  CHECK(std::abs(j.xx - (F(x0 + h, y0) - 2.0 * F(x0, y0) + F(x0 - h, y0)) / (h * h)) < 1e-4);
  CHECK(std::abs(j.yy - (F(x0, y0 + h) - 2.0 * F(x0, y0) + F(x0, y0 - h)) / (h * h)) < 1e-4);
  const cplx fxy = (F(x0 + h, y0 + h) - F(x0 + h, y0 - h) - F(x0 - h, y0 + h) + F(x0 - h, y0 - h)) / (4 * h * h);
  CHECK(std::abs(j.xy - fxy) < 1e-4);
}

TEST_CASE("Laplacian on O") {
  SphFunction y1(1);
  y1.at(1, 0) = 1.0;
  CHECK(laplace_O(y1).at(1, 0) == cplx(2.0));
  SphFunction c(0);
  c.at(0, 0) = 3.0;
  CHECK(laplace_O(c).at(0, 0) == cplx(0.0));
  CHECK(grad_norm_sq(c, testutil::random_unit()) == 0.0);
  // integral of a Laplacian vanishes
  CHECK(laplace_O(testutil::random_complex_sph(7)).at(0, 0) == cplx(0.0));

  // coefficientwise rule equals -nu^2 d^2/dz dzbar off the chart centre
  const auto R = testutil::random_rotation();
  double worst = 0;
  for (int l = 0; l <= 6; ++l)
    for (int m = -l; m <= l; ++m) {
      SphFunction f(6);
      f.at(l, m) = 1.0;
      for (int t = 0; t < 3; ++t) {
        const double x = uniform(-0.7, 0.7), y = uniform(-0.7, 0.7), nu = 1 + x * x + y * y;
        const auto j = chart_jet(f, harmonic_jets(6, R, x, y));
        worst = std::max(worst, std::abs(-nu * nu * j.zzb() - double(l) * (l + 1) * j.v));
      }
    }
  CHECK(worst < 1e-8);
}

TEST_CASE("gradient norm of the height function") {
  const auto mu3 = analyze_function([](const Vec3& x) { return cplx(x[2]); }, 1);
  const auto g = grad_norm_sq_field(mu3);
  const auto expect = analyze_function([](const Vec3& x) { return cplx(1 - x[2] * x[2]); }, 2);
  for (int i = 0; i < num_coeffs(2); ++i) CHECK(std::abs(g.coeffs[i] - expect.coeffs[i]) < 1e-13);
  for (int t = 0; t < 5; ++t) {
    const Vec3 p = testutil::random_unit();
    CHECK(grad_norm_sq(mu3, p) == doctest::Approx(1 - p[2] * p[2]).epsilon(1e-13));
  }
}

TEST_CASE("Poisson bracket on O") {
  const auto m1 = analyze_function([](const Vec3& x) { return cplx(x[0]); }, 1);
  const auto m2 = analyze_function([](const Vec3& x) { return cplx(x[1]); }, 1);
  const auto f = testutil::random_real_sph(5), g = testutil::random_real_sph(4), h = testutil::random_real_sph(3);
  for (int t = 0; t < 10; ++t) {
    const Vec3 p = testutil::random_unit();
    // structure constant fixed by omega = (2i/nu^2) dz ^ dzbar
    CHECK(std::abs(poisson_O(m1, m2, p) + p[2]) < 1e-13);
    CHECK(std::abs(poisson_O(f, f, p)) < 1e-13);
    CHECK(std::abs(poisson_O(f, g, p) + poisson_O(g, f, p)) < 1e-12);
    CHECK(std::abs(poisson_O(f + 2.0 * h, g, p) - poisson_O(f, g, p) - 2.0 * poisson_O(h, g, p)) < 1e-11);
    // independent of the chart rotation used at p
    const Vec3 u = p.unitOrthogonal(), v = p.cross(u);
    Eigen::Matrix3d R;
    R.col(0) = u;
    R.col(1) = v;
    R.col(2) = p;
    const auto hj = harmonic_jets(5, R);
    CHECK(std::abs(poisson_O_at(chart_jet(f, hj), chart_jet(g, hj)) - poisson_O(f, g, p)) < 1e-12);
  }
  // finite-difference oracle in the chart
  const Vec3 p = testutil::random_unit();
  const auto R = chart_rotation(p);
  const double hh = 1e-5;
  auto fx = [&](const OFunction& a) { return (chart_value(a, R, hh, 0) - chart_value(a, R, -hh, 0)) / (2 * hh); };
  auto fy = [&](const OFunction& a) { return (chart_value(a, R, 0, hh) - chart_value(a, R, 0, -hh)) / (2 * hh); };
  CHECK(std::abs(0.25 * (fy(f) * fx(g) - fx(f) * fy(g)) - poisson_O(f, g, p)) < 1e-7);
}

TEST_CASE("geodesic flow") {
  for (int t = 0; t < 20; ++t) {
    const Vec3 x = testutil::random_unit();
    const Vec3 p = uniform(0.2, 3) * x.unitOrthogonal();
    const PhasePoint pt{x, p};
    const auto back = phase_flow(pt, 2 * kPi);
    CHECK((back.x - x).norm() < 1e-14);
    CHECK((back.p - p).norm() < 1e-13);
    const double s = uniform(-5, 5);
    const auto q = phase_flow(pt, s);
    CHECK(q.p.norm() == doctest::Approx(p.norm()).epsilon(1e-14));
    CHECK(std::abs(q.x.norm() - 1) < 1e-14);
    CHECK(std::abs(q.x.dot(q.p)) < 1e-13);
  }
  // on |p| = 1 the flow rotates the frame phase: x(t) + i p(t) = e^{-it}(x + ip)
  const auto fr = testutil::random_frame();
  const double t = 0.7;
  const auto q = phase_flow({fr.xi, fr.eta}, t);
  const CVec3 zt = q.x.cast<cplx>() + cplx(0, 1) * q.p.cast<cplx>();
  const CVec3 z0 = fr.z();
  CHECK((zt - std::exp(cplx(0, -t)) * z0).norm() < 1e-14);
  CHECK_THROWS_AS(phase_flow({Vec3::UnitX(), Vec3::Zero()}, 1.0), DomainError);
}

TEST_CASE("canonical bracket on the cotangent bundle") {
  auto L = [](int i) { return PhaseFn([i](const Vec3& x, const Vec3& p) { return x.cross(p)[i]; }); };
  const PhaseFn f = [](const Vec3& x, const Vec3& p) { return std::sin(x[0] + 2 * x[2]) * p.norm() + p[1] * x[2]; };
  const PhaseFn g = [](const Vec3& x, const Vec3& p) { return x[1] * x[1] / p.norm() + p.dot(Vec3(1, 2, 3)); };
  for (int t = 0; t < 10; ++t) {
    const Vec3 x = testutil::random_unit();
    const PhasePoint pt{x, uniform(0.5, 2) * x.unitOrthogonal()};
    CHECK(std::abs(poisson_TstarS2(f, f, pt)) < 1e-9);
    const Vec3 Lv = x.cross(pt.p);
    CHECK(std::abs(poisson_TstarS2(L(0), L(1), pt) - Lv[2]) < 1e-6);
    CHECK(std::abs(poisson_TstarS2(L(1), L(2), pt) - Lv[0]) < 1e-6);
    CHECK(std::abs(poisson_TstarS2(f, g, pt) + poisson_TstarS2(g, f, pt)) < 1e-9);
    // the flow is symplectic
    const double s = uniform(0, 2 * kPi);
    const PhaseFn fs = [&](const Vec3& a, const Vec3& b) {
      const auto y = phase_flow({a, b}, s);
      return f(y.x, y.p);
    };
    const PhaseFn gs = [&](const Vec3& a, const Vec3& b) {
      const auto y = phase_flow({a, b}, s);
      return g(y.x, y.p);
    };
    CHECK(std::abs(poisson_TstarS2(fs, gs, pt) - poisson_TstarS2(f, g, phase_flow(pt, s))) < 1e-6);
  }
}

TEST_CASE("Dirac bracket matches the chart bracket") {
  const PhaseFn f = [](const Vec3& x, const Vec3& p) { return x[0] * x[2] * p.norm() + p[1] * x[2] * x[2]; };
  const PhaseFn g = [](const Vec3& x, const Vec3& p) { return x[1] * x[1] / p.norm() + p.dot(Vec3(1, 2, 3)) * x[0]; };
  for (int t = 0; t < 10; ++t) {
    const Vec3 x = testutil::random_unit();
    const Vec3 p = uniform(0.5, 2) * x.unitOrthogonal();
    const double np = p.norm();
    const Vec3 fx(x[2] * np, 0, x[0] * np + 2 * p[1] * x[2]);
    const Vec3 fp = x[0] * x[2] * p / np + Vec3(0, x[2] * x[2], 0);
    const Vec3 gx = Vec3(0, 2 * x[1] / np, 0) + Vec3(p.dot(Vec3(1, 2, 3)), 0, 0);
    const Vec3 gp = -x[1] * x[1] * p / (np * np * np) + x[0] * Vec3(1, 2, 3);
    CHECK(std::abs(dirac_bracket(x, p, fx, fp, gx, gp) - poisson_TstarS2(f, g, {x, p})) < 1e-7);
  }
}

TEST_CASE("W integral") {
  const auto c = constant_potential(0.8);
  CHECK(std::abs(W_integral(c, random_orbit())) < 1e-10);
  for (auto x : W_field(c, 4).coeffs) CHECK(x == cplx{});

  const auto q = make_potential({{0, 0, 2, 1.0}});
  const auto orb = random_orbit();
  const double w0 = W_integral(q, orb);
  CHECK(std::abs(w0) > 1e-6);
  WOptions fine;
  fine.Nt = fine.Ns = 128;
  CHECK(std::abs(W_integral(q, orb, fine) - w0) < 1e-6);
  // frame representative of the orbit does not matter
  CHECK(std::abs(W_integral(q, {orb.frame.phase_shifted(0.37)}) - w0) < 1e-8);

  // rotation equivariance with a less symmetric potential
  const auto p = make_potential({{0, 0, 2, 1.0}, {1, 1, 0, 0.5}, {1, 0, 0, 0.3}});
  const Eigen::Matrix3d R = testutil::random_rotation();
  auto qR = [&](const Vec3& x) { return p.value(R * x); };
  const auto o2 = random_orbit();
  OrbitPoint Ro{CoherentFrame{R * o2.frame.xi, R * o2.frame.eta}};
  CHECK(std::abs(W_integral(qR, o2) - W_integral(p, Ro)) < 1e-5);
  // analytic route against the finite-difference reference
  auto pb = [&](const Vec3& x) { return p.value(x); };
  CHECK(std::abs(W_integral(pb, o2) - W_integral(p, o2)) < 1e-6);
}

TEST_CASE("polar second derivative averages to the Radon transform of the Laplacian") {
  for (int t = 0; t < 5; ++t) {
    const auto q = random_poly(5);
    const auto b = trace(q.f, q.lmax);
    const cplx lhs = equator_polar_second_mean(b);
    // analyst sign: Delta Y_l = -l(l+1) Y_l
    const cplx rhs = -synthesize_at(radon_field(laplace_s2(b)), Vec3::UnitZ());
    CHECK(std::abs(lhs - rhs) < 1e-8);
    CHECK(std::abs(lhs + rhs) > 1e-3);
  }
}

TEST_CASE("orbit CSV") {
  const auto path = (std::filesystem::temp_directory_path() / "dtn_orbits.csv").string();
  write_orbit_csv(path, {Vec3::UnitZ(), Vec3::UnitX()}, {"v"}, {{0.25, -1.5}}, "test");
  std::ifstream in(path);
  std::string a, b, c, d;
  std::getline(in, a);
  std::getline(in, b);
  std::getline(in, c);
  std::getline(in, d);
  CHECK(a == "# test");
  CHECK(b == "mu1,mu2,mu3,v");
  CHECK(c == "0,0,1,0.25");
  CHECK(d == "1,0,0,-1.5");
  std::filesystem::remove(path);
}
