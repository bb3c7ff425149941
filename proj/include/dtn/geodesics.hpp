#pragma once

#include "dtn/ballsolver.hpp"
#include "dtn/harmonics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dtn {

// Functions on the space of oriented great circles, expanded in harmonics of
// the momentum vector mu = xi x eta.
using OFunction = SphFunction;

struct OrbitPoint {
  CoherentFrame frame;

  Vec3 momentum() const { return frame.momentum(); }
  static OrbitPoint from_momentum(const Vec3& mu) { return {CoherentFrame::from_momentum(mu)}; }
};

struct PhasePoint {
  Vec3 x = Vec3::UnitX();
  Vec3 p = Vec3::UnitY();
};

// Radon (Funk) transform along one great circle, periodic trapezoid with Ns nodes.
cplx radon(const SphFunction& f, const OrbitPoint& orbit, int Ns);
double legendre_at_zero(int l);
// Coefficientwise P_l(0) c_lm.
OFunction radon_field(const SphFunction& f);

// Positive Laplacian on O: coefficientwise l(l+1).
OFunction laplace_O(const OFunction& f);

// Value and first/second derivatives along a stereographic chart.
struct ChartJet {
  cplx v{}, x{}, y{}, xx{}, xy{}, yy{};
  cplx z() const { return 0.5 * (x - cplx(0, 1) * y); }
  cplx zb() const { return 0.5 * (x + cplx(0, 1) * y); }
  cplx zz() const { return 0.25 * (xx - cplx(0, 2) * xy - yy); }
  cplx zbzb() const { return 0.25 * (xx + cplx(0, 2) * xy - yy); }
  cplx zzb() const { return 0.25 * (xx + yy); }
};

// Chart mu(w) = R sigma(w), sigma(w) = (2x, 2y, 1 - |w|^2)/(1 + |w|^2), with R a
// rotation. The metric is 4|dw|^2/nu^2, nu = 1 + |w|^2.
Eigen::Matrix3d chart_rotation(const Vec3& center);
std::vector<ChartJet> harmonic_jets(int L, const Eigen::Matrix3d& R, double x0 = 0, double y0 = 0);
ChartJet chart_jet(const OFunction& f, const std::vector<ChartJet>& harmonics);
// Jet of f at the chart centre placed on mu.
ChartJet chart_jet(const OFunction& f, const Vec3& mu);

// Pointwise calculus at a chart centre (nu = 1).
cplx grad_dot(const ChartJet& f, const ChartJet& g);
cplx laplace_O_at(const ChartJet& f);
cplx poisson_O_at(const ChartJet& f, const ChartJet& g);

double grad_norm_sq(const OFunction& f, const Vec3& mu);
// |grad f|^2 re-expanded; exact at degree 2 f.L.
OFunction grad_norm_sq_field(const OFunction& f);
cplx poisson_O(const OFunction& f, const OFunction& g, const Vec3& mu);

// Samples fn on a quadrature of exactness 2L (in parallel) and analyzes at degree L.
OFunction project_O(const std::function<cplx(const Vec3&)>& fn, int L);

// Geodesic flow on the punctured cotangent bundle.
PhasePoint phase_flow(const PhasePoint& pt, double t);

using PhaseFn = std::function<double(const Vec3& x, const Vec3& p)>;
// Canonical bracket sum df/dq dg/dp - df/dp dg/dq in a rotated spherical chart
// with pt on the equator; Richardson-extrapolated central differences.
double poisson_TstarS2(const PhaseFn& f, const PhaseFn& g, const PhasePoint& pt);

// Dirac bracket on T*S^2 (|x| = 1, x.p = 0) from ambient gradients of any
// extensions of f and g to R^3 x R^3.
double dirac_bracket(const Vec3& x, const Vec3& p, const Vec3& fx, const Vec3& fp, const Vec3& gx,
                     const Vec3& gp);

struct WOptions {
  int Nt = 64;
  int Ns = 64;
};
// W([z]) = -(1/32 pi^2) int_0^{2pi} t int_0^{2pi} {F o phi_{t+s}, F o phi_s}(z) ds dt,
// F(x, p) = q(x)/|p|. The first form takes any boundary function and uses the
// chart bracket with finite differences; the second uses the analytic
// gradient of q and the Dirac bracket.
double W_integral(const std::function<double(const Vec3&)>& q_boundary, const OrbitPoint& orbit,
                  const WOptions& opt = {});
double W_integral(const Potential& q, const OrbitPoint& orbit, const WOptions& opt = {});
// W projected on O at degree L; zero when q is constant on the sphere.
OFunction W_field(const Potential& q, int L, const WOptions& opt = {});

// (1/2pi) int d^2/dphi^2 f at the equator (phi the polar angle), i.e. the
// polar second derivative averaged over the orbit z = (1, i, 0).
cplx equator_polar_second_mean(const SphFunction& f);

// CSV with columns mu1, mu2, mu3, then one column per named field.
void write_orbit_csv(const std::string& path, const std::vector<Vec3>& mus,
                     const std::vector<std::string>& names, const std::vector<std::vector<double>>& cols,
                     const std::string& header_comment);

}  // namespace dtn
