#pragma once

#include "dtn/ballsolver.hpp"
#include "dtn/geodesics.hpp"

#include <vector>

namespace dtn {

// Operator on H_k in the (k, m) basis, m = -k..k.
struct BlockOperator {
  int k = 0;
  Eigen::MatrixXcd M;
  bool hermitian = false;
};

BlockOperator dtn_block(const DtNMatrix& A, int k);
// Pi_k M_f Pi_k for a function f on the sphere.
BlockOperator multiplication_block(const SphFunction& f, int k);

// <T alpha, alpha> / <alpha, alpha> for alpha = alpha_z^k.
cplx berezin_symbol(const BlockOperator& T, const CoherentFrame& frame);
cplx berezin_symbol(const DtNMatrix& A, const CoherentFrame& frame, int k);

struct SymbolSamples {
  std::vector<OrbitPoint> orbits;
  std::vector<int> ks;
  Eigen::MatrixXcd values;  // orbits x ks
};

struct FitResult {
  int J = 0;
  Eigen::MatrixXcd coeffs;        // rows: samples, cols: c_0..c_J of sum c_j k^-j
  std::vector<double> residual;   // unweighted 2-norm per row
  double condition = 0;
  bool ill_conditioned = false;   // condition > 1e10
};

// Weighted least squares in {k^-j}, weights k^J.
FitResult fit_series(const std::vector<double>& ks, const Eigen::MatrixXcd& values, int J);
FitResult expansion_fit(const SymbolSamples& samples, int J);

// Symbols of block(k), multiplied by k^scale_power, over an orbit grid.
SymbolSamples sample_symbols(const std::vector<OrbitPoint>& orbits, const std::vector<int>& ks,
                             const std::function<BlockOperator(int)>& block, double scale_power = 0);

// Fibonacci grid of n momenta on the unit sphere.
std::vector<OrbitPoint> orbit_grid(int n);

double berezin_kernel(const Vec3& mu_p, const Vec3& mu_q, int k);
double berezin_kernel(const OrbitPoint& p, const OrbitPoint& q, int k);
// (2k+1) int_0^1 P_l(2s-1) s^{2k} ds in closed form.
double funk_hecke_eigenvalue(int k, int l);
OFunction berezin_transform(const OFunction& f, int k);
cplx berezin_transform_quadrature(const OFunction& f, int k, const Vec3& mu, int exactness);

// Star-product operators. Centred forms use the chart centred at mu; the
// _chart forms take jets at w with nu = 1 + |w|^2.
cplx D1(const OFunction& f, const OFunction& g, const Vec3& mu);
cplx D2(const OFunction& f, const OFunction& g, const Vec3& mu);
cplx D1_chart(const ChartJet& f, const ChartJet& g, cplx w);
cplx D2_chart(const ChartJet& f, const ChartJet& g, cplx w);

// max over grid of |S_{AB}(p) - (2k+1) int <B a_p, a_q><A a_q, a_p>/|a_p|^4 d[w](q)|.
double exact_composition_check(const BlockOperator& A, const BlockOperator& B,
                               const std::vector<OrbitPoint>& grid, int exactness);

struct ExpSymbolInput {
  OFunction q0, q1, q2;
  OFunction grad2;  // |grad q0|^2
};
ExpSymbolInput make_exp_symbol_input(const OFunction& q0, const OFunction& q1, const OFunction& q2);
struct ExpSymbol {
  cplx a0, a1, a2;
};
ExpSymbol exp_symbol_coeffs(const ExpSymbolInput& in, double t, const Vec3& mu);

// Symbol of exp(i t k Q) on H_k through a Hermitian eigendecomposition.
cplx numeric_exp_symbol(const BlockOperator& Q, double t, const CoherentFrame& frame);

}  // namespace dtn
