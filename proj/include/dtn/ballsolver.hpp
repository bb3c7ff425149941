#pragma once

#include "dtn/harmonics.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace dtn {

struct BallKey {
  int n = 0, p = 0, l = 0, m = 0;
  friend bool operator<(const BallKey& a, const BallKey& b) {
    if (a.l != b.l) return a.l < b.l;
    if (a.m != b.m) return a.m < b.m;
    if (a.n != b.n) return a.n < b.n;
    return a.p < b.p;
  }
};

// Finite sum of coeff * r^n (ln r)^p Y_lm.
struct BallFunction {
  std::map<BallKey, cplx> terms;

  void add(int n, int p, int l, int m, cplx c);
  BallFunction& operator+=(const BallFunction& o);
  BallFunction& operator*=(cplx s);
  bool empty() const { return terms.empty(); }
  int max_l() const;
  int max_n() const;
  int min_n() const;
  int max_p() const;
  // Remove terms with |coeff| <= tol.
  void prune(double tol);
  cplx eval(double r, const Vec3& unit) const;
  // Value divided by r^shift, so evaluation near r = 0 stays finite for
  // exponents below the shift being factored into a quadrature weight.
  cplx eval_scaled(double r, const Vec3& unit, int shift) const;
  // Laplacian applied term by term (closed form), for residual checks.
  BallFunction laplacian() const;
};

struct Monomial {
  int a = 0, b = 0, c = 0;
  double coeff = 0;
};

struct Potential {
  std::vector<Monomial> monomials;
  BallFunction f;  // r^n Y_lm form, p = 0
  int degree = 0;  // polynomial degree
  int lmax = 0;    // largest angular degree present
  bool restriction_odd = false;
  // Sum of |coeff| bounds sup|q| on the ball; below pi^2 the Dirichlet
  // problem for -Delta + q is uniquely solvable.
  double sup_bound = 0;

  double value(const Vec3& x) const;
  // Ambient gradient of the polynomial.
  Vec3 gradient(const Vec3& x) const;
  std::uint64_t hash() const;
  bool is_zero() const { return f.empty(); }
};

Potential make_potential(const std::vector<Monomial>& monomials);
Potential constant_potential(double c);

// Restriction of a ball function to r = 1.
SphFunction trace(const BallFunction& u, int L);
// d/dr at r = 1, term-exactly.
SphFunction normal_derivative(const BallFunction& u, int L);

BallFunction harmonic_extension(const SphFunction& f);
BallFunction multiply_potential(const Potential& q, const BallFunction& u, const GauntTable& table);
BallFunction multiply(const BallFunction& a, const BallFunction& b, const GauntTable& table);
BallFunction solve_R0(const BallFunction& F);

struct DtNMatrix {
  int L = 0;
  Eigen::MatrixXcd A;      // symmetrized Lambda_q in flat-index order
  int J = 0;               // Neumann depth actually used
  double residual = 0;     // max over columns of |d_r (last term)|
  bool residual_flag = false;
  double asymmetry = 0;    // |A - A^H|_F / |A|_F before symmetrization
  std::uint64_t q_hash = 0;
  bool q_even = true;      // boundary-parity structure of the potential

  Eigen::MatrixXcd S() const;  // A - diag(l)
};

struct AssembleOptions {
  int J = 3;
  // When > 0, each column stops once its last increment drops below tol;
  // J then acts as the maximum depth.
  double tol = 0;
  // Residual above this sets residual_flag.
  double warn_tol = 1e-6;
};

DtNMatrix assemble_dtn(const Potential& q, int L, const AssembleOptions& opt);
DtNMatrix assemble_dtn(const Potential& q, int L, int J);

double dtn_constant_oracle(double c, int k);

cplx berezin_matrix_element(const Potential& q, const CoherentFrame& frame, int k, int J);

struct RadialMoment {
  std::array<double, 3> terms{};  // coefficients of (2k)^-1, (2k)^-2, (2k)^-3 times their powers
  double expansion = 0;           // sum of the three terms
  double exact = 0;               // \int_0^1 f(t) t^{2k+2} dt
};
RadialMoment radial_moment_check(const std::vector<double>& poly, int k);
// Same with the third coefficient as printed (5 f'(1) instead of 7 f'(1)).
RadialMoment radial_moment_check_printed(const std::vector<double>& poly, int k);

// Binary export of A (row-major, interleaved re/im f64, little-endian) plus
// a JSON sidecar with {L, J, residual, q_hash}.
void export_dtn(const DtNMatrix& A, const std::string& bin_path, const std::string& json_path,
                const std::string& config_hash);

// Gauss-Jacobi nodes and weights on [0,1] for the weight t^beta.
void gauss_jacobi01(int n, double beta, std::vector<double>& t, std::vector<double>& w);

}  // namespace dtn
