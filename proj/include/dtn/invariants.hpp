#pragma once

#include "dtn/berezin.hpp"
#include "dtn/geodesics.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace dtn {

enum class PhiArg { Q0, QHat };

// Convention switches for the invariant formulas.
struct Conventions {
  double kappa = 0.5;             // coefficient of the sphere Laplacian in q1
  PhiArg phi_arg = PhiArg::Q0;    // test functions see q0 or qhat = 2 q0
  int delta_sign = -1;            // Delta_{S^2} Y_l = delta_sign * l(l+1) Y_l
  std::string tag() const;        // e.g. "kappa=0.5,phi=q0,delta=-"
  nlohmann::ordered_json to_json() const;
};

// Boundary data entering the jets, all at r = 1 and angular degree <= 2 lmax.
struct BoundaryFields {
  SphFunction q, dr, drr, sq, lap, lap2, dr_lap;
};
BoundaryFields boundary_fields(const Potential& q, int delta_sign);

struct JetOptions {
  bool include_W = true;
  WOptions w;
};

struct SymbolJet {
  int L = 0;
  OFunction q0, q1, q2;  // q2 includes W
  OFunction W;
  Conventions conv;
};

SymbolJet symbol_jet(const Potential& q, int L, const Conventions& conv, const JetOptions& opt = {});

struct GammaTerms {
  OFunction gamma1;  // degree L
  OFunction gamma2;  // degree 2L
};
GammaTerms gamma_terms(const SymbolJet& jet);

struct TestFunction {
  std::string name;
  std::function<double(double)> f, df, d2f;

  static TestFunction one();
  static TestFunction identity();
  static TestFunction square();
  static TestFunction gauss(double sigma);  // exp(-s^2 / (2 sigma^2))
  static TestFunction polynomial(const std::vector<double>& coeffs);
  // Largest mismatch between the supplied derivatives and central differences on [-2, 2].
  double derivative_defect() const;
};
// "one", "id", "square", "gauss(s)" or "poly(c0,c1,...)".
TestFunction parse_test_function(const std::string& spec);

struct InvariantReport {
  std::string phi;
  Conventions conv;
  double beta0 = 0, beta1 = 0, beta2 = 0;
  // beta1 = beta1_lap + beta1_q1; beta2 = beta2_gamma2 + beta2_gamma1
  double beta1_lap = 0, beta1_q1 = 0, beta2_gamma2 = 0, beta2_gamma1 = 0;
  int L = 0;
  int exactness = 0;
  double drift = 0;
  nlohmann::ordered_json to_json() const;
};

InvariantReport beta_predict(const SymbolJet& jet, const GammaTerms& g, const TestFunction& phi);
InvariantReport beta_predict(const SymbolJet& jet, const TestFunction& phi);

// Jet of the odd-restriction case: q0~ = -(1/4) I(d_r q), q1~ = (1/8) I(...) + W.
struct OddJet {
  int L = 0;
  OFunction q0, q1, radon_dr;
  OFunction W;
};
OddJet odd_jet(const Potential& q, int L, const Conventions& conv, const JetOptions& opt = {});

struct OddReport {
  std::string phi;
  double beta0 = 0, beta1 = 0;
  int exactness = 0;
  double drift = 0;
  nlohmann::ordered_json to_json() const;
};
OddReport odd_predict(const OddJet& jet, const TestFunction& phi);
OddReport odd_predict(const Potential& q, const TestFunction& phi, int L, const Conventions& conv,
                      const JetOptions& opt = {});

// Integral of fn over O with the normalized measure, exactness doubled from
// start until two successive values differ by less than tol.
struct OIntegral {
  std::vector<double> values;
  int exactness = 0;
  double drift = 0;
};
OIntegral integrate_O(const std::function<std::vector<double>(const Vec3&)>& fn, int start_exactness,
                      double tol = 1e-8, int max_exactness = 512);

}  // namespace dtn
