#pragma once

#include "dtn/common.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace dtn {

inline int flat_index(int l, int m) { return l * l + l + m; }
inline int num_coeffs(int L) { return (L + 1) * (L + 1); }
inline int tri_index(int l, int m) { return l * (l + 1) / 2 + m; }  // m >= 0

// Inverse of flat_index.
void unflat(int idx, int& l, int& m);

struct SphFunction {
  int L = 0;
  std::vector<cplx> coeffs;  // flat-index order, length (L+1)^2

  SphFunction() : coeffs(1) {}
  explicit SphFunction(int Lmax) : L(Lmax), coeffs(num_coeffs(Lmax)) {}

  cplx& at(int l, int m) { return coeffs[flat_index(l, m)]; }
  cplx at(int l, int m) const { return l <= L ? coeffs[flat_index(l, m)] : cplx{}; }
  SphFunction resized(int Lnew) const;
  SphFunction& operator+=(const SphFunction& o);
  SphFunction& operator*=(cplx s);
  // Largest |c_{l,-m} - (-1)^m conj(c_{l,m})|; zero for real-valued functions.
  double reality_defect() const;
};

SphFunction operator+(SphFunction a, const SphFunction& b);
SphFunction operator-(const SphFunction& a, const SphFunction& b);
SphFunction operator*(cplx s, SphFunction a);

struct S2Quadrature {
  int exactness = 0;
  int n_polar = 0, n_azimuth = 0;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
};

// Node cap for quadrature_s2; requests above it raise ResourceError.
constexpr std::size_t kMaxQuadratureNodes = 4'000'000;

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);
S2Quadrature quadrature_s2(int exactness_degree);

// Normalized associated Legendre parts of Y_lm in Cartesian form:
// Y_lm(x) = Q_lm(x3, r^2) * (x1 + i x2)^m for m >= 0, with (x1 + i x2)^m
// split as C_m + i S_m. Works for any ring-like scalar (double, Jet2,
// complex<double>); r2 is passed in so solid harmonics and null vectors
// are handled by the same recurrence.
template <class T>
void sh_cartesian_parts(int L, const T& x1, const T& x2, const T& x3, const T& r2,
                        std::vector<T>& Q, std::vector<T>& C, std::vector<T>& S) {
  Q.assign(static_cast<std::size_t>((L + 1) * (L + 2) / 2), T(0.0));
  C.assign(L + 1, T(0.0));
  S.assign(L + 1, T(0.0));
  C[0] = T(1.0);
  S[0] = T(0.0);
  for (int m = 1; m <= L; ++m) {
    C[m] = C[m - 1] * x1 - S[m - 1] * x2;
    S[m] = S[m - 1] * x1 + C[m - 1] * x2;
  }
  double qmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 0; m <= L; ++m) {
    if (m > 0) qmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    Q[tri_index(m, m)] = T(qmm);
    if (m + 1 <= L) Q[tri_index(m + 1, m)] = x3 * (std::sqrt(2.0 * m + 3.0) * qmm);
    for (int l = m + 2; l <= L; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                                 (4.0 * (l - 1) * (l - 1) - 1.0));
      Q[tri_index(l, m)] = (x3 * Q[tri_index(l - 1, m)] - r2 * Q[tri_index(l - 2, m)] * b) * a;
    }
  }
}

// All Y_lm(x), l <= L, in flat order, at a unit vector x.
void eval_harmonics(int L, const Vec3& x, cplx* out);
std::vector<cplx> eval_harmonics(int L, const Vec3& x);

// Solid harmonic polynomials r^l Y_lm evaluated at a complex vector.
std::vector<cplx> eval_solid_harmonics(int L, const CVec3& a);

// Precomputed harmonic values at each quadrature node.
struct HarmonicTable {
  int L = 0;
  std::size_t n_nodes = 0;
  std::vector<cplx> values;  // node-major, (L+1)^2 per node
  const cplx* row(std::size_t node) const { return values.data() + node * num_coeffs(L); }
};
HarmonicTable harmonic_table(const S2Quadrature& quad, int L);

SphFunction analyze(const S2Quadrature& quad, const std::vector<cplx>& samples, int L);
SphFunction analyze(const S2Quadrature& quad, const std::vector<double>& samples, int L);
SphFunction analyze_function(const std::function<cplx(const Vec3&)>& f, int L);
std::vector<cplx> synthesize(const SphFunction& f, const std::vector<Vec3>& points);
cplx synthesize_at(const SphFunction& f, const Vec3& x);

// Wigner 3j symbols (j1 j2 j3; m1 m2 m3) for all admissible j1 at fixed
// (j2, j3, m2, m3), m1 = -m2-m3, by the Schulten-Gordon three-term
// recurrence run inward from both ends. Returns values for j1 = jmin..jmax.
std::vector<double> wigner3j_range(int j2, int j3, int m2, int m3, int& jmin);
double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3);
// Racah closed form in long double; the recurrence's reference for small j.
double wigner3j_racah(int j1, int j2, int j3, int m1, int m2, int m3);

// \int_{S^2} Y_{l1 m1} Y_{l2 m2} conj(Y_{l3 m3})
double gaunt(int l1, int m1, int l2, int m2, int l3, int m3);

// Coupling table for products where slot 1 has degree <= Lq and slot 2 has
// degree <= Lu. Read-only after construction.
class GauntTable {
 public:
  GauntTable() = default;
  GauntTable(int Lq, int Lu);

  int Lq() const { return Lq_; }
  int Lu() const { return Lu_; }
  bool covers(int l1, int l2) const;
  double get(int l1, int m1, int l2, int m2, int l3, int m3) const;

  // Row of all nonzero (l3, value) for fixed (l1,m1,l2,m2), m3 = m1+m2.
  struct Entry {
    int l3;
    double value;
  };
  std::pair<const Entry*, const Entry*> row(int l1, int m1, int l2, int m2) const;
  std::size_t size() const { return entries_.size(); }

  void save(const std::string& path) const;
  static GauntTable load(const std::string& path);
  // Loads path if it holds a table with matching bounds, otherwise builds and writes it.
  static GauntTable cached(const std::string& path, int Lq, int Lu);

 private:
  void build();
  std::size_t slot(int l1, int m1, int l2, int m2) const;
  int Lq_ = 0, Lu_ = 0;
  std::vector<std::size_t> offsets_;  // size slots+1
  std::vector<Entry> entries_;
};

SphFunction apply_lambda0(const SphFunction& f);
SphFunction laplace_s2(const SphFunction& f);

struct CoherentFrame {
  Vec3 xi = Vec3::UnitX();
  Vec3 eta = Vec3::UnitY();

  CVec3 z() const { return xi.cast<cplx>() + cplx(0, 1) * eta.cast<cplx>(); }
  Vec3 momentum() const { return xi.cross(eta); }
  bool valid(double tol = 1e-12) const;
  // Frame of z rotated by e^{it}: (xi cos t - eta sin t, xi sin t + eta cos t).
  CoherentFrame phase_shifted(double t) const;
  static CoherentFrame from_momentum(const Vec3& mu);
};

cplx alpha_pow(const CoherentFrame& frame, int k, const Vec3& point);

// (|alpha|^2 on S^2, |alpha|^2 on the ball)
std::pair<double, double> alpha_norms(int k);

// Coefficients <alpha_z^k, Y_km>, m = -k..k, from the closed form of (x.z)^k
// for a null vector z: (x.z)^k = K_k sum_m conj(S_km(conj z)) Y_km(x).
std::vector<cplx> coherent_coefficients(const CoherentFrame& frame, int k);

// 1/(2 pi B(k+1, 1/2)) and its large-k expansion truncated after the k^-2 term.
double inverse_sphere_norm(int k);
double inverse_sphere_norm_expansion(int k, double c2);

// Fitted slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dtn
