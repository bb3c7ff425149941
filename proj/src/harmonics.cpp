#include "dtn/harmonics.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dtn {

void unflat(int idx, int& l, int& m) {
  l = static_cast<int>(std::sqrt(static_cast<double>(idx)));
  while (l * l > idx) --l;
  while ((l + 1) * (l + 1) <= idx) ++l;
  m = idx - l * l - l;
}

SphFunction SphFunction::resized(int Lnew) const {
  SphFunction r(Lnew);
  const int n = num_coeffs(std::min(L, Lnew));
  std::copy(coeffs.begin(), coeffs.begin() + n, r.coeffs.begin());
  return r;
}

SphFunction& SphFunction::operator+=(const SphFunction& o) {
  if (o.L > L) *this = resized(o.L);
  for (std::size_t i = 0; i < o.coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
  return *this;
}

SphFunction& SphFunction::operator*=(cplx s) {
  for (auto& c : coeffs) c *= s;
  return *this;
}

double SphFunction::reality_defect() const {
  double d = 0;
  for (int l = 0; l <= L; ++l)
    for (int m = 1; m <= l; ++m) {
      const double sgn = (m % 2) ? -1.0 : 1.0;
      d = std::max(d, std::abs(at(l, -m) - sgn * std::conj(at(l, m))));
    }
  for (int l = 0; l <= L; ++l) d = std::max(d, std::abs(at(l, 0).imag()));
  return d;
}

SphFunction operator+(SphFunction a, const SphFunction& b) { return a += b; }
SphFunction operator-(const SphFunction& a, const SphFunction& b) {
  SphFunction r = a;
  SphFunction nb = b;
  nb *= -1.0;
  return r += nb;
}
SphFunction operator*(cplx s, SphFunction a) { return a *= s; }

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) {
        // one more pass for the derivative at the converged node
        p0 = 1, p1 = t;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1) * t * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        break;
      }
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

S2Quadrature quadrature_s2(int d) {
  if (d < 0) throw PreconditionError("quadrature_s2: exactness degree must be >= 0");
  const std::size_t np = static_cast<std::size_t>(d) + 1, na = 2 * static_cast<std::size_t>(d) + 2;
  if (np * na > kMaxQuadratureNodes)
    throw ResourceError("quadrature_s2: node count " + std::to_string(np * na) + " exceeds cap");
  S2Quadrature q;
  q.exactness = d;
  q.n_polar = static_cast<int>(np);
  q.n_azimuth = static_cast<int>(na);
  std::vector<double> t, w;
  gauss_legendre(static_cast<int>(np), t, w);
  q.nodes.reserve(np * na);
  q.weights.reserve(np * na);
  for (std::size_t i = 0; i < np; ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - t[i] * t[i]));
    for (std::size_t j = 0; j < na; ++j) {
      const double ph = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(na);
      q.nodes.emplace_back(s * std::cos(ph), s * std::sin(ph), t[i]);
      q.weights.push_back(w[i] * 2.0 * kPi / static_cast<double>(na));
    }
  }
  return q;
}

void eval_harmonics(int L, const Vec3& x, cplx* out) {
  std::vector<double> Q, C, S;
  sh_cartesian_parts<double>(L, x[0], x[1], x[2], 1.0, Q, C, S);
  for (int l = 0; l <= L; ++l) {
    for (int m = 0; m <= l; ++m) {
      const double q = Q[tri_index(l, m)];
      const cplx y(q * C[m], q * S[m]);
      out[flat_index(l, m)] = y;
      if (m > 0) out[flat_index(l, -m)] = ((m % 2) ? -1.0 : 1.0) * std::conj(y);
    }
  }
}

std::vector<cplx> eval_harmonics(int L, const Vec3& x) {
  std::vector<cplx> out(num_coeffs(L));
  eval_harmonics(L, x, out.data());
  return out;
}

std::vector<cplx> eval_solid_harmonics(int L, const CVec3& a) {
  std::vector<cplx> Q, C, S;
  const cplx r2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
  sh_cartesian_parts<cplx>(L, a[0], a[1], a[2], r2, Q, C, S);
  std::vector<cplx> out(num_coeffs(L));
  const cplx I(0, 1);
  for (int l = 0; l <= L; ++l)
    for (int m = 0; m <= l; ++m) {
      const cplx q = Q[tri_index(l, m)];
      out[flat_index(l, m)] = q * (C[m] + I * S[m]);
      if (m > 0) out[flat_index(l, -m)] = ((m % 2) ? -1.0 : 1.0) * q * (C[m] - I * S[m]);
    }
  return out;
}

HarmonicTable harmonic_table(const S2Quadrature& quad, int L) {
  HarmonicTable t;
  t.L = L;
  t.n_nodes = quad.nodes.size();
  t.values.resize(t.n_nodes * num_coeffs(L));
  parallel_for(t.n_nodes, [&](std::size_t i) {
    eval_harmonics(L, quad.nodes[i], t.values.data() + i * num_coeffs(L));
  });
  return t;
}

SphFunction analyze(const S2Quadrature& quad, const std::vector<cplx>& samples, int L) {
  if (quad.exactness < 2 * L)
    throw PreconditionError("analyze: quadrature exactness " + std::to_string(quad.exactness) +
                            " below 2L = " + std::to_string(2 * L));
  if (samples.size() != quad.nodes.size()) throw PreconditionError("analyze: sample count mismatch");
  const int np = quad.n_polar, na = quad.n_azimuth;
  // ring-wise azimuthal transform, then associated Legendre weights
  std::vector<std::vector<cplx>> ring(np);
  parallel_for(static_cast<std::size_t>(np), [&](std::size_t i) {
    std::vector<cplx> F(2 * L + 1);
    for (int j = 0; j < na; ++j) {
      const double ph = 2.0 * kPi * j / na;
      const cplx f = samples[i * na + j];
      const cplx e(std::cos(ph), -std::sin(ph));
      cplx pw = 1.0;
      F[L] += f;
      for (int m = 1; m <= L; ++m) {
        pw *= e;
        F[L + m] += f * pw;
        F[L - m] += f * std::conj(pw);
      }
    }
    ring[i] = std::move(F);
  });
  std::vector<SphFunction> part(np, SphFunction(L));
  parallel_for(static_cast<std::size_t>(np), [&](std::size_t i) {
    const Vec3& x = quad.nodes[i * na];
    const double t = x[2], s = std::sqrt(std::max(0.0, 1.0 - t * t));
    std::vector<double> Q, C, S;
    sh_cartesian_parts<double>(L, s, 0.0, t, 1.0, Q, C, S);
    // ring weight: all nodes on a ring share one weight
    const double w = quad.weights[i * na];
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m) {
        const int am = std::abs(m);
        const double p = Q[tri_index(l, am)] * C[am] * ((m < 0 && (am % 2)) ? -1.0 : 1.0);
        part[i].at(l, m) = w * p * ring[i][L + m];
      }
  });
  SphFunction out(L);
  for (int i = 0; i < np; ++i) out += part[i];
  return out;
}

SphFunction analyze(const S2Quadrature& quad, const std::vector<double>& samples, int L) {
  return analyze(quad, std::vector<cplx>(samples.begin(), samples.end()), L);
}

SphFunction analyze_function(const std::function<cplx(const Vec3&)>& f, int L) {
  const auto quad = quadrature_s2(2 * L);
  std::vector<cplx> s(quad.nodes.size());
  parallel_for(s.size(), [&](std::size_t i) { s[i] = f(quad.nodes[i]); });
  return analyze(quad, s, L);
}

cplx synthesize_at(const SphFunction& f, const Vec3& x) {
  std::vector<cplx> y(num_coeffs(f.L));
  eval_harmonics(f.L, x, y.data());
  cplx s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += f.coeffs[i] * y[i];
  return s;
}

std::vector<cplx> synthesize(const SphFunction& f, const std::vector<Vec3>& points) {
  std::vector<cplx> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) { out[i] = synthesize_at(f, points[i]); });
  return out;
}

// ---------------------------------------------------------------------------
// Wigner 3j

double wigner3j_racah(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
  auto lf = [](int n) { return std::lgamma(static_cast<long double>(n) + 1.0L); };
  const long double logpre =
      0.5L * (lf(j1 + j2 - j3) + lf(j1 - j2 + j3) + lf(-j1 + j2 + j3) - lf(j1 + j2 + j3 + 1) +
              lf(j1 + m1) + lf(j1 - m1) + lf(j2 + m2) + lf(j2 - m2) + lf(j3 + m3) + lf(j3 - m3));
  const int tmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
  const int tmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  long double sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    const long double term = std::exp(logpre - lf(t) - lf(j3 - j2 + t + m1) - lf(j3 - j1 + t - m2) -
                                      lf(j1 + j2 - j3 - t) - lf(j1 - t - m1) - lf(j2 - t + m2));
    sum += (t % 2) ? -term : term;
  }
  const int ph = j1 - j2 - m3;
  return static_cast<double>(((ph % 2) != 0) ? -sum : sum);
}

std::vector<double> wigner3j_range(int j2, int j3, int m2, int m3, int& jmin) {
  const int m1 = -m2 - m3;
  jmin = std::max(std::abs(j2 - j3), std::abs(m1));
  const int jmax = j2 + j3;
  if (std::abs(m2) > j2 || std::abs(m3) > j3 || jmax < jmin) return {};
  const int n = jmax - jmin + 1;
  const double dj23 = j2 - j3, sj23 = j2 + j3 + 1.0, dm1 = m1;
  auto A = [&](int j) {
    const double x = j;
    return std::sqrt((x * x - dj23 * dj23) * (sj23 * sj23 - x * x) * (x * x - dm1 * dm1));
  };
  auto B = [&](int j) {
    const double x = j;
    return -(2 * x + 1) * (j2 * (j2 + 1.0) * m1 - j3 * (j3 + 1.0) * m1 - x * (x + 1) * (m3 - m2));
  };
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
  } else {
    const int mid = (n <= 3) ? n - 1 : n / 2;
    std::vector<double> f(n, 0.0);
    f[0] = 1.0;
    if (jmin == 0) {
      // (1 j j; 0 m -m) / (0 j j; 0 m -m) = m / sqrt(j(j+1)) with j = j2 = j3
      f[1] = m2 / std::sqrt(j2 * (j2 + 1.0));
    } else {
      f[1] = -B(jmin) / (jmin * A(jmin + 1));
    }
    const int fend = std::min(n - 1, mid + 1);
    for (int i = 1; i < fend; ++i) {
      const int j = jmin + i;
      f[i + 1] = -(B(j) * f[i] + (j + 1) * A(j) * f[i - 1]) / (j * A(j + 1));
      if (std::abs(f[i + 1]) > 1e200)
        for (int k = 0; k <= i + 1; ++k) f[k] *= 1e-200;
    }
    if (n <= 3) {
      w = f;
    } else {
      std::vector<double> b(n, 0.0);
      b[n - 1] = 1.0;
      b[n - 2] = -B(jmax) / ((jmax + 1) * A(jmax));
      for (int i = n - 2; i > mid - 1; --i) {
        const int j = jmin + i;
        b[i - 1] = -(j * A(j + 1) * b[i + 1] + B(j) * b[i]) / ((j + 1) * A(j));
        if (std::abs(b[i - 1]) > 1e200)
          for (int k = i - 1; k < n; ++k) b[k] *= 1e-200;
      }
      double num = 0, den = 0;
      for (int i = mid - 1; i <= mid + 1; ++i) {
        num += f[i] * b[i];
        den += b[i] * b[i];
      }
      const double lam = num / den;
      for (int i = 0; i < n; ++i) w[i] = (i <= mid) ? f[i] : lam * b[i];
    }
  }
  double norm = 0;
  for (int i = 0; i < n; ++i) norm += (2.0 * (jmin + i) + 1) * w[i] * w[i];
  norm = std::sqrt(norm);
  const int ph = j2 - j3 - m1;
  const double want = (ph % 2 != 0) ? -1.0 : 1.0;
  const double sgn = (w[n - 1] * want < 0) ? -1.0 : 1.0;
  for (auto& v : w) v *= sgn / norm;
  return w;
}

double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  int jmin = 0;
  const auto w = wigner3j_range(j2, j3, m2, m3, jmin);
  if (w.empty() || j1 < jmin || j1 > jmin + static_cast<int>(w.size()) - 1) return 0.0;
  return w[j1 - jmin];
}

double gaunt(int l1, int m1, int l2, int m2, int l3, int m3) {
  if (m1 + m2 != m3) return 0.0;
  if ((l1 + l2 + l3) % 2 != 0) return 0.0;
  if (l3 < std::abs(l1 - l2) || l3 > l1 + l2) return 0.0;
  if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m3) > l3) return 0.0;
  // (l1 l2 l3; m1 m2 -m3) = (l3 l1 l2; -m3 m1 m2) by cyclic symmetry
  const double w0 = wigner3j(l3, l1, l2, 0, 0, 0);
  const double wm = wigner3j(l3, l1, l2, -m3, m1, m2);
  const double pre = std::sqrt((2.0 * l1 + 1) * (2.0 * l2 + 1) * (2.0 * l3 + 1) / (4 * kPi));
  return ((m3 % 2) ? -1.0 : 1.0) * pre * w0 * wm;
}

// ---------------------------------------------------------------------------
// Gaunt table

GauntTable::GauntTable(int Lq, int Lu) : Lq_(Lq), Lu_(Lu) { build(); }

std::size_t GauntTable::slot(int l1, int m1, int l2, int m2) const {
  return static_cast<std::size_t>(flat_index(l1, m1)) * num_coeffs(Lu_) + flat_index(l2, m2);
}

void GauntTable::build() {
  const std::size_t n1 = num_coeffs(Lq_), n2 = num_coeffs(Lu_);
  std::vector<std::vector<Entry>> rows(n1 * n2);
  parallel_for(n1, [&](std::size_t a) {
    int l1, m1;
    unflat(static_cast<int>(a), l1, m1);
    for (std::size_t b = 0; b < n2; ++b) {
      int l2, m2;
      unflat(static_cast<int>(b), l2, m2);
      int jmin0 = 0, jminm = 0;
      const auto w0 = wigner3j_range(l1, l2, 0, 0, jmin0);
      const auto wm = wigner3j_range(l1, l2, m1, m2, jminm);
      const int m3 = m1 + m2;
      auto& row = rows[a * n2 + b];
      for (int i = 0; i < static_cast<int>(wm.size()); ++i) {
        const int l3 = jminm + i;
        if ((l1 + l2 + l3) % 2) continue;
        const double z = w0[l3 - jmin0];
        const double pre = std::sqrt((2.0 * l1 + 1) * (2.0 * l2 + 1) * (2.0 * l3 + 1) / (4 * kPi));
        const double g = ((m3 % 2) ? -1.0 : 1.0) * pre * z * wm[i];
        if (g != 0.0) row.push_back({l3, g});
      }
    }
  });
  offsets_.assign(n1 * n2 + 1, 0);
  for (std::size_t s = 0; s < rows.size(); ++s) offsets_[s + 1] = offsets_[s] + rows[s].size();
  entries_.clear();
  entries_.reserve(offsets_.back());
  for (auto& r : rows) entries_.insert(entries_.end(), r.begin(), r.end());
}

bool GauntTable::covers(int l1, int l2) const { return l1 <= Lq_ && l2 <= Lu_; }

std::pair<const GauntTable::Entry*, const GauntTable::Entry*> GauntTable::row(int l1, int m1, int l2,
                                                                              int m2) const {
  if (!covers(l1, l2)) throw PreconditionError("GauntTable: degree outside table");
  const std::size_t s = slot(l1, m1, l2, m2);
  return {entries_.data() + offsets_[s], entries_.data() + offsets_[s + 1]};
}

double GauntTable::get(int l1, int m1, int l2, int m2, int l3, int m3) const {
  if (m1 + m2 != m3) return 0.0;
  if (!covers(l1, l2)) {
    if (covers(l2, l1)) return get(l2, m2, l1, m1, l3, m3);
    throw PreconditionError("GauntTable: degree outside table");
  }
  auto [b, e] = row(l1, m1, l2, m2);
  for (auto* p = b; p != e; ++p)
    if (p->l3 == l3) return p->value;
  return 0.0;
}

namespace {
constexpr char kMagic[7] = {'G', 'A', 'U', 'N', 'T', 'v', '1'};

template <class T>
void put_le(std::string& s, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  // little-endian host assumed for the memcpy; reorder on big-endian
  const std::uint16_t probe = 1;
  if (*reinterpret_cast<const unsigned char*>(&probe) == 0) std::reverse(b, b + sizeof(T));
  s.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(const char*& p) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  const std::uint16_t probe = 1;
  if (*reinterpret_cast<const unsigned char*>(&probe) == 0) std::reverse(b, b + sizeof(T));
  p += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}
}  // namespace

// Layout: magic[7], u32 Lq, u32 Lu, u64 count, u64 FNV-1a of the record
// block, then count records of six u16 (l1, m1, l2, m2, l3, m3; orders as
// two's-complement) followed by an f64 value.
void GauntTable::save(const std::string& path) const {
  std::string rec;
  rec.reserve(entries_.size() * 20);
  std::uint64_t count = 0;
  for (int l1 = 0; l1 <= Lq_; ++l1)
    for (int m1 = -l1; m1 <= l1; ++m1)
      for (int l2 = 0; l2 <= Lu_; ++l2)
        for (int m2 = -l2; m2 <= l2; ++m2) {
          auto [b, e] = row(l1, m1, l2, m2);
          for (auto* p = b; p != e; ++p) {
            const int v[6] = {l1, m1, l2, m2, p->l3, m1 + m2};
            for (int x : v) put_le<std::uint16_t>(rec, static_cast<std::uint16_t>(static_cast<std::int16_t>(x)));
            put_le<double>(rec, p->value);
            ++count;
          }
        }
  std::string out(kMagic, kMagic + 7);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(Lq_));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(Lu_));
  put_le<std::uint64_t>(out, count);
  put_le<std::uint64_t>(out, fnv1a(rec.data(), rec.size()));
  out += rec;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("GauntTable::save: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

GauntTable GauntTable::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("GauntTable::load: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string buf = ss.str();
  constexpr std::size_t header = 7 + 4 + 4 + 8 + 8;
  if (buf.size() < header || std::memcmp(buf.data(), kMagic, 7) != 0)
    throw std::runtime_error("GauntTable::load: bad magic in " + path);
  const char* p = buf.data() + 7;
  GauntTable t;
  t.Lq_ = static_cast<int>(get_le<std::uint32_t>(p));
  t.Lu_ = static_cast<int>(get_le<std::uint32_t>(p));
  const auto count = get_le<std::uint64_t>(p);
  const auto sum = get_le<std::uint64_t>(p);
  if (buf.size() != header + count * 20) throw std::runtime_error("GauntTable::load: truncated " + path);
  if (fnv1a(buf.data() + header, count * 20) != sum)
    throw std::runtime_error("GauntTable::load: checksum mismatch in " + path);
  const std::size_t n1 = num_coeffs(t.Lq_), n2 = num_coeffs(t.Lu_);
  std::vector<std::vector<Entry>> rows(n1 * n2);
  for (std::uint64_t r = 0; r < count; ++r) {
    int v[6];
    for (int& x : v) x = static_cast<std::int16_t>(get_le<std::uint16_t>(p));
    const double g = get_le<double>(p);
    if (v[0] > t.Lq_ || v[2] > t.Lu_ || v[5] != v[1] + v[3])
      throw std::runtime_error("GauntTable::load: record out of range");
    rows[t.slot(v[0], v[1], v[2], v[3])].push_back({v[4], g});
  }
  t.offsets_.assign(n1 * n2 + 1, 0);
  for (std::size_t s = 0; s < rows.size(); ++s) t.offsets_[s + 1] = t.offsets_[s] + rows[s].size();
  for (auto& r : rows) t.entries_.insert(t.entries_.end(), r.begin(), r.end());
  return t;
}

GauntTable GauntTable::cached(const std::string& path, int Lq, int Lu) {
  try {
    auto t = load(path);
    if (t.Lq_ == Lq && t.Lu_ == Lu) return t;
  } catch (const std::exception&) {
  }
  GauntTable t(Lq, Lu);
  t.save(path);
  return t;
}

// ---------------------------------------------------------------------------

SphFunction apply_lambda0(const SphFunction& f) {
  SphFunction r = f;
  for (int l = 0; l <= f.L; ++l)
    for (int m = -l; m <= l; ++m) r.at(l, m) *= static_cast<double>(l);
  return r;
}

SphFunction laplace_s2(const SphFunction& f) {
  SphFunction r = f;
  for (int l = 0; l <= f.L; ++l)
    for (int m = -l; m <= l; ++m) r.at(l, m) *= static_cast<double>(l) * (l + 1);
  return r;
}

bool CoherentFrame::valid(double tol) const {
  return std::abs(xi.norm() - 1) < tol && std::abs(eta.norm() - 1) < tol && std::abs(xi.dot(eta)) < tol;
}

CoherentFrame CoherentFrame::phase_shifted(double t) const {
  CoherentFrame f;
  f.xi = xi * std::cos(t) - eta * std::sin(t);
  f.eta = xi * std::sin(t) + eta * std::cos(t);
  return f;
}

CoherentFrame CoherentFrame::from_momentum(const Vec3& mu) {
  CoherentFrame f;
  orthonormal_completion(mu.normalized(), f.xi, f.eta);
  return f;
}

cplx alpha_pow(const CoherentFrame& frame, int k, const Vec3& point) {
  return std::pow(cplx(point.dot(frame.xi), point.dot(frame.eta)), k);
}

std::pair<double, double> alpha_norms(int k) {
  if (k < 0) throw PreconditionError("alpha_norms: k must be >= 0");
  const double lgh = std::lgamma(0.5);
  const double s = 2 * kPi * std::exp(std::lgamma(k + 1.0) + lgh - std::lgamma(k + 1.5));
  const double b = kPi / (k + 1.0) * std::exp(std::lgamma(k + 2.0) + lgh - std::lgamma(k + 2.5));
  return {s, b};
}

std::vector<cplx> coherent_coefficients(const CoherentFrame& frame, int k) {
  const CVec3 zbar = frame.z().conjugate();
  const auto S = eval_solid_harmonics(k, zbar);
  const double logK = std::log(4 * kPi) + k * std::log(2.0) + 2 * std::lgamma(k + 1.0) -
                      std::log(2.0 * k + 1) - std::lgamma(2.0 * k + 1);
  const double K = std::exp(logK);
  std::vector<cplx> c(2 * k + 1);
  for (int m = -k; m <= k; ++m) c[m + k] = K * std::conj(S[flat_index(k, m)]);
  return c;
}

double inverse_sphere_norm(int k) { return 1.0 / alpha_norms(k).first; }

double inverse_sphere_norm_expansion(int k, double c2) {
  const double kk = k;
  return std::sqrt(kk / kPi) / (2 * kPi) * (1 + 3.0 / (8 * kk) + c2 / (kk * kk));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::log(x[i]), b = std::log(std::abs(y[i]));
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace dtn
