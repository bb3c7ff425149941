#pragma once

// Second-order forward-mode jets in two variables (x, y). Used to obtain
// exact chart derivatives of spherical-harmonic expansions.

namespace dtn {

struct Jet2 {
  double v = 0, x = 0, y = 0, xx = 0, xy = 0, yy = 0;

  Jet2() = default;
  Jet2(double c) : v(c) {}  // NOLINT: constants promote implicitly
  static Jet2 var_x(double x0) { Jet2 j(x0); j.x = 1; return j; }
  static Jet2 var_y(double y0) { Jet2 j(y0); j.y = 1; return j; }

  Jet2& operator+=(const Jet2& o) {
    v += o.v; x += o.x; y += o.y; xx += o.xx; xy += o.xy; yy += o.yy;
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    v -= o.v; x -= o.x; y -= o.y; xx -= o.xx; xy -= o.xy; yy -= o.yy;
    return *this;
  }
  Jet2& operator*=(double s) {
    v *= s; x *= s; y *= s; xx *= s; xy *= s; yy *= s;
    return *this;
  }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator-(const Jet2& a) { Jet2 r = a; r *= -1.0; return r; }
inline Jet2 operator*(Jet2 a, double s) { return a *= s; }
inline Jet2 operator*(double s, Jet2 a) { return a *= s; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.v = a.v * b.v;
  r.x = a.x * b.v + a.v * b.x;
  r.y = a.y * b.v + a.v * b.y;
  r.xx = a.xx * b.v + 2 * a.x * b.x + a.v * b.xx;
  r.xy = a.xy * b.v + a.x * b.y + a.y * b.x + a.v * b.xy;
  r.yy = a.yy * b.v + 2 * a.y * b.y + a.v * b.yy;
  return r;
}

inline Jet2 inverse(const Jet2& a) {
  // g = 1/a: g' = -a'/a^2, g'' = 2a'a'/a^3 - a''/a^2
  const double i1 = 1.0 / a.v, i2 = i1 * i1, i3 = i2 * i1;
  Jet2 r;
  r.v = i1;
  r.x = -a.x * i2;
  r.y = -a.y * i2;
  r.xx = 2 * a.x * a.x * i3 - a.xx * i2;
  r.xy = 2 * a.x * a.y * i3 - a.xy * i2;
  r.yy = 2 * a.y * a.y * i3 - a.yy * i2;
  return r;
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inverse(b); }

}  // namespace dtn
