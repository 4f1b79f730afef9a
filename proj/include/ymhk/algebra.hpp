#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>

#include "ymhk/errors.hpp"

namespace ymhk {

using cplx = std::complex<double>;

/// Principal log chart radius: logs are rejected beyond this angle.
inline constexpr double kThetaMax = 3.141592653589793 - 0.1;

/// Fixed-size complex vector (Higgs fiber C^R).
template <int R>
struct CVec {
  std::array<cplx, R> c{};

  cplx& operator[](int i) noexcept { return c[i]; }
  const cplx& operator[](int i) const noexcept { return c[i]; }

  CVec operator+(const CVec& o) const {
    CVec r;
    for (int i = 0; i < R; ++i) r.c[i] = c[i] + o.c[i];
    return r;
  }
  CVec operator-(const CVec& o) const {
    CVec r;
    for (int i = 0; i < R; ++i) r.c[i] = c[i] - o.c[i];
    return r;
  }
  CVec operator*(double s) const {
    CVec r;
    for (int i = 0; i < R; ++i) r.c[i] = c[i] * s;
    return r;
  }
  CVec& operator+=(const CVec& o) {
    for (int i = 0; i < R; ++i) c[i] += o.c[i];
    return *this;
  }
};

template <int R>
inline double vinner(const CVec<R>& a, const CVec<R>& b) {
  double s = 0.0;
  for (int i = 0; i < R; ++i)
    s += a.c[i].real() * b.c[i].real() + a.c[i].imag() * b.c[i].imag();
  return s;
}

inline double vinner(double a, double b) { return a * b; }

/// su(2) coefficient vector: X = i (x s1 + y s2 + z s3), s_i Pauli.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
          a.x * b.y - a.y * b.x};
}

inline double vinner(const Vec3& a, const Vec3& b) { return 2.0 * a.dot(b); }

/// Dense 2x2 complex matrix, row-major.
struct Mat2 {
  std::array<cplx, 4> m{};

  static Mat2 identity() { return {{cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(1, 0)}}; }

  Mat2 operator*(const Mat2& o) const {
    return {{m[0] * o.m[0] + m[1] * o.m[2], m[0] * o.m[1] + m[1] * o.m[3],
             m[2] * o.m[0] + m[3] * o.m[2], m[2] * o.m[1] + m[3] * o.m[3]}};
  }
  Mat2 operator+(const Mat2& o) const {
    return {{m[0] + o.m[0], m[1] + o.m[1], m[2] + o.m[2], m[3] + o.m[3]}};
  }
  Mat2 operator-(const Mat2& o) const {
    return {{m[0] - o.m[0], m[1] - o.m[1], m[2] - o.m[2], m[3] - o.m[3]}};
  }
  Mat2 operator*(const cplx& s) const {
    return {{m[0] * s, m[1] * s, m[2] * s, m[3] * s}};
  }
  Mat2 dagger() const {
    return {{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]),
             std::conj(m[3])}};
  }
  cplx trace() const { return m[0] + m[3]; }
  cplx det() const { return m[0] * m[3] - m[1] * m[2]; }
};

namespace detail {
// sin(t)/t with a series fallback near zero.
inline double sinc(double t) {
  if (std::abs(t) < 1e-6) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}
// t*cot(t), valid on [0, pi); series near zero.
inline double tcot(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 3.0 - t2 * t2 / 45.0;
  }
  return t * std::cos(t) / std::sin(t);
}
}  // namespace detail

/// Abelian structure group U(1).
///
/// Elements are unit complex numbers; the algebra value a represents
/// X = i*a. The Higgs fiber is C^1 with the defining action.
struct U1 {
  static constexpr int rep_dim = 1;
  static constexpr int algebra_dim = 1;
  static constexpr int element_doubles = 2;
  static constexpr std::uint8_t snapshot_tag = 0;
  static constexpr const char* name = "u1";
  static constexpr const char* display_name = "U(1)";

  using Element = cplx;
  using Algebra = double;
  using HiggsVec = CVec<1>;

  static Element identity() { return cplx(1.0, 0.0); }
  static Element mul(const Element& a, const Element& b) { return a * b; }
  static Element dagger(const Element& a) { return std::conj(a); }

  static Element exp(Algebra a) { return cplx(std::cos(a), std::sin(a)); }

  static double angle(const Element& g) {
    return std::abs(std::atan2(g.imag(), g.real()));
  }

  static Algebra log(const Element& g) {
    const double th = std::atan2(g.imag(), g.real());
    if (std::abs(th) > kThetaMax)
      throw BranchError("log of U(1) element at angle " + std::to_string(th) +
                        " is outside the principal chart");
    return th;
  }

  static double inner(Algebra a, Algebra b) { return a * b; }

  static Algebra ad(const Element&, Algebra a) { return a; }
  static Algebra ad_dagger(const Element&, Algebra a) { return a; }
  static Algebra commutator(Algebra, Algebra) { return 0.0; }

  /// Orthogonal projection of v w^dagger onto the algebra, as a coefficient.
  static Algebra project_outer(const HiggsVec& v, const HiggsVec& w) {
    return (v[0] * std::conj(w[0])).imag();
  }

  /// Transpose of the right-trivialized differential of log. Abelian: id.
  static Algebra dlog_transpose(Algebra, Algebra f) { return f; }

  static HiggsVec act(const Element& g, const HiggsVec& v) {
    return {{{g * v[0]}}};
  }
  static HiggsVec act_dagger(const Element& g, const HiggsVec& v) {
    return {{{std::conj(g) * v[0]}}};
  }

  static Element reunitarize(const Element& g) {
    const double r = std::abs(g);
    return r > 0.0 ? g / r : identity();
  }
  static double unitarity_defect(const Element& g) {
    // NaN entries must read as maximally off-manifold; they would otherwise
    // vanish inside max() chains because every NaN comparison is false.
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
      return std::numeric_limits<double>::infinity();
    return std::abs(std::abs(g) - 1.0);
  }

  static Algebra from_coeffs(const double* c) { return c[0]; }
  static void to_coeffs(Algebra a, double* c) { c[0] = a; }

  static void write_element(const Element& g, double* out) {
    out[0] = g.real();
    out[1] = g.imag();
  }
  static Element read_element(const double* in) { return cplx(in[0], in[1]); }
};

/// Structure group SU(2), fundamental Higgs representation on C^2.
///
/// Algebra values are coefficient vectors a with X = i (a . sigma); this
/// keeps stored values exactly anti-Hermitian and traceless. The metric is
/// inner(X, Y) = Re tr(X^dagger Y) = 2 a.b.
struct SU2 {
  static constexpr int rep_dim = 2;
  static constexpr int algebra_dim = 3;
  static constexpr int element_doubles = 8;
  static constexpr std::uint8_t snapshot_tag = 1;
  static constexpr const char* name = "su2";
  static constexpr const char* display_name = "SU(2)";

  using Element = Mat2;
  using Algebra = Vec3;
  using HiggsVec = CVec<2>;

  static Element identity() { return Mat2::identity(); }
  static Element mul(const Element& a, const Element& b) { return a * b; }
  static Element dagger(const Element& a) { return a.dagger(); }

  /// i (a . sigma) as a matrix.
  static Mat2 to_matrix(const Algebra& a) {
    return {{cplx(0.0, a.z), cplx(a.y, a.x), cplx(-a.y, a.x), cplx(0.0, -a.z)}};
  }

  /// Orthogonal projection of an arbitrary matrix onto i*su(2) coefficients.
  static Algebra project(const Mat2& M) {
    return {0.5 * (M.m[1].imag() + M.m[2].imag()),
            0.5 * (M.m[1].real() - M.m[2].real()),
            0.5 * (M.m[0].imag() - M.m[3].imag())};
  }

  static Element exp(const Algebra& a) {
    const double th = a.norm();
    const double c = std::cos(th);
    const double k = detail::sinc(th);
    return {{cplx(c, k * a.z), cplx(k * a.y, k * a.x),
             cplx(-k * a.y, k * a.x), cplx(c, -k * a.z)}};
  }

  static double angle(const Element& g) {
    const double c = 0.5 * (g.m[0].real() + g.m[3].real());
    const Algebra w = project(g);
    return std::atan2(w.norm(), c);
  }

  static Algebra log(const Element& g) {
    const double c = 0.5 * (g.m[0].real() + g.m[3].real());
    const Algebra w = project(g);  // = sin(theta) * n for exact group elements
    const double s = w.norm();
    const double th = std::atan2(s, c);
    if (th > kThetaMax)
      throw BranchError("log of SU(2) element at angle " + std::to_string(th) +
                        " is outside the principal chart");
    const double f = s > 1e-6 ? th / s : 1.0 + th * th / 6.0;
    return w * f;
  }

  static double inner(const Algebra& a, const Algebra& b) {
    return 2.0 * a.dot(b);
  }

  static Algebra ad(const Element& g, const Algebra& a) {
    return project(g * to_matrix(a) * g.dagger());
  }
  static Algebra ad_dagger(const Element& g, const Algebra& a) {
    return project(g.dagger() * to_matrix(a) * g);
  }

  /// [X, Y] for X = i a.sigma, Y = i b.sigma equals i (-2 a x b).sigma.
  static Algebra commutator(const Algebra& a, const Algebra& b) {
    return cross(a, b) * -2.0;
  }

  static Algebra project_outer(const HiggsVec& v, const HiggsVec& w) {
    const Mat2 M{{v[0] * std::conj(w[0]), v[0] * std::conj(w[1]),
                  v[1] * std::conj(w[0]), v[1] * std::conj(w[1])}};
    return project(M);
  }

  /// Transpose (w.r.t. inner) of the right-trivialized differential of log
  /// at exp(X): f |-> f_par + th*cot(th) f_perp - X x f, X = a, th = |a|.
  static Algebra dlog_transpose(const Algebra& a, const Algebra& f) {
    const double th = a.norm();
    if (th < 1e-12) return f - cross(a, f);
    const double tc = detail::tcot(th);
    const Vec3 ahat = a * (1.0 / th);
    const double par = ahat.dot(f);
    return ahat * (par * (1.0 - tc)) + f * tc - cross(a, f);
  }

  static HiggsVec act(const Element& g, const HiggsVec& v) {
    return {{{g.m[0] * v[0] + g.m[1] * v[1], g.m[2] * v[0] + g.m[3] * v[1]}}};
  }
  static HiggsVec act_dagger(const Element& g, const HiggsVec& v) {
    const Mat2 gd = g.dagger();
    return {{{gd.m[0] * v[0] + gd.m[1] * v[1], gd.m[2] * v[0] + gd.m[3] * v[1]}}};
  }

  /// Polar projection onto U(2) followed by det normalization onto SU(2).
  static Element reunitarize(const Element& g) {
    const Mat2 H = g.dagger() * g;  // Hermitian positive definite
    const double tr = H.trace().real();
    const double de = H.det().real();
    const double sq = std::sqrt(de > 0.0 ? de : 0.0);
    const double denom = std::sqrt(tr + 2.0 * sq);
    // H^(1/2) = (H + sqrt(det) I)/denom; invert the 2x2 directly.
    const Mat2 Hs{{(H.m[0] + sq) * (1.0 / denom), H.m[1] * (1.0 / denom),
                   H.m[2] * (1.0 / denom), (H.m[3] + sq) * (1.0 / denom)}};
    const cplx d = Hs.det();
    const Mat2 Hsi{{Hs.m[3] / d, -Hs.m[1] / d, -Hs.m[2] / d, Hs.m[0] / d}};
    Mat2 U = g * Hsi;  // unitary
    const cplx du = U.det();
    // Principal square root of det; for drift-level deviations du ~ 1.
    const double phi = 0.5 * std::atan2(du.imag(), du.real());
    const cplx corr = cplx(std::cos(phi), -std::sin(phi)) /
                      std::sqrt(std::abs(du));
    return U * corr;
  }

  static double unitarity_defect(const Element& g) {
    // NaN entries must read as maximally off-manifold; they would otherwise
    // vanish inside max() chains because every NaN comparison is false.
    for (const auto& e : g.m)
      if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
        return std::numeric_limits<double>::infinity();
    const Mat2 D = g.dagger() * g - Mat2::identity();
    double m = 0.0;
    for (const auto& e : D.m) m = std::max(m, std::abs(e));
    return std::max(m, std::abs(g.det() - cplx(1.0, 0.0)));
  }

  static Algebra from_coeffs(const double* c) { return {c[0], c[1], c[2]}; }
  static void to_coeffs(const Algebra& a, double* c) {
    c[0] = a.x;
    c[1] = a.y;
    c[2] = a.z;
  }

  static void write_element(const Element& g, double* out) {
    for (int i = 0; i < 4; ++i) {
      out[2 * i] = g.m[i].real();
      out[2 * i + 1] = g.m[i].imag();
    }
  }
  static Element read_element(const double* in) {
    Mat2 g;
    for (int i = 0; i < 4; ++i) g.m[i] = cplx(in[2 * i], in[2 * i + 1]);
    return g;
  }
};

template <class G>
inline double algebra_norm(const typename G::Algebra& a) {
  return std::sqrt(G::inner(a, a));
}

}  // namespace ymhk
