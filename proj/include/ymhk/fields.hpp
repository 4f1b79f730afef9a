#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "ymhk/algebra.hpp"
#include "ymhk/lattice.hpp"
#include "ymhk/parallel.hpp"
#include "ymhk/rng.hpp"

namespace ymhk {

/// Group-valued link variables U_mu(x); storage [site][axis].
template <class G>
struct GaugeField {
  Lattice lat;
  std::vector<typename G::Element> links;

  GaugeField() = default;
  explicit GaugeField(const Lattice& l)
      : lat(l),
        links(static_cast<std::size_t>(l.sites()) * l.dim(), G::identity()) {}

  typename G::Element& link(SiteId s, int axis) {
    return links[static_cast<std::size_t>(s) * lat.dim() + axis];
  }
  const typename G::Element& link(SiteId s, int axis) const {
    return links[static_cast<std::size_t>(s) * lat.dim() + axis];
  }

  /// Largest deviation of any link from the group manifold.
  double unitarity_defect() const {
    double m = 0.0;
    for (const auto& g : links) m = std::max(m, G::unitarity_defect(g));
    return m;
  }

  void reunitarize() {
    parallel_for(static_cast<std::int64_t>(links.size()),
                 [&](std::int64_t i) { links[i] = G::reunitarize(links[i]); });
  }
};

/// Algebra-valued field over (site, axis): gradient directions, gradients,
/// and log-chart potentials A_mu = log(U_mu)/h all share this layout.
template <class G>
struct LinkField {
  Lattice lat;
  std::vector<typename G::Algebra> a;

  LinkField() = default;
  explicit LinkField(const Lattice& l)
      : lat(l), a(static_cast<std::size_t>(l.sites()) * l.dim()) {}

  typename G::Algebra& at(SiteId s, int axis) {
    return a[static_cast<std::size_t>(s) * lat.dim() + axis];
  }
  const typename G::Algebra& at(SiteId s, int axis) const {
    return a[static_cast<std::size_t>(s) * lat.dim() + axis];
  }
};

/// Section of the Higgs bundle, fiber C^rep_dim; storage [site][component].
template <class G>
struct HiggsField {
  Lattice lat;
  std::vector<cplx> data;

  HiggsField() = default;
  explicit HiggsField(const Lattice& l)
      : lat(l), data(static_cast<std::size_t>(l.sites()) * G::rep_dim) {}

  typename G::HiggsVec value(SiteId s) const {
    typename G::HiggsVec v;
    for (int i = 0; i < G::rep_dim; ++i)
      v[i] = data[static_cast<std::size_t>(s) * G::rep_dim + i];
    return v;
  }
  void set_value(SiteId s, const typename G::HiggsVec& v) {
    for (int i = 0; i < G::rep_dim; ++i)
      data[static_cast<std::size_t>(s) * G::rep_dim + i] = v[i];
  }

  /// |u(x)|^2 at one site.
  double abs2(SiteId s) const {
    double a = 0.0;
    for (int i = 0; i < G::rep_dim; ++i) {
      const cplx& z = data[static_cast<std::size_t>(s) * G::rep_dim + i];
      a += z.real() * z.real() + z.imag() * z.imag();
    }
    return a;
  }
};

/// Rank-m tensor field with one site index and m direction indices.
///
/// Values are either algebra elements (curvature tower) or Higgs vectors.
/// Direction multi-indices are stored base-n with the most recently added
/// (leading) index slowest: component (m0, tau) of a rank m+1 field built by
/// cov_diff lives at multi = m0 * n^m + tau.
///
/// antisym marks antisymmetry in the trailing index pair (curvature-derived
/// tensors); site norms then weight the full index sum by 1/2 so each
/// unordered pair counts once. axis_span tracks the worst-case per-axis
/// stencil footprint in links for the periodic wrap guard.
template <class G, class V>
struct TensorField {
  Lattice lat;
  int rank = 0;
  std::int64_t ncomp = 1;  // n^rank
  bool antisym = false;
  int axis_span = 0;
  std::vector<V> vals;

  TensorField() = default;
  TensorField(const Lattice& l, int r, bool anti, int span)
      : lat(l), rank(r), antisym(anti), axis_span(span) {
    ncomp = 1;
    for (int i = 0; i < r; ++i) ncomp *= l.dim();
    vals.assign(static_cast<std::size_t>(l.sites() * ncomp), V{});
  }

  V& at(SiteId s, std::int64_t multi) {
    return vals[static_cast<std::size_t>(s * ncomp + multi)];
  }
  const V& at(SiteId s, std::int64_t multi) const {
    return vals[static_cast<std::size_t>(s * ncomp + multi)];
  }

  /// Pointwise squared norm; each unordered antisymmetric pair counts once.
  double site_norm2(SiteId s) const {
    double a = 0.0;
    for (std::int64_t t = 0; t < ncomp; ++t) a += vinner(at(s, t), at(s, t));
    return antisym ? 0.5 * a : a;
  }
};

template <class G>
using AlgebraTensor = TensorField<G, typename G::Algebra>;
template <class G>
using HiggsTensor = TensorField<G, typename G::HiggsVec>;

/// View the Higgs section as a rank-0 tensor.
template <class G>
HiggsTensor<G> to_tensor(const HiggsField<G>& u) {
  HiggsTensor<G> t(u.lat, 0, false, 0);
  const std::int64_t ns = u.lat.sites();
  parallel_for(ns, [&](std::int64_t s) {
    t.at(static_cast<SiteId>(s), 0) = u.value(static_cast<SiteId>(s));
  });
  return t;
}

namespace detail {

template <class G, class V>
V transport(const typename G::Element& g, const V& v) {
  if constexpr (std::is_same_v<V, typename G::Algebra>)
    return G::ad(g, v);
  else
    return G::act(g, v);
}

template <class G, class V>
V transport_dagger(const typename G::Element& g, const V& v) {
  if constexpr (std::is_same_v<V, typename G::Algebra>)
    return G::ad_dagger(g, v);
  else
    return G::act_dagger(g, v);
}

}  // namespace detail

/// Forward covariant difference; prepends one direction index.
///
/// (D phi)_(m0,tau)(x) = [T_m0(x) phi_tau(x+m0) - phi_tau(x)] / h with T the
/// parallel transport of the value (Ad for algebra values, the fundamental
/// action for Higgs values). Direction indices ride along untransformed: the
/// base torus is flat.
template <class G, class V>
TensorField<G, V> cov_diff(const GaugeField<G>& U, const TensorField<G, V>& in) {
  if (!U.lat.same_shape(in.lat))
    throw ArgumentError("cov_diff: field lattices differ");
  U.lat.require_span(in.axis_span + 1);
  const int n = U.lat.dim();
  const double inv_h = 1.0 / U.lat.spacing();
  TensorField<G, V> out(U.lat, in.rank + 1, in.antisym, in.axis_span + 1);
  const std::int64_t ns = U.lat.sites();
  parallel_for(ns, [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    for (int mu = 0; mu < n; ++mu) {
      const SiteId sp = U.lat.shift_fast(s, mu, +1);
      const auto& g = U.link(s, mu);
      for (std::int64_t tau = 0; tau < in.ncomp; ++tau) {
        const V moved = detail::transport<G, V>(g, in.at(sp, tau));
        out.at(s, mu * in.ncomp + tau) = (moved - in.at(s, tau)) * inv_h;
      }
    }
  });
  return out;
}

/// Exact transpose of cov_diff under the global pairing
/// sum_x h^n inner(.,.), contracting the leading direction index:
/// (D* psi)_tau(y) = sum_mu [T_mu(y-mu)^dag psi_(mu,tau)(y-mu) - psi_(mu,tau)(y)] / h.
template <class G, class V>
TensorField<G, V> cov_diff_adjoint(const GaugeField<G>& U,
                                   const TensorField<G, V>& in) {
  if (!U.lat.same_shape(in.lat))
    throw ArgumentError("cov_diff_adjoint: field lattices differ");
  if (in.rank < 1)
    throw ArgumentError("cov_diff_adjoint: input must have rank >= 1");
  // No wrap guard here: a transpose is exact summation by parts on any
  // periodic lattice. The forward pass that produced `in` already vetted
  // the stencil; the span still grows for downstream forward derivatives.
  const int n = U.lat.dim();
  const double inv_h = 1.0 / U.lat.spacing();
  TensorField<G, V> out(U.lat, in.rank - 1, in.antisym && in.rank - 1 >= 2,
                        in.axis_span + 1);
  const std::int64_t ns = U.lat.sites();
  parallel_for(ns, [&](std::int64_t yi) {
    const auto y = static_cast<SiteId>(yi);
    for (std::int64_t tau = 0; tau < out.ncomp; ++tau) {
      V acc{};
      for (int mu = 0; mu < n; ++mu) {
        const SiteId ym = U.lat.shift_fast(y, mu, -1);
        const auto& g = U.link(ym, mu);
        acc += detail::transport_dagger<G, V>(g, in.at(ym, mu * out.ncomp + tau));
        acc += in.at(y, mu * out.ncomp + tau) * -1.0;
      }
      out.at(y, tau) = acc * inv_h;
    }
  });
  return out;
}

/// m-fold forward covariant derivative.
template <class G, class V>
TensorField<G, V> iterated_deriv(const GaugeField<G>& U, TensorField<G, V> t,
                                 int m) {
  if (m < 0) throw ArgumentError("iterated_deriv: negative order");
  for (int i = 0; i < m; ++i) t = cov_diff(U, t);
  return t;
}

/// Bochner Laplacian -D*D.
template <class G, class V>
TensorField<G, V> bochner_laplacian(const GaugeField<G>& U,
                                    const TensorField<G, V>& t) {
  auto r = cov_diff_adjoint(U, cov_diff(U, t));
  for (auto& v : r.vals) v = v * -1.0;
  return r;
}

/// Plaquette products and their principal logs for every unordered axis
/// pair; shared by curvature and the energy gradient.
template <class G>
struct PlaquetteField {
  Lattice lat;
  int npairs = 0;
  std::vector<typename G::Element> P;  // [site][pair]
  std::vector<typename G::Algebra> X;  // log P, same layout
};

/// Pair index for mu < nu among the n*(n-1)/2 unordered axis pairs.
inline int pair_index(int mu, int nu, int n) {
  int p = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (a == mu && b == nu) return p;
      ++p;
    }
  throw ArgumentError("pair_index: need mu < nu < " + std::to_string(n));
}

template <class G>
PlaquetteField<G> plaquettes(const GaugeField<G>& U) {
  U.lat.require_span(1);
  const int n = U.lat.dim();
  const int npairs = n * (n - 1) / 2;
  PlaquetteField<G> pf;
  pf.lat = U.lat;
  pf.npairs = npairs;
  const std::int64_t ns = U.lat.sites();
  pf.P.resize(static_cast<std::size_t>(ns) * npairs);
  pf.X.resize(static_cast<std::size_t>(ns) * npairs);
  std::vector<std::int64_t> bad(static_cast<std::size_t>(ns), -1);
  parallel_for(ns, [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    int p = 0;
    for (int mu = 0; mu < n; ++mu)
      for (int nu = mu + 1; nu < n; ++nu, ++p) {
        const SiteId sp_mu = U.lat.shift_fast(s, mu, +1);
        const SiteId sp_nu = U.lat.shift_fast(s, nu, +1);
        const auto prod = G::mul(
            G::mul(U.link(s, mu), U.link(sp_mu, nu)),
            G::mul(G::dagger(U.link(sp_nu, mu)), G::dagger(U.link(s, nu))));
        pf.P[static_cast<std::size_t>(si) * npairs + p] = prod;
        try {
          pf.X[static_cast<std::size_t>(si) * npairs + p] = G::log(prod);
        } catch (const BranchError&) {
          bad[static_cast<std::size_t>(si)] = si;
        }
      }
  });
  for (std::int64_t s = 0; s < ns; ++s)
    if (bad[static_cast<std::size_t>(s)] >= 0)
      throw CurvatureTooRough(
          s, "plaquette at site " + std::to_string(s) +
                 " is outside the principal log chart");
  return pf;
}

/// Discrete curvature F_mu_nu(x) = log(P_mu_nu(x)) / h^2, stored with both
/// orderings (F_nu_mu = -F_mu_nu) and zero diagonal.
template <class G>
AlgebraTensor<G> curvature(const PlaquetteField<G>& pf) {
  const int n = pf.lat.dim();
  const double inv_h2 = 1.0 / (pf.lat.spacing() * pf.lat.spacing());
  AlgebraTensor<G> F(pf.lat, 2, true, 1);
  const std::int64_t ns = pf.lat.sites();
  parallel_for(ns, [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    int p = 0;
    for (int mu = 0; mu < n; ++mu)
      for (int nu = mu + 1; nu < n; ++nu, ++p) {
        const auto f =
            pf.X[static_cast<std::size_t>(si) * pf.npairs + p] * inv_h2;
        F.at(s, mu * n + nu) = f;
        F.at(s, nu * n + mu) = f * -1.0;
      }
  });
  return F;
}

template <class G>
AlgebraTensor<G> curvature(const GaugeField<G>& U) {
  return curvature(plaquettes(U));
}

/// Global squared norm: h^n sum_x site_norm2, pairwise-summed.
template <class G, class V>
double global_norm2(const TensorField<G, V>& t) {
  const std::int64_t ns = t.lat.sites();
  std::vector<double> buf(static_cast<std::size_t>(ns));
  parallel_for(ns, [&](std::int64_t s) {
    buf[static_cast<std::size_t>(s)] = t.site_norm2(static_cast<SiteId>(s));
  });
  return t.lat.cell_volume() * pairwise_sum(buf);
}

/// Global pairing of two tensors of identical shape and kind.
template <class G, class V>
double global_inner(const TensorField<G, V>& a, const TensorField<G, V>& b) {
  if (!a.lat.same_shape(b.lat) || a.rank != b.rank)
    throw ArgumentError("global_inner: shape mismatch");
  const std::int64_t ns = a.lat.sites();
  const double w = (a.antisym && b.antisym) ? 0.5 : 1.0;
  std::vector<double> buf(static_cast<std::size_t>(ns));
  parallel_for(ns, [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    double acc = 0.0;
    for (std::int64_t t = 0; t < a.ncomp; ++t)
      acc += vinner(a.at(s, t), b.at(s, t));
    buf[static_cast<std::size_t>(si)] = w * acc;
  });
  return a.lat.cell_volume() * pairwise_sum(buf);
}

/// max_x site_norm2(x); fp max is order-independent, kept serial.
template <class G, class V>
double max_site_norm2(const TensorField<G, V>& t) {
  double m = 0.0;
  for (std::int64_t s = 0; s < t.lat.sites(); ++s)
    m = std::max(m, t.site_norm2(static_cast<SiteId>(s)));
  return m;
}

/// L2 norm sqrt(h^n sum |u|^2).
template <class G>
double l2_norm(const HiggsField<G>& u) {
  const std::int64_t ns = u.lat.sites();
  std::vector<double> buf(static_cast<std::size_t>(ns));
  parallel_for(ns, [&](std::int64_t s) {
    buf[static_cast<std::size_t>(s)] = u.abs2(static_cast<SiteId>(s));
  });
  return std::sqrt(u.lat.cell_volume() * pairwise_sum(buf));
}

template <class G>
double max_abs2(const HiggsField<G>& u) {
  double m = 0.0;
  for (std::int64_t s = 0; s < u.lat.sites(); ++s)
    m = std::max(m, u.abs2(static_cast<SiteId>(s)));
  return m;
}

/// Count violations of the discrete Kato bound
/// | |u(x+mu)| - |u(x)| | / h <= |(D u)_mu(x)|.
///
/// The bound is the triangle inequality (link transport is unitary), so it
/// can only fail by floating-point rounding; a scale-proportional guard band
/// keeps rounding from producing spurious counts.
template <class G>
std::int64_t kato_violations(const GaugeField<G>& U, const HiggsField<G>& u) {
  if (!U.lat.same_shape(u.lat))
    throw ArgumentError("kato_violations: field lattices differ");
  const auto du = cov_diff(U, to_tensor(u));
  const int n = U.lat.dim();
  const double inv_h = 1.0 / U.lat.spacing();
  std::int64_t count = 0;
  for (std::int64_t si = 0; si < U.lat.sites(); ++si) {
    const auto s = static_cast<SiteId>(si);
    const double a0 = std::sqrt(u.abs2(s));
    for (int mu = 0; mu < n; ++mu) {
      const double a1 = std::sqrt(u.abs2(U.lat.shift_fast(s, mu, +1)));
      const double lhs = std::abs(a1 - a0) * inv_h;
      const double rhs = std::sqrt(vinner(du.at(s, mu), du.at(s, mu)));
      const double guard = 1e-12 * (a0 + a1) * inv_h;
      if (lhs > rhs + guard) ++count;
    }
  }
  return count;
}

/// Cold start: identity links, zero Higgs.
template <class G>
std::pair<GaugeField<G>, HiggsField<G>> cold_start(const Lattice& lat) {
  return {GaugeField<G>(lat), HiggsField<G>(lat)};
}

/// Hot start: links exp of i.i.d. uniform algebra noise in [-amp, amp] per
/// coefficient, Higgs components with i.i.d. uniform real and imaginary
/// parts in [-amp, amp]. Counter-based draws: reproducible for any thread
/// count or evaluation order.
template <class G>
std::pair<GaugeField<G>, HiggsField<G>> hot_start(const Lattice& lat,
                                                  double amplitude,
                                                  std::uint64_t seed) {
  CounterRng rng(seed);
  GaugeField<G> U(lat);
  HiggsField<G> u(lat);
  const int n = lat.dim();
  const std::int64_t ns = lat.sites();
  parallel_for(ns, [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    for (int mu = 0; mu < n; ++mu) {
      double c[3] = {0, 0, 0};
      for (int j = 0; j < G::algebra_dim; ++j)
        c[j] = rng.symmetric(0, (si * n + mu) * 3 + j, amplitude);
      U.link(s, mu) = G::exp(G::from_coeffs(c));
    }
    typename G::HiggsVec v;
    for (int j = 0; j < G::rep_dim; ++j)
      v[j] = cplx(rng.symmetric(1, (si * G::rep_dim + j) * 2, amplitude),
                  rng.symmetric(1, (si * G::rep_dim + j) * 2 + 1, amplitude));
    u.set_value(s, v);
  });
  return {std::move(U), std::move(u)};
}

/// Deterministic smooth start: one lowest-frequency wave per link axis and
/// Higgs component. Unlike a hot start, the link chart A = log(U)/h varies
/// on the scale of the whole torus, so resampling onto other lattices stays
/// meaningful (descent never smooths the gauge-orbit roughness of a random
/// start).
template <class G>
std::pair<GaugeField<G>, HiggsField<G>> wave_start(const Lattice& lat,
                                                   double amplitude) {
  GaugeField<G> U(lat);
  HiggsField<G> u(lat);
  const int n = lat.dim();
  const double h = lat.spacing();
  constexpr double tau = 6.283185307179586476925286766559;
  parallel_for(lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    const auto x = lat.coords(s);
    for (int mu = 0; mu < n; ++mu) {
      const int nu = (mu + 1) % n;
      const double ph =
          tau * x[static_cast<std::size_t>(nu)] / lat.extent(nu);
      double c[3] = {0, 0, 0};
      for (int j = 0; j < G::algebra_dim; ++j)
        c[j] = amplitude * h * std::sin(ph + j * tau / 6.0) / (1 + j);
      U.link(s, mu) = G::exp(G::from_coeffs(c));
    }
    double psi = 0.0;
    for (int a = 0; a < n; ++a)
      psi += tau * x[static_cast<std::size_t>(a)] / lat.extent(a);
    typename G::HiggsVec v;
    for (int j = 0; j < G::rep_dim; ++j)
      v[j] = cplx(amplitude * std::cos(psi + j * tau / 4.0),
                  amplitude * std::sin(psi + j * tau / 4.0));
    u.set_value(s, v);
  });
  return {std::move(U), std::move(u)};
}

}  // namespace ymhk
