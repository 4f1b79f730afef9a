#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ymhk/errors.hpp"
#include "ymhk/fields.hpp"
#include "ymhk/flow.hpp"
#include "ymhk/rng.hpp"

namespace ymhk {

// ---------------------------------------------------------------------------
// Gauge transforms

/// One group element per site.
template <class G>
struct GaugeTransform {
  Lattice lat;
  std::vector<typename G::Element> g;

  GaugeTransform() = default;
  explicit GaugeTransform(const Lattice& l)
      : lat(l), g(static_cast<std::size_t>(l.sites()), G::identity()) {}

  typename G::Element& at(SiteId s) { return g[static_cast<std::size_t>(s)]; }
  const typename G::Element& at(SiteId s) const {
    return g[static_cast<std::size_t>(s)];
  }
};

/// i.i.d. exp of uniform algebra noise per site, |coefficient| <= amplitude.
template <class G>
GaugeTransform<G> random_gauge_transform(const Lattice& lat,
                                         std::uint64_t seed,
                                         double amplitude) {
  GaugeTransform<G> gt(lat);
  CounterRng rng(seed);
  parallel_for(lat.sites(), [&](std::int64_t si) {
    double c[3] = {0, 0, 0};
    for (int j = 0; j < G::algebra_dim; ++j)
      c[j] = rng.symmetric(2, si * 3 + j, amplitude);
    gt.at(static_cast<SiteId>(si)) = G::exp(G::from_coeffs(c));
  });
  return gt;
}

/// Pointwise product (a then b equals transforming once by compose(b, a)).
template <class G>
GaugeTransform<G> compose(const GaugeTransform<G>& b,
                          const GaugeTransform<G>& a) {
  if (!b.lat.same_shape(a.lat))
    throw ArgumentError("compose: transform lattices differ");
  GaugeTransform<G> r(a.lat);
  parallel_for(a.lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    r.at(s) = G::mul(b.at(s), a.at(s));
  });
  return r;
}

/// U_mu(x) -> g(x) U_mu(x) g(x+mu)^dag,  u(x) -> g(x) u(x).
template <class G>
std::pair<GaugeField<G>, HiggsField<G>> gauge_transform(
    const GaugeField<G>& U, const HiggsField<G>& u,
    const GaugeTransform<G>& gt) {
  if (!U.lat.same_shape(gt.lat) || !u.lat.same_shape(gt.lat))
    throw ArgumentError("gauge_transform: lattices differ");
  GaugeField<G> Ug = U;
  HiggsField<G> ug = u;
  const int n = U.lat.dim();
  parallel_for(U.lat.sites(), [&](std::int64_t si) {
    const auto x = static_cast<SiteId>(si);
    for (int mu = 0; mu < n; ++mu) {
      const SiteId xp = U.lat.shift_fast(x, mu, +1);
      Ug.link(x, mu) =
          G::mul(G::mul(gt.at(x), U.link(x, mu)), G::dagger(gt.at(xp)));
    }
    ug.set_value(x, G::act(gt.at(x), u.value(x)));
  });
  return {std::move(Ug), std::move(ug)};
}

/// Sitewise transform of tensor values: Ad_g for algebra-valued tensors,
/// the fundamental action for Higgs-valued ones. Covariant derivatives and
/// curvature commute with this (equivariance), which the tests exercise.
template <class G>
TensorField<G, typename G::Algebra> apply_gauge(
    const TensorField<G, typename G::Algebra>& t, const GaugeTransform<G>& gt) {
  TensorField<G, typename G::Algebra> r = t;
  parallel_for(t.lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    for (std::int64_t c = 0; c < t.ncomp; ++c)
      r.at(s, c) = G::ad(gt.at(s), t.at(s, c));
  });
  return r;
}

template <class G>
TensorField<G, typename G::HiggsVec> apply_gauge(
    const TensorField<G, typename G::HiggsVec>& t,
    const GaugeTransform<G>& gt) {
  TensorField<G, typename G::HiggsVec> r = t;
  parallel_for(t.lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    for (std::int64_t c = 0; c < t.ncomp; ++c)
      r.at(s, c) = G::act(gt.at(s), t.at(s, c));
  });
  return r;
}

template <class G>
LinkField<G> apply_gauge(const LinkField<G>& z, const GaugeTransform<G>& gt) {
  LinkField<G> r = z;
  const int n = z.lat.dim();
  parallel_for(z.lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    for (int mu = 0; mu < n; ++mu) r.at(s, mu) = G::ad(gt.at(s), z.at(s, mu));
  });
  return r;
}

// ---------------------------------------------------------------------------
// Parabolic rescaling

struct RescaleReport {
  double rho = 1.0;
  double energy_ratio_observed = 1.0;
  double energy_ratio_predicted = 1.0;  // rho^{2k+4-n}, from (k, n, rho) only
  double time_dilation = 1.0;           // rho^{2(k+1)}
  double interpolation_error_estimate = 0.0;
};

namespace detail {

/// Plain real triple used as the interpolation carrier for algebra
/// coefficients (dimension <= 3 for both groups).
struct CoeffVec {
  double v[3] = {0, 0, 0};
  CoeffVec& operator+=(const CoeffVec& o) {
    for (int i = 0; i < 3; ++i) v[i] += o.v[i];
    return *this;
  }
  CoeffVec operator*(double s) const {
    CoeffVec r;
    for (int i = 0; i < 3; ++i) r.v[i] = v[i] * s;
    return r;
  }
  CoeffVec operator+(const CoeffVec& o) const {
    CoeffVec r;
    for (int i = 0; i < 3; ++i) r.v[i] = v[i] + o.v[i];
    return r;
  }
};

inline double vinner(const CoeffVec& a, const CoeffVec& b) {
  return a.v[0] * b.v[0] + a.v[1] * b.v[1] + a.v[2] * b.v[2];
}

inline double periodic_wrap(double x, double period) {
  double y = std::fmod(x, period);
  if (y < 0.0) y += period;
  if (y >= period) y -= period;  // fmod rounding can land exactly on period
  return y;
}

/// C1 cubic (Catmull-Rom) periodic tensor-product interpolation of per-site
/// values at real-valued lattice coordinates. Exact (weight pattern
/// 0,1,0,0) at integer positions.
///
/// C1 continuity matters: second-difference norms of the resampled fields
/// enter the order-k energies, and a C0 interpolant leaves O(1) slope kinks
/// at old gridlines that those norms pick up no matter how fine the base
/// lattice is. With a C1 kernel the kink residue is O(h) and the rescaled
/// energy ratio converges at first order, which the scale tests require.
template <class V, class F>
V interp_periodic(const Lattice& lat, const F& value_at, const double* pos) {
  const int n = lat.dim();
  int base[kMaxDim] = {0, 0, 0, 0};
  double wts[kMaxDim][4];
  for (int a = 0; a < n; ++a) {
    const double w = periodic_wrap(pos[a], lat.extent(a));
    const double fl = std::floor(w);
    base[a] = static_cast<int>(fl);
    double u = w - fl;
    if (base[a] >= lat.extent(a)) {  // defensive: floor(w) == extent
      base[a] = 0;
      u = 0.0;
    }
    const double u2 = u * u, u3 = u2 * u;
    wts[a][0] = 0.5 * (-u + 2.0 * u2 - u3);
    wts[a][1] = 1.0 + 0.5 * (-5.0 * u2 + 3.0 * u3);
    wts[a][2] = 0.5 * (u + 4.0 * u2 - 3.0 * u3);
    wts[a][3] = 0.5 * (-u2 + u3);
  }
  V acc{};
  const int corners = 1 << (2 * n);  // 4^n taps, 2 bits per axis
  for (int c = 0; c < corners; ++c) {
    double wgt = 1.0;
    std::array<int, kMaxDim> crd{};
    for (int a = 0; a < n; ++a) {
      const int tap = (c >> (2 * a)) & 3;
      wgt *= wts[a][tap];
      const int L = lat.extent(a);
      int x = base[a] + tap - 1;
      if (x < 0) x += L;
      if (x >= L) x -= L;
      crd[a] = x;
    }
    if (wgt == 0.0) continue;
    acc += value_at(lat.site(crd)) * wgt;
  }
  return acc;
}

/// Largest centered-second-difference norm over sites and axes; the usual
/// multilinear error bound is 1/8 of this per axis.
template <class V, class F>
double max_second_difference(const Lattice& lat, const F& value_at) {
  double m = 0.0;
  const int n = lat.dim();
  for (std::int64_t si = 0; si < lat.sites(); ++si) {
    const auto s = static_cast<SiteId>(si);
    for (int a = 0; a < n; ++a) {
      const V d = value_at(lat.shift_fast(s, a, +1)) + value_at(s) * -2.0 +
                  value_at(lat.shift_fast(s, a, -1));
      m = std::max(m, std::sqrt(vinner(d, d)));
    }
  }
  return m;
}

/// Resample (U, u) onto a new lattice through the algebra chart
/// A = log(U)/h: values are multilinearly interpolated at
/// old_anchor + step*(j - new_anchor) (per axis, step = L_old/L_new),
/// scaled by `amp`, and links re-exponentiated with the new spacing.
/// The anchor pair maps new_anchor exactly onto old_anchor.
template <class G>
std::pair<GaugeField<G>, HiggsField<G>> resample_chart(
    const GaugeField<G>& U, const HiggsField<G>& u, const Lattice& to,
    double amp, const double* old_anchor, const double* new_anchor,
    double* interp_err) {
  const Lattice& from = U.lat;
  const int n = from.dim();

  // Old-state charts: per-axis algebra coefficient fields and Higgs values.
  const std::int64_t ns_old = from.sites();
  const double inv_h = 1.0 / from.spacing();
  std::vector<CVec<G::rep_dim>> hvals(static_cast<std::size_t>(ns_old));
  std::vector<double> avals(static_cast<std::size_t>(ns_old) * n *
                            G::algebra_dim);
  std::vector<std::int64_t> bad(static_cast<std::size_t>(ns_old), -1);
  parallel_for(ns_old, [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    try {
      for (int mu = 0; mu < n; ++mu) {
        const auto x = G::log(U.link(s, mu));
        double c[3] = {0, 0, 0};
        G::to_coeffs(x, c);
        for (int j = 0; j < G::algebra_dim; ++j)
          avals[static_cast<std::size_t>((si * n + mu) * G::algebra_dim + j)] =
              c[j] * inv_h;
      }
    } catch (const BranchError&) {
      bad[static_cast<std::size_t>(si)] = si;
    }
    hvals[static_cast<std::size_t>(si)] = u.value(s);
  });
  for (std::int64_t si = 0; si < ns_old; ++si)
    if (bad[static_cast<std::size_t>(si)] >= 0)
      throw CurvatureTooRough(si, "link outside the log chart in resample");

  using AVec = CVec<G::rep_dim>;
  double step[kMaxDim] = {1, 1, 1, 1};
  for (int a = 0; a < n; ++a)
    step[a] = static_cast<double>(from.extent(a)) / to.extent(a);

  GaugeField<G> Un(to);
  HiggsField<G> un(to);
  const double hn = to.spacing();
  parallel_for(to.sites(), [&](std::int64_t ji) {
    const auto j = static_cast<SiteId>(ji);
    const auto jc = to.coords(j);
    double pos[kMaxDim] = {0, 0, 0, 0};
    for (int a = 0; a < n; ++a)
      pos[a] = old_anchor[a] + step[a] * (jc[a] - new_anchor[a]);
    for (int mu = 0; mu < n; ++mu) {
      const CoeffVec w = interp_periodic<CoeffVec>(
          from,
          [&](SiteId s) {
            CoeffVec cv;
            for (int jj = 0; jj < G::algebra_dim; ++jj)
              cv.v[jj] = avals[static_cast<std::size_t>(
                  (static_cast<std::int64_t>(s) * n + mu) * G::algebra_dim +
                  jj)];
            return cv;
          },
          pos);
      double c[3];
      for (int jj = 0; jj < 3; ++jj) c[jj] = w.v[jj] * (amp * hn);
      Un.link(j, mu) = G::exp(G::from_coeffs(c));
    }
    const AVec hv = interp_periodic<AVec>(
        from, [&](SiteId s) { return hvals[static_cast<std::size_t>(s)]; },
        pos);
    un.set_value(j, hv * amp);
  });

  if (interp_err) {
    double m = 0.0;
    for (int mu = 0; mu < n; ++mu) {
      m = std::max(
          m, max_second_difference<CoeffVec>(from, [&](SiteId s) {
            CoeffVec cv;
            for (int jj = 0; jj < G::algebra_dim; ++jj)
              cv.v[jj] = avals[static_cast<std::size_t>(
                  (static_cast<std::int64_t>(s) * n + mu) * G::algebra_dim +
                  jj)];
            return cv;
          }));
    }
    m = std::max(m, max_second_difference<AVec>(from, [&](SiteId s) {
                   return hvals[static_cast<std::size_t>(s)];
                 }));
    *interp_err = 0.125 * m;
  }
  return {std::move(Un), std::move(un)};
}

inline constexpr std::int64_t kMaxResampleSites = std::int64_t(1) << 24;

}  // namespace detail

/// Scale transform of the flow: spacing h*rho, amplitudes *rho, extents
/// *rho_inv^2 (so the new torus covers the old one once), time divided by
/// rho^{2(k+1)}. rho = 1/rho_inv. The old `center` site lands exactly on
/// new coordinates center*rho_inv^2, so rho_inv = 1 reproduces the state
/// bitwise. Predicted energy ratio: rho^{2k+4-n}.
template <class G>
std::pair<FlowState<G>, RescaleReport> rescale(const FlowState<G>& st,
                                               int rho_inv, SiteId center) {
  if (rho_inv < 1) throw ArgumentError("rescale: rho_inv must be >= 1");
  const Lattice& lat = st.U.lat;
  if (center < 0 || center >= lat.sites())
    throw ArgumentError("rescale: center site out of range");
  const int n = lat.dim();
  const int k = st.params.k;
  const double rho = 1.0 / rho_inv;

  RescaleReport rep;
  rep.rho = rho;
  rep.energy_ratio_predicted = std::pow(rho, 2.0 * k + 4.0 - n);
  rep.time_dilation = std::pow(rho, 2.0 * (k + 1));

  if (rho_inv == 1) {
    FlowState<G> out = st;
    rep.energy_ratio_observed = 1.0;
    return {std::move(out), rep};
  }

  std::vector<int> ext(static_cast<std::size_t>(n));
  std::int64_t total = 1;
  for (int a = 0; a < n; ++a) {
    ext[static_cast<std::size_t>(a)] =
        lat.extent(a) * rho_inv * rho_inv;
    total *= ext[static_cast<std::size_t>(a)];
  }
  if (total > detail::kMaxResampleSites)
    throw ArgumentError("rescale: refined lattice exceeds the site budget");
  const Lattice to(ext, lat.spacing() * rho);

  const auto cc = lat.coords(center);
  double anchor_old[kMaxDim], anchor_new[kMaxDim];
  for (int a = 0; a < n; ++a) {
    anchor_old[a] = cc[a];
    anchor_new[a] = static_cast<double>(cc[a]) * rho_inv * rho_inv;
  }

  auto fields = detail::resample_chart<G>(st.U, st.u, to, rho, anchor_old,
                                          anchor_new,
                                          &rep.interpolation_error_estimate);
  FlowState<G> out(std::move(fields.first), std::move(fields.second),
                   st.params);
  out.t = st.t / rep.time_dilation;
  out.step_count = st.step_count;

  const double e_old = ymh_k_energy(st.U, st.u, st.params).total;
  const double e_new = ymh_k_energy(out.U, out.u, out.params).total;
  rep.energy_ratio_observed = e_old != 0.0 ? e_new / e_old : 1.0;
  return {std::move(out), rep};
}

// ---------------------------------------------------------------------------
// Blow-up extraction

/// Pointwise concentration density m(x) = |F(x)| + |u(x)|^2 with
/// |F(x)|^2 summed over unordered direction pairs.
template <class G>
std::vector<double> concentration_density(const GaugeField<G>& U,
                                          const HiggsField<G>& u) {
  const auto F = curvature(plaquettes(U));
  std::vector<double> m(static_cast<std::size_t>(U.lat.sites()));
  parallel_for(U.lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    m[static_cast<std::size_t>(si)] =
        std::sqrt(F.site_norm2(s)) + u.abs2(s);
  });
  return m;
}

enum class BlowupMode {
  UnitChange,  // relabel units: exact normalization, no interpolation
  Resample     // interpolate onto a zoomed lattice (tolerance ~1e-3)
};

template <class G>
struct BlowupResult {
  FlowState<G> state;     // t = 0: initial condition of the model flow
  double rho = 1.0;       // m_max^{-(k+1)}
  SiteId site = 0;        // argmax of m on the input lattice
  double center_value = 0.0;  // m(origin) of the extracted state
};

/// Zoom into the worst concentration point and normalize it to 1.
///
/// The argmax site of m(x) = |F(x)| + |u(x)|^2 (lowest site id on ties)
/// becomes the origin. With M = max m, the parabolic zoom factor is
/// sigma = M^{-1/2} and rho = M^{-(k+1)} = sigma^{2(k+1)}.
///
/// UnitChange expresses the same configuration in zoomed units: links are
/// untouched (exp(h' * sigma*A) == exp(h*A) since h' = h/sigma), Higgs is
/// scaled by sigma, so m(origin) == 1 up to rounding. Resample interpolates
/// onto a lattice with spacing h*sigma and extents ~L/sigma^2 (the covered
/// volume is preserved), paying interpolation error at the center.
template <class G>
BlowupResult<G> blowup_extract(const FlowState<G>& st, BlowupMode mode) {
  const Lattice& lat = st.U.lat;
  const int n = lat.dim();
  const int k = st.params.k;

  const auto m = concentration_density(st.U, st.u);
  SiteId best = 0;
  double best_m = m[0];
  for (std::int64_t s = 1; s < lat.sites(); ++s)
    if (m[static_cast<std::size_t>(s)] > best_m) {
      best_m = m[static_cast<std::size_t>(s)];
      best = static_cast<SiteId>(s);
    }
  if (!(best_m > 0.0))
    throw ArgumentError(
        "blowup_extract: flat state has no concentration point");

  const double sigma = 1.0 / std::sqrt(best_m);
  BlowupResult<G> out;
  out.rho = std::pow(best_m, -static_cast<double>(k + 1));
  out.site = best;

  const auto cc = lat.coords(best);

  if (mode == BlowupMode::UnitChange) {
    const Lattice to(lat.extents(), lat.spacing() / sigma);
    GaugeField<G> Un(to);
    HiggsField<G> un(to);
    parallel_for(to.sites(), [&](std::int64_t ji) {
      const auto j = static_cast<SiteId>(ji);
      auto src = to.coords(j);
      for (int a = 0; a < n; ++a) src[a] += cc[a];  // site() wraps
      const SiteId s = lat.site(src);
      for (int mu = 0; mu < n; ++mu) Un.link(j, mu) = st.U.link(s, mu);
      un.set_value(j, st.u.value(s) * sigma);
    });
    out.state = FlowState<G>(std::move(Un), std::move(un), st.params);
  } else {
    std::vector<int> ext(static_cast<std::size_t>(n));
    std::int64_t total = 1;
    double log_step = 0.0;
    for (int a = 0; a < n; ++a) {
      const double tgt = lat.extent(a) / (sigma * sigma);
      ext[static_cast<std::size_t>(a)] = std::max(
          kMinExtent, static_cast<int>(std::llround(tgt)));
      total *= ext[static_cast<std::size_t>(a)];
      log_step += std::log(static_cast<double>(lat.extent(a)) /
                           ext[static_cast<std::size_t>(a)]);
    }
    if (total > detail::kMaxResampleSites)
      throw ArgumentError(
          "blowup_extract: resampled lattice exceeds the site budget");
    // Spacing from the realized integer-extent zoom s = L_old/L_new
    // (geometric mean across axes): h' = h * s / sigma equals h * sigma
    // exactly when L/sigma^2 is an integer, and keeps the center curvature
    // normalization first-order exact under the extent rounding otherwise.
    const double s_mean = std::exp(log_step / n);
    const Lattice to(ext, lat.spacing() * s_mean / sigma);
    double anchor_old[kMaxDim], anchor_new[kMaxDim] = {0, 0, 0, 0};
    for (int a = 0; a < n; ++a) anchor_old[a] = cc[a];
    auto fields = detail::resample_chart<G>(st.U, st.u, to, sigma, anchor_old,
                                            anchor_new, nullptr);
    out.state = FlowState<G>(std::move(fields.first),
                             std::move(fields.second), st.params);
  }

  const auto mz = concentration_density(out.state.U, out.state.u);
  out.center_value = mz[0];
  return out;
}

// ---------------------------------------------------------------------------
// Smoothing-rate diagnostic

/// Compensated derivative-decay sequence (t, t^{q/(k+1)} ||D^q F||^2) from a
/// trace recorded with derivative columns; rows at t = 0 are skipped. If the
/// flow smooths at the expected parabolic rate the sequence stays bounded.
inline std::vector<std::pair<double, double>> smoothing_diagnostic(
    const std::vector<TraceRecord>& trace, int q, int k) {
  if (q < 0 || q > k)
    throw ArgumentError("smoothing_diagnostic: need 0 <= q <= k");
  const double expo = static_cast<double>(q) / (k + 1);
  std::vector<std::pair<double, double>> out;
  for (const auto& r : trace) {
    if (r.t <= 0.0) continue;
    if (static_cast<int>(r.dqF_l2.size()) <= q)
      throw ConfigError("record_derivatives",
                        "trace lacks the requested derivative norm column");
    const double nrm = r.dqF_l2[static_cast<std::size_t>(q)];
    out.emplace_back(r.t, std::pow(r.t, expo) * nrm * nrm);
  }
  return out;
}

/// Least-squares slope of log(y) against log(t) over the final decade
/// t in [t_end/10, t_end]. Nonpositive values cannot be log-fit.
inline double log_slope_final_decade(
    const std::vector<std::pair<double, double>>& seq) {
  if (seq.empty()) throw ArgumentError("log_slope: empty sequence");
  const double t_end = seq.back().first;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::int64_t cnt = 0;
  for (const auto& [t, y] : seq) {
    if (t < t_end / 10.0) continue;
    if (!(y > 0.0))
      throw ArgumentError("log_slope: nonpositive value in the fit window");
    const double lx = std::log(t), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt < 2) throw ArgumentError("log_slope: fewer than two points");
  const double d = cnt * sxx - sx * sx;
  if (d == 0.0) throw ArgumentError("log_slope: degenerate abscissas");
  return (cnt * sxy - sx * sy) / d;
}

/// L2 curvature mass h^n sum |F|^2 over the min-image Euclidean ball of
/// radius r (lattice units) around `center`. Reporting only; no threshold.
template <class G>
double ball_curvature_mass(const FlowState<G>& st, SiteId center, double r) {
  const Lattice& lat = st.U.lat;
  if (center < 0 || center >= lat.sites())
    throw ArgumentError("ball_curvature_mass: center out of range");
  const int n = lat.dim();
  const auto F = curvature(plaquettes(st.U));
  const auto cc = lat.coords(center);
  double acc = 0.0;
  for (std::int64_t si = 0; si < lat.sites(); ++si) {
    const auto s = static_cast<SiteId>(si);
    const auto xc = lat.coords(s);
    double d2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const int L = lat.extent(a);
      int d = std::abs(xc[a] - cc[a]);
      d = std::min(d, L - d);
      d2 += static_cast<double>(d) * d;
    }
    if (d2 <= r * r) acc += F.site_norm2(s);
  }
  return lat.cell_volume() * acc;
}

}  // namespace ymhk
