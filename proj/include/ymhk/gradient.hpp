#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "ymhk/energy.hpp"
#include "ymhk/fields.hpp"

namespace ymhk {

/// Exact gradient of the discrete order-k energy.
///
/// link_grad is the left-trivialized derivative Z: for every algebra X and
/// every link, d/ds E(exp(s X) U_mu(x))|_0 = inner(X, Z_mu(x)).
/// higgs_grad is the Riesz representative under the global real inner
/// product sum_x h^n Re<.,.>, so du/dt = -higgs_grad is the L2 descent
/// velocity of the Higgs half.
template <class G>
struct GradientPair {
  LinkField<G> link_grad;
  HiggsField<G> higgs_grad;
};

namespace detail {

/// Reverse-mode link contributions of one cov_diff level.
///
/// Forward: psi = cov_diff(U, phi). Only psi_(mu,tau)(x) depends on
/// U_mu(x), so the gather per link is local:
///   Higgs values:   Z_mu(x) -= proj(sum_tau v_tau w_tau^dag)/h,
///                   v = U phi(x+mu), w = psibar_(mu,tau)(x);
///   algebra values: Z_mu(x) += sum_tau [Ad_U phi(x+mu), psibar_(mu,tau)(x)]/h.
template <class G, class V>
void level_link_grad(const GaugeField<G>& U, const TensorField<G, V>& phi,
                     const TensorField<G, V>& psibar, LinkField<G>& Z) {
  const int n = U.lat.dim();
  const double inv_h = 1.0 / U.lat.spacing();
  parallel_for(U.lat.sites(), [&](std::int64_t si) {
    const auto x = static_cast<SiteId>(si);
    for (int mu = 0; mu < n; ++mu) {
      const SiteId xp = U.lat.shift_fast(x, mu, +1);
      const auto& g = U.link(x, mu);
      typename G::Algebra acc{};
      for (std::int64_t tau = 0; tau < phi.ncomp; ++tau) {
        const auto& wbar = psibar.at(x, mu * phi.ncomp + tau);
        if constexpr (std::is_same_v<V, typename G::Algebra>) {
          acc += G::commutator(G::ad(g, phi.at(xp, tau)), wbar);
        } else {
          acc += G::project_outer(G::act(g, phi.at(xp, tau)), wbar) * -1.0;
        }
      }
      Z.at(x, mu) += acc * inv_h;
    }
  });
}

/// Reverse-mode link contributions of the plaquette assembly.
///
/// Pbar holds, per (site, pair), the right-trivialized plaquette cotangent:
/// dE = sum inner(dP P^-1, Pbar). Each link enters four plaquettes per
/// transverse axis; all four pullbacks are Ad transports of Pbar.
template <class G>
void plaquette_link_grad(const GaugeField<G>& U, const PlaquetteField<G>& pf,
                         const std::vector<typename G::Algebra>& Pbar,
                         LinkField<G>& Z) {
  const int n = U.lat.dim();
  const int npairs = pf.npairs;
  parallel_for(U.lat.sites(), [&](std::int64_t xi) {
    const auto x = static_cast<SiteId>(xi);
    for (int sg = 0; sg < n; ++sg) {
      typename G::Algebra acc{};
      for (int nu = sg + 1; nu < n; ++nu) {
        const int p = pair_index(sg, nu, n);
        // first factor of P_(sg,nu)(x)
        acc += Pbar[static_cast<std::size_t>(x) * npairs + p];
        // daggered third factor of P_(sg,nu)(y), y = x - nu
        const SiteId y = U.lat.shift_fast(x, nu, -1);
        const SiteId ysg = U.lat.shift_fast(y, sg, +1);
        const auto W = G::mul(G::mul(U.link(y, sg), U.link(ysg, nu)),
                              G::dagger(U.link(x, sg)));
        acc += G::ad_dagger(
                   W, Pbar[static_cast<std::size_t>(y) * npairs + p]) *
               -1.0;
      }
      for (int mu = 0; mu < sg; ++mu) {
        const int p = pair_index(mu, sg, n);
        // second factor of P_(mu,sg)(y), y = x - mu
        const SiteId y = U.lat.shift_fast(x, mu, -1);
        acc += G::ad_dagger(U.link(y, mu),
                            Pbar[static_cast<std::size_t>(y) * npairs + p]);
        // daggered fourth factor of P_(mu,sg)(x)
        acc += G::ad_dagger(
                   pf.P[static_cast<std::size_t>(x) * npairs + p],
                   Pbar[static_cast<std::size_t>(x) * npairs + p]) *
               -1.0;
      }
      Z.at(x, sg) += acc;
    }
  });
}

}  // namespace detail

template <class G>
GradientPair<G> gradient(const GaugeField<G>& U, const HiggsField<G>& u,
                         const FlowParams& p) {
  p.validate();
  if (!U.lat.same_shape(u.lat))
    throw ArgumentError("gradient: field lattices differ");
  U.lat.require_span(p.k + 1);

  const Lattice& lat = U.lat;
  const int n = lat.dim();
  const double hn = lat.cell_volume();
  const double inv_h2 = 1.0 / (lat.spacing() * lat.spacing());

  // Forward pass; every tower level is kept for the reverse sweep.
  const auto pf = plaquettes(U);
  std::vector<AlgebraTensor<G>> T;
  T.push_back(curvature(pf));
  for (int j = 1; j <= p.k; ++j) T.push_back(cov_diff(U, T.back()));
  std::vector<HiggsTensor<G>> S;
  S.push_back(to_tensor(u));
  for (int j = 1; j <= p.k + 1; ++j) S.push_back(cov_diff(U, S.back()));

  LinkField<G> Z(lat);

  // Curvature half: seed with the antisymmetry-weighted cotangent of the
  // top level, then walk the tower down to the raw curvature.
  AlgebraTensor<G> Tbar = T[static_cast<std::size_t>(p.k)];
  for (auto& v : Tbar.vals) v = v * (0.5 * hn);
  for (int j = p.k; j >= 1; --j) {
    detail::level_link_grad(U, T[static_cast<std::size_t>(j - 1)], Tbar, Z);
    Tbar = cov_diff_adjoint(U, Tbar);
  }

  // Through the log chart: combine both storage orderings of the curvature
  // cotangent, then pull back along d(log)/h^2 in right trivialization.
  std::vector<typename G::Algebra> Pbar(
      static_cast<std::size_t>(lat.sites()) * pf.npairs);
  parallel_for(lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    int pi = 0;
    for (int mu = 0; mu < n; ++mu)
      for (int nu = mu + 1; nu < n; ++nu, ++pi) {
        const auto gbar = Tbar.at(s, mu * n + nu) - Tbar.at(s, nu * n + mu);
        Pbar[static_cast<std::size_t>(si) * pf.npairs + pi] =
            G::dlog_transpose(pf.X[static_cast<std::size_t>(si) * pf.npairs + pi],
                              gbar) *
            inv_h2;
      }
  });
  detail::plaquette_link_grad(U, pf, Pbar, Z);

  // Higgs half.
  HiggsTensor<G> Sbar = S[static_cast<std::size_t>(p.k + 1)];
  for (auto& v : Sbar.vals) v = v * hn;
  for (int j = p.k + 1; j >= 1; --j) {
    detail::level_link_grad(U, S[static_cast<std::size_t>(j - 1)], Sbar, Z);
    Sbar = cov_diff_adjoint(U, Sbar);
  }

  GradientPair<G> out{LinkField<G>(lat), HiggsField<G>(lat)};
  out.link_grad = std::move(Z);
  const double half_lambda = 0.5 * p.lambda;
  parallel_for(lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    auto v = Sbar.at(s, 0) * (1.0 / hn);
    if (p.lambda != 0.0)
      v += u.value(s) * (half_lambda * (u.abs2(s) - 1.0));
    out.higgs_grad.set_value(s, v);
  });
  return out;
}

/// Monitoring norm: h^n-weighted over both halves; gauge invariant.
template <class G>
double grad_norm(const GradientPair<G>& g) {
  const Lattice& lat = g.higgs_grad.lat;
  const int n = lat.dim();
  std::vector<double> buf(static_cast<std::size_t>(lat.sites()));
  parallel_for(lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    double a = 0.0;
    for (int mu = 0; mu < n; ++mu)
      a += G::inner(g.link_grad.at(s, mu), g.link_grad.at(s, mu));
    buf[static_cast<std::size_t>(si)] = a + g.higgs_grad.abs2(s);
  });
  return std::sqrt(lat.cell_volume() * pairwise_sum(buf));
}

/// Joint perturbation direction for derivative checks and descent steps.
template <class G>
struct FlowDirection {
  LinkField<G> X;
  HiggsField<G> v;
};

/// Reproducible random direction (RNG streams 3 and 4; hot starts use 0/1,
/// gauge transforms 2).
template <class G>
FlowDirection<G> random_direction(const Lattice& lat, std::uint64_t seed,
                                  double amplitude) {
  FlowDirection<G> d{LinkField<G>(lat), HiggsField<G>(lat)};
  const CounterRng rng(seed);
  const int n = lat.dim();
  parallel_for(lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    for (int mu = 0; mu < n; ++mu) {
      double c[3];
      for (int j = 0; j < G::algebra_dim; ++j)
        c[j] = rng.symmetric(3, (si * n + mu) * 3 + j, amplitude);
      d.X.at(s, mu) = G::from_coeffs(c);
    }
    typename G::HiggsVec v;
    for (int j = 0; j < G::rep_dim; ++j)
      v[j] = cplx(rng.symmetric(4, (si * G::rep_dim + j) * 2, amplitude),
                  rng.symmetric(4, (si * G::rep_dim + j) * 2 + 1, amplitude));
    d.v.set_value(s, v);
  });
  return d;
}

/// Links exp(s X) U, Higgs u + s v.
template <class G>
std::pair<GaugeField<G>, HiggsField<G>> perturb(const GaugeField<G>& U,
                                                const HiggsField<G>& u,
                                                const FlowDirection<G>& d,
                                                double s) {
  GaugeField<G> Up = U;
  HiggsField<G> up = u;
  const int n = U.lat.dim();
  parallel_for(U.lat.sites(), [&](std::int64_t si) {
    const auto x = static_cast<SiteId>(si);
    for (int mu = 0; mu < n; ++mu)
      Up.link(x, mu) = G::mul(G::exp(d.X.at(x, mu) * s), U.link(x, mu));
    up.set_value(x, u.value(x) + d.v.value(x) * s);
  });
  return {std::move(Up), std::move(up)};
}

struct FdCheckResult {
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

/// Central-difference directional derivative against the assembled gradient.
///
/// The numeric side touches only the energy, never the gradient code path,
/// so it is an independent witness: numeric = [E(+eps) - E(-eps)] / (2 eps)
/// with links perturbed by exp(+-eps X) U and Higgs by u +- eps v.
template <class G>
FdCheckResult fd_check(const GaugeField<G>& U, const HiggsField<G>& u,
                       const FlowParams& p, const FlowDirection<G>& d,
                       double eps) {
  if (!(eps > 0.0)) throw ArgumentError("fd_check: eps must be positive");
  const auto g = gradient(U, u, p);

  const Lattice& lat = U.lat;
  const int n = lat.dim();
  std::vector<double> buf(static_cast<std::size_t>(lat.sites()));
  parallel_for(lat.sites(), [&](std::int64_t si) {
    const auto s = static_cast<SiteId>(si);
    double a = 0.0;
    for (int mu = 0; mu < n; ++mu)
      a += G::inner(d.X.at(s, mu), g.link_grad.at(s, mu));
    a += lat.cell_volume() *
         vinner(d.v.value(s), g.higgs_grad.value(s));
    buf[static_cast<std::size_t>(si)] = a;
  });

  FdCheckResult r;
  r.analytic = pairwise_sum(buf);
  const auto plus = perturb(U, u, d, eps);
  const auto minus = perturb(U, u, d, -eps);
  const double ep = ymh_k_energy(plus.first, plus.second, p).total;
  const double em = ymh_k_energy(minus.first, minus.second, p).total;
  r.numeric = (ep - em) / (2.0 * eps);
  const double scale = std::max(std::abs(r.analytic), std::abs(r.numeric));
  r.rel_err = scale > 0.0 ? std::abs(r.numeric - r.analytic) / scale : 0.0;
  return r;
}

}  // namespace ymhk
