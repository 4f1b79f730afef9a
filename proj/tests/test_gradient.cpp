#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"

using namespace ymhk;
using namespace ymhk::testing;

TEMPLATE_TEST_CASE("gradient matches central differences", "[gradient]", U1,
                   SU2) {
  using G = TestType;
  const Lattice lat({6, 6}, 0.7);
  auto [U, u] = hot_start<G>(lat, 0.5, 12345);
  for (int k = 0; k <= 2; ++k)
    for (double lam : {0.0, 1.0}) {
      const auto d = random_direction<G>(lat, 1000 + k, 1.0);
      const auto r = fd_check(U, u, FlowParams{k, lam}, d, 1e-5);
      INFO("k=" << k << " lambda=" << lam << " analytic=" << r.analytic
                << " numeric=" << r.numeric);
      REQUIRE(r.rel_err < 1e-6);
    }
}

TEMPLATE_TEST_CASE("finite-difference error shrinks quadratically",
                   "[gradient]", U1, SU2) {
  using G = TestType;
  // central differences: error ~ eps^2 while truncation dominates rounding
  const Lattice lat({6, 6}, 0.7);
  auto [U, u] = hot_start<G>(lat, 0.5, 999);
  const auto d = random_direction<G>(lat, 5, 1.0);
  const FlowParams p{1, 1.0};
  const double e1 = fd_check(U, u, p, d, 1e-2).rel_err;
  const double e2 = fd_check(U, u, p, d, 1e-3).rel_err;
  const double slope = std::log10(e1 / e2);
  REQUIRE(slope > 1.7);
  REQUIRE(slope < 2.3);
}

TEST_CASE("quadratic pairing identity at lambda = 0", "[gradient]") {
  // the Higgs part of the energy is quadratic: <u, hg>_{L2} = 2 E_higgs
  const Lattice lat({8, 8}, 1.0);
  auto [U, u] = hot_start<SU2>(lat, 0.5, 2024);
  for (int k = 0; k <= 2; ++k) {
    const FlowParams p{k, 0.0};
    const auto g = gradient(U, u, p);
    const auto e = ymh_k_energy(U, u, p);
    double acc = 0.0;
    for (std::int64_t s = 0; s < lat.sites(); ++s)
      acc += vinner(u.value(static_cast<SiteId>(s)),
                    g.higgs_grad.value(static_cast<SiteId>(s)));
    acc *= lat.cell_volume();
    REQUIRE(acc == Catch::Approx(2.0 * e.higgs_term).epsilon(1e-11));
  }
}

TEMPLATE_TEST_CASE("gradient is gauge equivariant", "[gradient]", U1, SU2) {
  using G = TestType;
  const Lattice lat({6, 6}, 0.7);
  auto [U, u] = hot_start<G>(lat, 0.6, 31);
  const FlowParams p{1, 0.8};
  const auto g0 = gradient(U, u, p);

  const auto g = random_gauge_transform<G>(lat, 404, 1.5);
  auto [Ug, ug] = gauge_transform(U, u, g);
  const auto g1 = gradient(Ug, ug, p);

  // links transform in the adjoint, the Higgs gradient in the fiber rep
  const auto zg = apply_gauge(g0.link_grad, g);
  double worst = 0.0;
  for (std::int64_t s = 0; s < lat.sites(); ++s)
    for (int mu = 0; mu < lat.dim(); ++mu) {
      const auto d = g1.link_grad.at(static_cast<SiteId>(s), mu) -
                     zg.at(static_cast<SiteId>(s), mu);
      worst = std::max(worst, std::sqrt(G::inner(d, d)));
    }
  REQUIRE(worst < 1e-12);

  double worst_h = 0.0;
  for (std::int64_t s = 0; s < lat.sites(); ++s) {
    const auto want =
        G::act(g.at(static_cast<SiteId>(s)),
               g0.higgs_grad.value(static_cast<SiteId>(s)));
    const auto got = g1.higgs_grad.value(static_cast<SiteId>(s));
    for (int j = 0; j < G::rep_dim; ++j)
      worst_h = std::max(worst_h, std::abs(want[j] - got[j]));
  }
  REQUIRE(worst_h < 1e-12);
}

TEMPLATE_TEST_CASE("critical points have zero gradient", "[gradient]", U1,
                   SU2) {
  using G = TestType;
  const Lattice lat({6, 6}, 1.0);
  auto [U, u] = cold_start<G>(lat);
  // u = 0 sits on the local maximum of the potential: still stationary
  for (double lam : {0.0, 1.0}) {
    const auto g = gradient(U, u, FlowParams{1, lam});
    REQUIRE(grad_norm(g) == 0.0);
  }
}

TEST_CASE("gradient norm is the scheduled descent speed", "[gradient]") {
  const Lattice lat({6, 6}, 0.7);
  auto [U, u] = hot_start<SU2>(lat, 0.5, 55);
  const FlowParams p{1, 0.5};
  const auto g = gradient(U, u, p);
  double acc = 0.0;
  for (std::int64_t s = 0; s < lat.sites(); ++s) {
    for (int mu = 0; mu < lat.dim(); ++mu) {
      const auto z = g.link_grad.at(static_cast<SiteId>(s), mu);
      acc += SU2::inner(z, z);
    }
    const auto hv = g.higgs_grad.value(static_cast<SiteId>(s));
    acc += vinner(hv, hv);
  }
  REQUIRE(grad_norm(g) ==
          Catch::Approx(std::sqrt(lat.cell_volume() * acc)).epsilon(1e-12));
}
