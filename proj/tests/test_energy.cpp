#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"

using namespace ymhk;
using namespace ymhk::testing;

TEST_CASE("flux state energies are exactly computable", "[energy]") {
  const int L = 6, m = 1;
  const double h = 0.8;
  auto [U, u] = flux_state(L, h, m);
  const double B = flux_B(L, h, m);
  const double vol = L * L * h * h;

  SECTION("order 0: curvature term is Vol B^2 / 2") {
    const auto e = ymh_k_energy(U, u, FlowParams{0, 0.0});
    REQUIRE(e.curvature_term == Catch::Approx(0.5 * vol * B * B).epsilon(1e-13));
    REQUIRE(e.higgs_term == 0.0);  // u = 0, first derivative of 0 is 0
    REQUIRE(e.potential_term == 0.0);
    REQUIRE(e.total == e.curvature_term);
  }

  SECTION("order >= 1: constant curvature has no derivative energy") {
    for (int k : {1, 2}) {
      const auto e = ymh_k_energy(U, u, FlowParams{k, 0.0});
      REQUIRE(std::abs(e.curvature_term) < 1e-24);
    }
  }

  SECTION("vanished Higgs still pays the symmetry-breaking potential") {
    const double lambda = 1.6;
    const auto e = ymh_k_energy(U, u, FlowParams{0, lambda});
    // (|0|^2 - 1)^2 = 1 at every site
    REQUIRE(e.potential_term ==
            Catch::Approx(lambda / 8.0 * vol).epsilon(1e-13));
  }

  SECTION("derivative norms ladder") {
    const auto norms = curvature_deriv_norms(U, 2);
    REQUIRE(norms.size() == 3);
    REQUIRE(norms[0] == Catch::Approx(B * std::sqrt(vol)).epsilon(1e-13));
    REQUIRE(norms[1] < 1e-12);
    REQUIRE(norms[2] < 1e-12);
  }

  SECTION("pointwise extrema observables") {
    const auto obs = evaluate_energy(U, u, FlowParams{0, 1.0});
    REQUIRE(obs.sup_F == Catch::Approx(B).epsilon(1e-13));
    REQUIRE(obs.sup_u2 == 0.0);
    REQUIRE(obs.e.total == obs.e.curvature_term + obs.e.potential_term);
  }
}

TEMPLATE_TEST_CASE("energy is gauge invariant for every order", "[energy]",
                   U1, SU2) {
  using G = TestType;
  const Lattice lat({6, 6}, 0.9);
  auto [U, u] = hot_start<G>(lat, 0.6, 42);
  for (int k = 0; k <= 2; ++k) {
    const FlowParams p{k, 0.7};
    const auto e0 = evaluate_energy(U, u, p);
    const auto g = random_gauge_transform<G>(lat, 1000 + k, 2.0);
    auto [Ug, ug] = gauge_transform(U, u, g);
    const auto e1 = evaluate_energy(Ug, ug, p);
    REQUIRE(e1.e.total == Catch::Approx(e0.e.total).epsilon(1e-12));
    REQUIRE(e1.e.curvature_term ==
            Catch::Approx(e0.e.curvature_term).epsilon(1e-12));
    REQUIRE(e1.e.higgs_term == Catch::Approx(e0.e.higgs_term).epsilon(1e-12));
    REQUIRE(e1.e.potential_term ==
            Catch::Approx(e0.e.potential_term).epsilon(1e-12));
    REQUIRE(e1.sup_F == Catch::Approx(e0.sup_F).epsilon(1e-12));
    REQUIRE(e1.sup_u2 == Catch::Approx(e0.sup_u2).epsilon(1e-12));
  }
}

TEMPLATE_TEST_CASE("energy terms are nonnegative and sum to the total",
                   "[energy]", U1, SU2) {
  using G = TestType;
  const Lattice lat({6, 6}, 0.7);
  auto [U, u] = hot_start<G>(lat, 0.7, 7);
  for (int k = 0; k <= 2; ++k)
    for (double lam : {0.0, 1.0}) {
      const auto e = ymh_k_energy(U, u, FlowParams{k, lam});
      REQUIRE(e.curvature_term >= 0.0);
      REQUIRE(e.higgs_term >= 0.0);
      REQUIRE(e.potential_term >= 0.0);
      // fixed summation order pins the total bitwise
      REQUIRE(e.total == (e.curvature_term + e.higgs_term) + e.potential_term);
      if (lam == 0.0) REQUIRE(e.potential_term == 0.0);
    }
}

TEST_CASE("vacuum has zero energy", "[energy]") {
  const Lattice lat({4, 4, 4}, 1.0);
  auto [U, u] = cold_start<SU2>(lat);
  for (int k = 0; k <= 1; ++k) {
    const auto e = ymh_k_energy(U, u, FlowParams{k, 0.0});
    REQUIRE(e.total == 0.0);
  }
}

TEST_CASE("stencil footprint guard scales with the order", "[energy]") {
  const Lattice small({4, 4, 4, 4}, 1.0);
  auto [U, u] = cold_start<U1>(small);
  // order k touches k + 2 sites along an axis
  REQUIRE_NOTHROW(ymh_k_energy(U, u, FlowParams{2, 0.0}));
  REQUIRE_THROWS_AS(ymh_k_energy(U, u, FlowParams{3, 0.0}), LatticeTooSmall);

  const Lattice big({5, 5}, 1.0);
  auto [U5, u5] = cold_start<U1>(big);
  REQUIRE_NOTHROW(ymh_k_energy(U5, u5, FlowParams{3, 0.0}));
}

TEST_CASE("flow parameter validation", "[energy]") {
  const auto check = [](int k, double lambda) {
    FlowParams{k, lambda}.validate();
  };
  REQUIRE_NOTHROW(check(0, 0.0));
  REQUIRE_NOTHROW(check(3, 2.5));
  REQUIRE_THROWS_AS(check(-1, 0.0), ArgumentError);
  REQUIRE_THROWS_AS(check(4, 0.0), ArgumentError);
  REQUIRE_THROWS_AS(check(1, -0.1), ArgumentError);
}

TEST_CASE("higgs term matches a hand-built rank-1 derivative", "[energy]") {
  // k = 0: higgs term is ||D u||^2 / 2 with the same covariant difference
  const Lattice lat({6, 6}, 0.7);
  auto [U, u] = hot_start<SU2>(lat, 0.5, 77);
  const auto du = cov_diff(U, to_tensor(u));
  const double direct = 0.5 * global_norm2(du);
  const auto e = ymh_k_energy(U, u, FlowParams{0, 0.0});
  REQUIRE(e.higgs_term == Catch::Approx(direct).epsilon(1e-13));
}
