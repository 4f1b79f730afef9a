#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"

using namespace ymhk;
using namespace ymhk::testing;

TEST_CASE("gauge transforms compose and leave observables fixed",
          "[analysis]") {
  const Lattice lat({6, 6}, 0.9);
  auto [U, u] = hot_start<SU2>(lat, 0.6, 42);
  const auto g1 = random_gauge_transform<SU2>(lat, 1001, 2.0);
  const auto g2 = random_gauge_transform<SU2>(lat, 1002, 2.0);

  auto [Ua, ua] = gauge_transform(U, u, g1);
  auto [Uab, uab] = gauge_transform(Ua, ua, g2);
  auto [Uc, uc] = gauge_transform(U, u, compose(g2, g1));
  REQUIRE(max_link_diff<SU2>(Uab, Uc) < 1e-13);
  REQUIRE(max_higgs_diff<SU2>(uab, uc) < 1e-13);

  // |u|^2 is pointwise invariant
  for (std::int64_t s = 0; s < lat.sites(); ++s)
    REQUIRE(ua.abs2(static_cast<SiteId>(s)) ==
            Catch::Approx(u.abs2(static_cast<SiteId>(s))).epsilon(1e-12));
}

TEST_CASE("rescale with rho_inv = 1 is the identity", "[analysis]") {
  const Lattice lat({8, 8}, 0.5);
  auto [U, u] = plane_wave(lat, 0.3, 0.5);
  FlowState<U1> st(std::move(U), std::move(u), FlowParams{1, 0.0});
  st.t = 2.5;

  auto [zoomed, rep] = rescale(st, 1, 0);
  REQUIRE(rep.rho == 1.0);
  REQUIRE(rep.energy_ratio_observed == 1.0);
  REQUIRE(rep.energy_ratio_predicted == 1.0);
  REQUIRE(rep.time_dilation == 1.0);
  REQUIRE(zoomed.t == st.t);
  REQUIRE(max_link_diff<U1>(zoomed.U, st.U) == 0.0);
  REQUIRE(max_higgs_diff<U1>(zoomed.u, st.u) == 0.0);
}

TEST_CASE("rescale tracks the parabolic energy law on smooth states",
          "[analysis]") {
  // observed / predicted converges under refinement; tolerances are twice
  // the measured errors at each size so regressions surface loudly
  struct Row {
    int L;
    int k;
    double tol;
  };
  for (const Row r : {Row{16, 0, 0.02}, Row{16, 1, 0.08}, Row{32, 1, 0.02}}) {
    const Lattice lat({r.L, r.L}, 16.0 / r.L);
    auto [U, u] = plane_wave(lat, 0.3, 0.5);
    FlowState<U1> st(std::move(U), std::move(u), FlowParams{r.k, 0.0});
    st.t = 1.0;

    auto [zoomed, rep] = rescale(st, 2, 0);
    INFO("L=" << r.L << " k=" << r.k
              << " observed=" << rep.energy_ratio_observed
              << " predicted=" << rep.energy_ratio_predicted);
    REQUIRE(std::abs(rep.energy_ratio_observed - rep.energy_ratio_predicted) /
                rep.energy_ratio_predicted <
            r.tol);
    // exact bookkeeping: rho = 1/2, dilation rho^{2(k+1)}, extents x4
    REQUIRE(rep.rho == 0.5);
    REQUIRE(rep.time_dilation ==
            Catch::Approx(std::pow(0.5, 2.0 * (r.k + 1))).epsilon(1e-15));
    REQUIRE(zoomed.U.lat.extent(0) == 4 * r.L);
    REQUIRE(zoomed.U.lat.spacing() ==
            Catch::Approx(lat.spacing() * 0.5).epsilon(1e-15));
    REQUIRE(zoomed.t == Catch::Approx(st.t / rep.time_dilation));
  }
}

TEST_CASE("unit-change blow-up normalizes the peak exactly", "[analysis]") {
  const Lattice lat({8, 8}, 1.0);
  auto [U, u] = hot_start<SU2>(lat, 0.5, 321);
  FlowState<SU2> st(std::move(U), std::move(u), FlowParams{1, 0.0});
  st.t = 3.0;

  const auto res = blowup_extract(st, BlowupMode::UnitChange);
  REQUIRE(res.center_value == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(res.state.t == 0.0);  // extracted states restart the model clock

  // links are the shifted originals, bitwise
  const auto& to = res.state.U.lat;
  const auto cc = st.U.lat.coords(res.site);
  double worst = 0.0;
  for (std::int64_t s = 0; s < to.sites(); ++s) {
    auto src = to.coords(static_cast<SiteId>(s));
    for (int a = 0; a < to.dim(); ++a)
      src[static_cast<std::size_t>(a)] += cc[static_cast<std::size_t>(a)];
    const auto x = st.U.lat.site(src);
    for (int mu = 0; mu < to.dim(); ++mu) {
      double A[8], Bv[8];
      SU2::write_element(res.state.U.link(static_cast<SiteId>(s), mu), A);
      SU2::write_element(st.U.link(x, mu), Bv);
      for (int j = 0; j < 8; ++j)
        worst = std::max(worst, std::abs(A[j] - Bv[j]));
    }
  }
  REQUIRE(worst == 0.0);

  // zoom bookkeeping: rho = sigma^{2(k+1)}, h' = h / sigma
  const double sigma = st.U.lat.spacing() / res.state.U.lat.spacing();
  REQUIRE(res.rho == Catch::Approx(std::pow(sigma, 4.0)).epsilon(1e-12));
}

TEST_CASE("resampled blow-up pays only interpolation error", "[analysis]") {
  const Lattice lat({32, 32}, 0.8);
  auto [U, u] = plane_wave(lat, 0.4, 0.7);
  FlowState<U1> st(std::move(U), std::move(u), FlowParams{1, 0.0});

  const auto res = blowup_extract(st, BlowupMode::Resample);
  REQUIRE(res.center_value == Catch::Approx(1.0).margin(1e-3));
  REQUIRE(res.state.t == 0.0);
}

TEST_CASE("blow-up argmax prefers the lowest site on ties", "[analysis]") {
  const Lattice lat({8, 8}, 1.0);
  GaugeField<U1> U(lat);
  HiggsField<U1> u(lat);
  CVec<1> v;
  v[0] = cplx(2.0, 0.0);  // |u|^2 = 4 at two sites
  u.set_value(5, v);
  u.set_value(17, v);
  FlowState<U1> st(std::move(U), std::move(u), FlowParams{0, 0.0});
  const auto res = blowup_extract(st, BlowupMode::UnitChange);
  REQUIRE(res.site == 5);
}

TEST_CASE("flat states have no concentration point", "[analysis]") {
  const Lattice lat({6, 6}, 1.0);
  auto [U, u] = cold_start<U1>(lat);
  FlowState<U1> st(std::move(U), std::move(u), FlowParams{0, 0.0});
  REQUIRE_THROWS_AS(blowup_extract(st, BlowupMode::UnitChange),
                    ArgumentError);
}

TEST_CASE("compensated decay diagnostic recovers exact power laws",
          "[analysis]") {
  // ||D^q F||(t) = t^{-p} gives y = t^{q/(k+1)} t^{-2p}: slope q/(k+1) - 2p
  const int k = 2, q = 1;
  const double p = 0.4;
  std::vector<TraceRecord> trace;
  for (int i = 0; i <= 64; ++i) {
    TraceRecord r;
    r.step = i;
    r.t = 0.01 * std::pow(1.1, i);
    r.dqF_l2 = {1.0, std::pow(r.t, -p), 1.0};
    trace.push_back(r);
  }
  const auto seq = smoothing_diagnostic(trace, q, k);
  REQUIRE(seq.size() == trace.size());
  const double slope = log_slope_final_decade(seq);
  REQUIRE(slope ==
          Catch::Approx(static_cast<double>(q) / (k + 1) - 2 * p)
              .margin(1e-10));

  // rows without the requested column are a configuration error
  std::vector<TraceRecord> bare(1);
  bare[0].t = 1.0;
  REQUIRE_THROWS_AS(smoothing_diagnostic(bare, 0, 0), ConfigError);
  REQUIRE_THROWS_AS(smoothing_diagnostic(trace, 3, 2), ArgumentError);
}

TEST_CASE("curvature mass in a ball reduces to the global norm", "[analysis]") {
  const Lattice lat({8, 8}, 0.7);
  auto [U, u] = hot_start<U1>(lat, 0.4, 77);
  FlowState<U1> st(std::move(U), std::move(u), FlowParams{0, 0.0});

  const double all = ball_curvature_mass(st, 0, 1e9);
  const auto F = curvature(st.U);
  REQUIRE(all == Catch::Approx(global_norm2(F)).epsilon(1e-12));

  // a radius under the spacing captures exactly the center site
  const double h = lat.spacing();
  const double one = ball_curvature_mass(st, 3, 0.5 * h);
  REQUIRE(one ==
          Catch::Approx(lat.cell_volume() * F.site_norm2(3)).epsilon(1e-12));

  REQUIRE_THROWS_AS(ball_curvature_mass(st, -1, 1.0), ArgumentError);
}
