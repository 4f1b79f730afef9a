// Command-line front end: run / resume / verify / scale-test / blowup / info.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "ymhk/ymhk.hpp"

namespace fs = std::filesystem;
using namespace ymhk;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory: " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string coords_string(const Lattice& lat, SiteId s) {
  const auto c = lat.coords(s);
  std::string out = "(";
  for (int a = 0; a < lat.dim(); ++a) {
    if (a) out += ",";
    out += std::to_string(c[static_cast<std::size_t>(a)]);
  }
  return out + ")";
}

// --- run / resume ----------------------------------------------------------

template <class G>
int drive_flow(FlowState<G>& st, const RunConfig& cfg,
               const std::string& out_dir) {
  ensure_dir(out_dir);
  const FlowSchedule sch = cfg.schedule();
  TraceWriter trace(join_path(out_dir, "trace.csv"), cfg.summary(),
                    st.params.k, sch.record_derivatives);

  bool blew_up = false;
  const std::function<void(const TraceRecord&)> on_record =
      [&](const TraceRecord& r) { trace.write(r); };
  const std::function<void(const FlowState<G>&, bool)> on_snapshot =
      [&](const FlowState<G>& s, bool blowup) {
        if (blowup) {
          blew_up = true;
          save_snapshot(s, join_path(out_dir, "final_blowup.ymhk"));
        } else if (sch.snapshot_every > 0 &&
                   s.step_count % sch.snapshot_every == 0) {
          char name[64];
          std::snprintf(name, sizeof name, "snap_%08" PRId64 ".ymhk",
                        s.step_count);
          save_snapshot(s, join_path(out_dir, name));
        }
      };

  const RunResult res = run(st, sch, on_record, on_snapshot);
  if (!blew_up) save_snapshot(st, join_path(out_dir, "final.ymhk"));

  ensure_energy(st);
  std::printf("stop_reason = %s\n", to_string(res.reason));
  std::printf("steps = %" PRId64 "\n", st.step_count);
  std::printf("t = %.17g\n", st.t);
  std::printf("E_total = %.17g\n", st.last_energy.e.total);
  std::printf("trace = %s\n", join_path(out_dir, "trace.csv").c_str());
  std::printf("final_snapshot = %s\n",
              join_path(out_dir, blew_up ? "final_blowup.ymhk" : "final.ymhk")
                  .c_str());
  return 0;
}

int cmd_run(const std::string& config_path, std::string out_dir) {
  RunConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  AnyState st = make_initial_state_any(cfg);
  return std::visit([&](auto& s) { return drive_flow(s, cfg, cfg.out_dir); },
                    st);
}

int cmd_resume(const std::string& config_path, const std::string& snap_path,
               std::string out_dir) {
  RunConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  AnyState st = load_snapshot(snap_path);
  return std::visit(
      [&](auto& s) {
        using G = typename std::decay_t<decltype(s)>::Group;
        if (cfg.group != G::name)
          throw ConfigError("group", "snapshot group does not match config");
        const Lattice want(cfg.extents, cfg.h);
        if (!s.U.lat.same_shape(want))
          throw ConfigError("extents",
                            "snapshot lattice does not match config");
        if (s.params.k != cfg.k)
          throw ConfigError("k", "snapshot flow order does not match config");
        if (s.params.lambda != cfg.lambda)
          throw ConfigError("lambda",
                            "snapshot coupling does not match config");
        return drive_flow(s, cfg, cfg.out_dir);
      },
      st);
}

// --- verify ----------------------------------------------------------------

struct VerifyRow {
  std::string name;
  bool pass = false;
  std::string detail;
};

template <class G>
void verify_group(std::uint64_t seed, std::vector<VerifyRow>& rows) {
  const std::string tag = std::string(G::display_name) + " ";
  const Lattice lat({6, 6}, 0.7);
  auto [U, u] = hot_start<G>(lat, 0.5, seed);

  {  // forward/adjoint difference pairing on random tensors
    AlgebraTensor<G> a(lat, 1, false, 0);
    AlgebraTensor<G> b(lat, 2, false, 0);
    const CounterRng rng(seed + 17);
    for (std::int64_t s = 0; s < lat.sites(); ++s) {
      for (std::int64_t t = 0; t < a.ncomp; ++t) {
        double c[3];
        for (int j = 0; j < G::algebra_dim; ++j)
          c[j] = rng.symmetric(5, (s * a.ncomp + t) * 3 + j, 1.0);
        a.at(static_cast<SiteId>(s), t) = G::from_coeffs(c);
      }
      for (std::int64_t t = 0; t < b.ncomp; ++t) {
        double c[3];
        for (int j = 0; j < G::algebra_dim; ++j)
          c[j] = rng.symmetric(6, (s * b.ncomp + t) * 3 + j, 1.0);
        b.at(static_cast<SiteId>(s), t) = G::from_coeffs(c);
      }
    }
    const auto Da = cov_diff(U, a);
    const auto Dtb = cov_diff_adjoint(U, b);
    const double lhs = global_inner(Da, b);
    const double rhs = global_inner(a, Dtb);
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    const double rel = std::abs(lhs - rhs) / (scale > 0 ? scale : 1.0);
    char d[96];
    std::snprintf(d, sizeof d, "rel mismatch %.3g (tol 1e-12)", rel);
    rows.push_back({tag + "difference/adjoint pairing", rel <= 1e-12, d});
  }

  {  // energy gauge invariance
    const FlowParams p{1, 0.5};
    const auto e0 = evaluate_energy(U, u, p);
    const auto g = random_gauge_transform<G>(lat, seed + 1, 1.0);
    auto [U2, u2] = gauge_transform(U, u, g);
    const auto e1 = evaluate_energy(U2, u2, p);
    const double rel =
        std::abs(e1.e.total - e0.e.total) / std::abs(e0.e.total);
    char d[96];
    std::snprintf(d, sizeof d, "rel change %.3g (tol 1e-12)", rel);
    rows.push_back({tag + "energy gauge invariance", rel <= 1e-12, d});
  }

  {  // gradient against central differences
    double worst = 0.0;
    for (int k = 0; k <= 2; ++k) {
      const auto dir = random_direction<G>(lat, seed + 2 + k, 1.0);
      const auto r = fd_check(U, u, FlowParams{k, 1.0}, dir, 1e-5);
      worst = std::max(worst, r.rel_err);
    }
    char d[96];
    std::snprintf(d, sizeof d, "max rel err %.3g (tol 1e-6)", worst);
    rows.push_back({tag + "gradient finite-difference", worst <= 1e-6, d});
  }

  {  // pointwise |d|u|| <= |Du|
    const std::int64_t bad = kato_violations(U, u);
    char d[96];
    std::snprintf(d, sizeof d, "%" PRId64 " violating bonds", bad);
    rows.push_back({tag + "diamagnetic inequality", bad == 0, d});
  }

  {  // short descent run: energy must never increase
    FlowState<G> st(U, u, FlowParams{1, 0.0});
    ensure_energy(st);
    double prev = st.last_energy.e.total;
    bool mono = true;
    const double dt0 = dt_heuristic(0.1, lat.spacing(), 1);
    for (int i = 0; i < 50; ++i) {
      const auto s = step(st, StepMode::Backtracking, dt0);
      if (s.stalled || !s.accepted) break;
      if (st.last_energy.e.total > prev * (1.0 + 1e-15)) mono = false;
      prev = st.last_energy.e.total;
    }
    char d[96];
    std::snprintf(d, sizeof d, "50 steps, final E %.6g", prev);
    rows.push_back({tag + "descent monotonicity", mono, d});
  }
}

int cmd_verify(std::uint64_t seed) {
  std::vector<VerifyRow> rows;
  verify_group<U1>(seed, rows);
  verify_group<SU2>(seed, rows);
  bool all = true;
  for (const auto& r : rows) {
    std::printf("%-38s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                r.detail.c_str());
    all = all && r.pass;
  }
  std::printf("verify: %s\n", all ? "all checks passed" : "FAILURES");
  return all ? 0 : 1;
}

// --- scale-test --------------------------------------------------------------

int cmd_scale_test(const std::string& config_path, std::vector<int> rhos,
                   double tol, std::string out_dir) {
  RunConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  ensure_dir(cfg.out_dir);
  if (rhos.empty()) rhos = {2};

  std::ofstream rep(join_path(cfg.out_dir, "scale_report.txt"),
                    std::ios::trunc);
  if (!rep) throw Error("cannot open scale report for writing");
  rep << "# parabolic rescaling check\n# " << cfg.summary() << "\n";

  AnyState any = make_initial_state_any(cfg);
  bool all = true;
  std::visit(
      [&](auto& st) {
        const SiteId center =
            static_cast<SiteId>(st.U.lat.sites() / 2);
        for (int ri : rhos) {
          auto [zoomed, r] = rescale(st, ri, center);
          const double err =
              std::abs(r.energy_ratio_observed - r.energy_ratio_predicted) /
              r.energy_ratio_predicted;
          const bool pass = err <= tol;
          all = all && pass;
          std::printf(
              "rho=1/%-3d observed=%.10g predicted=%.10g rel_err=%.3g "
              "dilation=%.10g %s\n",
              ri, r.energy_ratio_observed, r.energy_ratio_predicted, err,
              r.time_dilation, pass ? "PASS" : "FAIL");
          rep << "rho_inv = " << ri << "\n"
              << "rho = " << r.rho << "\n"
              << "energy_ratio_observed = " << r.energy_ratio_observed << "\n"
              << "energy_ratio_predicted = " << r.energy_ratio_predicted
              << "\n"
              << "rel_err = " << err << "\n"
              << "time_dilation = " << r.time_dilation << "\n"
              << "interpolation_error_estimate = "
              << r.interpolation_error_estimate << "\n"
              << "status = " << (pass ? "PASS" : "FAIL") << "\n\n";
        }
      },
      any);
  std::printf("report = %s\n",
              join_path(cfg.out_dir, "scale_report.txt").c_str());
  return all ? 0 : 1;
}

// --- blowup ------------------------------------------------------------------

int cmd_blowup(const std::string& snap_path, bool resample,
               std::string out_dir) {
  if (out_dir.empty()) out_dir = ".";
  ensure_dir(out_dir);
  AnyState any = load_snapshot(snap_path);
  const BlowupMode mode =
      resample ? BlowupMode::Resample : BlowupMode::UnitChange;
  std::visit(
      [&](auto& st) {
        auto res = blowup_extract(st, mode);
        const std::string out_snap =
            join_path(out_dir, resample ? "blowup_resample.ymhk"
                                        : "blowup_unit.ymhk");
        save_snapshot(res.state, out_snap);
        std::ofstream rep(join_path(out_dir, "blowup_report.txt"),
                          std::ios::trunc);
        rep << "mode = " << (resample ? "resample" : "unit_change") << "\n"
            << "source = " << snap_path << "\n"
            << "site = " << res.site << "\n"
            << "site_coords = " << coords_string(st.U.lat, res.site) << "\n"
            << "rho = " << res.rho << "\n"
            << "center_value = " << res.center_value << "\n"
            << "new_spacing = " << res.state.U.lat.spacing() << "\n"
            << "snapshot = " << out_snap << "\n";
        std::printf("site = %s  rho = %.10g  center_value = %.12g\n",
                    coords_string(st.U.lat, res.site).c_str(), res.rho,
                    res.center_value);
        std::printf("snapshot = %s\n", out_snap.c_str());
        std::printf("report = %s\n",
                    join_path(out_dir, "blowup_report.txt").c_str());
      },
      any);
  return 0;
}

// --- info --------------------------------------------------------------------

int cmd_info(const std::string& snap_path, const std::string& trace_path,
             int q) {
  if (snap_path.empty() && trace_path.empty())
    throw Error("info: need --snapshot and/or --trace");
  if (!snap_path.empty()) {
    const SnapshotHeader hd = read_snapshot_header(snap_path);
    std::printf("file = %s\n", snap_path.c_str());
    std::printf("version = %u\n", hd.version);
    std::printf("group = %s\n", hd.group_name.c_str());
    std::printf("n = %d\n", hd.n);
    std::string e;
    for (std::size_t i = 0; i < hd.extents.size(); ++i) {
      if (i) e += ",";
      e += std::to_string(hd.extents[i]);
    }
    std::printf("extents = [%s]\n", e.c_str());
    std::printf("h = %.17g\n", hd.h);
    std::printf("k = %d\n", hd.k);
    std::printf("lambda = %.17g\n", hd.lambda);
    std::printf("t = %.17g\n", hd.t);
  }
  if (!trace_path.empty()) {
    const auto rows = read_trace_csv(trace_path);
    std::printf("trace = %s\n", trace_path.c_str());
    std::printf("rows = %zu\n", rows.size());
    if (!rows.empty()) {
      const auto& last = rows.back();
      std::printf("last: step=%" PRId64 " t=%.10g E_total=%.10g\n", last.step,
                  last.t, last.e_total);
      if (!last.dqF_l2.empty()) {
        const int k = static_cast<int>(last.dqF_l2.size()) - 1;
        const int qq = q < 0 ? k : q;
        const auto seq = smoothing_diagnostic(rows, qq, k);
        if (seq.size() >= 2) {
          const double slope = log_slope_final_decade(seq);
          std::printf("compensated d%dF decay: log-slope %.6g over final "
                      "decade (%zu points)\n",
                      qq, slope, seq.size());
        } else {
          std::printf("compensated d%dF decay: too few positive-time rows\n",
                      qq);
        }
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order Yang--Mills--Higgs gradient flow on periodic "
               "lattices"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, snap_path, trace_path, out_dir;
  std::vector<int> rhos;
  double tol = 0.10;
  std::uint64_t seed = 20260815;
  bool resample = false;
  int q = -1;

  auto* c_run = app.add_subcommand("run", "flow a configured initial state");
  c_run->add_option("--config", config_path, "run configuration file")
      ->required();
  c_run->add_option("--out", out_dir, "output directory (default from config)");

  auto* c_resume =
      app.add_subcommand("resume", "continue a flow from a snapshot");
  c_resume->add_option("--config", config_path, "run configuration file")
      ->required();
  c_resume->add_option("--snapshot", snap_path, "snapshot to continue from")
      ->required();
  c_resume->add_option("--out", out_dir, "output directory");

  auto* c_verify =
      app.add_subcommand("verify", "run built-in invariant self-checks");
  c_verify->add_option("--seed", seed, "seed for the randomized checks");

  auto* c_scale =
      app.add_subcommand("scale-test", "check parabolic rescaling ratios");
  c_scale->add_option("--config", config_path, "run configuration file")
      ->required();
  c_scale->add_option("--rho", rhos,
                      "inverse zoom factors (integers >= 1)")
      ->delimiter(',');
  c_scale->add_option("--tol", tol, "relative tolerance on the energy ratio");
  c_scale->add_option("--out", out_dir, "output directory");

  auto* c_blow = app.add_subcommand(
      "blowup", "extract the normalized zoomed state at the worst point");
  c_blow->add_option("--snapshot", snap_path, "snapshot to analyze")
      ->required();
  c_blow->add_flag("--resample", resample,
                   "interpolate onto a zoomed lattice instead of relabeling "
                   "units");
  c_blow->add_option("--out", out_dir, "output directory");

  auto* c_info = app.add_subcommand("info", "describe snapshots and traces");
  c_info->add_option("--snapshot", snap_path, "snapshot to describe");
  c_info->add_option("--trace", trace_path, "trace CSV to summarize");
  c_info->add_option("--q", q,
                     "derivative order for the decay diagnostic "
                     "(default: highest recorded)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_run) return cmd_run(config_path, out_dir);
    if (*c_resume) return cmd_resume(config_path, snap_path, out_dir);
    if (*c_verify) return cmd_verify(seed);
    if (*c_scale) return cmd_scale_test(config_path, rhos, tol, out_dir);
    if (*c_blow) return cmd_blowup(snap_path, resample, out_dir);
    if (*c_info) return cmd_info(snap_path, trace_path, q);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
