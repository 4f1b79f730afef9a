#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "ymhk/energy.hpp"
#include "ymhk/errors.hpp"
#include "ymhk/fields.hpp"
#include "ymhk/gradient.hpp"

namespace ymhk {

/// Evolving configuration plus cached observables of the current state.
///
/// `last_energy` is kept in sync with (U, u, params) after every accepted
/// step; `has_energy` marks whether the cache is valid (false right after
/// construction or external mutation of the fields).
template <class G>
struct FlowState {
  using Group = G;

  double t = 0.0;
  GaugeField<G> U;
  HiggsField<G> u;
  FlowParams params;
  std::int64_t step_count = 0;
  double last_dt = 0.0;
  EnergyObservables<G> last_energy;
  bool has_energy = false;

  FlowState() = default;
  FlowState(GaugeField<G> U_, HiggsField<G> u_, FlowParams p)
      : U(std::move(U_)), u(std::move(u_)), params(p) {
    if (!U.lat.same_shape(u.lat))
      throw ArgumentError("FlowState: gauge and Higgs lattices differ");
    params.validate();
  }
};

/// Recompute and cache energy/extrema if the cache is stale.
template <class G>
const EnergyObservables<G>& ensure_energy(FlowState<G>& st) {
  if (!st.has_energy) {
    st.last_energy = evaluate_energy(st.U, st.u, st.params);
    st.has_energy = true;
  }
  return st.last_energy;
}

enum class StepMode { Euler, Backtracking };

struct StepStats {
  double dt_used = 0.0;
  int backtrack_count = 0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double grad_norm = 0.0;
  double sup_F = 0.0;   // of the state after the step (before it if rejected)
  double sup_u2 = 0.0;
  bool accepted = false;
  bool stalled = false;  // no acceptable decrease within the halving budget
  bool blowup = false;   // candidate left the curvature log chart
};

/// Relative energy-change floor below which backtracking reports a stall.
inline constexpr double kStallRelTol = 1e-15;
/// Maximum number of dt halvings per backtracking step.
inline constexpr int kMaxBacktracks = 30;

namespace detail {

/// Descent update: links exp(-dt Z) U, Higgs u - dt * higgs_grad.
template <class G>
std::pair<GaugeField<G>, HiggsField<G>> descend(const GaugeField<G>& U,
                                                const HiggsField<G>& u,
                                                const GradientPair<G>& g,
                                                double dt) {
  GaugeField<G> Up = U;
  HiggsField<G> up = u;
  const int n = U.lat.dim();
  parallel_for(U.lat.sites(), [&](std::int64_t si) {
    const auto x = static_cast<SiteId>(si);
    for (int mu = 0; mu < n; ++mu)
      Up.link(x, mu) =
          G::mul(G::exp(g.link_grad.at(x, mu) * -dt), U.link(x, mu));
    up.set_value(x, u.value(x) + g.higgs_grad.value(x) * -dt);
  });
  return {std::move(Up), std::move(up)};
}

}  // namespace detail

/// One flow step along the negative gradient.
///
/// Euler mode applies dt0 unconditionally. Backtracking halves dt (at most
/// kMaxBacktracks times) until the energy strictly decreases -- and, at
/// lambda = 0, the L2 Higgs norm does not increase -- or until the best
/// candidate's |energy change| falls below kStallRelTol relative, which is
/// reported as a stall with the state left untouched.
///
/// A candidate whose plaquettes leave the principal log chart is rejected
/// (backtracking halves; Euler reports blow-up). On any rejection or
/// stall the state is unchanged and still chart-valid, so blow-up analysis
/// can always run on it.
template <class G>
StepStats step(FlowState<G>& st, StepMode mode, double dt0) {
  if (!(dt0 > 0.0)) throw ArgumentError("step: dt0 must be positive");
  ensure_energy(st);

  StepStats s;
  s.energy_before = st.last_energy.e.total;
  s.sup_F = st.last_energy.sup_F;
  s.sup_u2 = st.last_energy.sup_u2;

  const GradientPair<G> g = gradient(st.U, st.u, st.params);
  s.grad_norm = grad_norm(g);

  const bool enforce_l2u = st.params.lambda == 0.0;
  const double l2u_before = enforce_l2u ? l2_norm(st.u) : 0.0;

  double dt = dt0;
  const int tries = mode == StepMode::Euler ? 1 : kMaxBacktracks + 1;
  for (int i = 0; i < tries; ++i, dt *= 0.5) {
    s.backtrack_count = i;
    s.dt_used = dt;

    auto cand = detail::descend(st.U, st.u, g, dt);
    EnergyObservables<G> obs;
    try {
      obs = evaluate_energy(cand.first, cand.second, st.params);
    } catch (const CurvatureTooRough&) {
      if (mode == StepMode::Euler) {
        s.blowup = true;
        return s;
      }
      continue;  // too-large trial step; halve and retry
    }
    s.energy_after = obs.e.total;

    if (mode == StepMode::Euler) {
      s.accepted = true;
    } else {
      const double decrease = s.energy_before - obs.e.total;
      if (std::abs(decrease) <= kStallRelTol * std::abs(s.energy_before)) {
        s.stalled = true;
        s.energy_after = s.energy_before;
        return s;
      }
      if (decrease <= 0.0) continue;
      if (enforce_l2u && l2_norm(cand.second) > l2u_before) continue;
      s.accepted = true;
    }

    st.U = std::move(cand.first);
    st.u = std::move(cand.second);
    st.last_energy = obs;
    st.has_energy = true;
    st.t += dt;
    st.last_dt = dt;
    st.step_count += 1;
    s.sup_F = obs.sup_F;
    s.sup_u2 = obs.sup_u2;
    return s;
  }

  s.stalled = true;
  s.energy_after = s.energy_before;
  return s;
}

/// One recorded row of a run; columns mirror the trace CSV.
struct TraceRecord {
  std::int64_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  double e_total = 0.0;
  double e_curv = 0.0;
  double e_higgs = 0.0;
  double e_pot = 0.0;
  double l2_u = 0.0;
  double sup_F = 0.0;
  double sup_u2 = 0.0;
  double grad_norm = 0.0;
  std::vector<double> dqF_l2;  // ||D^q F|| for q = 0..k when recorded
};

/// Driver schedule; the file-level RunConfig reduces to this.
struct FlowSchedule {
  StepMode mode = StepMode::Backtracking;
  double dt_safety = 0.1;      // dt0 = dt_safety * h^{2(k+1)}
  double t_max = 0.0;
  std::int64_t max_steps = 0;  // 0 = no step cap
  std::int64_t record_every = 1;
  std::int64_t snapshot_every = 0;  // 0 = no periodic snapshots
  bool record_derivatives = false;
  double blowup_ceiling = 1e6;  // sup_F + sup_u2 limit; <= 0 disables
  std::int64_t reunit_every = 100;

  void validate() const {
    if (!(dt_safety > 0.0 && dt_safety <= 1.0))
      throw ArgumentError("FlowSchedule: dt_safety must be in (0, 1]");
    if (t_max < 0.0) throw ArgumentError("FlowSchedule: t_max must be >= 0");
    if (record_every < 1)
      throw ArgumentError("FlowSchedule: record_every must be >= 1");
    if (snapshot_every < 0 || max_steps < 0 || reunit_every < 0)
      throw ArgumentError("FlowSchedule: counters must be >= 0");
  }
};

enum class StopReason { TimeLimit, StepLimit, Stalled, BlowUp };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::TimeLimit: return "time_limit";
    case StopReason::StepLimit: return "step_limit";
    case StopReason::Stalled: return "stalled";
    case StopReason::BlowUp: return "blowup";
  }
  return "unknown";
}

struct RunResult {
  StopReason reason = StopReason::TimeLimit;
  std::vector<TraceRecord> trace;
};

/// Baseline step size from the parabolic order of the flow: the k-flow
/// scales time like length^{2(k+1)}, so a fixed safety factor transfers
/// across k and h without per-case tuning.
inline double dt_heuristic(double safety, double h, int k) {
  return safety * std::pow(h, 2.0 * (k + 1));
}

template <class G>
TraceRecord make_trace_record(const FlowState<G>& st, double dt,
                              double gradnorm, bool with_derivs) {
  TraceRecord r;
  r.step = st.step_count;
  r.t = st.t;
  r.dt = dt;
  r.e_total = st.last_energy.e.total;
  r.e_curv = st.last_energy.e.curvature_term;
  r.e_higgs = st.last_energy.e.higgs_term;
  r.e_pot = st.last_energy.e.potential_term;
  r.l2_u = l2_norm(st.u);
  r.sup_F = st.last_energy.sup_F;
  r.sup_u2 = st.last_energy.sup_u2;
  r.grad_norm = gradnorm;
  if (with_derivs) r.dqF_l2 = curvature_deriv_norms(st.U, st.params.k);
  return r;
}

/// Run the flow until t_max, a stall, the step cap, or a blow-up signal.
///
/// Emits one TraceRecord for the initial state and one per `record_every`
/// accepted steps; `on_record` / `on_snapshot` fire as rows and snapshot
/// points are produced (either may be empty). Snapshots flagged `blowup`
/// hold the last chart-valid state. With t_max = 0 and no step cap the
/// initial state is returned untouched with an empty trace.
template <class G>
RunResult run(FlowState<G>& st, const FlowSchedule& sch,
              const std::function<void(const TraceRecord&)>& on_record = {},
              const std::function<void(const FlowState<G>&, bool blowup)>&
                  on_snapshot = {}) {
  sch.validate();
  RunResult res;
  if (sch.t_max <= 0.0 && sch.max_steps == 0) return res;

  const double dt0 =
      dt_heuristic(sch.dt_safety, st.U.lat.spacing(), st.params.k);
  ensure_energy(st);

  auto record = [&](double dt, double gn) {
    res.trace.push_back(
        make_trace_record(st, dt, gn, sch.record_derivatives));
    if (on_record) on_record(res.trace.back());
  };
  record(0.0, grad_norm(gradient(st.U, st.u, st.params)));

  // Grow the trial step back gradually after backtracking instead of
  // re-paying the halving cascade every step.
  double dt_trial = dt0;
  std::int64_t steps_done = 0;
  for (;;) {
    if (st.t >= sch.t_max) {
      res.reason = StopReason::TimeLimit;
      break;
    }
    if (sch.max_steps > 0 && steps_done >= sch.max_steps) {
      res.reason = StopReason::StepLimit;
      break;
    }

    const StepStats s = step(st, sch.mode, dt_trial);
    if (s.blowup) {
      res.reason = StopReason::BlowUp;
      if (on_snapshot) on_snapshot(st, true);
      return res;
    }
    if (s.stalled || !s.accepted) {
      res.reason = StopReason::Stalled;
      break;
    }
    ++steps_done;
    dt_trial = std::min(dt0, s.dt_used * 2.0);

    if (sch.reunit_every > 0 && st.step_count % sch.reunit_every == 0) {
      st.U.reunitarize();
      st.last_energy = evaluate_energy(st.U, st.u, st.params);
    }

    if (st.step_count % sch.record_every == 0)
      record(s.dt_used, s.grad_norm);
    if (sch.snapshot_every > 0 && st.step_count % sch.snapshot_every == 0)
      if (on_snapshot) on_snapshot(st, false);

    if (sch.blowup_ceiling > 0.0 &&
        st.last_energy.sup_F + st.last_energy.sup_u2 > sch.blowup_ceiling) {
      res.reason = StopReason::BlowUp;
      if (on_snapshot) on_snapshot(st, true);
      return res;
    }
  }
  if (on_snapshot) on_snapshot(st, false);
  return res;
}

}  // namespace ymhk
