#include "modnls/nls_solver.hpp"

#include <cmath>
#include <limits>

#include "modnls/error.hpp"

namespace modnls {

OperatorPath make_diagonal_operator(const XOperatorSpec& spec, double sign) {
  OperatorPath X;
  const std::complex<double> factor(0.0, sign);
  X.eval = [spec, factor](double s, double t, const Vector& x) {
    const FourierState psi(spec.cutoff_N, x, spec.box_length);
    FourierState out = operator_apply(spec, s, t, psi, psi, psi);
    for (auto& c : out.coeffs()) c *= factor;
    return out.coeffs();
  };
  // |Φ_{s,t}| <= t - s, so at a fixed cutoff the increments are Lipschitz in time.
  X.gamma = 1.0;
  X.growth_M = 2;
  X.integral_derived = true;
  return X;
}

namespace {

ControlledTrajectory to_trajectory(const SolveConfig& config, const HolderPath& path) {
  const auto& spec = config.equation;
  ControlledTrajectory traj;
  traj.alpha = config.alpha;
  const std::size_t every = std::max<std::size_t>(1, config.record_every);
  const std::size_t last = path.size() - 1;
  for (std::size_t i = 0; i <= last; ++i) {
    if (i % every != 0 && i != last) continue;
    const double t = path.grid()[i];
    FourierState psi(spec.cutoff_N, path.nodes()[i], spec.box_length);
    FourierState phi = apply_U(psi, (*spec.modulation)(spec.modulation->checked_time(t)));
    traj.grid.push_back(t);
    traj.l2_history.push_back(psi.norm(0.0));
    traj.halpha_history.push_back(psi.norm(config.alpha));
    traj.psi_nodes.push_back(std::move(psi));
    traj.phi_nodes.push_back(std::move(phi));
  }
  return traj;
}

double sup_distance(const ControlledTrajectory& a, const ControlledTrajectory& b, double alpha) {
  if (a.grid.size() != b.grid.size()) throw InvalidArgument("trajectory comparison: grid mismatch");
  double best = 0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    const int n = std::max(a.psi_nodes[i].cutoff(), b.psi_nodes[i].cutoff());
    best = std::max(best, distance(a.psi_nodes[i].embed(n), b.psi_nodes[i].embed(n), alpha));
  }
  return best;
}

}  // namespace

ControlledTrajectory solve_controlled(const SolveConfig& config, const FourierState& phi0) {
  const auto& spec = config.equation;
  if (!spec.modulation) throw InvalidArgument("solve: no modulation path");
  if (phi0.cutoff() != spec.cutoff_N) throw InvalidArgument("solve: initial state cutoff does not match spec");
  if (!(config.T > 0)) throw InvalidArgument("solve: T must be positive");
  if (config.alpha < 0) throw InvalidArgument("solve: alpha must be >= 0");
  spec.modulation->checked_time(0.0);
  spec.modulation->checked_time(config.T);

  const OperatorPath X = make_diagonal_operator(spec, config.sign);
  const bool dnls = spec.kind == EquationKind::DerivativeNLS;
  if (config.scheme == SchemeKind::Euler) {
    if (config.euler_steps < 1) throw InvalidArgument("solve: euler steps must be >= 1");
    ControlledTrajectory traj = to_trajectory(config, euler_solve(X, phi0.coeffs(), config.T, config.euler_steps));
    traj.local_only = dnls;
    return traj;
  }
  PicardSolution sol = picard_solve(X, phi0.coeffs(), config.T, config.picard_params, config.picard_max_iter,
                                    config.picard_grid, dnls);
  ControlledTrajectory traj = to_trajectory(config, sol.path);
  traj.local_only = dnls;
  traj.picard_windows = sol.windows.size();
  return traj;
}

ConservationReport conservation_report(const ControlledTrajectory& traj, const ControlledTrajectory* refined) {
  const auto drift = [](const ControlledTrajectory& tr) {
    double best = 0;
    if (tr.l2_history.empty()) return best;
    for (double v : tr.l2_history) best = std::max(best, std::abs(v - tr.l2_history.front()));
    return best;
  };
  ConservationReport report;
  report.max_l2_drift = drift(traj);
  report.drift_vs_dt_slope = std::numeric_limits<double>::quiet_NaN();
  if (refined != nullptr && traj.grid.size() > 1 && refined->grid.size() > 1) {
    const double dt = traj.grid[1] - traj.grid[0];
    const double dt_fine = refined->grid[1] - refined->grid[0];
    const double d = report.max_l2_drift, d_fine = drift(*refined);
    if (d > 0 && d_fine > 0 && dt != dt_fine) report.drift_vs_dt_slope = std::log(d / d_fine) / std::log(dt / dt_fine);
  }
  return report;
}

std::vector<GalerkinRow> galerkin_convergence(const SolveConfig& config, const FourierState& phi0,
                                              const std::vector<int>& L_list, int reference_N) {
  if (phi0.cutoff() != reference_N) throw InvalidArgument("galerkin: initial state must have the reference cutoff");
  if (!(config.alpha > 0)) throw InvalidArgument("galerkin: alpha must be positive");
  for (int L : L_list) {
    if (L < 1 || L > reference_N) throw InvalidArgument("galerkin: each L must lie in [1, reference cutoff]");
  }
  const auto solve_at = [&](int L) {
    SolveConfig c = config;
    c.equation.cutoff_N = L;
    return solve_controlled(c, galerkin_project(phi0, L).embed(L));
  };
  const ControlledTrajectory reference = solve_at(reference_N);
  std::vector<GalerkinRow> rows;
  for (int L : L_list) {
    if (L == reference_N) {
      rows.push_back({L, 0.0});
      continue;
    }
    rows.push_back({L, sup_distance(solve_at(L), reference, config.alpha)});
  }
  return rows;
}

std::vector<ContinuityRow> modulation_continuity(const SolveConfig& config, const FourierState& phi0,
                                                 const std::vector<ModulationPath>& w_sequence) {
  const auto& base = *config.equation.modulation;
  const ControlledTrajectory reference = solve_controlled(config, phi0);
  std::vector<ContinuityRow> rows;
  for (const auto& w : w_sequence) {
    SolveConfig c = config;
    c.equation.modulation = std::make_shared<const ModulationPath>(w);
    c.equation.phi_cache = std::make_shared<PhiCache>();
    const double gap = sup_gap(base, w);
    const double traj_gap = sup_distance(solve_controlled(c, phi0), reference, config.alpha);
    rows.push_back({w.label(), gap, traj_gap, gap > 0 ? traj_gap / gap : std::numeric_limits<double>::quiet_NaN()});
  }
  return rows;
}

}  // namespace modnls
