#pragma once

#include <string>
#include <vector>

#include "modnls/nls_torus.hpp"
#include "modnls/young.hpp"

namespace modnls {

enum class SchemeKind { Euler, Picard };

struct SolveConfig {
  XOperatorSpec equation;
  double alpha = 0.0;
  double T = 1.0;
  SchemeKind scheme = SchemeKind::Euler;
  std::size_t euler_steps = 1024;
  SewingParams picard_params{};
  int picard_max_iter = 60;
  std::size_t picard_grid = 256;
  /// Keep every record_every-th grid node (the final node is always kept).
  std::size_t record_every = 1;
  /// The nonlinearity is i * sign * |phi|^2 phi.
  double sign = 1.0;
};

/// psi is the moving-frame variable; phi_t = U_t psi_t.
struct ControlledTrajectory {
  std::vector<double> grid;
  std::vector<FourierState> psi_nodes;
  std::vector<FourierState> phi_nodes;
  std::vector<double> l2_history;
  std::vector<double> halpha_history;
  double alpha = 0.0;
  /// Set for dNLS runs: only the first contraction window is trusted.
  bool local_only = false;
  std::size_t picard_windows = 0;
};

/// X_{s,t}(psi) = i * sign * X_{s,t}(psi, psi, psi). Its increments satisfy
/// <psi, X_{s,t}(psi)> in iR for the cubic kernel.
OperatorPath make_diagonal_operator(const XOperatorSpec& spec, double sign = 1.0);

ControlledTrajectory solve_controlled(const SolveConfig& config, const FourierState& phi0);

struct ConservationReport {
  double max_l2_drift = 0.0;
  /// log(drift ratio) / log(step ratio) against a refined run; NaN without one.
  double drift_vs_dt_slope = 0.0;
};

ConservationReport conservation_report(const ControlledTrajectory& traj,
                                       const ControlledTrajectory* refined = nullptr);

struct GalerkinRow {
  int L = 0;
  double distance = 0.0;
};

/// Solves at each cutoff L with data Pi_L phi0 and reports the sup-in-time
/// H^alpha distance to the solve at reference_N. phi0 must have cutoff
/// reference_N.
std::vector<GalerkinRow> galerkin_convergence(const SolveConfig& config, const FourierState& phi0,
                                              const std::vector<int>& L_list, int reference_N);

struct ContinuityRow {
  std::string label;
  double path_gap = 0.0;
  double trajectory_gap = 0.0;
  double ratio = 0.0;
};

/// Runs config against each path of w_sequence and compares with the run on
/// config.equation.modulation.
std::vector<ContinuityRow> modulation_continuity(const SolveConfig& config, const FourierState& phi0,
                                                 const std::vector<ModulationPath>& w_sequence);

}  // namespace modnls
