#pragma once

// Fixed-step RK4 integration of Hamiltonian vector fields with monitors.

#include "poissonkit/integrability.hpp"
#include "poissonkit/poisson.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace poissonkit {

struct FlowConfig {
  double step = 1e-3;
  double t_end = 0.0;  // negative integrates backwards
  std::size_t record_every = 1;

  /// Throws ArgumentError on a non-positive step or record interval, or when
  /// step * record_every exceeds a positive t_end.
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<std::string> monitor_names;
  std::vector<std::vector<double>> monitors;  // monitors[i][sample]

  /// Set when the run stopped early: "GuardExit" or "NonFinite".
  std::optional<std::string> abort_reason;
  double abort_time = 0.0;

  bool aborted() const { return abort_reason.has_value(); }
  const Eigen::VectorXd& final_state() const { return states.back(); }
  /// Throws GuardExit or NonFinite for an aborted run.
  void throw_if_aborted() const;
};

/// RK4 trajectory of dz/dt = hamiltonian_field(w, H, z). A state leaving the
/// chart guard (or `extra_guard`), or turning non-finite, stops the run; the
/// returned trajectory then ends at the last admissible state.
Trajectory integrate(const PoissonStructure& w, const Expression& hamiltonian, const Eigen::VectorXd& z0,
                     const FlowConfig& cfg, const std::vector<NamedExpression>& monitors = {},
                     const std::optional<Predicate>& extra_guard = std::nullopt);

/// max |m(t) - m(0)| per requested monitor; throws UnknownMonitor.
std::map<std::string, double> conservation_report(const Trajectory& traj, const std::vector<std::string>& names);

/// |Phi_f^s(Phi_g^t(z0)) - Phi_g^t(Phi_f^s(z0))|, with each leg integrated
/// at cfg.step. Throws GuardExit/NonFinite if any leg aborts.
double commutation_defect(const PoissonStructure& w, const Expression& f, const Expression& g,
                          const Eigen::VectorXd& z0, double s, double t, const FlowConfig& cfg);

struct FiberProbeResult {
  /// (flow name, monitored generator name) -> max drift.
  std::map<std::pair<std::string, std::string>, double> drifts;
  double max_drift() const;
  bool pass(double tol) const { return max_drift() < tol; }
};

/// Follows the flow of every S in `flows` and records the drift of each
/// generator of `g` along it. Uses the chart guard and `g.guard`.
FiberProbeResult invariant_fiber_probe(const GeneratingSet& g, const std::vector<NamedExpression>& flows,
                                       const Eigen::VectorXd& z0, const FlowConfig& cfg);

/// Header `t,<coordinates>,<monitors>`, 17 significant digits, and a trailing
/// `# aborted: <reason> at t=<t>` line for aborted runs.
void write_csv(std::ostream& out, const Trajectory& traj, const std::vector<std::string>& coordinates);

}  // namespace poissonkit
