#include "poissonkit/flows.hpp"

#include "poissonkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace poissonkit {

namespace {

std::size_t step_count(const FlowConfig& cfg) {
  if (cfg.t_end == 0.0) return 0;
  // The relative slack keeps t_end = n * step from rounding up to n + 1.
  const double ratio = std::abs(cfg.t_end) / cfg.step;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(ratio * (1.0 - 1e-12))));
}

bool finite(const Eigen::VectorXd& z) { return z.allFinite(); }

}  // namespace

void FlowConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ArgumentError("flow step must be positive");
  if (record_every == 0) throw ArgumentError("record_every must be positive");
  if (!std::isfinite(t_end)) throw ArgumentError("t_end must be finite");
  if (t_end > 0.0 && step * static_cast<double>(record_every) > t_end * (1.0 + 1e-12))
    throw ArgumentError("step * record_every exceeds t_end");
}

void Trajectory::throw_if_aborted() const {
  if (!abort_reason) return;
  if (*abort_reason == "GuardExit") throw GuardExit(abort_time);
  throw NonFinite(abort_time);
}

Trajectory integrate(const PoissonStructure& w, const Expression& hamiltonian, const Eigen::VectorXd& z0,
                     const FlowConfig& cfg, const std::vector<NamedExpression>& monitors,
                     const std::optional<Predicate>& extra_guard) {
  cfg.validate();
  const auto dim = static_cast<Eigen::Index>(w.dimension());
  if (hamiltonian.arity() != w.dimension()) throw ArgumentError("Hamiltonian arity does not match chart dimension");
  if (z0.size() != dim) throw ArgumentError("initial point has the wrong length");
  for (const auto& m : monitors)
    if (m.expr.arity() != w.dimension()) throw ArgumentError("monitor '" + m.name + "' has the wrong arity");

  auto admissible = [&](const Eigen::VectorXd& z) {
    return satisfies(w.chart().guard(), z) && satisfies(extra_guard, z);
  };
  if (!finite(z0) || !admissible(z0)) throw ArgumentError("initial point violates the domain guard");

  Trajectory traj;
  for (const auto& m : monitors) traj.monitor_names.push_back(m.name);
  traj.monitors.resize(monitors.size());

  auto record = [&](double t, const Eigen::VectorXd& z) {
    traj.times.push_back(t);
    traj.states.push_back(z);
    for (std::size_t i = 0; i < monitors.size(); ++i) traj.monitors[i].push_back(eval(monitors[i].expr, z));
  };

  const std::size_t n = step_count(cfg);
  const double h = n == 0 ? 0.0 : cfg.t_end / static_cast<double>(n);
  // A domain error inside a stage (e.g. a singular potential) counts as
  // the state becoming non-finite.
  auto field = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    try {
      return hamiltonian_field(w, hamiltonian, z);
    } catch (const DomainError&) {
      return Eigen::VectorXd::Constant(dim, NAN);
    }
  };

  Eigen::VectorXd z = z0;
  record(0.0, z);
  std::size_t last_recorded = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const Eigen::VectorXd k1 = field(z);
    const Eigen::VectorXd k2 = field(z + 0.5 * h * k1);
    const Eigen::VectorXd k3 = field(z + 0.5 * h * k2);
    const Eigen::VectorXd k4 = field(z + h * k3);
    const Eigen::VectorXd next = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = h * static_cast<double>(i);
    if (!finite(next)) {
      traj.abort_reason = "NonFinite";
    } else if (!admissible(next)) {
      traj.abort_reason = "GuardExit";
    }
    if (traj.abort_reason) {
      traj.abort_time = t;
      if (last_recorded != i - 1) record(h * static_cast<double>(i - 1), z);
      return traj;
    }
    z = next;
    if (i % cfg.record_every == 0 || i == n) {
      record(t, z);
      last_recorded = i;
    }
  }
  return traj;
}

std::map<std::string, double> conservation_report(const Trajectory& traj, const std::vector<std::string>& names) {
  std::map<std::string, double> out;
  for (const auto& name : names) {
    const auto it = std::find(traj.monitor_names.begin(), traj.monitor_names.end(), name);
    if (it == traj.monitor_names.end()) throw UnknownMonitor(name);
    const auto& series = traj.monitors[static_cast<std::size_t>(it - traj.monitor_names.begin())];
    double drift = 0.0;
    for (double v : series) drift = std::max(drift, std::abs(v - series.front()));
    out[name] = drift;
  }
  return out;
}

double commutation_defect(const PoissonStructure& w, const Expression& f, const Expression& g,
                          const Eigen::VectorXd& z0, double s, double t, const FlowConfig& cfg) {
  auto leg = [&](const Expression& h, const Eigen::VectorXd& z, double duration) {
    FlowConfig c = cfg;
    c.t_end = duration;
    c.record_every = 1;
    const Trajectory traj = integrate(w, h, z, c);
    traj.throw_if_aborted();
    return traj.final_state();
  };
  const Eigen::VectorXd a = leg(f, leg(g, z0, t), s);
  const Eigen::VectorXd b = leg(g, leg(f, z0, s), t);
  return (a - b).norm();
}

double FiberProbeResult::max_drift() const {
  double out = 0.0;
  for (const auto& [key, d] : drifts) out = std::max(out, d);
  return out;
}

FiberProbeResult invariant_fiber_probe(const GeneratingSet& g, const std::vector<NamedExpression>& flows,
                                       const Eigen::VectorXd& z0, const FlowConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& f : g.functions) names.push_back(f.name);
  FiberProbeResult out;
  for (const auto& s : flows) {
    const Trajectory traj = integrate(g.ambient, s.expr, z0, cfg, g.functions, g.guard);
    traj.throw_if_aborted();
    for (const auto& [name, drift] : conservation_report(traj, names)) out.drifts[{s.name, name}] = drift;
  }
  return out;
}

void write_csv(std::ostream& out, const Trajectory& traj, const std::vector<std::string>& coordinates) {
  out << 't';
  for (const auto& c : coordinates) out << ',' << c;
  for (const auto& m : traj.monitor_names) out << ',' << m;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    put(traj.times[r]);
    for (Eigen::Index i = 0; i < traj.states[r].size(); ++i) {
      out << ',';
      put(traj.states[r](i));
    }
    for (const auto& series : traj.monitors) {
      out << ',';
      put(series[r]);
    }
    out << '\n';
  }
  if (traj.aborted()) {
    out << "# aborted: " << *traj.abort_reason << " at t=";
    put(traj.abort_time);
    out << '\n';
  }
}

}  // namespace poissonkit
