#include "poscon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "poscon/protocol.hpp"

namespace poscon {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::StateFeedback:
      return "state";
    case Mode::OutputFeedback:
      return "output";
    case Mode::ObserverOnly:
      return "observer";
  }
  return "unknown";
}

std::optional<Mode> mode_from_string(std::string_view name) {
  if (name == "state") return Mode::StateFeedback;
  if (name == "output") return Mode::OutputFeedback;
  if (name == "observer") return Mode::ObserverOnly;
  return std::nullopt;
}

bool AssumptionReport::ok() const { return first_failure() == nullptr; }

const CheckItem* AssumptionReport::first_failure() const {
  for (const auto& item : items)
    if (!item.ok && !item.warning_only) return &item;
  return nullptr;
}

AssumptionError::AssumptionError(std::string check, const std::string& detail)
    : std::runtime_error(check + ": " + detail), check_(std::move(check)) {}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

bool all_zero(const std::vector<Vector>& vs) {
  return std::all_of(vs.begin(), vs.end(),
                     [](const Vector& v) { return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }); });
}

void check_initial_shapes(const Scenario& s) {
  const std::size_t n0 = s.leader.n();
  if (s.initial.x0.size() != n0) throw DimensionError("initial x0 has wrong length");
  if (s.mode != Mode::ObserverOnly || !s.initial.x.empty()) {
    if (s.initial.x.size() != s.agents.size()) throw DimensionError("initial x must list every agent");
    for (std::size_t i = 0; i < s.agents.size(); ++i)
      if (s.initial.x[i].size() != s.agents[i].n()) {
        throw DimensionError("initial x for agent " + std::to_string(i + 1) + " has wrong length");
      }
  }
  if (s.initial.w) {
    if (s.initial.w->size() != s.agents.size()) throw DimensionError("initial w must list every agent");
    for (const auto& w : *s.initial.w)
      if (w.size() != n0) throw DimensionError("initial w entries must have the leader's dimension");
  }
  if (s.initial.eta) {
    if (s.initial.eta->size() != s.agents.size()) throw DimensionError("initial eta must list every agent");
    for (std::size_t i = 0; i < s.agents.size(); ++i)
      if ((*s.initial.eta)[i].size() != s.agents[i].n()) {
        throw DimensionError("initial eta for agent " + std::to_string(i + 1) + " has wrong length");
      }
  }
}

}  // namespace

AssumptionReport check_scenario(const Scenario& s, bool all_checks) {
  AssumptionReport report;
  auto add = [&report](std::string name, bool ok, std::string detail, bool warning_only = false) {
    report.items.push_back({std::move(name), ok, warning_only, std::move(detail)});
  };

  const bool feedback = all_checks || s.mode != Mode::ObserverOnly;
  const bool output = s.mode == Mode::OutputFeedback;

  if (s.agents.size() != s.schedule.n_followers()) {
    add("agent count", false,
        std::to_string(s.agents.size()) + " agents but graphs have " + std::to_string(s.schedule.n_followers()) +
            " followers");
  }

  const auto leader = check_leader(s.leader);
  add("leader", leader.ok,
      leader.ok ? "A0 >= 0, C0 >= 0, spectral radius " + fmt(leader.spectral_radius) : leader.reason);

  if (feedback) {
    for (const auto& agent : s.agents) {
      const bool pos = check_positive_system(agent.A, agent.B, agent.C);
      std::string detail = "A, B, C nonnegative";
      if (!pos) {
        std::ostringstream os;
        os << "not a positive system: min entries A " << agent.A.min_entry() << ", B " << agent.B.min_entry()
           << ", C " << agent.C.min_entry();
        detail = os.str();
      }
      add("agent " + std::to_string(agent.id) + " positivity", pos, detail);
    }
  }

  bool graphs_ok = true;
  for (std::size_t p = 0; p < s.schedule.family().size(); ++p) {
    const auto diag = check_assumption_graph(s.schedule.family()[p]);
    graphs_ok = graphs_ok && diag.ok;
    add("graph " + std::to_string(p + 1), diag.ok,
        diag.ok ? "leader-rooted spanning tree; follower subgraph undirected and connected" : diag.reason);
  }

  if (graphs_ok) {
    report.constants = graph_constants(s.schedule);
    const auto& c = *report.constants;
    const bool mu_ok = validate_mu(s.gains.mu, c);
    std::ostringstream os;
    os << "mu=" << fmt(s.gains.mu) << (mu_ok ? " within " : " violates ") << "0 < mu < min(1/Delta, 2/lambda_max) = "
       << fmt(c.mu_max) << " (Delta=" << fmt(c.delta) << ", lambda_max=" << fmt(c.lambda_max)
       << ", lambda_min=" << fmt(c.lambda_min) << ")";
    add("observer gain mu", mu_ok, os.str());
  } else {
    add("observer gain mu", false, "graph constants undefined: a graph fails the connectivity requirement");
  }

  report.regulators.resize(s.agents.size());
  if (feedback) {
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
      const auto& agent = s.agents[i];
      const std::string tag = "agent " + std::to_string(agent.id);
      if (agent.l() != s.leader.l()) {
        add(tag + " regulator equations", false, "output dimension differs from the leader's");
        continue;
      }
      const auto sol = solve_regulator(agent, s.leader);
      report.regulators[i] = sol;
      std::ostringstream os;
      os << "residual " << sol.residual << ", min(X,U) " << std::min(sol.X.min_entry(), sol.U.min_entry());
      if (!sol.solvable) os << " (no solution)";
      else if (!sol.nonneg_ok) os << " (no nonnegative solution found)";
      add(tag + " regulator equations", sol.accepted(), os.str());

      if (i >= s.gains.agents.size()) {
        add(tag + " gains", false, "no gains for this agent");
        continue;
      }
      const auto& g = s.gains.agents[i];
      const auto k1 = verify_state_gain(agent.A, agent.B, g.K1);
      const bool k1_sign = *std::max_element(g.K1.data().begin(), g.K1.data().end()) <= kDefaultTol;
      std::ostringstream k1os;
      k1os << "A+BK1 min entry " << k1.min_entry << ", spectral radius " << k1.spectral_radius;
      if (!k1_sign) k1os << "; K1 has positive entries";
      if (!k1.ok) k1os << " (" << k1.reason << ")";
      add(tag + " state gain K1 [" + to_string(g.k1_origin) + "]", k1.ok && k1_sign, k1os.str());

      const bool k2_nonneg = g.K2.min_entry() >= -kDefaultTol;
      add(tag + " feedforward gain K2 [" + to_string(g.k2_origin) + "]", k2_nonneg,
          k2_nonneg ? "K2 >= 0" : "K2 has negative entry " + fmt(g.K2.min_entry()), /*warning_only=*/true);

      if (g.K3) {
        const auto k3 = verify_observer_gain(agent.A, agent.C, *g.K3);
        const bool k3_sign = g.K3->min_entry() >= -kDefaultTol;
        std::ostringstream k3os;
        k3os << "A-K3C min entry " << k3.min_entry << ", spectral radius " << k3.spectral_radius;
        if (!k3_sign) k3os << "; K3 has negative entries";
        if (!k3.ok) k3os << " (" << k3.reason << ")";
        add(tag + " output injection gain K3 [" + to_string(g.k3_origin) + "]", k3.ok && k3_sign, k3os.str());
      } else if (output) {
        add(tag + " output injection gain K3", false, "output-feedback mode requires K3");
      }
    }
  }

  bool init_ok = s.initial.x0.size() == s.leader.n() && min_entry(s.initial.x0) >= 0.0;
  for (const auto& x : s.initial.x) init_ok = init_ok && min_entry(x) >= 0.0;
  add("initial conditions", init_ok, init_ok ? "x0(0) >= 0 and x_i(0) >= 0" : "initial states must be nonnegative");

  const bool observers_zero = (!s.initial.w || all_zero(*s.initial.w)) && (!s.initial.eta || all_zero(*s.initial.eta));
  add("observer initialization", observers_zero,
      observers_zero ? "w_i(0) = 0, eta_i(0) = 0" : "nonzero w_i(0) or eta_i(0) is outside the theorem hypotheses");
  return report;
}

SimulationTrace run_scenario(const Scenario& s) {
  check_initial_shapes(s);
  SimulationTrace trace;
  trace.mode = s.mode;

  const AssumptionReport report = check_scenario(s);
  if (const CheckItem* bad = report.first_failure()) {
    if (!s.override_assumptions) throw AssumptionError(bad->name, bad->detail);
    trace.outside_hypotheses = true;
  }

  const std::size_t n = s.agents.size();
  const std::size_t n0 = s.leader.n();
  const bool plants = s.mode != Mode::ObserverOnly;
  const bool output = s.mode == Mode::OutputFeedback;
  if (plants && s.gains.agents.size() != n) throw DimensionError("gain set does not cover every agent");
  if (output) {
    for (const auto& g : s.gains.agents)
      if (!g.K3) throw DimensionError("output-feedback mode requires K3 for every agent");
  }

  Vector x0 = s.initial.x0;
  std::vector<Vector> x = plants ? s.initial.x : std::vector<Vector>{};
  Vector w(n * n0, 0.0);
  if (s.initial.w) {
    for (std::size_t i = 0; i < n; ++i) std::copy((*s.initial.w)[i].begin(), (*s.initial.w)[i].end(), w.begin() + static_cast<std::ptrdiff_t>(i * n0));
  }
  std::vector<Vector> eta;
  if (output) {
    eta = s.initial.eta ? *s.initial.eta : std::vector<Vector>{};
    if (eta.empty())
      for (const auto& a : s.agents) eta.emplace_back(a.n(), 0.0);
  }

  trace.steps.reserve(s.horizon + 1);
  for (std::size_t k = 0;; ++k) {
    StepRecord rec;
    rec.k = k;
    rec.sigma = s.schedule.index_at(k);
    rec.x0 = x0;
    rec.y0 = s.leader.C0 * x0;
    rec.agents.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& a = rec.agents[i];
      a.w.assign(w.begin() + static_cast<std::ptrdiff_t>(i * n0), w.begin() + static_cast<std::ptrdiff_t>((i + 1) * n0));
      if (plants) {
        a.x = x[i];
        a.y = s.agents[i].C * x[i];
        a.e = sub(a.y, rec.y0);
      }
      if (output) a.eta = eta[i];
    }

    if (k == s.horizon) {
      trace.steps.push_back(std::move(rec));
      break;
    }

    // Inputs from the time-k snapshot.
    std::vector<Vector> eta_next;
    if (plants) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& g = s.gains.agents[i];
        auto& a = rec.agents[i];
        if (output) {
          auto step = output_feedback_step(g.K1, g.K2, *g.K3, s.agents[i], eta[i], a.w, a.y);
          a.u = std::move(step.u);
          eta_next.push_back(std::move(step.eta_next));
        } else {
          a.u = state_feedback_control(g.K1, g.K2, a.x, a.w);
        }
      }
    }

    const Digraph& graph = s.schedule.family()[rec.sigma - 1];
    Vector w_next = observer_round(graph, w, x0, s.gains.mu, s.leader.A0);
    if (plants) {
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = add(s.agents[i].A * x[i], s.agents[i].B * rec.agents[i].u);
      }
    }
    x0 = s.leader.A0 * x0;
    w = std::move(w_next);
    if (output) eta = std::move(eta_next);
    trace.steps.push_back(std::move(rec));
  }

  const auto pos = positivity_report(trace);
  const auto conv = convergence_report(trace, trace.summary.threshold);
  trace.summary.min_entry = pos.min_entry;
  trace.summary.positivity_violations = pos.violations.size();
  trace.summary.first_converged_step = conv.first_step;
  trace.summary.tail_error = conv.tail_error;
  return trace;
}

PositivityReport positivity_report(const SimulationTrace& t) {
  PositivityReport out;
  out.min_entry = std::numeric_limits<double>::infinity();
  bool any = false;
  auto scan = [&](const Vector& v, std::size_t step, std::size_t agent, char q) {
    for (std::size_t c = 0; c < v.size(); ++c) {
      any = true;
      out.min_entry = std::min(out.min_entry, v[c]);
      if (v[c] < -kPositivityTol) out.violations.push_back({step, agent, q, c, v[c]});
    }
  };
  for (const auto& step : t.steps) {
    for (std::size_t i = 0; i < step.agents.size(); ++i) {
      const auto& a = step.agents[i];
      scan(a.x, step.k, i + 1, 'x');
      scan(a.w, step.k, i + 1, 'w');
      if (!a.eta.empty() && a.eta.size() == a.x.size()) {
        for (std::size_t c = 0; c < a.eta.size(); ++c) {
          const double gap = a.x[c] - a.eta[c];
          if (gap < -kPositivityTol) out.eta_bound_violations.push_back({step.k, i + 1, 'e', c, gap});
        }
      }
    }
  }
  if (!any) out.min_entry = 0.0;
  return out;
}

Vector tracking_error_series(const SimulationTrace& t) {
  Vector series;
  series.reserve(t.steps.size());
  for (const auto& step : t.steps) {
    double worst = 0.0;
    for (const auto& a : step.agents) {
      if (t.mode == Mode::ObserverOnly) {
        worst = std::max(worst, norm_inf(sub(step.x0, a.w)));
      } else {
        worst = std::max(worst, norm_inf(a.e));
      }
    }
    series.push_back(worst);
  }
  return series;
}

ConvergenceReport convergence_report(const SimulationTrace& t, double threshold) {
  ConvergenceReport out;
  const Vector err = tracking_error_series(t);
  if (err.empty()) return out;

  std::size_t first = err.size();
  for (std::size_t k = err.size(); k-- > 0;) {
    if (err[k] < threshold) {
      first = k;
    } else {
      break;
    }
  }
  if (first < err.size()) {
    out.converged = true;
    out.first_step = first;
  }
  const std::size_t tail = std::max<std::size_t>(1, err.size() / 10);
  out.tail_error = *std::max_element(err.end() - static_cast<std::ptrdiff_t>(tail), err.end());
  return out;
}

}  // namespace poscon
