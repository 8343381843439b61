#include "poscon/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "poscon/report_io.hpp"
#include "poscon/scenario_io.hpp"

namespace poscon::cli {

namespace fs = std::filesystem;

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const AssumptionError& e) {
    err << "assumption failure: " << e.what() << '\n';
    return kExitValidation;
  } catch (const GraphAssumptionError& e) {
    err << "assumption failure: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitOther;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

bool all_finite(const SimulationTrace& t) {
  auto finite = [](const Vector& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  for (const auto& step : t.steps) {
    if (!finite(step.x0)) return false;
    for (const auto& a : step.agents) {
      if (!finite(a.x) || !finite(a.w) || !finite(a.eta) || !finite(a.u)) return false;
    }
  }
  return true;
}

int run_resolved(const Scenario& s, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const AssumptionReport report = check_scenario(s);
  const SimulationTrace trace = run_scenario(s);

  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "trace.csv");
    if (!csv) throw std::runtime_error("cannot write " + (dir / "trace.csv").string());
    write_trace_csv(s, trace, csv);
  }
  write_text(dir / "summary.json", summary_json(s, report, trace));
  write_plot_data(s, trace, dir);

  const auto pos = positivity_report(trace);
  const auto conv = convergence_report(trace, trace.summary.threshold);
  out << to_string(trace.mode) << ": " << (trace.steps.size() - 1) << " steps, min entry " << pos.min_entry
      << ", violations " << pos.violations.size();
  if (conv.first_step) {
    out << ", converged at k=" << *conv.first_step;
  } else {
    out << ", not converged";
  }
  out << ", tail error " << conv.tail_error << '\n';
  for (const auto& note : s.notes) out << "  note: " << note << '\n';

  if (!all_finite(trace)) {
    err << "invariant violation: non-finite value in trace\n";
    return kExitInvariant;
  }
  if (trace.outside_hypotheses) {
    if (!pos.ok()) out << "  negative entries observed outside the convergence hypotheses\n";
    return kExitOk;
  }
  if (!pos.ok() || !pos.eta_bound_violations.empty()) {
    const auto& v = pos.ok() ? pos.eta_bound_violations.front() : pos.violations.front();
    err << "invariant violation: agent " << v.agent << ' ' << v.quantity << '[' << (v.component + 1)
        << "] = " << v.value << " at k=" << v.step << '\n';
    return kExitInvariant;
  }
  return kExitOk;
}

}  // namespace

int cmd_check(const fs::path& file, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const ScenarioConfig config = load_scenario_config(file);
    ResolveOptions opts;
    opts.validate = false;
    const Scenario s = resolve_scenario(config, opts);
    const AssumptionReport report = check_scenario(s, true);
    out << format_check_report(report);
    for (const auto& note : s.notes) out << "note: " << note << '\n';
    return report.ok() ? kExitOk : kExitValidation;
  });
}

int cmd_run(const fs::path& file, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    ResolveOptions ropts;
    ropts.mode = opts.mode;
    ropts.horizon = opts.horizon;
    ropts.seed = opts.seed;
    ropts.override_assumptions = opts.override_assumptions;
    const Scenario s = resolve_scenario(load_scenario_config(file), ropts);
    return run_resolved(s, opts.out_dir, out, err);
  });
}

int cmd_synthesize(const fs::path& file, const fs::path& out_file, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const ScenarioConfig config = load_scenario_config(file);
    ResolveOptions opts;
    opts.fill_observer_gains = true;
    const Scenario s = resolve_scenario(config, opts);
    const ScenarioConfig filled = with_resolved_gains(config, s);
    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    write_text(out_file, emit_scenario_config(filled));

    for (std::size_t i = 0; i < s.gains.agents.size(); ++i) {
      const auto& g = s.gains.agents[i];
      out << "agent " << (i + 1) << ": K1 " << to_string(g.k1_origin) << ", K2 " << to_string(g.k2_origin);
      if (g.K3) out << ", K3 " << to_string(g.k3_origin);
      out << '\n';
    }
    // Verify what was written, as it will be read back.
    ResolveOptions check_opts;
    check_opts.validate = false;
    const Scenario again = resolve_scenario(load_scenario_config(out_file), check_opts);
    const AssumptionReport report = check_scenario(again, true);
    out << format_check_report(report);
    return report.ok() ? kExitOk : kExitValidation;
  });
}

int cmd_paper_example(const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    fs::create_directories(out_dir);
    const std::string_view text = bundled_example_scenario();
    write_text(out_dir / "scenario.json", std::string(text));
    const ScenarioConfig config = parse_scenario_config(text);

    ResolveOptions check_opts;
    check_opts.validate = false;
    const AssumptionReport report = check_scenario(resolve_scenario(config, check_opts), true);
    write_text(out_dir / "check.txt", format_check_report(report));
    write_text(out_dir / "check.json", check_report_json(report));
    if (!report.ok()) {
      out << format_check_report(report);
      return kExitValidation;
    }

    int worst = kExitOk;
    for (Mode mode : {Mode::StateFeedback, Mode::OutputFeedback, Mode::ObserverOnly}) {
      ResolveOptions opts;
      opts.mode = mode;
      const Scenario s = resolve_scenario(config, opts);
      const int code = run_resolved(s, out_dir / to_string(mode), out, err);
      if (code != kExitOk && worst == kExitOk) worst = code;
    }
    return worst;
  });
}

}  // namespace poscon::cli
