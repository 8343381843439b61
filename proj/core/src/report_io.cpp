#include "poscon/report_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace poscon {

using nlohmann::json;

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void cells(std::ostream& out, const Vector& v, std::size_t width) {
  for (std::size_t c = 0; c < width; ++c) {
    out << ',';
    if (c < v.size()) out << num(v[c]);
  }
}

void header_cells(std::ostream& out, const char* prefix, std::size_t width) {
  for (std::size_t c = 1; c <= width; ++c) out << ',' << prefix << c;
}

json matrix_json(const Matrix& m) { return m.to_rows(); }

json checks_json(const AssumptionReport& report) {
  json items = json::array();
  for (const auto& item : report.items) {
    items.push_back(
        {{"name", item.name}, {"ok", item.ok}, {"warning_only", item.warning_only}, {"detail", item.detail}});
  }
  return items;
}

json constants_json(const AssumptionReport& report) {
  if (!report.constants) return nullptr;
  const auto& c = *report.constants;
  return {{"delta", c.delta}, {"lambda_max", c.lambda_max}, {"lambda_min", c.lambda_min}, {"mu_max", c.mu_max}};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_trace_csv(const Scenario& s, const SimulationTrace& t, std::ostream& out) {
  const std::size_t n0 = s.leader.n();
  const std::size_t l = s.leader.l();
  std::size_t px = n0;
  std::size_t pu = 0;
  for (const auto& a : s.agents) {
    px = std::max(px, a.n());
    pu = std::max(pu, a.m());
  }
  const bool output = t.mode == Mode::OutputFeedback;
  const std::size_t peta = output ? px : 0;
  const std::size_t pu_cols = t.mode == Mode::ObserverOnly ? 0 : pu;

  out << "k,sigma,agent,nx";
  header_cells(out, "x_", px);
  header_cells(out, "w_", n0);
  header_cells(out, "eta_", peta);
  header_cells(out, "u_", pu_cols);
  header_cells(out, "y_", l);
  header_cells(out, "e_", l);
  out << '\n';

  const Vector none;
  for (const auto& step : t.steps) {
    out << step.k << ',' << step.sigma << ",leader," << n0;
    cells(out, step.x0, px);
    cells(out, none, n0);
    cells(out, none, peta);
    cells(out, none, pu_cols);
    cells(out, step.y0, l);
    cells(out, none, l);
    out << '\n';
    for (std::size_t i = 0; i < step.agents.size(); ++i) {
      const auto& a = step.agents[i];
      out << step.k << ',' << step.sigma << ',' << (i + 1) << ',' << a.x.size();
      cells(out, a.x, px);
      cells(out, a.w, n0);
      cells(out, a.eta, peta);
      cells(out, a.u, pu_cols);
      cells(out, a.y, l);
      cells(out, a.e, l);
      out << '\n';
    }
  }
}

std::string summary_json(const Scenario& s, const AssumptionReport& report, const SimulationTrace& t) {
  json doc;
  doc["scenario"] = s.name;
  doc["mode"] = to_string(t.mode);
  doc["horizon"] = t.steps.empty() ? 0 : t.steps.size() - 1;
  doc["mu"] = s.gains.mu;
  doc["mu_auto"] = s.gains.mu_auto;
  doc["outside_theorem_hypotheses"] = t.outside_hypotheses;
  doc["checks"] = checks_json(report);
  doc["graph_constants"] = constants_json(report);

  json regs = json::array();
  for (std::size_t i = 0; i < report.regulators.size(); ++i) {
    if (!report.regulators[i]) continue;
    const auto& r = *report.regulators[i];
    regs.push_back({{"agent", i + 1},
                    {"residual", r.residual},
                    {"solvable", r.solvable},
                    {"nonneg_ok", r.nonneg_ok},
                    {"X", matrix_json(r.X)},
                    {"U", matrix_json(r.U)}});
  }
  doc["regulator"] = std::move(regs);

  json gains = json::array();
  for (std::size_t i = 0; i < s.gains.agents.size(); ++i) {
    const auto& g = s.gains.agents[i];
    json j{{"agent", i + 1},
           {"K1", matrix_json(g.K1)},
           {"K1_origin", to_string(g.k1_origin)},
           {"K2", matrix_json(g.K2)},
           {"K2_origin", to_string(g.k2_origin)}};
    if (g.K3) {
      j["K3"] = matrix_json(*g.K3);
      j["K3_origin"] = to_string(g.k3_origin);
    }
    gains.push_back(std::move(j));
  }
  doc["gains"] = std::move(gains);

  const auto pos = positivity_report(t);
  json pos_j{{"min_entry", pos.min_entry},
             {"violations", pos.violations.size()},
             {"pass", pos.ok()},
             {"tolerance", kPositivityTol}};
  if (!pos.violations.empty()) {
    const auto& v = pos.violations.front();
    pos_j["first_violation"] = {{"step", v.step}, {"agent", v.agent}, {"quantity", std::string(1, v.quantity)},
                                {"component", v.component + 1}, {"value", v.value}};
  }
  if (t.mode == Mode::OutputFeedback) pos_j["eta_bound_violations"] = pos.eta_bound_violations.size();
  doc["positivity"] = std::move(pos_j);

  const auto conv = convergence_report(t, t.summary.threshold);
  doc["convergence"] = {{"metric", t.mode == Mode::ObserverOnly ? "observer_error_inf" : "tracking_error_inf"},
                        {"threshold", t.summary.threshold},
                        {"converged", conv.converged},
                        {"first_step", conv.first_step ? json(*conv.first_step) : json(nullptr)},
                        {"tail_error", conv.tail_error},
                        {"pass", conv.converged && conv.tail_error < t.summary.threshold}};
  doc["notes"] = s.notes;
  return doc.dump(2) + "\n";
}

void write_plot_data(const Scenario& s, const SimulationTrace& t, const std::filesystem::path& dir) {
  const std::size_t n0 = s.leader.n();
  const std::size_t n = s.agents.size();
  {
    auto out = open_out(dir / "observer.csv");
    out << "k,sigma";
    for (std::size_t c = 1; c <= n0; ++c) out << ",x0_" << c;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t c = 1; c <= n0; ++c) out << ",w" << i << '_' << c;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t c = 1; c <= n0; ++c) out << ",werr" << i << '_' << c;
    out << '\n';
    for (const auto& step : t.steps) {
      out << step.k << ',' << step.sigma;
      for (double v : step.x0) out << ',' << num(v);
      for (const auto& a : step.agents)
        for (double v : a.w) out << ',' << num(v);
      for (const auto& a : step.agents) {
        const Vector err = sub(step.x0, a.w);
        for (double v : err) out << ',' << num(v);
      }
      out << '\n';
    }
  }
  if (t.mode == Mode::ObserverOnly) return;
  {
    auto out = open_out(dir / "outputs.csv");
    out << "k";
    for (std::size_t c = 1; c <= s.leader.l(); ++c) out << ",y0_" << c;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t c = 1; c <= s.leader.l(); ++c) out << ",y" << i << '_' << c;
    out << '\n';
    for (const auto& step : t.steps) {
      out << step.k;
      for (double v : step.y0) out << ',' << num(v);
      for (const auto& a : step.agents)
        for (double v : a.y) out << ',' << num(v);
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "states.csv");
    out << "k";
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 1; c <= s.agents[i].n(); ++c) out << ",x" << (i + 1) << '_' << c;
    if (t.mode == Mode::OutputFeedback) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 1; c <= s.agents[i].n(); ++c) out << ",eta" << (i + 1) << '_' << c;
    }
    out << '\n';
    for (const auto& step : t.steps) {
      out << step.k;
      for (const auto& a : step.agents)
        for (double v : a.x) out << ',' << num(v);
      if (t.mode == Mode::OutputFeedback) {
        for (const auto& a : step.agents)
          for (double v : a.eta) out << ',' << num(v);
      }
      out << '\n';
    }
  }
}

std::string format_check_report(const AssumptionReport& report) {
  std::ostringstream os;
  std::size_t width = 0;
  for (const auto& item : report.items) width = std::max(width, item.name.size());
  for (const auto& item : report.items) {
    const char* tag = item.ok ? "PASS" : (item.warning_only ? "WARN" : "FAIL");
    os << '[' << tag << "] " << std::left << std::setw(static_cast<int>(width)) << item.name << "  " << item.detail
       << '\n';
  }
  if (report.constants) {
    const auto& c = *report.constants;
    os << std::setprecision(12) << "graph constants: Delta=" << c.delta << " lambda_max=" << c.lambda_max
       << " lambda_min=" << c.lambda_min << " mu_max=" << c.mu_max << '\n';
  }
  os << (report.ok() ? "all checks passed" : "some checks FAILED") << '\n';
  return os.str();
}

std::string check_report_json(const AssumptionReport& report) {
  json doc;
  doc["ok"] = report.ok();
  doc["checks"] = checks_json(report);
  doc["graph_constants"] = constants_json(report);
  json regs = json::array();
  for (std::size_t i = 0; i < report.regulators.size(); ++i) {
    if (!report.regulators[i]) continue;
    regs.push_back({{"agent", i + 1},
                    {"residual", report.regulators[i]->residual},
                    {"nonneg_ok", report.regulators[i]->nonneg_ok}});
  }
  doc["regulator"] = std::move(regs);
  return doc.dump(2) + "\n";
}

}  // namespace poscon
