// mems_pullin: command-line front end for the pull-in computations.
//
// Exit codes: 0 success, 1 usage error, 2 computation failure,
// 3 sweep finished with some failed points.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mems/dynamics.hpp"
#include "mems/io.hpp"
#include "mems/manifold.hpp"
#include "mems/pullin.hpp"
#include "mems/steady.hpp"

#ifndef MEMS_VERSION
#define MEMS_VERSION "0.1.0"
#endif

using namespace mems;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kComputation = 2, kPartial = 3 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// "start:stop:step" (endpoints inclusive within half a step), or one number.
std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    const auto v = io::parse_double(s);
    if (!v || !std::isfinite(*v)) throw UsageError("bad number '" + s + "' in grid '" + text + "'");
    return *v;
  };
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() == 1) return {number(parts[0])};
  if (parts.size() != 3) throw UsageError("grid must be start:stop:step, got '" + text + "'");
  const double a = number(parts[0]), b = number(parts[1]), h = number(parts[2]);
  if (!(h > 0.0) || b < a) throw UsageError("grid needs step > 0 and stop >= start: '" + text + "'");
  std::vector<double> g;
  for (std::size_t k = 0;; ++k) {
    const double v = a + static_cast<double>(k) * h;
    if (v > b + 0.5 * h) break;
    g.push_back(std::min(v, b));
  }
  // An endpoint within half a step of the last point replaces it.
  if (g.size() > 1 && g[g.size() - 2] == g.back()) g.pop_back();
  return g;
}

struct Options {
  double lambda = NAN;
  double alpha = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double t_max = 0.0;  // 0 selects the command's default
  double tol = 0.0;    // 0 selects the command's default
  double radius = 0.15;
  double sample_dt = 0.0;
  std::string method = "manifold";
  std::string alpha_grid;
  std::string lambda_grid;
  std::string seed_grid;
  std::string format;
  std::string out;
  std::size_t jobs = 1;
  bool alpha_given = false;
};

struct Output {
  json config;
  json results;
  json stats;
  io::CsvTable table;
  std::string text;  // human-readable form, when the command has one
  int code = kOk;
};

void require_lambda(const Options& o) {
  if (!(o.lambda > 0.0) || !std::isfinite(o.lambda)) throw UsageError("--lambda must be positive");
}

void require_alpha(const Options& o) {
  if (!(o.alpha >= 0.0) || !std::isfinite(o.alpha)) throw UsageError("--alpha must be nonnegative");
}

IntegrationOptions integration_options(const Options& o, double default_t_max) {
  IntegrationOptions io;
  io.t_max = o.t_max > 0.0 ? o.t_max : default_t_max;
  if (o.tol > 0.0) {
    io.rtol = o.tol;
    io.atol = 1e-2 * o.tol;
  }
  io.sample_dt = o.sample_dt;
  return io;
}

json integration_json(const IntegrationOptions& o) {
  return {{"t_max", o.t_max},       {"rtol", o.rtol},
          {"atol", o.atol},         {"touchdown_gap", o.touchdown_gap},
          {"event_tol", o.event_tol}, {"sample_dt", o.sample_dt},
          {"saddle_tol", o.saddle_tol}, {"saddle_dwell", o.saddle_dwell},
          {"max_steps", o.max_steps}};
}

std::string config_trailer(const json& config) {
  std::string s = "config";
  for (auto it = config.begin(); it != config.end(); ++it) {
    s += ' ' + it.key() + '=';
    if (it->is_number_float()) {
      s += io::format_double(it->get<double>());
    } else if (it->is_string()) {
      s += it->get<std::string>();
    } else {
      s += it->dump();
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

Output cmd_equilibria(const Options& o) {
  require_lambda(o);
  require_alpha(o);
  Output out;
  out.config = {{"lambda", o.lambda}, {"alpha", o.alpha}};
  out.results = io::equilibria_json(o.lambda, o.alpha);

  std::ostringstream ts;
  ts.precision(15);
  ts << "lambda = " << o.lambda << ", alpha = " << o.alpha << "\n";
  const auto eq = equilibria(o.lambda);
  out.table.header = {"point", "x", "label", "df_dx", "mu_plus_re", "mu_plus_im", "mu_minus_re",
                      "mu_minus_im"};
  auto row = [&](const char* name, double x) {
    const auto s = stability(x, {o.lambda, o.alpha});
    ts << "  " << name << " = " << x << "  " << to_string(s.label) << "  df/dx = " << s.stiffness
       << "  mu+ = " << s.mu_plus.real() << (s.mu_plus.imag() < 0 ? " - " : " + ")
       << std::abs(s.mu_plus.imag()) << "i  mu- = " << s.mu_minus.real()
       << (s.mu_minus.imag() < 0 ? " - " : " + ") << std::abs(s.mu_minus.imag()) << "i\n";
    out.table.rows.push_back({std::string(name), x, std::string(to_string(s.label)), s.stiffness,
                              s.mu_plus.real(), s.mu_plus.imag(), s.mu_minus.real(),
                              s.mu_minus.imag()});
  };
  switch (eq.kind) {
    case EquilibriumKind::None:
      ts << "no stationary solutions (lambda > 4/27)\n";
      break;
    case EquilibriumKind::Degenerate:
      ts << "degenerate stationary solution at x = " << eq.x1 << " (lambda = 4/27)\n";
      row("x1", eq.x1);
      break;
    case EquilibriumKind::Pair:
      ts << "two stationary solutions\n";
      row("x1", eq.x1);
      row("x2", eq.x2);
      break;
  }
  out.text = ts.str();
  return out;
}

Output cmd_simulate(const Options& o) {
  require_lambda(o);
  require_alpha(o);
  if (!(o.x0 > -1.0)) throw UsageError("--x0 must be greater than -1");
  const auto opts = integration_options(o, 100.0);
  opts.check();
  const Params p{o.lambda, o.alpha};
  const auto tr = integrate(p, {0.0, o.x0, o.y0}, opts);
  Output out;
  out.config = {{"lambda", o.lambda}, {"alpha", o.alpha}, {"x0", o.x0}, {"y0", o.y0}};
  out.config["integration"] = integration_json(opts);
  out.results = io::trajectory_json(tr, o.lambda);
  out.table = io::trajectory_csv(tr, o.lambda);
  if (std::holds_alternative<BudgetExhausted>(tr.outcome)) out.code = kComputation;
  return out;
}

Output cmd_classify(const Options& o) {
  require_lambda(o);
  require_alpha(o);
  if (!(o.x0 > -1.0)) throw UsageError("--x0 must be greater than -1");
  const auto opts = integration_options(o, 2000.0);
  opts.check();
  const auto outcome = classify({o.lambda, o.alpha}, opts, {0.0, o.x0, o.y0});
  Output out;
  out.config = {{"lambda", o.lambda}, {"alpha", o.alpha}, {"x0", o.x0}, {"y0", o.y0}};
  out.config["integration"] = integration_json(opts);
  out.results = io::outcome_json(outcome);
  out.table.header = {"lambda", "alpha", "outcome"};
  out.table.rows.push_back({o.lambda, o.alpha, std::string(outcome_name(outcome))});
  out.table.trailer.push_back(io::outcome_trailer(outcome));
  out.text = io::outcome_trailer(outcome) + "\n";
  if (std::holds_alternative<BudgetExhausted>(outcome)) out.code = kComputation;
  return out;
}

Output cmd_manifold(const Options& o) {
  require_lambda(o);
  require_alpha(o);
  if (!(o.lambda < static_pullin())) throw UsageError("manifold: --lambda must lie below 4/27");
  TraceOptions t;
  if (o.tol > 0.0) {
    t.rtol = o.tol;
    t.atol = 1e-2 * o.tol;
  }
  const auto tr = trace_stable_manifold({o.lambda, o.alpha}, t);
  Output out;
  out.config = {{"lambda", o.lambda}, {"alpha", o.alpha}, {"rtol", t.rtol}, {"atol", t.atol},
                {"u_max", tr.u_max}, {"seed", tr.seed}, {"crossing_tol", t.crossing_tol}};
  out.results = io::manifold_json(tr);
  out.table = io::manifold_csv(tr);
  return out;
}

std::vector<ThresholdMethod> methods_from(const std::string& m) {
  if (m == "manifold") return {ThresholdMethod::ManifoldCrossing};
  if (m == "trajectory") return {ThresholdMethod::TrajectoryBisection};
  if (m == "both") return {ThresholdMethod::ManifoldCrossing, ThresholdMethod::TrajectoryBisection};
  throw UsageError("--method must be manifold, trajectory or both");
}

Output cmd_pullin(const Options& o) {
  std::vector<double> grid;
  if (!o.alpha_grid.empty()) {
    if (o.alpha_given) throw UsageError("give either --alpha or --alpha-grid, not both");
    grid = parse_grid(o.alpha_grid);
  } else {
    require_alpha(o);
    grid = {o.alpha};
  }
  detail::check_grid(grid, true);
  const auto methods = methods_from(o.method);

  Output out;
  out.config = {{"alpha_grid", grid}, {"method", o.method}, {"jobs", o.jobs}};
  out.results = json::array();
  out.table.header = {"alpha", "lambda_d", "half_width", "method"};
  std::size_t failures = 0, total = 0;
  json tols = json::object();
  for (auto m : methods) {
    ThresholdOptions to;
    to.tol = o.tol;
    const auto curve = sweep_curve(grid, m, to, o.jobs);
    tols[std::string(to_string(m))] = curve.tol;
    out.results.push_back(io::curve_json(curve));
    const auto t = io::curve_csv(curve);
    out.table.rows.insert(out.table.rows.end(), t.rows.begin(), t.rows.end());
    out.table.trailer.insert(out.table.trailer.end(), t.trailer.begin(), t.trailer.end());
    failures += curve.failures.size();
    total += grid.size();
    for (const auto& v : curve.violations) std::cerr << "warning: " << to_string(m) << ": " << v << "\n";
    for (const auto& f : curve.failures) {
      std::cerr << "error: " << to_string(m) << ": alpha=" << f.alpha << ": " << f.message << "\n";
    }
  }
  out.config["tol"] = tols;
  out.stats["failed_points"] = failures;
  if (failures > 0) out.code = failures == total ? kComputation : kPartial;
  return out;
}

Output cmd_sweep(const Options& o) {
  if (o.lambda_grid.empty() || o.alpha_grid.empty()) {
    throw UsageError("sweep needs --lambda-grid and --alpha-grid");
  }
  const auto lg = parse_grid(o.lambda_grid);
  const auto ag = parse_grid(o.alpha_grid);
  detail::check_grid(lg, false);
  detail::check_grid(ag, true);
  const auto opts = integration_options(o, 2000.0);
  opts.check();

  const std::size_t n = lg.size() * ag.size();
  auto res = parallel_map<Outcome>(n, o.jobs, [&](std::size_t k) {
    return classify({lg[k / ag.size()], ag[k % ag.size()]}, opts);
  });

  Output out;
  out.config = {{"lambda_grid", lg}, {"alpha_grid", ag}, {"jobs", o.jobs}};
  out.config["integration"] = integration_json(opts);
  out.results = json::array();
  out.table.header = {"lambda", "alpha", "outcome", "t_event"};
  std::size_t failures = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double l = lg[k / ag.size()], a = ag[k % ag.size()];
    json rec{{"lambda", l}, {"alpha", a}};
    if (!res[k].value) {
      ++failures;
      rec["error"] = res[k].error;
      out.table.rows.push_back({l, a, std::string("error"), NAN});
      out.table.trailer.push_back("failure lambda=" + io::format_double(l) +
                                  " alpha=" + io::format_double(a) + " " + res[k].error);
    } else {
      const auto& oc = *res[k].value;
      rec["outcome"] = io::outcome_json(oc);
      const double t = std::visit(
          [](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Touchdown>) return v.t_td;
            else if constexpr (std::is_same_v<T, BudgetExhausted>) return v.t_stop;
            else return v.t_detect;
          },
          oc);
      if (std::holds_alternative<BudgetExhausted>(oc)) ++failures;
      out.table.rows.push_back({l, a, std::string(outcome_name(oc)), t});
    }
    out.results.push_back(std::move(rec));
  }
  out.stats["failed_points"] = failures;
  if (failures > 0) out.code = failures == n ? kComputation : kPartial;
  return out;
}

/// Seeds as "XGRID/YGRID", each a grid; the origin is always included.
std::vector<PhaseState> parse_seeds(const std::string& text) {
  std::vector<PhaseState> seeds{{0.0, 0.0, 0.0}};
  if (text.empty()) return seeds;
  const auto slash = text.find('/');
  if (slash == std::string::npos) throw UsageError("--seed-grid must be XGRID/YGRID");
  const auto xs = parse_grid(text.substr(0, slash));
  const auto ys = parse_grid(text.substr(slash + 1));
  for (double x : xs) {
    if (!(x > -1.0)) throw UsageError("--seed-grid: x must exceed -1");
    for (double y : ys) {
      if (x == 0.0 && y == 0.0) continue;
      seeds.push_back({0.0, x, y});
    }
  }
  return seeds;
}

Output cmd_phase_portrait(const Options& o) {
  require_lambda(o);
  require_alpha(o);
  const auto seeds = parse_seeds(o.seed_grid);
  auto opts = integration_options(o, 50.0);
  if (!(opts.sample_dt > 0.0)) opts.sample_dt = 0.05;
  opts.check();
  const Params p{o.lambda, o.alpha};

  Output out;
  out.config = {{"lambda", o.lambda}, {"alpha", o.alpha}, {"seed_grid", o.seed_grid}};
  out.config["integration"] = integration_json(opts);
  out.table.header = {"series", "id", "x", "y"};
  json series = json::object();
  auto add = [&](const std::string& name, std::size_t id, double x, double y) {
    out.table.rows.push_back({name, static_cast<double>(id), x, y});
    series[name][id].push_back({x, y});
  };

  const auto eq = equilibria(o.lambda);
  double x_lo = -0.99, x_hi = 0.2;
  if (eq.exist()) {
    add("equilibria", 0, eq.x1, 0.0);
    if (eq.kind == EquilibriumKind::Pair) add("equilibria", 1, eq.x2, 0.0);
  }
  if (eq.kind == EquilibriumKind::Pair) {
    const auto tr = trace_stable_manifold(p);
    for (std::size_t i = 0; i < tr.u_samples.size(); ++i) {
      add("stable_manifold", 0, tr.u_samples[i] + tr.x1, -tr.phi_samples[i]);
    }
    x_hi = std::max(x_hi, tr.u_end() + tr.x1);
    if (o.alpha == 0.0) {
      // Homoclinic loop of the saddle: level set through (x1, 0).
      const double right = *crossing_x_bar(p);
      std::vector<double> grid;
      for (int i = 0; i <= 400; ++i) grid.push_back(eq.x1 + (right - eq.x1) * i / 400.0);
      for (const auto& pt : conservative_orbit(o.lambda, potential(eq.x1, o.lambda), grid)) {
        add("homoclinic", 0, pt.x, pt.y);
      }
    }
  }
  if (o.alpha > 0.0) {
    for (int i = 0; i <= 400; ++i) {
      const double x = x_lo + (x_hi - x_lo) * i / 400.0;
      add("nullcline", 0, x, -force(x, o.lambda) / o.alpha);
    }
  }
  auto orbits = parallel_map<Trajectory>(seeds.size(), o.jobs,
                                         [&](std::size_t k) { return integrate(p, seeds[k], opts); });
  json outcomes = json::array();
  std::size_t failures = 0;
  for (std::size_t k = 0; k < orbits.size(); ++k) {
    if (!orbits[k].value) {
      ++failures;
      outcomes.push_back({{"seed", {seeds[k].x, seeds[k].y}}, {"error", orbits[k].error}});
      continue;
    }
    for (const auto& s : orbits[k].value->samples) add("orbit", k, s.x, s.y);
    outcomes.push_back({{"seed", {seeds[k].x, seeds[k].y}},
                        {"outcome", io::outcome_json(orbits[k].value->outcome)}});
    out.table.trailer.push_back("orbit " + std::to_string(k) + " seed=" + io::format_double(seeds[k].x) +
                                "," + io::format_double(seeds[k].y) + " " +
                                io::outcome_trailer(orbits[k].value->outcome));
  }
  out.results = {{"series", series}, {"orbits", outcomes}};
  out.stats["failed_points"] = failures;
  if (failures > 0) out.code = failures == seeds.size() ? kComputation : kPartial;
  return out;
}

Output cmd_residence(const Options& o) {
  require_lambda(o);
  require_alpha(o);
  if (!(o.radius > 0.0)) throw UsageError("--radius must be positive");
  const auto opts = integration_options(o, 2000.0);
  opts.check();
  const auto r = residence_profile({o.lambda, o.alpha}, o.radius, opts);
  Output out;
  out.config = {{"lambda", o.lambda}, {"alpha", o.alpha}, {"radius", o.radius}};
  out.config["integration"] = integration_json(opts);
  out.results = {{"t_approach", r.t_approach},
                 {"t_dwell", r.t_dwell},
                 {"t_collapse", r.t_collapse},
                 {"t_touchdown", r.t_touchdown}};
  out.table.header = {"t_approach", "t_dwell", "t_collapse", "t_touchdown"};
  out.table.rows.push_back({r.t_approach, r.t_dwell, r.t_collapse, r.t_touchdown});
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open '" + path + "' for writing");
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic pull-in of a damped electrostatic actuator"};
  app.set_version_flag("--version", MEMS_VERSION);
  app.require_subcommand(1);

  Options o;
  auto common = [&](CLI::App* c, bool state) {
    c->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    c->add_option("--out", o.out, "output file (default: stdout)");
    if (state) {
      c->add_option("--lambda", o.lambda, "load parameter")->required();
      c->add_option("--alpha", o.alpha, "damping (default 0)");
    }
  };
  auto integration = [&](CLI::App* c) {
    c->add_option("--t-max", o.t_max, "integration horizon");
    c->add_option("--tol", o.tol, "relative tolerance (absolute = tol/100)");
  };
  auto initial = [&](CLI::App* c) {
    c->add_option("--x0", o.x0, "initial displacement (> -1)");
    c->add_option("--y0", o.y0, "initial velocity");
  };

  auto* eq = app.add_subcommand("equilibria", "stationary solutions and their stability");
  common(eq, true);

  auto* sim = app.add_subcommand("simulate", "integrate one trajectory");
  common(sim, true);
  integration(sim);
  initial(sim);
  sim->add_option("--sample-dt", o.sample_dt, "uniform sampling interval (0: every step)");

  auto* cls = app.add_subcommand("classify", "regime of one trajectory");
  common(cls, true);
  integration(cls);
  initial(cls);

  auto* man = app.add_subcommand("manifold", "trace the saddle's separatrix branch");
  common(man, true);
  man->add_option("--tol", o.tol, "relative trace tolerance");

  auto* pull = app.add_subcommand("pullin", "dynamic pull-in threshold lambda_d*(alpha)");
  common(pull, false);
  auto* alpha_opt = pull->add_option("--alpha", o.alpha, "single damping value");
  pull->add_option("--alpha-grid", o.alpha_grid, "start:stop:step");
  pull->add_option("--method", o.method, "manifold, trajectory or both")
      ->check(CLI::IsMember({"manifold", "trajectory", "both"}));
  pull->add_option("--tol", o.tol, "bisection half-width");
  pull->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* sw = app.add_subcommand("sweep", "regime map over a lambda x alpha grid");
  common(sw, false);
  integration(sw);
  sw->add_option("--lambda-grid", o.lambda_grid, "start:stop:step")->required();
  sw->add_option("--alpha-grid", o.alpha_grid, "start:stop:step")->required();
  sw->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* pp = app.add_subcommand("phase-portrait", "equilibria, separatrix, nullcline and orbits");
  common(pp, true);
  integration(pp);
  pp->add_option("--seed-grid", o.seed_grid, "XGRID/YGRID of extra starting points");
  pp->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* rs = app.add_subcommand("residence", "time spent near the saddle before touchdown");
  common(rs, true);
  integration(rs);
  rs->add_option("--radius", o.radius, "radius of the saddle ball (default 0.15)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  o.alpha_given = alpha_opt->count() > 0;

  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Output out;
    if (name == "equilibria") out = cmd_equilibria(o);
    else if (name == "simulate") out = cmd_simulate(o);
    else if (name == "classify") out = cmd_classify(o);
    else if (name == "manifold") out = cmd_manifold(o);
    else if (name == "pullin") out = cmd_pullin(o);
    else if (name == "sweep") out = cmd_sweep(o);
    else if (name == "phase-portrait") out = cmd_phase_portrait(o);
    else out = cmd_residence(o);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.config["command"] = name;
    out.config["version"] = MEMS_VERSION;
    out.config["format"] = o.format.empty() ? (out.text.empty() ? "csv" : "text") : o.format;
    out.stats["version"] = MEMS_VERSION;
    out.stats["wall_time_s"] = wall;

    if (o.format == "json") {
      emit(json{{"config", out.config}, {"results", out.results}, {"stats", out.stats}}.dump(2) + "\n",
           o.out);
    } else if (o.format.empty() && !out.text.empty()) {
      emit(out.text, o.out);
    } else {
      out.table.trailer.push_back(config_trailer(out.config));
      emit(io::to_csv(out.table), o.out);
      std::cerr << "wall time " << wall << " s\n";
    }
    return out.code;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << "\n";
    return kComputation;
  }
}
