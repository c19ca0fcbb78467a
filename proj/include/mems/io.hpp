#pragma once

// CSV and JSON export of trajectories, manifold traces and pull-in curves.
//
// CSV files carry one header row, then data rows. Numbers are written in the
// shortest decimal form that reads back to the same double. Lines starting
// with '#' after the data hold trailer metadata (e.g. the trajectory outcome).

#include <charconv>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "json.hpp"
#include "mems/dynamics.hpp"
#include "mems/manifold.hpp"
#include "mems/pullin.hpp"
#include "mems/steady.hpp"

namespace mems::io {

using nlohmann::json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

using Cell = std::variant<double, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> trailer;  // '#' lines without the leading "# "
};

inline std::string to_csv(const CsvTable& t) {
  std::ostringstream os;
  auto line = [&os](const auto& cells, auto&& fmt) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << fmt(cells[i]);
    }
    os << '\n';
  };
  line(t.header, [](const std::string& s) { return s; });
  for (const auto& r : t.rows) {
    line(r, [](const Cell& c) {
      return std::holds_alternative<double>(c) ? format_double(std::get<double>(c))
                                               : std::get<std::string>(c);
    });
  }
  for (const auto& c : t.trailer) os << "# " << c << '\n';
  return os.str();
}

/// Inverse of to_csv. Cells that parse completely as numbers become doubles.
inline CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  auto split = [](std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
      const auto pos = line.find(',', start);
      out.emplace_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return out;
  };
  bool have_header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.rfind("# ", 0) == 0) {
      t.trailer.emplace_back(line.substr(2));
      continue;
    }
    if (!have_header) {
      t.header = split(line);
      have_header = true;
      continue;
    }
    std::vector<Cell> row;
    for (auto& s : split(line)) {
      if (auto v = parse_double(s)) {
        row.emplace_back(*v);
      } else {
        row.emplace_back(std::move(s));
      }
    }
    if (row.size() != t.header.size()) throw std::runtime_error("parse_csv: ragged row");
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("parse_csv: missing header");
  return t;
}

// ---------------------------------------------------------------------------

inline json outcome_json(const Outcome& o) {
  json j;
  j["kind"] = std::string(outcome_name(o));
  std::visit(
      [&j](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConvergedStable>) {
          j["x2"] = v.x2;
          j["t_detect"] = v.t_detect;
        } else if constexpr (std::is_same_v<T, ConvergedSaddle>) {
          j["x1"] = v.x1;
          j["t_detect"] = v.t_detect;
        } else if constexpr (std::is_same_v<T, Touchdown>) {
          j["t_td"] = v.t_td;
        } else {
          j["reason"] = v.reason;
          j["t_stop"] = v.t_stop;
        }
      },
      o);
  return j;
}

inline std::string outcome_trailer(const Outcome& o) {
  std::string s = "outcome=" + std::string(outcome_name(o));
  std::visit(
      [&s](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConvergedStable>) {
          s += " x2=" + format_double(v.x2) + " t_detect=" + format_double(v.t_detect);
        } else if constexpr (std::is_same_v<T, ConvergedSaddle>) {
          s += " x1=" + format_double(v.x1) + " t_detect=" + format_double(v.t_detect);
        } else if constexpr (std::is_same_v<T, Touchdown>) {
          s += " t_td=" + format_double(v.t_td);
        } else {
          s += " t_stop=" + format_double(v.t_stop) + " reason=" + v.reason;
        }
      },
      o);
  return s;
}

inline json stats_json(const TrajectoryStats& s) {
  return {{"steps", s.steps}, {"rejected_steps", s.rejected_steps}, {"min_gap", s.min_gap}};
}

/// Columns t, x, y, E; trailer carries the outcome and step statistics.
inline CsvTable trajectory_csv(const Trajectory& tr, double lambda) {
  CsvTable t;
  t.header = {"t", "x", "y", "E"};
  t.rows.reserve(tr.samples.size());
  for (const auto& s : tr.samples) t.rows.push_back({s.t, s.x, s.y, energy(s, lambda)});
  t.trailer.push_back(outcome_trailer(tr.outcome));
  t.trailer.push_back("steps=" + std::to_string(tr.stats.steps) +
                      " rejected_steps=" + std::to_string(tr.stats.rejected_steps) +
                      " min_gap=" + format_double(tr.stats.min_gap));
  return t;
}

inline json trajectory_json(const Trajectory& tr, double lambda) {
  json samples = json::array();
  for (const auto& s : tr.samples) samples.push_back({s.t, s.x, s.y, energy(s, lambda)});
  return {{"columns", {"t", "x", "y", "E"}},
          {"samples", std::move(samples)},
          {"outcome", outcome_json(tr.outcome)},
          {"stats", stats_json(tr.stats)}};
}

inline CsvTable manifold_csv(const ManifoldTrace& tr) {
  CsvTable t;
  t.header = {"u", "phi"};
  for (std::size_t i = 0; i < tr.u_samples.size(); ++i) {
    t.rows.push_back({tr.u_samples[i], tr.phi_samples[i]});
  }
  t.trailer.push_back(tr.x_bar ? "x_bar=" + format_double(*tr.x_bar) +
                                     " u_bar=" + format_double(*tr.crossing)
                               : "x_bar=none u_max=" + format_double(tr.u_max));
  return t;
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json manifold_json(const ManifoldTrace& tr) {
  return {{"lambda", tr.lambda},       {"alpha", tr.alpha},
          {"x1", tr.x1},               {"x2", tr.x2},
          {"mu_plus", tr.mu_plus},     {"seed", tr.seed},
          {"u_max", tr.u_max},         {"u", tr.u_samples},
          {"phi", tr.phi_samples},     {"u_bar", optional_json(tr.crossing)},
          {"x_bar", optional_json(tr.x_bar)}};
}

inline json threshold_json(const LambdaThreshold& p) {
  return {{"alpha", p.alpha},
          {"lambda_d", p.lambda_d},
          {"half_width", p.half_width},
          {"method", std::string(to_string(p.method))},
          {"saturated", p.saturated},
          {"resolved", p.resolved}};
}

inline json threshold_json(const ThresholdPoint& p) {
  return {{"lambda", p.lambda},
          {"alpha_star", p.alpha_star},
          {"half_width", p.half_width},
          {"method", std::string(to_string(p.method))},
          {"resolved", p.resolved}};
}

inline CsvTable curve_csv(const PullInCurve& c) {
  CsvTable t;
  t.header = {"alpha", "lambda_d", "half_width", "method"};
  for (const auto& p : c.points) {
    t.rows.push_back({p.alpha, p.lambda_d, p.half_width, std::string(to_string(p.method))});
  }
  for (const auto& f : c.failures) t.trailer.push_back("failure alpha=" + format_double(f.alpha) + " " + f.message);
  for (const auto& v : c.violations) t.trailer.push_back("violation " + v);
  return t;
}

inline json curve_json(const PullInCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(threshold_json(p));
  json fails = json::array();
  for (const auto& f : c.failures) fails.push_back({{"alpha", f.alpha}, {"message", f.message}});
  return {{"method", std::string(to_string(c.method))},
          {"tol", c.tol},
          {"points", std::move(pts)},
          {"failures", std::move(fails)},
          {"violations", c.violations}};
}

inline json equilibria_json(double lambda, double alpha) {
  const auto eq = equilibria(lambda);
  json j{{"lambda", lambda}, {"alpha", alpha}, {"kind", std::string(to_string(eq.kind))}};
  if (!eq.exist()) return j;
  auto point = [&](double x) {
    const auto s = stability(x, {lambda, alpha});
    return json{{"x", x},
                {"label", std::string(to_string(s.label))},
                {"mu_plus", {s.mu_plus.real(), s.mu_plus.imag()}},
                {"mu_minus", {s.mu_minus.real(), s.mu_minus.imag()}},
                {"df_dx", s.stiffness}};
  };
  j["x1"] = point(eq.x1);
  j["x2"] = point(eq.x2);
  return j;
}

}  // namespace mems::io
