#include "ehrlab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ehrlab/certify.hpp"
#include "ehrlab/checks.hpp"
#include "ehrlab/corpus.hpp"
#include "ehrlab/errors.hpp"
#include "ehrlab/flow.hpp"
#include "ehrlab/parallel.hpp"

namespace ehrlab::cli {

Json to_json(const RunConfig& c) {
  return Json{{"command", c.command},
              {"kind", c.kind},
              {"rho", num(c.rho)},
              {"lambda", num(c.lambda)},
              {"alpha", num(c.alpha)},
              {"eps", num(c.eps)},
              {"R", num(c.R)},
              {"r_hi", c.r_hi ? num(*c.r_hi) : Json(nullptr)},
              {"grid", c.grid},
              {"t_points", c.t_points},
              {"region", c.region},
              {"order", c.order},
              {"seed", c.seed},
              {"count", c.count},
              {"preset", c.preset},
              {"mode", c.mode},
              {"expect", c.expect},
              {"a", num(c.a)},
              {"b", num(c.b)},
              {"c", num(c.c)},
              {"t", num(c.t)},
              {"x0", num(c.x0)},
              {"y0", num(c.y0)},
              {"s_grid", c.s_grid},
              {"auto_r", c.auto_r},
              {"delta", num(c.delta)},
              {"f_file", c.f_file},
              {"g_file", c.g_file},
              {"h_file", c.h_file},
              {"hull", c.hull},
              {"tol", num(c.tol)},
              {"out", c.out},
              {"format", c.format}};
}

RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("RunConfig json must be an object");
  RunConfig c;
  try {
    auto str = [&](const char* k, std::string& v) {
      if (j.contains(k)) v = j.at(k).get<std::string>();
    };
    auto dbl = [&](const char* k, double& v) {
      if (j.contains(k)) v = num_from(j.at(k));
    };
    auto integer = [&](const char* k, int& v) {
      if (j.contains(k)) v = j.at(k).get<int>();
    };
    auto flag = [&](const char* k, bool& v) {
      if (j.contains(k)) v = j.at(k).get<bool>();
    };
    str("command", c.command);
    str("kind", c.kind);
    dbl("rho", c.rho);
    dbl("lambda", c.lambda);
    dbl("alpha", c.alpha);
    dbl("eps", c.eps);
    dbl("R", c.R);
    if (j.contains("r_hi") && !j.at("r_hi").is_null()) c.r_hi = num_from(j.at("r_hi"));
    integer("grid", c.grid);
    integer("t_points", c.t_points);
    str("region", c.region);
    integer("order", c.order);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    integer("count", c.count);
    str("preset", c.preset);
    str("mode", c.mode);
    str("expect", c.expect);
    dbl("a", c.a);
    dbl("b", c.b);
    dbl("c", c.c);
    dbl("t", c.t);
    dbl("x0", c.x0);
    dbl("y0", c.y0);
    if (j.contains("s_grid")) c.s_grid = j.at("s_grid").get<std::vector<double>>();
    flag("auto_r", c.auto_r);
    dbl("delta", c.delta);
    str("f_file", c.f_file);
    str("g_file", c.g_file);
    str("h_file", c.h_file);
    flag("hull", c.hull);
    dbl("tol", c.tol);
    str("out", c.out);
    str("format", c.format);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("RunConfig json: ") + e.what());
  }
  return c;
}

namespace {

// What a subcommand hands back: the result object, the verdict, and a CSV
// rendering for --format csv.
struct Outcome {
  Json result;
  bool passed = false;
  std::string csv;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Two-column CSV of the scalar fields of a result.
std::string key_value_csv(const Json& j) {
  std::string s = "key,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_number_float()) {
      s += it.key() + "," + fmt(it.value().get<double>()) + "\n";
    } else if (it.value().is_number() || it.value().is_boolean()) {
      s += it.key() + "," + it.value().dump() + "\n";
    } else if (it.value().is_string()) {
      s += it.key() + "," + it.value().get<std::string>() + "\n";
    }
  }
  return s;
}

double tol_or(const RunConfig& c, double fallback) { return c.tol >= 0.0 ? c.tol : fallback; }
int count_or(const RunConfig& c, int fallback) { return c.count > 0 ? c.count : fallback; }

JKind kind_of(const RunConfig& c) { return jkind_from_string(c.kind.c_str()); }

JSpec spec_of(const RunConfig& c, const CorrelationModel& m) {
  switch (kind_of(c)) {
    case JKind::pl:
      return JSpec::pl(m, c.R, c.alpha);
    case JKind::ehrhard_static:
      return JSpec::ehrhard_static(m, c.R);
    case JKind::ehrhard_time_varying:
      return JSpec::ehrhard_time_varying(m, c.R, c.eps);
  }
  throw ConfigError("unknown kind");
}

ScanDomain domain_of(const RunConfig& c) {
  ScanDomain d = ScanDomain::standard(c.eps, c.grid, c.t_points);
  d.region = scan_region_from_string(c.region.c_str());
  return d;
}

Json point_json(const std::array<double, 4>& p) {
  return Json{{"x", p[0]}, {"y", p[1]}, {"z", p[2]}, {"t", p[3]}};
}

GridFunction load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return grid_function_from_json(j);
}

std::vector<double> linear_grid(double from, double to, int n) {
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = from + (to - from) * i / (n - 1);
  return s;
}

// ---- subcommands ----

Outcome cmd_psd_scan(const RunConfig& c) {
  const CorrelationModel m = build_model(c.rho, c.lambda);
  const ScanReport rep = psd_scan(spec_of(c, m), domain_of(c));
  Outcome o{to_json(rep), rep.passed, {}};
  o.csv = key_value_csv(Json{{"points_checked", rep.points_checked},
                             {"min_eigenvalue", rep.min_eigenvalue},
                             {"min_normalized", rep.min_normalized},
                             {"passed", rep.passed}});
  return o;
}

Outcome cmd_min_r(const RunConfig& c) {
  const CorrelationModel m = build_model(c.rho, c.lambda);
  const JSpec spec = spec_of(c, m);
  const MinRResult res = min_r(spec, domain_of(c), c.r_hi);
  Outcome o;
  o.result = to_json(res);
  o.passed = std::isfinite(res.R_min) && res.R_min <= res.analytic_bound && res.at_min.passed;
  o.result["within_analytic_bound"] = res.R_min <= res.analytic_bound;
  o.csv = "R,min_eig\n";
  for (const auto& [R, v] : res.ladder) o.csv += fmt(R) + "," + fmt(v) + "\n";
  return o;
}

Outcome cmd_pl_check(const RunConfig& c) {
  const CorrelationModel m = build_model(c.rho, c.lambda);
  if (!(c.alpha > 0.0)) throw DomainError("pl-check: alpha must be > 0");
  const JSpec spec = JSpec::pl(m, c.R, c.alpha);
  const SymMatrix core = pl_b_alpha(m, c.alpha) - pl_d_alpha(m, c.alpha) * (1.0 / c.R);
  const PsdVerdict v = min_eig(core);
  const double scale = std::max(1.0, v.norm);
  Outcome o;
  o.passed = v.min_eigenvalue / scale >= -kScanTol;
  // w = (1, 1, 1/alpha) is the kernel of B_alpha; w' D_alpha w = 1 - sigma^2 / alpha.
  o.result = Json{{"alpha", c.alpha},
                  {"sigma2", m.sigma2},
                  {"alpha_below_sigma2", c.alpha < m.sigma2},
                  {"kernel_form", 1.0 - m.sigma2 / c.alpha},
                  {"R", c.R},
                  {"min_eigenvalue", num(v.min_eigenvalue)},
                  {"scale", scale},
                  {"witness", v.witness_vector},
                  {"passed", o.passed}};
  try {
    o.result["analytic_bound"] = num(analytic_r_bound(spec, domain_of(c)));
  } catch (const SearchError&) {
    o.result["analytic_bound"] = num(std::numeric_limits<double>::infinity());
  }
  o.csv = key_value_csv(o.result);
  return o;
}

Triple triple_of(const RunConfig& c, const CorrelationModel& m, const QuadRule& rule,
                 Json& info) {
  const std::string& p = c.preset;
  if (p == "halfline")
    return Triple{HalfLine{c.a, true}, HalfLine{c.b, true}, HalfLine{c.c, true}, m};
  if (p == "constant") {
    // Constant profiles at the quantile levels a, b, c.
    auto flat = [](double q) { return GridFunction::sample_quantile([q](double) { return q; },
                                                                    normal_cdf(q), normal_cdf(q)); };
    return Triple{flat(c.a), flat(c.b), flat(c.c), m};
  }
  if (p == "file") {
    if (c.f_file.empty() || c.g_file.empty() || c.h_file.empty())
      throw ConfigError("preset file needs --f-file, --g-file and --h-file");
    return Triple{load_grid(c.f_file), load_grid(c.g_file), load_grid(c.h_file), m};
  }
  Rng rng(c.seed);
  // The smoothing check uses the trace's eps; static traces still get a
  // strictly admissible triple.
  const double eps = c.eps > 0.0 ? c.eps : 0.1;
  const HullTriple ht = p == "hull" ? make_hull_triple(rng, m, c.delta, eps, rule)
                                    : make_bump_triple(rng, m, c.delta, eps, rule);
  info = Json{{"hull_slack", ht.hull_slack},
              {"smoothed_slack", ht.smoothed_slack},
              {"attempts", ht.attempts}};
  return ht.triple;
}

Outcome cmd_trace_g(const RunConfig& c) {
  const CorrelationModel m = build_model(c.rho, c.lambda);
  const QuadRule rule = hermite_rule(c.order);
  const bool tv = c.mode == "time_varying";
  double R = c.R;
  Json extra = Json::object();
  if (c.auto_r) {
    if (!tv) throw ConfigError("--auto-r applies to the time-varying mode only");
    const MinRResult mr = min_r(JSpec::ehrhard_time_varying(m, 1.0, c.eps),
                                ScanDomain::standard(c.eps, c.grid, c.t_points));
    R = mr.R_min;
    extra["min_r"] = Json{{"R_min", mr.R_min}, {"analytic_bound", mr.analytic_bound}};
  }
  const JSpec spec = tv ? JSpec::ehrhard_time_varying(m, R, c.eps) : JSpec::ehrhard_static(m, R);
  Json info = Json::object();
  const Triple tr = triple_of(c, m, rule, info);

  std::vector<double> s = c.s_grid;
  if (s.empty()) {
    const bool half_static = c.preset == "halfline" && !tv;
    s = half_static ? linear_grid(0.1, 2.0, 20) : default_s_grid(c.t, tv ? c.eps : 0.0, 17);
  }
  const TraceResult res = g_trace(tr, spec, c.x0, c.y0, s, c.t, rule);

  double lo = res.values.front(), hi = lo;
  bool strictly_up = true;
  for (std::size_t i = 0; i < res.values.size(); ++i) {
    lo = std::min(lo, res.values[i]);
    hi = std::max(hi, res.values[i]);
    if (i > 0 && !(res.values[i] > res.values[i - 1])) strictly_up = false;
  }
  Outcome o;
  o.result = to_json(res);
  o.result["R"] = R;
  o.result["range"] = hi - lo;
  o.result["strictly_increasing"] = strictly_up;
  if (!info.empty()) o.result["triple"] = info;
  for (auto it = extra.begin(); it != extra.end(); ++it) o.result[it.key()] = it.value();
  if (c.expect == "nonincreasing") {
    o.passed = res.nonincreasing;
  } else if (c.expect == "increasing") {
    o.passed = strictly_up;
  } else if (c.expect == "constant") {
    o.passed = hi - lo <= tol_or(c, 1e-9);
  } else {
    o.passed = true;
  }
  o.csv = "s,G\n";
  for (std::size_t i = 0; i < res.values.size(); ++i)
    o.csv += fmt(res.s_grid[i]) + "," + fmt(res.values[i]) + "\n";
  return o;
}

Outcome cmd_counterexample(const RunConfig& c) {
  const CorrelationModel m = build_model(c.rho, c.lambda);
  const QuadRule rule = hermite_rule(c.order);
  const std::vector<double> s = c.s_grid.empty() ? linear_grid(0.1, 2.0, 20) : c.s_grid;
  const Triple tr{HalfLine{c.a, true}, HalfLine{c.b, true}, HalfLine{c.c, true}, m};
  const TraceResult quad = g_trace(tr, JSpec::ehrhard_static(m, c.R), c.x0, c.y0, s, c.t, rule);

  std::vector<double> closed, tv;
  double dev = 0.0;
  bool up = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    closed.push_back(counterexample_closed_form(c.a, c.b, c.c, c.lambda, c.R, s[i]));
    tv.push_back(counterexample_time_varying(c.a, c.b, c.c, c.lambda, c.R, s[i]));
    dev = std::max(dev, std::fabs(closed[i] - quad.values[i]));
    if (i > 0 && !(closed[i] > closed[i - 1] && quad.values[i] > quad.values[i - 1])) up = false;
  }
  const auto [tv_lo, tv_hi] = std::minmax_element(tv.begin(), tv.end());
  const double tv_range = *tv_hi - *tv_lo;
  Outcome o;
  o.passed = dev <= tol_or(c, 1e-6) && up && tv_range <= 1e-9;
  o.result = Json{{"s_grid", s},
                  {"static_closed_form", closed},
                  {"static_quadrature", quad.values},
                  {"time_varying", tv},
                  {"max_deviation", dev},
                  {"static_strictly_increasing", up},
                  {"time_varying_range", tv_range},
                  {"passed", o.passed}};
  o.csv = "s,G_static,G_quadrature,G_time_varying\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    o.csv += fmt(s[i]) + "," + fmt(closed[i]) + "," + fmt(quad.values[i]) + "," + fmt(tv[i]) + "\n";
  return o;
}

Json hessian_case_json(const checks::HessianCase& hc) {
  return Json{{"spec", ehrlab::to_json(hc.spec)},
              {"point", point_json(hc.point)},
              {"fd_error", hc.fd_error},
              {"hadamard_error", hc.hadamard_error}};
}

Outcome cmd_hessian_check(const RunConfig& c) {
  const checks::HessianReport r = checks::hessian_campaign(kind_of(c), count_or(c, 200), c.seed);
  Outcome o;
  o.passed = r.max_fd_error <= tol_or(c, 1e-6) && r.max_hadamard_error <= 1e-9;
  o.result = Json{{"kind", to_string(r.kind)},
                  {"count", r.count},
                  {"max_fd_error", r.max_fd_error},
                  {"max_hadamard_error", r.max_hadamard_error},
                  {"worst_fd", hessian_case_json(r.worst_fd)},
                  {"worst_hadamard", hessian_case_json(r.worst_hadamard)},
                  {"passed", o.passed}};
  o.csv = key_value_csv(o.result);
  return o;
}

Outcome cmd_verify_ehrhard(const RunConfig& c) {
  const CorrelationModel m = build_model(c.rho, c.lambda);
  const QuadRule rule = hermite_rule(c.order);
  Outcome o;
  checks::EndpointCampaign camp;
  if (c.hull) {
    camp = checks::hull_endpoint_campaign(m, count_or(c, 50), c.seed, rule);
    o.passed = camp.min_margin >= -tol_or(c, 1e-6);
  } else {
    camp = checks::halfline_endpoint_campaign(m, count_or(c, 20), c.seed, rule);
    o.passed = camp.max_abs_margin <= tol_or(c, 1e-8);
  }
  Json cases = Json::array();
  o.csv = "case,ef,eg,eh,lhs,rhs,margin\n";
  for (std::size_t i = 0; i < camp.cases.size(); ++i) {
    const EndpointReport& e = camp.cases[i];
    cases.push_back(Json{{"ef", e.ef}, {"eg", e.eg}, {"eh", e.eh}, {"lhs", e.lhs},
                         {"rhs", e.rhs}, {"margin", e.margin}});
    o.csv += std::to_string(i) + "," + fmt(e.ef) + "," + fmt(e.eg) + "," + fmt(e.eh) + "," +
             fmt(e.lhs) + "," + fmt(e.rhs) + "," + fmt(e.margin) + "\n";
  }
  o.result = Json{{"family", c.hull ? "hull" : "halfline_equality"},
                  {"count", camp.count},
                  {"min_margin", camp.min_margin},
                  {"max_abs_margin", camp.max_abs_margin},
                  {"cases", cases},
                  {"passed", o.passed}};
  return o;
}

Outcome cmd_verify_pl(const RunConfig& c) {
  const CorrelationModel m = build_model(c.rho, c.lambda);
  const QuadRule rule = hermite_rule(c.order);
  const checks::PlCampaign camp = checks::pl_endpoint_campaign(m, c.alpha, count_or(c, 30), c.seed, rule);
  Outcome o;
  o.passed = camp.min_gap >= -tol_or(c, 1e-8);
  Json cases = Json::array();
  o.csv = "case,ef,eg,lhs,rhs\n";
  for (std::size_t i = 0; i < camp.cases.size(); ++i) {
    const PlReport& r = camp.cases[i];
    cases.push_back(Json{{"ef", r.ef}, {"eg", r.eg}, {"lhs", r.lhs}, {"rhs", r.rhs}});
    o.csv += std::to_string(i) + "," + fmt(r.ef) + "," + fmt(r.eg) + "," + fmt(r.lhs) + "," +
             fmt(r.rhs) + "\n";
  }
  o.result = Json{{"alpha", c.alpha},
                  {"sigma2", m.sigma2},
                  {"count", camp.count},
                  {"min_gap", camp.min_gap},
                  {"cases", cases},
                  {"passed", o.passed}};
  return o;
}

Outcome cmd_necessity_probe(const RunConfig& c) {
  const CorrelationModel m = build_model(c.rho, c.lambda);
  const QuadRule rule = hermite_rule(c.order);
  const checks::ProbeCampaign camp = checks::probe_campaign(m, c.R, count_or(c, 10), c.seed, rule);
  Outcome o;
  o.passed = camp.all_negative && camp.max_rel_error <= tol_or(c, 0.05);
  Json cases = Json::array();
  o.csv = "case,xi,quadratic_form,estimate,rel_error\n";
  for (std::size_t i = 0; i < camp.cases.size(); ++i) {
    const checks::ProbeCase& pc = camp.cases[i];
    cases.push_back(Json{{"point", pc.point},
                         {"direction", pc.direction},
                         {"xi", pc.xi},
                         {"quadratic_form", pc.quadratic_form},
                         {"coefficient", pc.probe.coefficient},
                         {"estimate", pc.probe.quadratic_estimate},
                         {"coarse", pc.probe.coarse},
                         {"fine", pc.probe.fine},
                         {"rel_error", pc.rel_error}});
    o.csv += std::to_string(i) + "," + fmt(pc.xi) + "," + fmt(pc.quadratic_form) + "," +
             fmt(pc.probe.quadratic_estimate) + "," + fmt(pc.rel_error) + "\n";
  }
  o.result = Json{{"R", c.R},
                  {"count", camp.count},
                  {"all_negative", camp.all_negative},
                  {"max_rel_error", camp.max_rel_error},
                  {"cases", cases},
                  {"passed", o.passed}};
  return o;
}

Outcome cmd_bl_check(const RunConfig& c) {
  // Gauss-Hermite aliases the clamp kinks of the corpus.
  const QuadRule rule = trapezoid_rule();
  const checks::BlCampaign camp = checks::bl_campaign(count_or(c, 50), c.seed, rule);
  const double tol = tol_or(c, 1e-6);
  Outcome o;
  o.passed = camp.max_ratio <= 1.0 + tol && std::fabs(camp.halfline_ratio - 1.0) <= tol &&
             std::fabs(camp.halfline_min_ratio - 1.0) <= tol;
  o.result = Json{{"count", camp.count},
                  {"max_ratio", camp.max_ratio},
                  {"halfline_max_ratio", camp.halfline_ratio},
                  {"halfline_min_ratio", camp.halfline_min_ratio},
                  {"rule", "trapezoid, 2001 nodes on [-10, 10]"},
                  {"passed", o.passed}};
  o.csv = key_value_csv(o.result);
  return o;
}

using Handler = Outcome (*)(const RunConfig&);

struct Command {
  const char* name;
  const char* help;
  Handler fn;
};

const Command kCommands[] = {
    {"psd-scan", "Scan the condition matrix of J over the quantile cube", cmd_psd_scan},
    {"min-r", "Bisect for the smallest R whose scan passes", cmd_min_r},
    {"pl-check", "Check the Prekopa-Leindler condition matrix at (R, alpha)", cmd_pl_check},
    {"trace-g", "Trace G_{s,t} along s and check its monotonicity", cmd_trace_g},
    {"counterexample", "Half-line counterexample: static R against time-varying r(s)",
     cmd_counterexample},
    {"hessian-check", "Closed-form Hessians against finite differences", cmd_hessian_check},
    {"verify-ehrhard", "Ehrhard endpoint inequality on half-line or hull triples",
     cmd_verify_ehrhard},
    {"verify-pl", "Prekopa-Leindler endpoint inequality on random triples", cmd_verify_pl},
    {"necessity-probe", "Second-order response of E J at points with Xi > 0",
     cmd_necessity_probe},
    {"bl-check", "Bakry-Ledoux gradient bound on a random corpus", cmd_bl_check},
};

void add_options(CLI::App& sub, RunConfig& c, std::string& config_path, double& r_hi) {
  const std::string name = sub.get_name();
  auto is = [&](std::initializer_list<const char*> names) {
    return std::any_of(names.begin(), names.end(), [&](const char* n) { return name == n; });
  };
  sub.add_option("--config", config_path, "Load a RunConfig (or a report) as defaults");
  sub.add_option("--out", c.out, "Report path (default or -: stdout)");
  sub.add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  sub.add_option("--seed", c.seed, "Seed for random corpora");
  sub.add_option("--tol", c.tol, "Pass tolerance (negative: command default)");
  if (!is({"hessian-check", "bl-check"})) {
    sub.add_option("--rho", c.rho, "Correlation of X and Y");
    sub.add_option("--lambda", c.lambda, "Interpolation weight");
  }
  if (is({"psd-scan", "min-r", "hessian-check"}))
    sub.add_option("--kind", c.kind, "Functional J")
        ->check(CLI::IsMember({"pl", "ehrhard_static", "ehrhard_time_varying"}));
  if (is({"psd-scan", "min-r", "pl-check", "trace-g", "counterexample", "necessity-probe"}))
    sub.add_option("--R", c.R, "Scale of J");
  if (is({"psd-scan", "min-r", "pl-check", "verify-pl"}))
    sub.add_option("--alpha", c.alpha, "Exponent of z in the PL functional");
  if (is({"psd-scan", "min-r", "pl-check", "trace-g"})) {
    sub.add_option("--eps", c.eps, "Smoothing time / scan window 1/eps");
    sub.add_option("--grid", c.grid, "Scan points per axis")->check(CLI::Range(2, 1025));
    sub.add_option("--t-points", c.t_points, "Scan times (time-varying kind)")
        ->check(CLI::Range(2, 1025));
  }
  if (is({"psd-scan", "min-r", "pl-check"}))
    sub.add_option("--region", c.region, "Scan region")
        ->check(CLI::IsMember({"xi_nonpositive", "xi_positive", "all"}));
  if (name == "min-r") sub.add_option("--r-hi", r_hi, "Upper end of the R search");
  if (is({"trace-g", "counterexample", "verify-ehrhard", "verify-pl", "necessity-probe"}))
    sub.add_option("--order", c.order, "Gauss-Hermite order")->check(CLI::Range(1, kMaxQuadOrder));
  if (is({"hessian-check", "verify-ehrhard", "verify-pl", "necessity-probe", "bl-check"}))
    sub.add_option("--count", c.count, "Number of random cases (0: command default)");
  if (is({"trace-g", "counterexample"})) {
    sub.add_option("--a", c.a, "Threshold / level of f");
    sub.add_option("--b", c.b, "Threshold / level of g");
    sub.add_option("--c", c.c, "Threshold / level of h");
    sub.add_option("--t", c.t, "Total time");
    sub.add_option("--x0", c.x0, "Base point x");
    sub.add_option("--y0", c.y0, "Base point y");
    sub.add_option("--s-grid", c.s_grid, "Comma-separated s values")->delimiter(',');
  }
  if (name == "trace-g") {
    sub.add_option("--preset", c.preset, "Profile family")
        ->check(CLI::IsMember({"halfline", "constant", "bump", "hull", "file"}));
    sub.add_option("--mode", c.mode, "static or time_varying")
        ->check(CLI::IsMember({"static", "time_varying"}));
    sub.add_option("--expect", c.expect, "Verdict that counts as a pass")
        ->check(CLI::IsMember({"nonincreasing", "increasing", "constant", "none"}));
    sub.add_option("--delta", c.delta, "Clamp level for generated triples");
    sub.add_flag("--auto-r", c.auto_r, "Take R from min-r");
    sub.add_option("--f-file", c.f_file, "GridFunction json for f (preset file)");
    sub.add_option("--g-file", c.g_file, "GridFunction json for g (preset file)");
    sub.add_option("--h-file", c.h_file, "GridFunction json for h (preset file)");
  }
  if (name == "verify-ehrhard") sub.add_flag("--hull", c.hull, "Use hull-generated triples");
}

// Finds --config before option parsing so that its values act as defaults
// and explicit flags still override them.
std::string prescan_config(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

void emit(const std::string& text, const RunConfig& c, std::ostream& out) {
  if (c.out.empty() || c.out == "-") {
    out << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + c.out);
  f << text;
}

Json report(const RunConfig& c, bool passed) {
  return Json{{"schema", kSchema},
              {"version", kVersion},
              {"command", c.command},
              {"config", to_json(c)},
              {"passed", passed}};
}

// RFC 4180 field: quoted, inner quotes doubled.
std::string csv_quote(const std::string& s) {
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    apply_thread_env();
    const std::string path = prescan_config(argc, argv);
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open " + path);
      Json j;
      in >> j;
      cfg = run_config_from_json(j.contains("config") ? j.at("config") : j);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App app{"Numerical checks for Gaussian interpolation inequalities"};
  app.name("ehrlab");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", kVersion);
  std::string config_path;
  double r_hi = cfg.r_hi.value_or(0.0);
  std::vector<std::pair<CLI::App*, Handler>> subs;
  for (const Command& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    add_options(*sub, cfg, config_path, r_hi);
    subs.emplace_back(sub, cmd.fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  Handler handler = nullptr;
  for (auto& [sub, fn] : subs) {
    if (sub->parsed()) {
      cfg.command = sub->get_name();
      handler = fn;
      if (cfg.command == "min-r" && sub->count("--r-hi") > 0) cfg.r_hi = r_hi;
    }
  }
  if (!handler) {
    err << app.help();
    return kExitUsage;
  }

  try {
    Outcome o;
    Json rep;
    try {
      o = handler(cfg);
      rep = report(cfg, o.passed);
      rep["result"] = o.result;
    } catch (const SearchError& e) {
      o.passed = false;
      rep = report(cfg, false);
      rep["error"] = Json{{"type", "search"}, {"message", e.what()}, {"witness", e.witness()}};
      o.csv = "key,value\npassed,false\nerror," + csv_quote(e.what()) + "\n";
    } catch (const PrecisionError& e) {
      o.passed = false;
      rep = report(cfg, false);
      rep["error"] = Json{{"type", "precision"}, {"message", e.what()}};
      o.csv = "key,value\npassed,false\nerror," + csv_quote(e.what()) + "\n";
    }
    emit(cfg.format == "csv" ? o.csv : dump(rep), cfg, out);
    return o.passed ? kExitPass : kExitFail;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what();
    if (!e.witness().empty()) {
      err << " (witness";
      for (double w : e.witness()) err << " " << fmt(w);
      err << ")";
    }
    err << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run(int argc, char** argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace ehrlab::cli
