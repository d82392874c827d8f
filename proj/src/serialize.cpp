#include "ehrlab/serialize.hpp"

#include <cmath>
#include <limits>

#include "ehrlab/errors.hpp"

namespace ehrlab {

Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double num_from(const Json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ConfigError("expected a number, got \"" + s + "\"");
  }
  if (!j.is_number()) throw ConfigError("expected a number");
  return j.get<double>();
}

Json to_json(const GridFunction& f) {
  return Json{{"lo", f.lo()},
              {"hi", f.hi()},
              {"n", f.n()},
              {"quantiles", f.quantiles()},
              {"limit_neg", f.limit_neg()},
              {"limit_pos", f.limit_pos()}};
}

GridFunction grid_function_from_json(const Json& j) {
  try {
    // Quantiles are the stored state and round-trip exactly; "values" is
    // accepted for hand-written files.
    const bool by_q = j.contains("quantiles");
    std::vector<double> v = j.at(by_q ? "quantiles" : "values").get<std::vector<double>>();
    if (j.contains("n") && j.at("n").get<std::size_t>() != v.size())
      throw ShapeError("GridFunction json: n does not match the number of samples");
    const double lo = j.at("lo").get<double>(), hi = j.at("hi").get<double>();
    const double ln = j.at("limit_neg").get<double>(), lp = j.at("limit_pos").get<double>();
    return by_q ? GridFunction::from_quantiles(lo, hi, std::move(v), ln, lp)
                : GridFunction::from_values(lo, hi, std::move(v), ln, lp);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("GridFunction json: ") + e.what());
  }
}

Json to_json(const CorrelationModel& m) {
  return Json{{"rho", m.rho}, {"lambda", m.lambda}, {"sigma2", m.sigma2}};
}

Json to_json(const JSpec& s) {
  Json j{{"kind", to_string(s.kind)}, {"rho", s.model.rho}, {"lambda", s.model.lambda},
         {"R", s.R}};
  if (s.kind == JKind::pl) j["alpha"] = s.alpha;
  if (s.kind == JKind::ehrhard_time_varying) j["eps"] = s.eps;
  return j;
}

JSpec jspec_from_json(const Json& j) {
  try {
    const CorrelationModel m = build_model(j.at("rho").get<double>(), j.at("lambda").get<double>());
    const JKind k = jkind_from_string(j.at("kind").get<std::string>().c_str());
    const double R = j.at("R").get<double>();
    switch (k) {
      case JKind::pl: return JSpec::pl(m, R, j.at("alpha").get<double>());
      case JKind::ehrhard_static: return JSpec::ehrhard_static(m, R);
      case JKind::ehrhard_time_varying:
        return JSpec::ehrhard_time_varying(m, R, j.at("eps").get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("JSpec json: ") + e.what());
  }
  throw ConfigError("JSpec json: unreachable");
}

Json to_json(const ScanDomain& d) {
  Json t = Json::array();
  for (double v : d.t_grid) t.push_back(num(v));
  return Json{{"eps", d.eps},
              {"grid_per_axis", d.grid_per_axis},
              {"t_grid", t},
              {"region", to_string(d.region)}};
}

ScanDomain scan_domain_from_json(const Json& j) {
  try {
    ScanDomain d;
    d.eps = j.at("eps").get<double>();
    d.grid_per_axis = j.at("grid_per_axis").get<int>();
    for (const auto& v : j.at("t_grid")) d.t_grid.push_back(num_from(v));
    d.region = scan_region_from_string(j.at("region").get<std::string>().c_str());
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("ScanDomain json: ") + e.what());
  }
}

Json to_json(const ScanReport& r) {
  const ScanWitness& w = r.witness;
  return Json{{"spec", to_json(r.spec)},
              {"domain", to_json(r.domain)},
              {"points_checked", r.points_checked},
              {"min_eigenvalue", num(r.min_eigenvalue)},
              {"scale", num(r.scale)},
              {"min_normalized", num(r.min_normalized)},
              {"witness",
               Json{{"u", w.u}, {"v", w.v}, {"w", w.w}, {"t", num(w.t)},
                    {"x", w.x}, {"y", w.y}, {"z", w.z}, {"vector", w.vector}}},
              {"passed", r.passed},
              {"grid_spacing", r.grid_spacing}};
}

Json to_json(const MinRResult& r) {
  Json ladder = Json::array();
  for (const auto& [R, v] : r.ladder) ladder.push_back(Json{{"R", R}, {"min_eig", num(v)}});
  return Json{{"R_min", r.R_min},
              {"R_infeasible", r.R_infeasible},
              {"analytic_bound", r.analytic_bound},
              {"scans", r.scans},
              {"ladder", ladder},
              {"at_min", to_json(r.at_min)}};
}

Json to_json(const TraceResult& r) {
  Json j{{"mode", to_string(r.mode)},
         {"t", r.t},
         {"x0", r.x0},
         {"y0", r.y0},
         {"s_grid", r.s_grid},
         {"values", r.values},
         {"verdict", r.nonincreasing ? "nonincreasing" : "violated"},
         {"tolerance", r.tolerance},
         {"max_order_gap", r.max_order_gap}};
  if (r.violation_index) j["violation_index"] = *r.violation_index;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace ehrlab
