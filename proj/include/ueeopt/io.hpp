#ifndef UEEOPT_IO_HPP
#define UEEOPT_IO_HPP

#include "ueeopt/baselines.hpp"
#include "ueeopt/outer.hpp"
#include "ueeopt/scenario.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ueeopt {

enum class OutputFormat { kCsv, kJsonl };

struct RunConfig {
  ScenarioSpec scenario{};
  NewtonConfig newton{};
  BaselineConfig baselines{};
  std::string output_path;
  OutputFormat format = OutputFormat::kCsv;
};

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(Real v) {
  if (std::isnan(v)) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
  }
}

inline Real get_num(const json& j, const char* key, Real fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return j.at(key).get<Real>();
}

inline UtilitySpec parse_utility(const json& j) {
  if (!j.is_object()) throw ConfigError("config: utility must be an object");
  if (j.contains("preset")) {
    reject_unknown_keys(j, {"preset", "y"}, "utility");
    return preset_utility(j.at("preset").get<std::string>(), get_num(j, "y", 1.0)).spec;
  }
  reject_unknown_keys(j, {"type", "kappa", "a", "b", "c", "d"}, "utility");
  const std::string type = j.value("type", "type3");
  const Real kappa = get_num(j, "kappa", 1.0);
  const Real a = get_num(j, "a", 0.5);
  if (type == "type1") return UtilitySpec::type1(kappa, a, get_num(j, "b", 1.0));
  if (type == "type2") return UtilitySpec::type2(kappa, a, get_num(j, "c", 0.0));
  if (type == "type3") return UtilitySpec::type3(kappa, a, get_num(j, "d", 0.0));
  throw ConfigError("config: unknown utility type '" + type + "'");
}

inline ScenarioSpec parse_scenario(const json& j) {
  ScenarioSpec s;
  reject_unknown_keys(j,
                      {"n_users", "b_total_hz", "distance_range_km", "shadow_std_db",
                       "noise_psd_dbm_hz", "p_cir_dbm", "r_min_bps", "r_e_bps", "weight",
                       "utility", "seed", "groups"},
                      "scenario");
  s.n_users = static_cast<int>(get_num(j, "n_users", s.n_users));
  s.b_total_hz = get_num(j, "b_total_hz", s.b_total_hz);
  if (j.contains("distance_range_km")) {
    const auto& r = j.at("distance_range_km");
    if (!r.is_array() || r.size() != 2)
      throw ConfigError("config: distance_range_km must be [min, max]");
    s.d_min_km = r[0].get<Real>();
    s.d_max_km = r[1].get<Real>();
  }
  s.shadow_std_db = get_num(j, "shadow_std_db", s.shadow_std_db);
  s.noise_psd_dbm_hz = get_num(j, "noise_psd_dbm_hz", s.noise_psd_dbm_hz);
  s.p_cir_dbm = get_num(j, "p_cir_dbm", s.p_cir_dbm);
  s.r_min_bps = get_num(j, "r_min_bps", s.r_min_bps);
  s.r_e_bps = get_num(j, "r_e_bps", s.r_e_bps);
  s.weight = get_num(j, "weight", s.weight);
  if (j.contains("utility")) s.utility = parse_utility(j.at("utility"));
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("groups")) {
    for (const auto& gj : j.at("groups")) {
      reject_unknown_keys(gj, {"weight", "r_e_bps", "r_e_factor", "utility"}, "groups[]");
      ScenarioSpec::Group g;
      if (gj.contains("weight")) g.weight = gj.at("weight").get<Real>();
      if (gj.contains("r_e_bps")) g.r_e_bps = gj.at("r_e_bps").get<Real>();
      if (gj.contains("r_e_factor")) g.r_e_factor = gj.at("r_e_factor").get<Real>();
      if (gj.contains("utility")) g.utility = parse_utility(gj.at("utility"));
      s.groups.push_back(std::move(g));
    }
  }
  s.validate();
  return s;
}

} // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  using detail::get_num;
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  // domain violations in configured values surface as config errors
  try {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  detail::reject_unknown_keys(j, {"scenario", "newton", "baselines", "root", "output"}, "config");

  RunConfig cfg;
  if (j.contains("scenario")) cfg.scenario = detail::parse_scenario(j.at("scenario"));
  if (j.contains("newton")) {
    const auto& n = j.at("newton");
    detail::reject_unknown_keys(n, {"xi", "epsilon", "phi_tol", "max_outer", "max_linesearch"},
                                "newton");
    cfg.newton.xi = get_num(n, "xi", cfg.newton.xi);
    cfg.newton.epsilon = get_num(n, "epsilon", cfg.newton.epsilon);
    cfg.newton.phi_tol = get_num(n, "phi_tol", cfg.newton.phi_tol);
    cfg.newton.max_outer = static_cast<int>(get_num(n, "max_outer", cfg.newton.max_outer));
    cfg.newton.max_linesearch =
        static_cast<int>(get_num(n, "max_linesearch", cfg.newton.max_linesearch));
    cfg.newton.validate();
  }
  if (j.contains("baselines")) {
    const auto& b = j.at("baselines");
    detail::reject_unknown_keys(b, {"fixed_power_w", "ao_rel_tol", "ao_max_rounds"}, "baselines");
    cfg.baselines.fixed_power = get_num(b, "fixed_power_w", cfg.baselines.fixed_power);
    cfg.baselines.ao_rel_tol = get_num(b, "ao_rel_tol", cfg.baselines.ao_rel_tol);
    cfg.baselines.ao_max_rounds =
        static_cast<int>(get_num(b, "ao_max_rounds", cfg.baselines.ao_max_rounds));
    cfg.baselines.validate();
  }
  if (j.contains("root")) {
    const auto& r = j.at("root");
    detail::reject_unknown_keys(r, {"abs_tol", "rel_tol", "max_iter"}, "root");
    RootConfig rc;
    rc.abs_tol = get_num(r, "abs_tol", rc.abs_tol);
    rc.rel_tol = get_num(r, "rel_tol", rc.rel_tol);
    rc.max_iter = static_cast<int>(get_num(r, "max_iter", rc.max_iter));
    rc.validate();
    cfg.newton.inner_cfg = rc;
    cfg.baselines.root_cfg = rc;
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::reject_unknown_keys(o, {"path", "format"}, "output");
    if (o.contains("path")) cfg.output_path = o.at("path").get<std::string>();
    const std::string fmt = o.value("format", "csv");
    if (fmt == "csv")
      cfg.format = OutputFormat::kCsv;
    else if (fmt == "jsonl")
      cfg.format = OutputFormat::kJsonl;
    else
      throw ConfigError("config: output format must be csv or jsonl");
  }
  return cfg;
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

/// One output record. The column set is fixed; the per-user fields stay
/// empty on aggregate rows.
struct ResultRow {
  std::string run_id;
  std::string algorithm;
  std::string axis;
  Real axis_value = std::numeric_limits<Real>::quiet_NaN();
  int n_users = 0;
  Real objective = std::numeric_limits<Real>::quiet_NaN();
  Real wall_time_s = std::numeric_limits<Real>::quiet_NaN();
  int outer_iters = 0;
  Real kkt_residual = std::numeric_limits<Real>::quiet_NaN();
  std::optional<std::string> user_id;
  std::optional<Real> p_w;
  std::optional<Real> b_hz;
  std::optional<Real> uee;
  std::vector<double> phi_norm_trace; // jsonl only
};

inline void write_rows(std::ostream& out, const std::vector<ResultRow>& rows,
                       OutputFormat format) {
  if (format == OutputFormat::kCsv) {
    out << "run_id,algorithm,axis,axis_value,n_users,objective,wall_time_s,outer_iters,"
           "kkt_residual,user_id,p_w,b_hz,uee\n";
    for (const auto& r : rows) {
      out << r.run_id << ',' << r.algorithm << ',' << r.axis << ','
          << format_double(r.axis_value) << ',' << r.n_users << ',' << format_double(r.objective)
          << ',' << format_double(r.wall_time_s) << ',' << r.outer_iters << ','
          << format_double(r.kkt_residual) << ',' << (r.user_id ? *r.user_id : "") << ','
          << (r.p_w ? format_double(*r.p_w) : "") << ',' << (r.b_hz ? format_double(*r.b_hz) : "")
          << ',' << (r.uee ? format_double(*r.uee) : "") << '\n';
    }
    return;
  }
  for (const auto& r : rows) {
    nlohmann::json j;
    j["run_id"] = r.run_id;
    j["algorithm"] = r.algorithm;
    j["axis"] = r.axis;
    j["axis_value"] = r.axis_value;
    j["n_users"] = r.n_users;
    j["objective"] = r.objective;
    j["wall_time_s"] = r.wall_time_s;
    j["outer_iters"] = r.outer_iters;
    if (!std::isnan(r.kkt_residual)) j["kkt_residual"] = r.kkt_residual;
    if (r.user_id) j["user_id"] = *r.user_id;
    if (r.p_w) j["p_w"] = *r.p_w;
    if (r.b_hz) j["b_hz"] = *r.b_hz;
    if (r.uee) j["uee"] = *r.uee;
    if (!r.phi_norm_trace.empty()) j["phi_norm_trace"] = r.phi_norm_trace;
    out << j.dump() << '\n';
  }
}

} // namespace ueeopt

#endif
