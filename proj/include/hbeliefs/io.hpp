#pragma once

// JSON config parsing, 17-digit JSON/CSV emitters.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hbeliefs/errors.hpp"
#include "hbeliefs/model.hpp"
#include "hbeliefs/simulate.hpp"
#include "hbeliefs/snapshot.hpp"

namespace hbeliefs {

/// Malformed or schema-violating config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.17g: round-trips every finite double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

inline double required_number(const nlohmann::json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' in " + where + " must be a number");
  return v.get<double>();
}

}  // namespace detail

inline EconomyParams economy_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(j, {"R", "sigma", "alpha_star", "delta0", "agents"}, "config");

  EconomyParams p;
  if (!j.contains("R")) throw ConfigError("missing key 'R' in config");
  const auto& r = j.at("R");
  if (r.is_number_integer()) {
    p.R = r.get<int>();
  } else if (r.is_number_float() && std::floor(r.get<double>()) == r.get<double>()) {
    p.R = static_cast<int>(r.get<double>());
  } else {
    throw ConfigError("model requires integer R >= 2 (R must be an integer)");
  }
  if (p.R < 2) throw ConfigError("model requires integer R >= 2 (got R = " + std::to_string(p.R) + ")");

  p.sigma = detail::required_number(j, "sigma", "config");
  p.alpha_star = detail::required_number(j, "alpha_star", "config");
  p.delta0 = detail::required_number(j, "delta0", "config");

  if (!j.contains("agents") || !j.at("agents").is_array()) throw ConfigError("'agents' must be an array");
  std::size_t idx = 0;
  for (const auto& a : j.at("agents")) {
    const std::string where = "agents[" + std::to_string(idx++) + "]";
    if (!a.is_object()) throw ConfigError(where + " must be an object");
    detail::reject_unknown_keys(a, {"rho", "alpha", "gamma"}, where);
    p.agents.push_back({detail::required_number(a, "rho", where), detail::required_number(a, "alpha", where),
                        detail::required_number(a, "gamma", where)});
  }
  try {
    p.check();
  } catch (const InvalidParameters& e) {
    throw ConfigError(e.what());
  }
  return p;
}

/// Throws ConfigError on unreadable file, parse failure or schema violation.
inline EconomyParams load_economy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error: ") + e.what());
  }
  return economy_from_json(j);
}

inline nlohmann::json economy_to_json(const EconomyParams& p) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : p.agents) agents.push_back({{"rho", a.rho}, {"alpha", a.alpha}, {"gamma", a.gamma}});
  return {{"R", p.R}, {"sigma", p.sigma}, {"alpha_star", p.alpha_star}, {"delta0", p.delta0}, {"agents", agents}};
}

inline nlohmann::json snapshot_to_json(const EquilibriumSnapshot& s) {
  return {
      {"t", s.state.t},
      {"x", s.state.x},
      {"zeta", s.zeta},
      {"dividend", s.dividend},
      {"consumptions", s.consumptions},
      {"wealths", s.wealths},
      {"stock_price", s.stock_price},
      {"pd_ratio", s.pd_ratio},
      {"rates",
       {{"alpha_bar", s.rates.alpha_bar},
        {"rho_bar", s.rates.rho_bar},
        {"riskless_rate", s.rates.riskless_rate},
        {"kappa", s.rates.kappa}}},
      {"stock",
       {{"alpha_tilde", s.stock.alpha_tilde},
        {"rho_tilde", s.stock.rho_tilde},
        {"vol", s.stock.vol},
        {"drift", s.stock.drift}}},
      {"agent_alpha_tilde", s.agent_alpha_tilde},
      {"portfolios", s.portfolios},
  };
}

inline EquilibriumSnapshot snapshot_from_json(const nlohmann::json& j) {
  EquilibriumSnapshot s;
  s.state = {j.at("t").get<double>(), j.at("x").get<double>()};
  s.zeta = j.at("zeta").get<double>();
  s.dividend = j.at("dividend").get<double>();
  s.consumptions = j.at("consumptions").get<std::vector<double>>();
  s.wealths = j.at("wealths").get<std::vector<double>>();
  s.stock_price = j.at("stock_price").get<double>();
  s.pd_ratio = j.at("pd_ratio").get<double>();
  const auto& r = j.at("rates");
  s.rates = {r.at("alpha_bar").get<double>(), r.at("rho_bar").get<double>(), r.at("riskless_rate").get<double>(),
             r.at("kappa").get<double>()};
  const auto& k = j.at("stock");
  s.stock = {k.at("alpha_tilde").get<double>(), k.at("rho_tilde").get<double>(), k.at("vol").get<double>(),
             k.at("drift").get<double>()};
  s.agent_alpha_tilde = j.at("agent_alpha_tilde").get<std::vector<double>>();
  s.portfolios = j.at("portfolios").get<std::vector<double>>();
  return s;
}

inline nlohmann::json oracle_report_to_json(const OracleReport& r) {
  return {{"estimate", r.estimate},   {"std_error", r.std_error}, {"closed_form", r.closed_form},
          {"z_score", r.z_score},     {"n_paths", r.n_paths},     {"truncation_bound", r.truncation_bound}};
}

/// Pretty JSON with every float printed at 17 significant digits.
/// Non-finite floats become null, as in nlohmann's own dump.
inline void write_json(std::ostream& os, const nlohmann::json& j, int indent = 2, int depth = 0) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? format_double(v) : "null");
      break;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        os << pad;
        write_json(os, j[i], indent, depth + 1);
        os << (i + 1 < j.size() ? ",\n" : "\n");
      }
      os << close_pad << ']';
      break;
    }
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      std::size_t i = 0;
      for (const auto& [key, value] : j.items()) {
        os << pad << nlohmann::json(key).dump() << ": ";
        write_json(os, value, indent, depth + 1);
        os << (++i < j.size() ? ",\n" : "\n");
      }
      os << close_pad << '}';
      break;
    }
    default:
      os << j.dump();
  }
  if (depth == 0) os << '\n';
}

/// Long-format CSV header: path_id, the aggregate columns, then c_j, w_j, pi_j per agent (1-based).
inline std::string series_csv_header(std::size_t n_agents) {
  std::string h = "path_id,t,x,delta,zeta,S,pd,r,kappa,sigma_S,mu_S";
  for (std::size_t j = 1; j <= n_agents; ++j) {
    const auto k = std::to_string(j);
    h += ",c_" + k + ",w_" + k + ",pi_" + k;
  }
  return h;
}

inline void write_series_csv_rows(std::ostream& os, std::uint64_t path_id,
                                  const std::vector<EquilibriumSnapshot>& rows) {
  for (const auto& s : rows) {
    os << path_id;
    for (double v : {s.state.t, s.state.x, s.dividend, s.zeta, s.stock_price, s.pd_ratio, s.rates.riskless_rate,
                     s.rates.kappa, s.stock.vol, s.stock.drift})
      os << ',' << format_double(v);
    for (std::size_t j = 0; j < s.consumptions.size(); ++j)
      os << ',' << format_double(s.consumptions[j]) << ',' << format_double(s.wealths[j]) << ','
         << format_double(s.portfolios[j]);
    os << '\n';
  }
}

}  // namespace hbeliefs
