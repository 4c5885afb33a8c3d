#include "netdiff/report_json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "netdiff/csv.hpp"
#include "netdiff/error.hpp"

namespace netdiff {

using nlohmann::json;

json to_json(const DegreeStats& s) {
  return json{{"d_mx", s.d_mx},         {"d_av", s.d_av},         {"max_deg", s.max_deg},
              {"avg_deg", s.avg_deg},   {"median_deg", s.median_deg}};
}

json to_json(const FitDiagnostics& d) {
  json j{{"iterations", d.iterations}, {"grad_norm", d.grad_norm}, {"converged", d.converged}};
  if (!d.lambda_grid.empty()) {
    j["lambda_grid"] = d.lambda_grid;
    j["cv_loglik"] = d.cv_loglik;
  }
  return j;
}

json to_json(const MeanModel& m) {
  return json{{"link", "probit"},
              {"gamma_hat", m.gamma_hat},
              {"y0_intercept_only", m.y0_intercept_only},
              {"intercept1", m.intercept1},
              {"delta_hat", m.delta_hat},
              {"own_hat", m.own_hat},
              {"alpha_hat", m.alpha_hat},
              {"beta_hat", m.beta_hat},
              {"irreversible", m.irreversible},
              {"lasso_lambda", m.lasso_lambda},
              {"period0_diagnostics", to_json(m.period0_diag)},
              {"period1_diagnostics", to_json(m.period1_diag)}};
}

json to_json(const TrueDiffusion& t) {
  return json{{"d", t.d}, {"d_irr", t.d_irr}, {"se_d", t.se_d}, {"se_d_irr", t.se_d_irr},
              {"sims", t.sims}};
}

json to_json(const DiffusionReport& r, bool include_model) {
  json j{{"estimate", r.estimate},
         {"sigma_plus", r.sigma_plus},
         {"ci_lower", r.ci.lower},
         {"ci_upper", r.ci.upper},
         {"clb", r.clb},
         {"alpha", r.alpha},
         {"variant", std::string(to_string(r.variant))},
         {"n", r.n},
         {"d_mx", r.degrees.d_mx},
         {"d_av", r.degrees.d_av},
         {"fallback_used", r.fallback_used},
         {"draws", r.draws},
         {"sigma2_g", r.sigma2_g},
         {"sigma2_1g", r.sigma2_1g},
         {"v2", r.v2},
         {"max_deg", r.degrees.max_deg},
         {"avg_deg", r.degrees.avg_deg},
         {"rate_diagnostic", r.rate_diagnostic}};
  if (include_model) j["model"] = to_json(r.model);
  return j;
}

std::string summary_line(const DiffusionReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "C=%.4f  %g%% CI [%.4f, %.4f]  CLB %.4f  (%s, n=%zu%s)",
                r.estimate, 100.0 * (1.0 - r.alpha), r.ci.lower, r.ci.upper, r.clb,
                std::string(to_string(r.variant)).c_str(), r.n,
                r.fallback_used ? ", diagonal variance fallback" : "");
  return buf;
}

json to_json(const McConfig& c) {
  return json{{"id", c.id},
              {"graph", std::string(to_string(c.graph))},
              {"graph_param", c.graph_param},
              {"n", c.n},
              {"delta", c.delta},
              {"design", std::string(to_string(c.design))},
              {"fit", std::string(to_string(c.fit))},
              {"p", c.p},
              {"reps", c.reps},
              {"truth_sims", c.truth_sims},
              {"alphas", c.alphas},
              {"draws", c.draws},
              {"seed", c.seed},
              {"pairing", std::string(to_string(c.pairing))},
              {"drop_fraction", c.drop_fraction},
              {"folds", c.lasso_folds}};
}

namespace {

json to_json(const PairingSummary& p) {
  json by = json::array();
  for (const auto& a : p.by_alpha) {
    by.push_back(json{{"alpha", a.alpha},
                      {"coverage", a.coverage},
                      {"mean_length", a.mean_length},
                      {"mean_clb", a.mean_clb},
                      {"clb_coverage", a.clb_coverage}});
  }
  return json{{"target", p.target},
              {"mean_estimate", p.mean_estimate},
              {"sd_estimate", p.sd_estimate},
              {"fallback_count", p.fallback_count},
              {"by_alpha", std::move(by)}};
}

}  // namespace

json to_json(const McReport& r) {
  return json{{"id", r.cfg.id},
              {"config", to_json(r.cfg)},
              {"truth", to_json(r.truth)},
              {"degrees", {{"causal", to_json(r.causal_degrees)},
                           {"observed", to_json(r.observed_degrees)}}},
              {"completed", r.completed},
              {"failed", r.failed},
              {"failures", r.failures},
              {"pairing", std::string(to_string(r.cfg.pairing))},
              {"results", {{"plain", to_json(r.pairings[0])},
                           {"irreversible", to_json(r.pairings[1])}}},
              {"seconds", r.seconds}};
}

namespace {

[[noreturn]] void schema_fail(const std::string& what) {
  throw Error(ErrorCode::SchemaError, "mc config: " + what);
}

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    schema_fail("bad value for '" + key + "'");
  }
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    schema_fail("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

void apply(McConfig& c, const std::string& key, const json& v) {
  if (key == "id") {
    c.id = get_as<std::string>(v, key);
  } else if (key == "graph") {
    const auto g = get_as<std::string>(v, key);
    if (g == "er") {
      c.graph = GraphModel::ErdosRenyi;
    } else if (g == "ba") {
      c.graph = GraphModel::BarabasiAlbert;
    } else {
      schema_fail("graph must be 'er' or 'ba'");
    }
  } else if (key == "lambda" || key == "m" || key == "graph_param") {
    c.graph_param = get_as<double>(v, key);
  } else if (key == "n") {
    c.n = get_count(v, key);
  } else if (key == "delta") {
    c.delta = get_as<double>(v, key);
  } else if (key == "design") {
    const auto d = get_as<std::string>(v, key);
    if (d == "low") {
      c.design = Design::LowDimensional;
    } else if (d == "high") {
      c.design = Design::HighDimensional;
    } else {
      schema_fail("design must be 'low' or 'high'");
    }
  } else if (key == "fit") {
    const auto f = get_as<std::string>(v, key);
    if (f == "mle") {
      c.fit = FitMode::Mle;
    } else if (f == "lasso") {
      c.fit = FitMode::Lasso;
    } else {
      schema_fail("fit must be 'mle' or 'lasso'");
    }
  } else if (key == "p") {
    c.p = get_count(v, key);
  } else if (key == "reps") {
    c.reps = get_count(v, key);
  } else if (key == "truth_sims") {
    c.truth_sims = get_count(v, key);
  } else if (key == "alphas") {
    c.alphas = get_as<std::vector<double>>(v, key);
  } else if (key == "draws") {
    c.draws = get_count(v, key);
  } else if (key == "seed") {
    c.seed = get_as<std::uint64_t>(v, key);
  } else if (key == "pairing") {
    const auto p = get_as<std::string>(v, key);
    if (p == "plain") {
      c.pairing = Pairing::Plain;
    } else if (p == "irreversible" || p == "irr") {
      c.pairing = Pairing::Irreversible;
    } else {
      schema_fail("pairing must be 'plain' or 'irreversible'");
    }
  } else if (key == "drop_fraction") {
    c.drop_fraction = get_as<double>(v, key);
  } else if (key == "folds") {
    c.lasso_folds = get_count(v, key);
  } else if (key == "threads") {
    c.threads = get_count(v, key);
  } else {
    schema_fail("unknown key '" + key + "'");
  }
}

std::string param_tag(double v) {
  std::string s = csv::format_double(v);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

std::string auto_id(const McConfig& c) {
  std::string id = std::string(to_string(c.graph)) + param_tag(c.graph_param) + "-n" +
                   std::to_string(c.n) + "-d" + param_tag(c.delta);
  if (c.fit == FitMode::Lasso) id += "-lasso";
  if (c.drop_fraction > 0.0) id += "-drop" + param_tag(c.drop_fraction);
  return id;
}

}  // namespace

std::vector<McConfig> mc_grid_from_json(const json& root) {
  if (!root.is_object()) schema_fail("top level must be a table/object");
  for (const auto& [k, v] : root.items()) {
    if (k != "defaults" && k != "cells") schema_fail("unknown top-level key '" + k + "'");
  }
  const json defaults = root.value("defaults", json::object());
  if (!root.contains("cells") || !root["cells"].is_array()) schema_fail("'cells' array required");

  std::vector<McConfig> out;
  static const char* const kAxes[] = {"lambda", "m", "graph_param", "n", "delta"};
  for (const auto& cell : root["cells"]) {
    if (!cell.is_object()) schema_fail("each cell must be a table/object");
    json merged = defaults;
    for (const auto& [k, v] : cell.items()) merged[k] = v;

    std::vector<json> combos{merged};
    for (const char* axis : kAxes) {
      if (!merged.contains(axis) || !merged[axis].is_array()) continue;
      std::vector<json> next;
      for (const auto& base : combos) {
        for (const auto& v : merged[axis]) {
          json c = base;
          c[axis] = v;
          next.push_back(std::move(c));
        }
      }
      combos = std::move(next);
    }
    for (const auto& combo : combos) {
      McConfig c;
      for (const auto& [k, v] : combo.items()) apply(c, k, v);
      if (c.design == Design::HighDimensional && !combo.contains("p")) c.p = 500;
      const bool expanded = combos.size() > 1;
      if (c.id.empty()) {
        c.id = auto_id(c);
      } else if (expanded) {
        c.id += "-" + auto_id(c);
      }
      c.validate();
      out.push_back(std::move(c));
    }
  }
  std::set<std::string> ids;
  for (const auto& c : out) {
    if (!ids.insert(c.id).second) schema_fail("duplicate cell id '" + c.id + "'");
  }
  return out;
}

std::string mc_csv(const std::vector<McReport>& reports) {
  std::set<double> alpha_set;
  for (const auto& r : reports) alpha_set.insert(r.cfg.alphas.begin(), r.cfg.alphas.end());
  const std::vector<double> alphas(alpha_set.rbegin(), alpha_set.rend());
  auto level = [](double a) { return csv::format_double(std::round((1.0 - a) * 1e6) / 1e4); };

  std::string out =
      "id,graph,param,n,delta,fit,p,pairing,reps,completed,failed,max_deg,avg_deg,true_d,"
      "true_d_irr,target,mean_estimate";
  for (double a : alphas) {
    const auto l = level(a);
    out += ",coverage_" + l + ",length_" + l + ",clb_" + l + ",clb_cover_" + l;
  }
  out += '\n';
  for (const auto& r : reports) {
    const auto& p = r.primary();
    const auto& c = r.cfg;
    out += c.id + ',' + std::string(to_string(c.graph)) + ',' + csv::format_double(c.graph_param) +
           ',' + std::to_string(c.n) + ',' + csv::format_double(c.delta) + ',' +
           std::string(to_string(c.fit)) + ',' + std::to_string(c.p) + ',' +
           std::string(to_string(c.pairing)) + ',' + std::to_string(c.reps) + ',' +
           std::to_string(r.completed) + ',' + std::to_string(r.failed) + ',' +
           std::to_string(r.causal_degrees.max_deg) + ',' +
           csv::format_double(r.causal_degrees.avg_deg) + ',' + csv::format_double(r.truth.d) +
           ',' + csv::format_double(r.truth.d_irr) + ',' + csv::format_double(p.target) + ',' +
           csv::format_double(p.mean_estimate);
    for (double a : alphas) {
      const auto it = std::find_if(p.by_alpha.begin(), p.by_alpha.end(),
                                   [&](const AlphaSummary& s) { return s.alpha == a; });
      if (it == p.by_alpha.end()) {
        out += ",,,,";
      } else {
        out += ',' + csv::format_double(it->coverage) + ',' + csv::format_double(it->mean_length) +
               ',' + csv::format_double(it->mean_clb) + ',' + csv::format_double(it->clb_coverage);
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace netdiff
