#include "netdiff/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "netdiff/parallel.hpp"
#include "netdiff/rng.hpp"

namespace netdiff {

std::string_view to_string(GraphModel g) noexcept {
  return g == GraphModel::ErdosRenyi ? "er" : "ba";
}
std::string_view to_string(Design d) noexcept {
  return d == Design::LowDimensional ? "low" : "high";
}
std::string_view to_string(Pairing p) noexcept {
  return p == Pairing::Plain ? "plain" : "irreversible";
}
std::string_view to_string(FitMode f) noexcept { return f == FitMode::Mle ? "mle" : "lasso"; }

void McConfig::validate() const {
  if (n < 2) throw Error(ErrorCode::InvalidSize, "cell needs n >= 2");
  if (reps < 1) throw Error(ErrorCode::InvalidSize, "cell needs reps >= 1");
  if (truth_sims < 1) throw Error(ErrorCode::InvalidSize, "cell needs truth_sims >= 1");
  if (design == Design::LowDimensional && p != 5) {
    throw Error(ErrorCode::InvalidArgument, "the low-dimensional design has p = 5");
  }
  if (design == Design::HighDimensional && p < 5) {
    throw Error(ErrorCode::InvalidArgument, "the high-dimensional design needs p >= 5");
  }
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "drop_fraction must lie in [0, 1)");
  }
  if (alphas.empty()) throw Error(ErrorCode::InvalidAlpha, "no alpha levels given");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw Error(ErrorCode::InvalidAlpha, "alpha must be in (0, 1)");
  }
  if (graph == GraphModel::BarabasiAlbert &&
      (graph_param < 1.0 || graph_param != std::floor(graph_param))) {
    throw Error(ErrorCode::InvalidArgument, "B-A parameter m must be a positive integer");
  }
  if (fit == FitMode::Lasso && lasso_folds < 2) {
    throw Error(ErrorCode::InvalidArgument, "LASSO cross-validation needs folds >= 2");
  }
}

CellState prepare_cell(const McConfig& cfg) {
  cfg.validate();
  CellState cell;
  cell.cfg = cfg;
  cell.spec = cfg.design == Design::LowDimensional ? DgpSpec::low_dimensional(cfg.delta)
                                                   : DgpSpec::high_dimensional(cfg.delta, cfg.p);
  cell.causal = cfg.graph == GraphModel::ErdosRenyi
                    ? erdos_renyi(cfg.n, cfg.graph_param, cfg.seed)
                    : barabasi_albert(cfg.n, static_cast<std::size_t>(cfg.graph_param), cfg.seed);
  cell.observed =
      cfg.drop_fraction > 0.0 ? drop_edges(cell.causal, cfg.drop_fraction, cfg.seed) : cell.causal;
  cell.x = gen_covariates(cfg.n, cfg.p, cfg.seed);
  cell.truth = true_diffusion(cell.causal, cell.x, cell.spec, cfg.truth_sims, cfg.seed, {},
                              cfg.threads);
  cell.causal_degrees = degree_stats(cell.causal);
  cell.observed_degrees = degree_stats(cell.observed);
  cell.pairs = overlap_pairs(cell.observed);
  return cell;
}

RepResult run_replication(const CellState& cell, std::size_t rep) {
  const auto& cfg = cell.cfg;
  const std::uint64_t rep_seed = derive_seed(cfg.seed, {stream::kReplication, rep});
  RepResult out;
  try {
    const Panel panel = gen_panel(cell.causal, cell.x, cell.spec, rep_seed);
    EstimateOptions opts;
    opts.fit.fit = cfg.fit;
    opts.fit.y0_model =
        cell.spec.y0_mode == Y0Mode::FixedBernoulli ? Y0Model::Constant : Y0Model::Probit;
    opts.fit.irreversible = cell.spec.irreversible;
    opts.fit.lasso.folds = cfg.lasso_folds;
    opts.draws = cfg.draws;
    opts.seed = derive_seed(rep_seed, {stream::kDraws});
    const auto fm = fit_means(panel, cell.observed, opts);
    for (Variant v : {Variant::Plain, Variant::Irreversible}) {
      const auto core = infer(fm, cell.observed, v, &cell.pairs);
      const auto k = static_cast<std::size_t>(v);
      out.estimate[k] = core.estimate;
      out.sigma_plus[k] = core.sigma_plus();
      out.fallback[k] = core.var.fallback_used;
    }
    out.ok = true;
  } catch (const Error& e) {
    out = RepResult{};
    out.failure = std::string(to_string(e.code()));
  }
  return out;
}

McReport summarize(const CellState& cell, const std::vector<RepResult>& results) {
  McReport rep;
  rep.cfg = cell.cfg;
  rep.truth = cell.truth;
  rep.causal_degrees = cell.causal_degrees;
  rep.observed_degrees = cell.observed_degrees;
  for (const auto& r : results) {
    if (r.ok) {
      ++rep.completed;
    } else {
      ++rep.failed;
      ++rep.failures[r.failure];
    }
  }
  const std::size_t n = cell.cfg.n;
  for (std::size_t k = 0; k < 2; ++k) {
    auto& ps = rep.pairings[k];
    ps.pairing = k == 0 ? Pairing::Plain : Pairing::Irreversible;
    ps.target = k == 0 ? cell.truth.d : cell.truth.d_irr;
    ps.by_alpha.resize(cell.cfg.alphas.size());
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& r : results) {
      if (!r.ok) continue;
      sum += r.estimate[k];
      sum_sq += r.estimate[k] * r.estimate[k];
      ps.fallback_count += r.fallback[k] ? 1 : 0;
      for (std::size_t a = 0; a < cell.cfg.alphas.size(); ++a) {
        const double alpha = cell.cfg.alphas[a];
        const auto ci = confidence_interval(r.estimate[k], r.sigma_plus[k], n, alpha);
        const double clb = confidence_lower_bound(r.estimate[k], r.sigma_plus[k], n, alpha);
        auto& s = ps.by_alpha[a];
        s.coverage += ci.contains(ps.target) ? 1.0 : 0.0;
        s.mean_length += ci.length();
        s.mean_clb += clb;
        s.clb_coverage += ps.target >= clb ? 1.0 : 0.0;
      }
    }
    const double m = static_cast<double>(rep.completed);
    for (std::size_t a = 0; a < cell.cfg.alphas.size(); ++a) {
      auto& s = ps.by_alpha[a];
      s.alpha = cell.cfg.alphas[a];
      if (m > 0) {
        s.coverage /= m;
        s.mean_length /= m;
        s.mean_clb /= m;
        s.clb_coverage /= m;
      }
    }
    if (m > 0) ps.mean_estimate = sum / m;
    if (m > 1) ps.sd_estimate = std::sqrt(std::max(0.0, (sum_sq - m * ps.mean_estimate * ps.mean_estimate) / (m - 1)));
  }
  return rep;
}

namespace {

using nlohmann::json;

// Everything that determines the replication results; a checkpoint is only
// resumed when this matches.
std::string result_key(const McConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17) << to_string(c.graph) << '|' << c.graph_param << '|' << c.n << '|'
     << c.delta << '|' << to_string(c.design) << '|' << to_string(c.fit) << '|' << c.p << '|'
     << c.truth_sims << '|' << c.draws << '|' << c.seed << '|' << c.drop_fraction << '|'
     << c.lasso_folds;
  return os.str();
}

json to_json(const RepResult& r) {
  if (!r.ok) return json{{"ok", false}, {"failure", r.failure}};
  return json{{"ok", true},
              {"estimate", r.estimate},
              {"sigma_plus", r.sigma_plus},
              {"fallback", r.fallback}};
}

RepResult rep_from_json(const json& j) {
  RepResult r;
  r.ok = j.at("ok").get<bool>();
  if (!r.ok) {
    r.failure = j.at("failure").get<std::string>();
    return r;
  }
  r.estimate = j.at("estimate").get<std::array<double, 2>>();
  r.sigma_plus = j.at("sigma_plus").get<std::array<double, 2>>();
  r.fallback = j.at("fallback").get<std::array<bool, 2>>();
  return r;
}

std::size_t load_checkpoint(const std::filesystem::path& file, const McConfig& cfg,
                            std::vector<RepResult>& results) {
  std::ifstream in(file);
  if (!in) return 0;
  json j;
  try {
    in >> j;
  } catch (const json::exception&) {
    return 0;
  }
  if (j.value("key", std::string{}) != result_key(cfg)) return 0;
  const auto& arr = j.at("results");
  const std::size_t done = std::min(arr.size(), results.size());
  for (std::size_t i = 0; i < done; ++i) results[i] = rep_from_json(arr[i]);
  return done;
}

void write_checkpoint(const std::filesystem::path& file, const McConfig& cfg,
                      const std::vector<RepResult>& results, std::size_t done) {
  json arr = json::array();
  for (std::size_t i = 0; i < done; ++i) arr.push_back(to_json(results[i]));
  const json j{{"key", result_key(cfg)}, {"results", std::move(arr)}};
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write checkpoint " + tmp.string());
    out << j.dump();
    if (!out) throw Error(ErrorCode::Io, "short write on checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace

McReport run_mc(const McConfig& cfg, const McRunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const CellState cell = prepare_cell(cfg);
  std::vector<RepResult> results(cfg.reps);

  std::filesystem::path ckpt;
  std::size_t done = 0;
  if (!opts.checkpoint_dir.empty()) {
    std::filesystem::create_directories(opts.checkpoint_dir);
    ckpt = opts.checkpoint_dir / (cfg.id.empty() ? std::string("cell") : cfg.id);
    ckpt += ".ckpt.json";
    done = load_checkpoint(ckpt, cfg, results);
  }
  const std::size_t fail_limit = cfg.reps / 10;
  auto failures = [&](std::size_t upto) {
    std::size_t f = 0;
    for (std::size_t i = 0; i < upto; ++i) f += results[i].ok ? 0 : 1;
    return f;
  };

  while (done < cfg.reps) {
    const std::size_t end = std::min(cfg.reps, done + kCheckpointEvery);
    parallel_for(end - done, cfg.threads,
                 [&](std::size_t k) { results[done + k] = run_replication(cell, done + k); });
    done = end;
    if (!ckpt.empty()) write_checkpoint(ckpt, cfg, results, done);
    if (opts.progress) opts.progress(cfg, done);
    if (failures(done) > fail_limit) {
      throw Error(ErrorCode::McAborted,
                  "more than 10% of replications failed in cell " + cfg.id);
    }
  }

  auto rep = summarize(cell, results);
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace netdiff
