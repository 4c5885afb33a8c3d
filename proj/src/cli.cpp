#include "netdiff/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <vector>

#include "netdiff/csv.hpp"
#include "netdiff/dgp.hpp"
#include "netdiff/error.hpp"
#include "netdiff/graph.hpp"
#include "netdiff/inference.hpp"
#include "netdiff/ingest.hpp"
#include "netdiff/montecarlo.hpp"
#include "netdiff/report_json.hpp"
#include "netdiff/rng.hpp"
#include "netdiff/toml_lite.hpp"

namespace netdiff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const fs::path& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    csv::write_atomic(path, text);
  }
}

// Dense node ids: an edge file whose endpoints are 0..n-1.
DirectedGraph read_dense_graph(const fs::path& path, std::size_t n_hint, bool reversed) {
  const auto t = csv::read(path);
  const std::size_t ct = t.column("target");
  const std::size_t cs = t.column("source");
  std::vector<Edge> edges;
  edges.reserve(t.rows.size());
  std::uint64_t max_id = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto a = csv::parse_u64(t.rows[r][ct]);
    const auto b = csv::parse_u64(t.rows[r][cs]);
    if (!a || !b) {
      throw Error(ErrorCode::SchemaError,
                  path.string() + ":" + std::to_string(t.line[r]) + ": bad node id");
    }
    max_id = std::max({max_id, *a, *b});
    edges.push_back(reversed ? Edge{static_cast<NodeId>(*b), static_cast<NodeId>(*a)}
                             : Edge{static_cast<NodeId>(*a), static_cast<NodeId>(*b)});
  }
  std::size_t n = n_hint;
  if (n == 0) n = edges.empty() ? 0 : static_cast<std::size_t>(max_id) + 1;
  if (!edges.empty() && max_id >= n) {
    throw Error(ErrorCode::OrphanNode, "edge endpoint " + std::to_string(max_id) +
                                           " is outside 0.." + std::to_string(n - 1));
  }
  return DirectedGraph::from_edge_list(edges, n);
}

json graph_stats_json(const DirectedGraph& g) {
  json j = to_json(degree_stats(g));
  std::size_t max_in = 0, max_out = 0;
  for (NodeId i = 0; i < g.size(); ++i) {
    max_in = std::max(max_in, g.in_degree(i));
    max_out = std::max(max_out, g.out_degree(i));
  }
  j["n"] = g.size();
  j["edges"] = g.edge_count();
  j["max_in_deg"] = max_in;
  j["max_out_deg"] = max_out;
  j["overlap_pairs"] = overlap_pairs(g).size();
  return j;
}

const std::map<std::string, GraphModel> kModels{{"er", GraphModel::ErdosRenyi},
                                                {"ba", GraphModel::BarabasiAlbert}};
const std::map<std::string, Design> kDesigns{{"low", Design::LowDimensional},
                                             {"high", Design::HighDimensional}};
const std::map<std::string, FitMode> kFits{{"mle", FitMode::Mle}, {"lasso", FitMode::Lasso}};
const std::map<std::string, Variant> kVariants{{"plain", Variant::Plain},
                                               {"irr", Variant::Irreversible},
                                               {"irreversible", Variant::Irreversible}};
const std::map<std::string, Y0Model> kY0Models{{"probit", Y0Model::Probit},
                                               {"constant", Y0Model::Constant}};
const std::map<std::string, Direction> kDirections{{"as-is", Direction::AsIs},
                                                   {"reversed", Direction::Reversed}};

struct GraphArgs {
  std::string model = "er";
  std::size_t n = 500;
  double lambda = 1.0;
  std::size_t m = 1;
  std::uint64_t seed = 1;

  void add(CLI::App* sub) {
    sub->add_option("--model", model, "Graph model")->check(CLI::IsMember({"er", "ba"}));
    sub->add_option("--n", n, "Number of nodes")->check(CLI::PositiveNumber);
    sub->add_option("--lambda", lambda, "E-R expected in-degree")->check(CLI::NonNegativeNumber);
    sub->add_option("--m", m, "B-A edges per new node")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed");
  }
  double param() const { return model == "er" ? lambda : static_cast<double>(m); }
};

int cmd_gen_graph(const GraphArgs& ga, const fs::path& out_path, std::ostream& out) {
  const DirectedGraph g = ga.model == "er" ? erdos_renyi(ga.n, ga.lambda, ga.seed)
                                           : barabasi_albert(ga.n, ga.m, ga.seed);
  emit(out_path, csv::edges_csv(g), out);
  if (!out_path.empty()) {
    out << json{{"n", g.size()}, {"edges", g.edge_count()}, {"path", out_path.string()}}.dump()
        << '\n';
  }
  return 0;
}

int cmd_graph_stats(const fs::path& edges, std::size_t n, bool reversed, std::ostream& out) {
  const auto g = read_dense_graph(edges, n, reversed);
  out << graph_stats_json(g).dump(2) << '\n';
  return 0;
}

struct SimulateArgs {
  GraphArgs graph;
  double delta = 0.0;
  std::string design = "low";
  std::size_t p = 0;
  double drop_fraction = 0.0;
  std::size_t truth_sims = 100000;
  std::size_t rep = 0;
  std::string out_dir = "sim";
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  McConfig cfg;
  cfg.id = "simulate";
  cfg.graph = kModels.at(a.graph.model);
  cfg.graph_param = a.graph.param();
  cfg.n = a.graph.n;
  cfg.delta = a.delta;
  cfg.design = kDesigns.at(a.design);
  cfg.p = a.p != 0 ? a.p : (cfg.design == Design::LowDimensional ? 5 : 500);
  cfg.truth_sims = a.truth_sims;
  cfg.seed = a.graph.seed;
  cfg.drop_fraction = a.drop_fraction;
  const CellState cell = prepare_cell(cfg);
  const std::uint64_t rep_seed = derive_seed(cfg.seed, {stream::kReplication, a.rep});
  const Panel panel = gen_panel(cell.causal, cell.x, cell.spec, rep_seed);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  csv::write_atomic(dir / "outcomes.csv", csv::outcomes_csv(panel));
  csv::write_atomic(dir / "covariates.csv", csv::covariates_csv(panel));
  csv::write_atomic(dir / "edges.csv", csv::edges_csv(cell.observed));
  if (cfg.drop_fraction > 0.0) {
    csv::write_atomic(dir / "causal_edges.csv", csv::edges_csv(cell.causal));
  }
  json side{{"config", to_json(cfg)},
            {"rep", a.rep},
            {"rep_seed", rep_seed},
            {"truth", to_json(cell.truth)},
            {"degrees", {{"causal", to_json(cell.causal_degrees)},
                         {"observed", to_json(cell.observed_degrees)}}},
            {"y0_model", cell.spec.y0_mode == Y0Mode::FixedBernoulli ? "constant" : "probit"},
            {"spec", {{"gamma0", cell.spec.gamma0},
                      {"delta0", cell.spec.delta0},
                      {"beta0", cell.spec.beta0},
                      {"pi0", cell.spec.pi0},
                      {"irreversible", cell.spec.irreversible}}}};
  csv::write_atomic(dir / "sim.json", side.dump(2) + '\n');
  out << json{{"dir", dir.string()}, {"n", panel.size()}, {"d", cell.truth.d},
              {"d_irr", cell.truth.d_irr}}
             .dump()
      << '\n';
  return 0;
}

struct EstimateArgs {
  std::string edges, outcomes, covariates;
  std::string variant = "irr";
  std::string fit = "mle";
  std::string y0_model = "probit";
  std::string direction = "as-is";
  bool reversible = false;
  double alpha = 0.05;
  std::size_t draws = 0;
  std::uint64_t seed = 1;
  std::size_t folds = 10;
  double lambda = 0.0;
  std::string out;
  bool no_model = false;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  IngestManifest m;
  m.edges = a.edges;
  m.outcomes = a.outcomes;
  m.covariates = a.covariates;
  m.direction = kDirections.at(a.direction);
  const auto ing = ingest_panel(m);
  for (const auto& w : ing.warnings) err << "warning: " << w << '\n';

  EstimateOptions opts;
  opts.fit.fit = kFits.at(a.fit);
  opts.fit.y0_model = kY0Models.at(a.y0_model);
  opts.fit.irreversible = !a.reversible;
  opts.fit.lasso.folds = a.folds;
  if (a.lambda > 0.0) opts.fit.lasso.fixed_lambda = a.lambda;
  opts.variant = kVariants.at(a.variant);
  opts.alpha = a.alpha;
  opts.draws = a.draws;
  opts.seed = a.seed;
  const auto report = estimate_diffusion(ing.panel, ing.graph, opts);

  json j = to_json(report, !a.no_model);
  j["dropped_nodes"] = ing.dropped_nodes;
  j["dropped_edges"] = ing.dropped_edges;
  const std::string text = j.dump(2) + '\n';
  if (a.out.empty()) {
    out << text;
    err << summary_line(report) << '\n';
  } else {
    emit(a.out, text, out);
    out << summary_line(report) << '\n';
  }
  return 0;
}

struct McArgs {
  std::string config;
  std::string out_dir = "mc_out";
  std::size_t reps = 0;
  std::size_t threads = 0;
  bool quiet = false;
  std::vector<std::string> only;
};

json load_config(const fs::path& path) {
  const std::string text = read_text(path);
  if (path.extension() == ".json") {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
    }
  }
  return toml::parse(text);
}

int cmd_mc(const McArgs& a, std::ostream& out, std::ostream& err) {
  auto cells = mc_grid_from_json(load_config(a.config));
  if (!a.only.empty()) {
    std::erase_if(cells, [&](const McConfig& c) {
      return std::find(a.only.begin(), a.only.end(), c.id) == a.only.end();
    });
    if (cells.empty()) throw Error(ErrorCode::InvalidArgument, "--cell matched no cell id");
  }
  for (auto& c : cells) {
    if (a.reps > 0) c.reps = a.reps;
    if (a.threads > 0) c.threads = a.threads;
  }
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  McRunOptions run;
  run.checkpoint_dir = dir / "checkpoints";
  if (!a.quiet) {
    run.progress = [&err](const McConfig& c, std::size_t done) {
      err << c.id << ": " << done << '/' << c.reps << '\n';
    };
  }
  std::vector<McReport> reports;
  for (const auto& c : cells) {
    reports.push_back(run_mc(c, run));
    csv::write_atomic(dir / (c.id + ".json"), to_json(reports.back()).dump(2) + '\n');
  }
  const std::string table = mc_csv(reports);
  csv::write_atomic(dir / "mc.csv", table);
  out << table;
  return 0;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion estimation on directed causal graphs", "netdiff"};
  app.require_subcommand(1);

  GraphArgs gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-graph", "Generate a random directed graph as target,source CSV");
  gen.add(gen_cmd);
  gen_cmd->add_option("--out", gen_out, "Edge CSV path (stdout when omitted)");

  std::string stats_edges;
  std::size_t stats_n = 0;
  bool stats_reversed = false;
  auto* stats_cmd = app.add_subcommand("graph-stats", "Degree statistics of a dense-id edge CSV");
  stats_cmd->add_option("--edges", stats_edges, "Edge CSV (target,source)")->required();
  stats_cmd->add_option("--n", stats_n, "Node count (default: max id + 1)");
  stats_cmd->add_flag("--reversed", stats_reversed, "Transpose every edge");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a panel from the simulation design");
  sim.graph.add(sim_cmd);
  sim_cmd->add_option("--delta", sim.delta, "Spillover coefficient");
  sim_cmd->add_option("--design", sim.design, "Covariate design")
      ->check(CLI::IsMember({"low", "high"}));
  sim_cmd->add_option("--p", sim.p, "Covariate count (high design)");
  sim_cmd->add_option("--drop-fraction", sim.drop_fraction, "Share of edges hidden from the observed graph")
      ->check(CLI::Range(0.0, 0.999999));
  sim_cmd->add_option("--truth-sims", sim.truth_sims, "Simulations for the true diffusion")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--rep", sim.rep, "Replication index");
  sim_cmd->add_option("--out", sim.out_dir, "Output directory");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate the diffusion from CSV data");
  est_cmd->add_option("--edges", est.edges, "Edge CSV (target,source)")->required();
  est_cmd->add_option("--outcomes", est.outcomes, "Outcome CSV (id,y0,y1)")->required();
  est_cmd->add_option("--covariates", est.covariates, "Covariate CSV (id,x1..xp)")->required();
  est_cmd->add_option("--variant", est.variant, "Estimator variant")
      ->check(CLI::IsMember({"plain", "irr", "irreversible"}));
  est_cmd->add_option("--fit", est.fit, "Mean model fit")->check(CLI::IsMember({"mle", "lasso"}));
  est_cmd->add_option("--y0-model", est.y0_model, "Period-0 mean model")
      ->check(CLI::IsMember({"probit", "constant"}));
  est_cmd->add_option("--direction", est.direction, "Edge direction convention")
      ->check(CLI::IsMember({"as-is", "reversed"}));
  est_cmd->add_flag("--reversible", est.reversible, "Drop the irreversibility restriction");
  est_cmd->add_option("--alpha", est.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  est_cmd->add_option("--draws", est.draws, "Simulation draws R (default max(1000, n))");
  est_cmd->add_option("--seed", est.seed, "Random seed");
  est_cmd->add_option("--folds", est.folds, "LASSO cross-validation folds")->check(CLI::Range(2, 1000));
  est_cmd->add_option("--lambda", est.lambda, "Fixed LASSO penalty (skips cross-validation)")
      ->check(CLI::NonNegativeNumber);
  est_cmd->add_option("--out", est.out, "Report JSON path (stdout when omitted)");
  est_cmd->add_flag("--no-model", est.no_model, "Omit fitted coefficients from the report");

  McArgs mc;
  auto* mc_cmd = app.add_subcommand("mc", "Run a Monte Carlo cell grid");
  mc_cmd->add_option("--config", mc.config, "Cell grid (.toml or .json)")->required();
  mc_cmd->add_option("--out", mc.out_dir, "Output directory");
  mc_cmd->add_option("--reps", mc.reps, "Override replications per cell");
  mc_cmd->add_option("--threads", mc.threads, "Worker threads (default NETDIFF_THREADS or all cores)");
  mc_cmd->add_option("--cell", mc.only, "Run only these cell ids");
  mc_cmd->add_flag("--quiet", mc.quiet, "No progress lines");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return 2;
  }

  try {
    if (*gen_cmd) return cmd_gen_graph(gen, gen_out, out);
    if (*stats_cmd) return cmd_graph_stats(stats_edges, stats_n, stats_reversed, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*est_cmd) return cmd_estimate(est, out, err);
    if (*mc_cmd) return cmd_mc(mc, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_validation() ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace netdiff
