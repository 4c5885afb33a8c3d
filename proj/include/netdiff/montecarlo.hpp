#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "netdiff/dgp.hpp"
#include "netdiff/graph.hpp"
#include "netdiff/inference.hpp"
#include "netdiff/meanfit.hpp"

namespace netdiff {

enum class GraphModel { ErdosRenyi, BarabasiAlbert };
enum class Design { LowDimensional, HighDimensional };
/// Which estimator is scored against which target.
enum class Pairing { Plain, Irreversible };  // (C_G, D) or (C_G^I, D^I)

std::string_view to_string(GraphModel g) noexcept;
std::string_view to_string(Design d) noexcept;
std::string_view to_string(Pairing p) noexcept;
std::string_view to_string(FitMode f) noexcept;

struct McConfig {
  std::string id;
  GraphModel graph = GraphModel::ErdosRenyi;
  double graph_param = 1.0;  // lambda for E-R, m for B-A
  std::size_t n = 500;
  double delta = 0.0;
  Design design = Design::LowDimensional;
  FitMode fit = FitMode::Mle;
  std::size_t p = 5;
  std::size_t reps = 1000;
  std::size_t truth_sims = 100000;
  std::vector<double> alphas{0.05};
  std::size_t draws = 0;  // 0 selects max(1000, n)
  std::uint64_t seed = 1;
  Pairing pairing = Pairing::Irreversible;
  /// Proxy design: the estimation graph keeps a random (1 - drop_fraction)
  /// share of the causal graph's edges; the truth uses the causal graph.
  double drop_fraction = 0.0;
  std::size_t lasso_folds = 10;
  std::size_t threads = 0;

  /// Throws InvalidArgument / InvalidSize / InvalidAlpha.
  void validate() const;
};

/// Everything held fixed across the replications of one cell.
struct CellState {
  McConfig cfg;
  DgpSpec spec;
  DirectedGraph causal;
  DirectedGraph observed;  // equals `causal` unless drop_fraction > 0
  Matrix x;
  TrueDiffusion truth;
  DegreeStats causal_degrees;
  DegreeStats observed_degrees;
  std::vector<NodePair> pairs;  // overlap pairs of `observed`
};

CellState prepare_cell(const McConfig& cfg);

/// Outcome of one replication, for both estimator variants (index by
/// static_cast<int>(Variant)). Intervals are rebuilt from (estimate, sigma).
struct RepResult {
  bool ok = false;
  std::string failure;  // error code name when !ok
  std::array<double, 2> estimate{};
  std::array<double, 2> sigma_plus{};
  std::array<bool, 2> fallback{};

  friend bool operator==(const RepResult&, const RepResult&) = default;
};

RepResult run_replication(const CellState& cell, std::size_t rep);

struct AlphaSummary {
  double alpha = 0.05;
  double coverage = 0.0;     // share of CIs containing the target
  double mean_length = 0.0;
  double mean_clb = 0.0;
  double clb_coverage = 0.0;  // share with target >= CLB
};

struct PairingSummary {
  Pairing pairing = Pairing::Irreversible;
  double target = 0.0;
  double mean_estimate = 0.0;
  double sd_estimate = 0.0;
  std::size_t fallback_count = 0;
  std::vector<AlphaSummary> by_alpha;
};

struct McReport {
  McConfig cfg;
  TrueDiffusion truth;
  DegreeStats causal_degrees;
  DegreeStats observed_degrees;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::map<std::string, std::size_t> failures;
  /// Index 0: (C_G, D); index 1: (C_G^I, D^I).
  std::array<PairingSummary, 2> pairings;
  double seconds = 0.0;

  const PairingSummary& primary() const noexcept {
    return pairings[cfg.pairing == Pairing::Plain ? 0 : 1];
  }
};

McReport summarize(const CellState& cell, const std::vector<RepResult>& results);

struct McRunOptions {
  /// When set, progress is checkpointed to <dir>/<cell id>.ckpt.json every
  /// 100 replications and resumed from there.
  std::filesystem::path checkpoint_dir;
  std::function<void(const McConfig&, std::size_t done)> progress;
};

inline constexpr std::size_t kCheckpointEvery = 100;

/// Throws McAborted when more than 10% of the replications fail.
McReport run_mc(const McConfig& cfg, const McRunOptions& opts = {});

}  // namespace netdiff
