#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "netdiff/dgp.hpp"
#include "netdiff/graph.hpp"

namespace netdiff {

/// Edge files list `target,source` pairs; Reversed swaps the two roles on
/// read, which transposes the graph.
enum class Direction { AsIs, Reversed };

struct ColumnMap {
  std::string id = "id";
  std::string y0 = "y0";
  std::string y1 = "y1";
  std::string target = "target";
  std::string source = "source";
  /// Covariate columns; empty means every covariates column except `id`.
  std::vector<std::string> covariates;
};

struct IngestManifest {
  std::filesystem::path edges;
  std::filesystem::path outcomes;
  std::filesystem::path covariates;
  Direction direction = Direction::AsIs;
  ColumnMap columns;
};

struct IngestResult {
  Panel panel;  // rows ordered by ascending id; panel.ids holds the ids
  DirectedGraph graph;
  std::size_t dropped_nodes = 0;
  std::size_t dropped_edges = 0;
  std::vector<std::string> warnings;
};

/// Nodes with a missing outcome or covariate are dropped together with their
/// edges, and a warning is recorded. Throws SchemaError (bad header or value,
/// duplicate id), OrphanNode (id in only one of outcomes/covariates, or an
/// edge endpoint outside the node set), EmptyPanel, Io.
IngestResult ingest_panel(const IngestManifest& manifest);

}  // namespace netdiff
