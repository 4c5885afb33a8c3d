#include "netdiff/ingest.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "netdiff/csv.hpp"
#include "netdiff/error.hpp"

namespace netdiff {

namespace {

struct Row {
  std::optional<std::uint8_t> y0, y1;
  std::vector<double> x;
  bool have_outcome = false;
  bool have_covariates = false;
  bool missing = false;
};

std::uint64_t parse_id(const std::string& field, const std::filesystem::path& file,
                       std::size_t line) {
  const auto id = csv::parse_u64(field);
  if (!id) {
    throw Error(ErrorCode::SchemaError, file.string() + ":" + std::to_string(line) +
                                            ": id '" + field + "' is not a non-negative integer");
  }
  return *id;
}

std::optional<std::uint8_t> parse_binary(const std::string& field,
                                         const std::filesystem::path& file, std::size_t line) {
  if (csv::is_missing(field)) return std::nullopt;
  const auto v = csv::parse_u64(field);
  if (!v || *v > 1) {
    throw Error(ErrorCode::SchemaError, file.string() + ":" + std::to_string(line) +
                                            ": outcome '" + field + "' is not 0 or 1");
  }
  return static_cast<std::uint8_t>(*v);
}

}  // namespace

IngestResult ingest_panel(const IngestManifest& m) {
  const auto& cols = m.columns;
  std::map<std::uint64_t, Row> rows;

  const auto out_t = csv::read(m.outcomes);
  const std::size_t c_id = out_t.column(cols.id);
  const std::size_t c_y0 = out_t.column(cols.y0);
  const std::size_t c_y1 = out_t.column(cols.y1);
  for (std::size_t r = 0; r < out_t.rows.size(); ++r) {
    const auto& f = out_t.rows[r];
    const auto id = parse_id(f[c_id], m.outcomes, out_t.line[r]);
    auto& row = rows[id];
    if (row.have_outcome) {
      throw Error(ErrorCode::SchemaError, "duplicate id " + std::to_string(id) + " in outcomes");
    }
    row.have_outcome = true;
    row.y0 = parse_binary(f[c_y0], m.outcomes, out_t.line[r]);
    row.y1 = parse_binary(f[c_y1], m.outcomes, out_t.line[r]);
    if (!row.y0 || !row.y1) row.missing = true;
  }

  const auto cov_t = csv::read(m.covariates);
  const std::size_t x_id = cov_t.column(cols.id);
  std::vector<std::size_t> x_cols;
  if (cols.covariates.empty()) {
    for (std::size_t c = 0; c < cov_t.header.size(); ++c) {
      if (c != x_id) x_cols.push_back(c);
    }
  } else {
    for (const auto& name : cols.covariates) x_cols.push_back(cov_t.column(name));
  }
  for (std::size_t r = 0; r < cov_t.rows.size(); ++r) {
    const auto& f = cov_t.rows[r];
    const auto id = parse_id(f[x_id], m.covariates, cov_t.line[r]);
    auto& row = rows[id];
    if (row.have_covariates) {
      throw Error(ErrorCode::SchemaError, "duplicate id " + std::to_string(id) + " in covariates");
    }
    row.have_covariates = true;
    row.x.reserve(x_cols.size());
    for (std::size_t c : x_cols) {
      if (csv::is_missing(f[c])) {
        row.missing = true;
        row.x.push_back(0.0);
        continue;
      }
      const auto v = csv::parse_double(f[c]);
      if (!v) {
        throw Error(ErrorCode::SchemaError, m.covariates.string() + ":" +
                                                std::to_string(cov_t.line[r]) + ": covariate '" +
                                                f[c] + "' is not a finite number");
      }
      row.x.push_back(*v);
    }
  }

  IngestResult res;
  std::map<std::uint64_t, NodeId> index;
  for (const auto& [id, row] : rows) {
    if (!row.have_outcome || !row.have_covariates) {
      throw Error(ErrorCode::OrphanNode, "id " + std::to_string(id) + " appears only in " +
                                             (row.have_outcome ? "outcomes" : "covariates"));
    }
    if (row.missing) {
      ++res.dropped_nodes;
      continue;
    }
    index.emplace(id, static_cast<NodeId>(index.size()));
  }
  if (index.empty()) throw Error(ErrorCode::EmptyPanel, "no complete node rows");
  if (res.dropped_nodes > 0) {
    res.warnings.push_back("dropped " + std::to_string(res.dropped_nodes) +
                           " node(s) with missing fields");
  }

  const std::size_t n = index.size();
  auto& p = res.panel;
  p.y0.resize(n);
  p.y1.resize(n);
  p.x = Matrix(n, x_cols.size());
  p.ids.resize(n);
  for (const auto& [id, k] : index) {
    const auto& row = rows.at(id);
    p.ids[k] = id;
    p.y0[k] = *row.y0;
    p.y1[k] = *row.y1;
    std::copy(row.x.begin(), row.x.end(), p.x.row(k).begin());
  }

  const auto edge_t = csv::read(m.edges);
  const std::size_t e_t = edge_t.column(cols.target);
  const std::size_t e_s = edge_t.column(cols.source);
  std::vector<Edge> edges;
  edges.reserve(edge_t.rows.size());
  for (std::size_t r = 0; r < edge_t.rows.size(); ++r) {
    const auto& f = edge_t.rows[r];
    std::uint64_t t = parse_id(f[e_t], m.edges, edge_t.line[r]);
    std::uint64_t s = parse_id(f[e_s], m.edges, edge_t.line[r]);
    if (m.direction == Direction::Reversed) std::swap(t, s);
    const auto it_t = index.find(t);
    const auto it_s = index.find(s);
    if (it_t == index.end() || it_s == index.end()) {
      const std::uint64_t bad = it_t == index.end() ? t : s;
      if (rows.count(bad) == 0) {
        throw Error(ErrorCode::OrphanNode, m.edges.string() + ":" + std::to_string(edge_t.line[r]) +
                                               ": endpoint " + std::to_string(bad) +
                                               " is not a known node");
      }
      ++res.dropped_edges;
      continue;
    }
    edges.push_back({it_t->second, it_s->second});
  }
  if (res.dropped_edges > 0) {
    res.warnings.push_back("dropped " + std::to_string(res.dropped_edges) +
                           " edge(s) touching dropped nodes");
  }
  res.graph = DirectedGraph::from_edge_list(edges, n);
  return res;
}

}  // namespace netdiff
