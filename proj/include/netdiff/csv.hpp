#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netdiff/dgp.hpp"
#include "netdiff/graph.hpp"

namespace netdiff::csv {

/// Comma-separated table without quoting. Blank lines are skipped and fields
/// are trimmed of surrounding whitespace.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line;  // 1-based source line of each row

  /// Column index by name; throws SchemaError when absent.
  std::size_t column(std::string_view name) const;
};

/// Throws Io when the file cannot be read, SchemaError on ragged rows.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

/// Shortest representation that parses back to the identical double.
std::string format_double(double v);

/// Empty, "NA", "NaN" (any case) and "." count as missing.
bool is_missing(std::string_view field) noexcept;

std::optional<double> parse_double(std::string_view field) noexcept;
std::optional<std::uint64_t> parse_u64(std::string_view field) noexcept;

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// `target,source` with node labels mapped through ids (identity when empty).
std::string edges_csv(const DirectedGraph& g, std::span<const std::uint64_t> ids = {});
/// `id,y0,y1`.
std::string outcomes_csv(const Panel& panel);
/// `id,x1..xp`.
std::string covariates_csv(const Panel& panel);

}  // namespace netdiff::csv
