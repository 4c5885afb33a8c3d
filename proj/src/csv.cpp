#include "netdiff/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "netdiff/error.hpp"
#include "netdiff/rng.hpp"

namespace netdiff::csv {

namespace {

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw Error(ErrorCode::SchemaError, "missing column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

Table parse(std::string_view text) {
  Table t;
  std::size_t pos = 0;
  std::size_t lineno = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (eol == text.size()) break;
      continue;
    }
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size()) {
        throw Error(ErrorCode::SchemaError, "line " + std::to_string(lineno) + ": expected " +
                                                std::to_string(t.header.size()) + " fields, got " +
                                                std::to_string(fields.size()));
      }
      t.rows.push_back(std::move(fields));
      t.line.push_back(lineno);
    }
    if (eol == text.size()) break;
  }
  if (!have_header) throw Error(ErrorCode::SchemaError, "empty CSV (no header)");
  return t;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool is_missing(std::string_view field) noexcept {
  field = trim(field);
  if (field.empty() || field == ".") return true;
  auto lower_eq = [&](std::string_view w) {
    return field.size() == w.size() &&
           std::equal(field.begin(), field.end(), w.begin(), [](char a, char b) {
             return std::tolower(static_cast<unsigned char>(a)) == b;
           });
  };
  return lower_eq("na") || lower_eq("nan");
}

std::optional<double> parse_double(std::string_view field) noexcept {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::uint64_t> parse_u64(std::string_view field) noexcept {
  field = trim(field);
  std::uint64_t v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) return std::nullopt;
  return v;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "short write on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string edges_csv(const DirectedGraph& g, std::span<const std::uint64_t> ids) {
  std::string out = "target,source\n";
  for (const auto& e : g.edges()) {
    out += std::to_string(node_key(ids, e.target));
    out += ',';
    out += std::to_string(node_key(ids, e.source));
    out += '\n';
  }
  return out;
}

std::string outcomes_csv(const Panel& panel) {
  std::string out = "id,y0,y1\n";
  for (std::size_t i = 0; i < panel.size(); ++i) {
    out += std::to_string(node_key(panel.ids, i));
    out += ',';
    out += panel.y0[i] ? '1' : '0';
    out += ',';
    out += panel.y1[i] ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string covariates_csv(const Panel& panel) {
  std::string out = "id";
  for (std::size_t c = 0; c < panel.x.cols(); ++c) out += ",x" + std::to_string(c + 1);
  out += '\n';
  for (std::size_t i = 0; i < panel.x.rows(); ++i) {
    out += std::to_string(node_key(panel.ids, i));
    for (double v : panel.x.row(i)) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace netdiff::csv
