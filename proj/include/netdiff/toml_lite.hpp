#pragma once

#include <json.hpp>
#include <string_view>

namespace netdiff::toml {

/// Parses the TOML subset used by configuration files into JSON: comments,
/// [tables], [[arrays of tables]], dotted and quoted keys, basic and literal
/// strings, integers, floats, booleans, (multi-line) arrays and inline
/// tables. Dates and multi-line strings are not supported. Throws
/// SchemaError with the offending line.
nlohmann::json parse(std::string_view text);

}  // namespace netdiff::toml
