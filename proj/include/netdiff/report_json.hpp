#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "netdiff/graph.hpp"
#include "netdiff/inference.hpp"
#include "netdiff/meanfit.hpp"
#include "netdiff/montecarlo.hpp"

namespace netdiff {

nlohmann::json to_json(const DegreeStats& s);
nlohmann::json to_json(const FitDiagnostics& d);
nlohmann::json to_json(const MeanModel& m);
nlohmann::json to_json(const TrueDiffusion& t);

/// Fixed fields estimate, sigma_plus, ci_lower, ci_upper, clb, alpha,
/// variant, n, d_mx, d_av, fallback_used, followed by audit fields.
nlohmann::json to_json(const DiffusionReport& r, bool include_model = true);

/// "C=0.1234  95% CI [0.01, 0.23]  CLB 0.03  (irreversible, n=500)".
std::string summary_line(const DiffusionReport& r);

nlohmann::json to_json(const McConfig& c);
nlohmann::json to_json(const McReport& r);

/// Cell grid: {"defaults": {...}, "cells": [{...}, ...]}. In a cell, the
/// keys lambda, m, n and delta may hold arrays, which expand into the
/// Cartesian product. Unknown keys raise SchemaError.
std::vector<McConfig> mc_grid_from_json(const nlohmann::json& root);

/// One row per cell, shaped like the coverage/length tables, for the cell's
/// primary pairing.
std::string mc_csv(const std::vector<McReport>& reports);

}  // namespace netdiff
