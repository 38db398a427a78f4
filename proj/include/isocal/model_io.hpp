#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "isocal/recalibration.hpp"

namespace isocal {

// Model file (JSON):
//   {"version": 1, "scope": "pooled" | "per_cell", "h": H, "w": W,
//    "interpolation": "linear" | "step",
//    "maps": [{"breakpoints": [...], "values": [...]}, ...]}
// Per-cell maps are in row-major cell order; pooled models carry one map.
// Numbers are written with 17 significant digits, so a write/read cycle
// reproduces the model exactly.
void write_model(const CalibratedForecaster& cf, std::ostream& out);
void write_model(const CalibratedForecaster& cf, const std::filesystem::path& path);
std::string model_to_json(const CalibratedForecaster& cf);

// Throws ParseError on malformed JSON or schema violations.
CalibratedForecaster parse_model(std::istream& in, const std::string& name = "<stream>");
CalibratedForecaster read_model(const std::filesystem::path& path);

}  // namespace isocal
