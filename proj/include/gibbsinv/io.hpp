#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gibbsinv/radial_function.hpp"

namespace gibbsinv {

/// Values as text: %.17g, with "inf"/"-inf" for infinities.
std::string format_double(double x);
double parse_double(const std::string& s);

/**
 * CSV with header `r,<column>`: one row per core sample (r < 1) followed by one
 * row per bin center. A JSON sidecar (same stem, .json) records the grid.
 */
void write_radial_csv(const std::filesystem::path& csv, const RadialFunction& f,
                      const std::string& column = "value");

/**
 * Reads a radial CSV. The grid comes from the sidecar when present, otherwise
 * from the row radii (bin centers) with dimension `dim`. Rows with r < 1 set
 * the core value (0 if absent).
 */
RadialFunction read_radial_csv(const std::filesystem::path& csv, int dim = 1);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace gibbsinv
