#pragma once

#include <filesystem>

#include "erpf/sparse.hpp"

namespace erpf {

/// Reads a real coordinate Matrix Market file. `general` and `symmetric`
/// are supported; symmetric input is expanded to full storage. Duplicate
/// coordinates are summed.
CsrMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes `coordinate real general` with round-trip exact (17 digit) values.
void write_matrix_market(const std::filesystem::path& path, const CsrMatrix& m);

/// Dense vectors use the `array real general` layout (n x 1).
Vector read_matrix_market_vector(const std::filesystem::path& path);
void write_matrix_market_vector(const std::filesystem::path& path, std::span<const double> v);

}  // namespace erpf
