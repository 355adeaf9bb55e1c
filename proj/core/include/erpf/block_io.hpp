#pragma once

#include <filesystem>
#include <optional>

#include "erpf/block_system.hpp"

namespace erpf {

/// A three-field system together with its right-hand side and the
/// consolidation time the time step is measured against.
struct LoadedProblem {
  ThreeFieldSystem system;
  BlockVector rhs;
  std::optional<double> consolidation_time;
};

/// Directory layout: K.mtx A.mtx P.mtx Q.mtx B.mtx, optional rhs_u.mtx
/// rhs_q.mtx rhs_p.mtx (zero when absent) and metadata.json holding theta,
/// dt, gamma, t_c and the block dimensions.
void save_block_system(const std::filesystem::path& dir, const ThreeFieldSystem& sys,
                       const BlockVector& rhs, std::optional<double> consolidation_time = {});

/// Validates on load. Every error names the offending block or file.
LoadedProblem load_block_system(const std::filesystem::path& dir);

}  // namespace erpf
