#pragma once

#include <optional>

#include "sceval/core.hpp"

namespace sceval {

/// Constant-velocity prediction from the current-frame state: one mode,
/// confidence 1, position p0 + v0 * h at each grid horizon h. Returns nullopt
/// when the current frame is invalid.
std::optional<PredictionSet> predict_cv(const Track& track, const HorizonGrid& grid);

}  // namespace sceval
