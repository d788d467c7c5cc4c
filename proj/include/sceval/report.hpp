#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sceval/metrics.hpp"

namespace sceval {

enum class GroupBy {
  Tag,      // per-tag means over all horizons
  Horizon,  // per-horizon mean / std / max, all tracks
  Overall,  // one row per model, all tracks and horizons
};

std::optional<GroupBy> parse_group_by(std::string_view text);

/// Cells that belong to a grouped view, in key order.
std::vector<MetricCell> select_cells(const std::vector<MetricCell>& cells, GroupBy group);

/// Markdown table for a grouped view. Values use 3 decimals. Within each
/// column, the lowest value across models is suffixed with '*' and the
/// highest with '^' when at least two models report distinct values.
std::string render_human(const std::vector<MetricCell>& cells, GroupBy group);

}  // namespace sceval
