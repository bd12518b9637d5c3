#pragma once

#include "carnot/grid.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace carnot {

/// Bundled analytic sources for a group, scaled so |u| <= 1/32 on the unit box.
///
/// Names are prefixed by class: "convex/..." (h-convex, hence v-convex),
/// "nonconvex/..." (a strictly negative horizontal curvature somewhere, or
/// a jump). "nonconvex/usc_step" is upper semicontinuous but discontinuous.
std::vector<AnalyticSource> testfn_library(const CarnotGroup& g);

// Accepts "convex/t_squared" or the bare "t_squared". Throws InvalidArgumentError
// for unknown names.
AnalyticSource lookup_testfn(const CarnotGroup& g, std::string_view name);

std::vector<std::string> testfn_names(const CarnotGroup& g, std::string_view prefix = {});

}  // namespace carnot
