#pragma once

#include <functional>
#include <utility>

namespace pbandit {

// Maximize f on [lo, hi]: dense grid scan (grid_n points, endpoints included)
// followed by golden-section refinement of the winning bracket down to
// interval width tol. Exact ties resolve toward the lower argument.
// Returns (argmax, max).
std::pair<double, double> grid_golden_max(
    const std::function<double(double)>& f, double lo, double hi, int grid_n,
    double tol);

}  // namespace pbandit
