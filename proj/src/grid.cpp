#include "kmv/grid.hpp"

#include <cmath>

#include "kmv/errors.hpp"

namespace kmv {

void GridSpec::validate() const {
  if (!(std::isfinite(x_min) && std::isfinite(x_max) && x_min < x_max)) {
    throw ValidationError("grid.x_min", "need finite x_min < x_max");
  }
  if (n_cells < 16) {
    throw ValidationError("grid.n_cells", "need at least 16 cells");
  }
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  return a.x_min == b.x_min && a.x_max == b.x_max && a.n_cells == b.n_cells;
}

}  // namespace kmv
