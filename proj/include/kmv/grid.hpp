#pragma once

#include <cstddef>

namespace kmv {

// Uniform 1D grid with n_cells + 1 nodes x_g = x_min + g h.
struct GridSpec {
  double x_min = -18.0;
  double x_max = 18.0;
  std::size_t n_cells = 1800;

  void validate() const;

  double h() const { return (x_max - x_min) / static_cast<double>(n_cells); }
  std::size_t n_nodes() const { return n_cells + 1; }
  double node(std::size_t g) const { return x_min + static_cast<double>(g) * h(); }
  bool contains(double x) const { return x >= x_min && x <= x_max; }
};

bool operator==(const GridSpec& a, const GridSpec& b);

}  // namespace kmv
