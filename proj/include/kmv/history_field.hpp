#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kmv/grid.hpp"
#include "kmv/kernel.hpp"

namespace kmv {

// How deposit() evaluates the truncated kernel sums. Both produce the same
// nodal values up to rounding; `direct` is the reference loop, `automatic`
// bins particles by nearest node and expands the Gaussian in the sub-cell
// offset, which makes the per-step cost proportional to the number of
// occupied bins instead of the number of particles.
enum class DepositMethod { automatic, direct };

// Grid representation of the path-dependent memory
//   U(t, x) = int_0^t (K * mu_r)(x) dr,   V(t, x) = int_0^t (K' * mu_r)(x) dr,
// accumulated with the left-endpoint rule in time.
class HistoryField {
 public:
  HistoryField(const GridSpec& grid, const KernelSpec& kernel,
               DepositMethod method = DepositMethod::automatic);

  // Adds dt / n_total * sum_j w_j K(x_g - x_j) to U (and K' to V) at every
  // node within the truncation radius of x_j. Throws PositionOutOfGrid when a
  // position lies closer than 5 sigma to the grid boundary.
  void deposit(std::span<const double> positions, std::span<const double> weights,
               std::size_t n_total, double dt);

  // Linear interpolation between bracketing nodes. Throws PositionOutOfGrid
  // outside [x_min, x_max].
  double eval_U(double x) const;
  double eval_V(double x) const;

  double t_accumulated() const { return t_accumulated_; }
  const GridSpec& grid() const { return grid_; }
  const KernelSpec& kernel() const { return kernel_; }
  std::span<const double> U() const { return u_; }
  std::span<const double> V() const { return v_; }

  // Number of Taylor terms used by the binned deposit (0 means the direct
  // loop is used because the grid is too coarse for the expansion).
  std::size_t expansion_terms() const { return n_terms_; }

 private:
  void deposit_direct(std::span<const double> positions, std::span<const double> weights,
                      double scale);
  void deposit_binned(std::span<const double> positions, std::span<const double> weights,
                      double scale);
  double interpolate(const std::vector<double>& values, double x) const;

  GridSpec grid_;
  KernelSpec kernel_;
  double h_;
  std::size_t radius_nodes_;
  std::size_t n_terms_ = 0;
  std::size_t bin_nodes_ = 1;
  std::vector<double> u_;
  std::vector<double> v_;
  double t_accumulated_ = 0.0;

  // Scratch for the binned deposit.
  std::vector<double> gauss_table_;      // K(k h), k = -R..R
  std::vector<double> offsets_;          // k as double, k = -R..R
  std::vector<double> moments_;          // per node: n_terms value moments, then n_terms gradient moments
  std::vector<std::size_t> touched_;
  std::vector<char> is_touched_;
  std::vector<double> poly_p_;
  std::vector<double> poly_q_;
};

// Brute-force reference for the same discretized integrals: keeps every
// deposited (position, weight) snapshot and evaluates the sums directly with
// no grid interpolation and no truncation.
class HistoryOracle {
 public:
  explicit HistoryOracle(const KernelSpec& kernel) : kernel_(kernel) {}

  void record(std::span<const double> positions, std::span<const double> weights,
              std::size_t n_total, double dt);

  double eval_U(double x) const;
  double eval_V(double x) const;

  double t_accumulated() const { return t_accumulated_; }
  std::size_t snapshot_count() const { return snapshots_.size(); }

 private:
  struct Snapshot {
    double scale;  // dt / n_total
    std::vector<double> positions;
    std::vector<double> weights;
  };

  KernelSpec kernel_;
  std::vector<Snapshot> snapshots_;
  double t_accumulated_ = 0.0;
};

}  // namespace kmv
