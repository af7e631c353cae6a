#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kmv/kernel.hpp"
#include "kmv/particle_engine.hpp"
#include "kmv/pde_solver.hpp"
#include "kmv/weak_form.hpp"

namespace kmv {

// sum_g |a_g - b_g| h. Throws LengthMismatch.
double l1_gap(std::span<const double> a, std::span<const double> b, double h);

// 1D Wasserstein distances between equal-size, equal-weight samples via
// order statistics. Throws UnequalSupportSizes.
double w1_empirical(std::vector<double> xs, std::vector<double> ys);
double w2_empirical(std::vector<double> xs, std::vector<double> ys);

// n equal-mass quantile points (i + 1/2)/n of the normalized nodal density.
std::vector<double> density_quantiles(const std::vector<double>& rho, const GridSpec& grid,
                                      std::size_t n);

// Residual of the weak identity for one probe at one record time.
double weak_form_residual(const WeakFormLedger& ledger, std::size_t probe, std::size_t time_index,
                          ResidualEstimator estimator = ResidualEstimator::plain);

struct ComparisonReport {
  KillMode mode = KillMode::hard;
  std::vector<double> times;
  std::vector<double> l1_density_gap;  // int |K*mu^N - K*rho| dx
  std::vector<double> mass_particle;
  std::vector<double> mass_pde;
  std::vector<double> mass_gap;
  // W1 between the normalized alive particles and the normalized PDE law;
  // NaN for soft-mode runs (unequal weights).
  std::vector<double> w1;
  std::vector<std::string> probe_names;
  std::vector<std::vector<double>> weak_residuals;  // [probe][time], particle source
};

// Compares particle snapshots with the PDE records at the PDE record times.
// Both densities are mollified with the same kernel. Throws ValidationError
// on mismatched grids or missing snapshot times.
ComparisonReport compare_runs(const SimOutput& sim, const DensitySolution& pde,
                              const KernelSpec& k, const GridSpec& grid,
                              ResidualEstimator estimator = ResidualEstimator::martingale_corrected);

}  // namespace kmv
