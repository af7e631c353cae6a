#pragma once

#include <cstddef>
#include <vector>

#include "kmv/coefficients.hpp"
#include "kmv/grid.hpp"
#include "kmv/kernel.hpp"
#include "kmv/particle_engine.hpp"
#include "kmv/weak_form.hpp"

namespace kmv {

// Per-run audit of the discrete mass balance
//   mass_{k+1} - mass_k = boundary_flux_k - reaction_loss_k + clipped_k.
struct MassLedger {
  double max_balance_residual = 0.0;  // max_k |lhs - rhs| of the balance above
  double max_boundary_flux = 0.0;     // max_k |boundary_flux_k|
  double total_reaction_loss = 0.0;
  double total_clipped = 0.0;         // mass added back by clipping negatives
};

// Largest violations of 0 <= cu <= M_K t and |cv| <= M'_K t seen over the
// run; all three are <= 0 when the bounds hold.
struct ConvolutionBoundCheck {
  double max_cu_excess = -1.0;
  double max_negative_cu = -1.0;
  double max_cv_excess = -1.0;

  bool holds(double tol = 1e-12) const {
    return max_cu_excess <= tol && max_negative_cu <= tol && max_cv_excess <= tol;
  }
};

struct DensitySolution {
  GridSpec grid;
  std::vector<double> times;              // record times
  std::vector<std::vector<double>> rho;   // density at each record time
  std::vector<double> step_times;         // every step, starting at 0
  std::vector<double> mass;               // mass at every step
  std::vector<double> R;                  // int_0^T rho ds (final)
  std::vector<double> cu;                 // K * R at the last step
  std::vector<double> cv;                 // K' * R at the last step
  MassLedger ledger;
  ConvolutionBoundCheck bounds;
  WeakFormLedger weak_form;

  // Index of the record time closest to t.
  std::size_t index_at(double t) const;
};

struct PdeOptions {
  std::vector<double> record_times;  // t = 0 and t = T are always recorded
  std::vector<TestFunction> probes;
};

// Explicit finite-volume solve of
//   rho_t = rho_xx - (b(K*R, K'*R) rho)_x - c(K*R) rho,  R = int_0^t rho ds,
// with upwind advective fluxes and homogeneous Dirichlet boundaries. Throws
// CflViolation, MassAtBoundary, ValidationError.
DensitySolution solve_pde(const std::vector<double>& rho0, const ModelParams& p,
                          const KernelSpec& k, const GridSpec& grid, double dt, double T,
                          const Overrides& overrides = {}, const PdeOptions& options = {});

// Largest dt accepted by solve_pde for this grid and drift bound.
double max_stable_dt(const GridSpec& grid, double drift_max);

// Trapezoidal mass at record index t_index.
double pde_mass(const DensitySolution& sol, std::size_t t_index);

double trapezoid(const std::vector<double>& values, double h);

// Nodal initial density for a given initial law: analytic for Gaussians, a
// kernel density estimate for explicit point lists. Point masses have no
// density and raise ValidationError.
std::vector<double> initial_density(const InitLaw& init, const KernelSpec& k,
                                    const GridSpec& grid);

// K * f on grid nodes by truncated quadrature.
std::vector<double> convolve_with_kernel(const std::vector<double>& values, const KernelSpec& k,
                                         const GridSpec& grid);

}  // namespace kmv
