#include "kmv/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "kmv/errors.hpp"

namespace kmv {

namespace {

// Diffusion number dt / h^2 accepted by the explicit scheme.
constexpr double kDiffusionSafety = 0.25;
// Courant number dt max|b| / h accepted for the advective part.
constexpr double kAdvectionSafety = 0.4;
constexpr double kBoundaryDensityTolerance = 1e-8;

// Truncated kernel tables K(m h), K'(m h) for m = -R..R.
struct KernelStencil {
  KernelStencil(const KernelSpec& k, double h) {
    radius = static_cast<std::size_t>(std::floor(k.support_radius() / h));
    value.resize(2 * radius + 1);
    grad.resize(2 * radius + 1);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double x = (static_cast<double>(i) - static_cast<double>(radius)) * h;
      value[i] = kernel_value(x, k);
      grad[i] = kernel_gradient(x, k);
    }
  }

  // out[g] = h sum_j K(x_g - x_j) in[j]; gout likewise with K'. Written as
  // scatter (axpy) loops so the inner loop has no reduction.
  void apply(const std::vector<double>& in, double h, std::vector<double>& out,
             std::vector<double>* gout) const {
    const std::size_t n = in.size();
    std::fill(out.begin(), out.end(), 0.0);
    if (gout) std::fill(gout->begin(), gout->end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = in[j] * h;
      if (std::abs(a) < 1e-250) continue;
      // node g = j + m, kernel argument x_g - x_j = m h
      const std::size_t g_lo = j >= radius ? j - radius : 0;
      const std::size_t g_hi = std::min(n - 1, j + radius);
      const std::size_t offset = g_lo + radius - j;
      const double* kv = &value[offset];
      double* o = &out[g_lo];
      const std::size_t len = g_hi - g_lo + 1;
      for (std::size_t i = 0; i < len; ++i) o[i] += a * kv[i];
      if (gout) {
        const double* kg = &grad[offset];
        double* go = &(*gout)[g_lo];
        for (std::size_t i = 0; i < len; ++i) go[i] += a * kg[i];
      }
    }
  }

  std::size_t radius;
  std::vector<double> value;
  std::vector<double> grad;
};

}  // namespace

double trapezoid(const std::vector<double>& values, double h) {
  if (values.size() < 2) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
  return sum * h;
}

double max_stable_dt(const GridSpec& grid, double drift_max) {
  const double h = grid.h();
  double dt = kDiffusionSafety * h * h;
  if (drift_max > 0.0) dt = std::min(dt, kAdvectionSafety * h / drift_max);
  return dt;
}

std::size_t DensitySolution::index_at(double t) const {
  if (times.empty()) throw Error("no density records");
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  }
  return best;
}

double pde_mass(const DensitySolution& sol, std::size_t t_index) {
  if (t_index >= sol.rho.size()) throw Error("pde_mass: record index out of range");
  return trapezoid(sol.rho[t_index], sol.grid.h());
}

std::vector<double> initial_density(const InitLaw& init, const KernelSpec& k,
                                    const GridSpec& grid) {
  grid.validate();
  std::vector<double> rho(grid.n_nodes(), 0.0);
  switch (init.kind) {
    case InitLaw::Kind::gaussian: {
      if (!(init.std > 0.0)) {
        throw ValidationError("sim.init_std", "the PDE needs a positive initial spread");
      }
      const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * init.std);
      for (std::size_t g = 0; g < rho.size(); ++g) {
        const double z = (grid.node(g) - init.mean) / init.std;
        rho[g] = norm * std::exp(-0.5 * z * z);
      }
      break;
    }
    case InitLaw::Kind::explicit_list: {
      if (init.points.empty()) throw ValidationError("sim.init_points", "empty point list");
      const double w = 1.0 / static_cast<double>(init.points.size());
      for (double x : init.points) {
        for (std::size_t g = 0; g < rho.size(); ++g) {
          const double d = grid.node(g) - x;
          if (std::abs(d) <= k.support_radius()) rho[g] += w * kernel_value(d, k);
        }
      }
      break;
    }
    case InitLaw::Kind::point_mass:
      throw ValidationError("sim.init", "a point mass has no density; use gaussian or explicit");
  }
  rho.front() = 0.0;
  rho.back() = 0.0;
  return rho;
}

std::vector<double> convolve_with_kernel(const std::vector<double>& values, const KernelSpec& k,
                                         const GridSpec& grid) {
  if (values.size() != grid.n_nodes()) throw LengthMismatch("convolve: size does not match grid");
  std::vector<double> out(values.size());
  KernelStencil(k, grid.h()).apply(values, grid.h(), out, nullptr);
  return out;
}

DensitySolution solve_pde(const std::vector<double>& rho0, const ModelParams& p,
                          const KernelSpec& k, const GridSpec& grid, double dt, double T,
                          const Overrides& overrides, const PdeOptions& options) {
  const DenominatorBounds bounds = validate_params(p, k);
  grid.validate();
  const std::size_t n = grid.n_nodes();
  const double h = grid.h();
  if (rho0.size() != n) throw LengthMismatch("solve_pde: rho0 does not match the grid");
  if (!(dt > 0.0 && T > 0.0)) throw ValidationError("pde.dt", "dt and T must be positive");
  const double steps_f = std::round(T / dt);
  if (steps_f < 1.0 || std::abs(steps_f * dt - T) > 1e-12 * T) {
    throw ValidationError("pde.dt", "dt must divide T");
  }
  for (double r : rho0) {
    if (!(r >= 0.0)) throw ValidationError("rho0", "initial density must be nonnegative");
  }
  if (trapezoid(rho0, h) > 1.0 + 1e-10) {
    throw ValidationError("rho0", "initial mass exceeds 1");
  }

  const Dynamics dyn(p, overrides);
  const double drift_max = dyn.drift_max(k, bounds);
  const double dt_max = max_stable_dt(grid, drift_max);
  if (dt > dt_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "pde.dt = " << dt << " exceeds the stability limit " << dt_max << " for h = " << h
       << " and max|b| = " << drift_max;
    throw CflViolation(os.str());
  }

  const auto n_steps = static_cast<std::size_t>(steps_f);
  std::set<std::size_t> record_steps{0, n_steps};
  for (double t : options.record_times) {
    if (!(t >= 0.0 && t <= T * (1.0 + 1e-12))) {
      throw ValidationError("pde.record_times", "record time outside [0, T]");
    }
    record_steps.insert(std::min(n_steps, static_cast<std::size_t>(std::llround(t / dt))));
  }

  const KernelConstants kc = kernel_constants(k);
  const KernelStencil stencil(k, h);

  DensitySolution sol;
  sol.grid = grid;
  sol.R.assign(n, 0.0);
  sol.cu.assign(n, 0.0);
  sol.cv.assign(n, 0.0);
  sol.step_times.reserve(n_steps + 1);
  sol.mass.reserve(n_steps + 1);

  std::vector<double> rho = rho0;
  rho.front() = 0.0;
  rho.back() = 0.0;
  std::vector<double> next(n, 0.0);
  std::vector<double> b(n, 0.0);
  std::vector<double> c(n, 0.0);
  std::vector<double> flux(n - 1, 0.0);  // flux through face g + 1/2

  WeakFormAccumulator weak(options.probes);
  std::vector<Jet> jets(options.probes.size() * n);
  for (std::size_t i = 0; i < options.probes.size(); ++i) {
    for (std::size_t g = 0; g < n; ++g) jets[i * n + g] = options.probes[i].jet(grid.node(g));
  }
  auto weak_lhs = [&] {
    std::vector<double> lhs(weak.size(), 0.0);
    for (std::size_t i = 0; i < weak.size(); ++i) {
      double sum = 0.0;
      for (std::size_t g = 1; g + 1 < n; ++g) sum += jets[i * n + g].f * rho[g];
      lhs[i] = sum * h;
    }
    return lhs;
  };

  double mass = trapezoid(rho, h);
  sol.step_times.push_back(0.0);
  sol.mass.push_back(mass);

  for (std::size_t s = 0;; ++s) {
    const double t = static_cast<double>(s) * dt;
    if (record_steps.contains(s)) {
      sol.times.push_back(t);
      sol.rho.push_back(rho);
      if (weak.size() > 0) weak.record(t, weak_lhs());
    }
    if (s == n_steps) break;

    // Coefficients from the history accumulated up to t (left endpoint).
    stencil.apply(sol.R, h, sol.cu, &sol.cv);
    for (std::size_t g = 0; g < n; ++g) {
      const double cu = sol.cu[g];
      sol.bounds.max_negative_cu = std::max(sol.bounds.max_negative_cu, -cu);
      sol.bounds.max_cu_excess = std::max(sol.bounds.max_cu_excess, cu - kc.max_value * t);
      sol.bounds.max_cv_excess =
          std::max(sol.bounds.max_cv_excess, std::abs(sol.cv[g]) - kc.max_grad * t);
      b[g] = dyn.drift(cu, sol.cv[g]);
      c[g] = dyn.rate(cu);
    }
    for (std::size_t g = 0; g < n; ++g) sol.R[g] += dt * rho[g];

    for (std::size_t i = 0; i < weak.size(); ++i) {
      double lap = 0.0, drift = 0.0, reaction = 0.0;
      for (std::size_t g = 1; g + 1 < n; ++g) {
        const Jet& j = jets[i * n + g];
        lap += j.d2f * rho[g];
        drift += j.df * b[g] * rho[g];
        reaction += j.f * c[g] * rho[g];
      }
      WeakFormTerms& terms = weak.running(i);
      terms.laplacian += dt * h * lap;
      terms.drift += dt * h * drift;
      terms.reaction += dt * h * reaction;
    }

    // Face fluxes: diffusive minus upwinded advective.
    for (std::size_t g = 0; g + 1 < n; ++g) {
      const double bf = 0.5 * (b[g] + b[g + 1]);
      const double adv = bf > 0.0 ? bf * rho[g] : bf * rho[g + 1];
      flux[g] = (rho[g + 1] - rho[g]) / h - adv;
    }
    double reaction_loss = 0.0;
    for (std::size_t g = 1; g + 1 < n; ++g) {
      const double sink = c[g] * rho[g];
      reaction_loss += sink;
      next[g] = rho[g] + dt * ((flux[g] - flux[g - 1]) / h - sink);
    }
    reaction_loss *= dt * h;
    const double boundary_flux = dt * (flux[n - 2] - flux[0]);

    double clipped = 0.0;
    double new_mass = 0.0;
    for (std::size_t g = 1; g + 1 < n; ++g) {
      if (next[g] < 0.0) {
        clipped -= next[g] * h;
        next[g] = 0.0;
      }
      new_mass += next[g];
    }
    new_mass *= h;
    next.front() = 0.0;
    next.back() = 0.0;

    MassLedger& L = sol.ledger;
    const double balance = (new_mass - mass) - (boundary_flux - reaction_loss + clipped);
    L.max_balance_residual = std::max(L.max_balance_residual, std::abs(balance));
    L.max_boundary_flux = std::max(L.max_boundary_flux, std::abs(boundary_flux));
    L.total_reaction_loss += reaction_loss;
    L.total_clipped += clipped;

    if (next[1] > kBoundaryDensityTolerance || next[n - 2] > kBoundaryDensityTolerance) {
      std::ostringstream os;
      os << "density reached the boundary of [" << grid.x_min << ", " << grid.x_max
         << "] at t = " << t + dt << " (rho = " << std::max(next[1], next[n - 2])
         << "); widen the grid";
      throw MassAtBoundary(os.str());
    }

    rho.swap(next);
    mass = new_mass;
    sol.step_times.push_back(static_cast<double>(s + 1) * dt);
    sol.mass.push_back(mass);
  }
  sol.weak_form = weak.take();
  return sol;
}

}  // namespace kmv
