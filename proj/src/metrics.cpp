#include "kmv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kmv/errors.hpp"

namespace kmv {

double l1_gap(std::span<const double> a, std::span<const double> b, double h) {
  if (a.size() != b.size()) throw LengthMismatch("l1_gap: arrays differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum * h;
}

namespace {

void sort_pair(std::vector<double>& xs, std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.empty()) {
    std::ostringstream os;
    os << "need two non-empty samples of equal size, got " << xs.size() << " and " << ys.size();
    throw UnequalSupportSizes(os.str());
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
}

}  // namespace

double w1_empirical(std::vector<double> xs, std::vector<double> ys) {
  sort_pair(xs, ys);
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sum += std::abs(xs[i] - ys[i]);
  return sum / static_cast<double>(xs.size());
}

double w2_empirical(std::vector<double> xs, std::vector<double> ys) {
  sort_pair(xs, ys);
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sum += (xs[i] - ys[i]) * (xs[i] - ys[i]);
  return std::sqrt(sum / static_cast<double>(xs.size()));
}

std::vector<double> density_quantiles(const std::vector<double>& rho, const GridSpec& grid,
                                      std::size_t n) {
  if (rho.size() != grid.n_nodes()) throw LengthMismatch("density_quantiles: grid mismatch");
  const double h = grid.h();
  // Cumulative trapezoid at the nodes.
  std::vector<double> cdf(rho.size(), 0.0);
  for (std::size_t g = 1; g < rho.size(); ++g) cdf[g] = cdf[g - 1] + 0.5 * h * (rho[g - 1] + rho[g]);
  const double total = cdf.back();
  if (!(total > 0.0)) throw DomainError("density_quantiles: density has no mass");

  std::vector<double> q(n);
  std::size_t g = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = total * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    while (g + 1 < cdf.size() && cdf[g + 1] < target) ++g;
    const double lo = cdf[g];
    const double hi = g + 1 < cdf.size() ? cdf[g + 1] : lo;
    const double theta = hi > lo ? (target - lo) / (hi - lo) : 0.0;
    q[i] = grid.node(g) + theta * h;
  }
  return q;
}

double weak_form_residual(const WeakFormLedger& ledger, std::size_t probe, std::size_t time_index,
                          ResidualEstimator estimator) {
  if (probe >= ledger.probe_count() || time_index >= ledger.times.size()) {
    throw Error("weak_form_residual: index out of range");
  }
  return residual(ledger.terms[probe][time_index], estimator);
}

ComparisonReport compare_runs(const SimOutput& sim, const DensitySolution& pde,
                              const KernelSpec& k, const GridSpec& grid,
                              ResidualEstimator estimator) {
  if (!(pde.grid == grid) || !(sim.field.grid() == grid)) {
    throw ValidationError("grid", "particle field, PDE and comparison grids differ");
  }
  const double h = grid.h();
  const double dt_sim = sim.times.size() > 1 ? sim.times[1] - sim.times[0] : 0.0;

  ComparisonReport report;
  report.mode = sim.mode;
  report.probe_names = sim.weak_form.names;
  report.weak_residuals.resize(sim.weak_form.probe_count());

  for (std::size_t ti = 0; ti < pde.times.size(); ++ti) {
    const double t = pde.times[ti];
    const ParticleSnapshot& snap = sim.snapshot_at(t);
    if (std::abs(snap.t - t) > 0.5 * dt_sim + 1e-12) {
      std::ostringstream os;
      os << "no particle snapshot at PDE record time " << t;
      throw ValidationError("sim.record_times", os.str());
    }
    const auto& rho = pde.rho[ti];
    const std::vector<double> particle_density = empirical_density(snap.particles, sim.mode, k, grid);
    const std::vector<double> pde_density = convolve_with_kernel(rho, k, grid);

    report.times.push_back(t);
    report.l1_density_gap.push_back(l1_gap(particle_density, pde_density, h));
    const double mp = mass_estimate(snap.particles, sim.mode);
    const double mq = trapezoid(rho, h);
    report.mass_particle.push_back(mp);
    report.mass_pde.push_back(mq);
    report.mass_gap.push_back(std::abs(mp - mq));

    double w1 = std::numeric_limits<double>::quiet_NaN();
    if (sim.mode == KillMode::hard) {
      std::vector<double> alive;
      for (const auto& p : snap.particles) {
        if (p.alive) alive.push_back(p.x);
      }
      if (!alive.empty() && mq > 0.0) {
        w1 = w1_empirical(alive, density_quantiles(rho, grid, alive.size()));
      }
    }
    report.w1.push_back(w1);

    for (std::size_t i = 0; i < sim.weak_form.probe_count(); ++i) {
      const auto& wt = sim.weak_form.times;
      const auto it = std::min_element(wt.begin(), wt.end(), [t](double a, double b) {
        return std::abs(a - t) < std::abs(b - t);
      });
      const auto idx = static_cast<std::size_t>(it - wt.begin());
      report.weak_residuals[i].push_back(weak_form_residual(sim.weak_form, i, idx, estimator));
    }
  }
  return report;
}

}  // namespace kmv
