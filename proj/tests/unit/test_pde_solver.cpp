#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kmv/errors.hpp"
#include "kmv/metrics.hpp"
#include "kmv/pde_solver.hpp"

using namespace kmv;

namespace {

const KernelSpec k05{0.5};

std::vector<double> gaussian(const GridSpec& grid, double mean, double sd) {
  InitLaw law;
  law.mean = mean;
  law.std = sd;
  return initial_density(law, k05, grid);
}

double gauss_pdf(double x, double var) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

ModelParams heat_params(double T) { return ModelParams{0.0, 1.0, 1.0, 0.5, T}; }

}  // namespace

TEST_CASE("heat equation limit") {
  const double T = 0.25;
  const GridSpec grid{-10.0, 10.0, 400};
  const auto rho0 = gaussian(grid, 0.0, 1.0);
  const auto sol = solve_pde(rho0, heat_params(T), k05, grid, 0.0005, T);
  REQUIRE(sol.times.size() == 2);
  double err = 0.0;
  for (std::size_t g = 0; g < grid.n_nodes(); ++g) {
    err = std::max(err, std::abs(sol.rho.back()[g] - gauss_pdf(grid.node(g), 1.0 + 2.0 * T)));
  }
  // C (h^2 + dt) with C ~ 1 for this smooth profile
  CHECK(err <= grid.h() * grid.h() + 0.0005);
  CHECK(pde_mass(sol, 0) == doctest::Approx(1.0).epsilon(1e-10));
  for (double m : sol.mass) REQUIRE(std::abs(m - 1.0) <= 1e-6);
  CHECK(sol.ledger.total_reaction_loss == 0.0);
}

TEST_CASE("self convergence on the heat limit") {
  const double T = 0.2;
  std::vector<std::vector<double>> finals;
  std::vector<std::size_t> strides;
  for (int level = 0; level < 3; ++level) {
    const std::size_t cells = 200u << level;
    const GridSpec grid{-10.0, 10.0, cells};
    const double dt = 0.0025 / std::pow(4.0, level);
    // start from a non-Gaussian profile so the error is not trivially small
    auto rho0 = gaussian(grid, -0.8, 0.6);
    const auto right = gaussian(grid, 1.0, 0.9);
    for (std::size_t g = 0; g < rho0.size(); ++g) rho0[g] = 0.5 * (rho0[g] + right[g]);
    finals.push_back(solve_pde(rho0, heat_params(T), k05, grid, dt, T).rho.back());
    strides.push_back(1u << level);
  }
  auto diff = [&](int a, int b) {
    double d = 0.0;
    for (std::size_t g = 0; g <= 200; ++g) {
      d = std::max(d, std::abs(finals[a][g * strides[a]] - finals[b][g * strides[b]]));
    }
    return d;
  };
  const double d01 = diff(0, 1), d12 = diff(1, 2);
  CHECK(d12 > 0.0);
  CHECK(d01 / d12 >= 3.0);
}

TEST_CASE("zero is a fixed point") {
  const GridSpec grid{-8.0, 8.0, 200};
  const std::vector<double> zero(grid.n_nodes(), 0.0);
  const auto sol = solve_pde(zero, ModelParams{1.0, 1.0, 1.0, 0.5, 0.5}, k05, grid, 0.001, 0.5);
  for (const auto& r : sol.rho) {
    for (double v : r) REQUIRE(v == 0.0);
  }
  for (double v : sol.R) REQUIRE(v == 0.0);
}

TEST_CASE("constant rate mass decay") {
  const GridSpec grid{-12.0, 12.0, 480};
  Overrides o;
  o.constant_rate = 1.0;
  o.zero_drift = true;
  const double dt = 0.0005;
  PdeOptions opt;
  opt.record_times = {0.5};
  const auto sol = solve_pde(gaussian(grid, 0.0, 1.0), ModelParams{1.0, 1.0, 1.0, 0.5, 1.0}, k05,
                             grid, dt, 1.0, o, opt);
  REQUIRE(sol.times.size() == 3);
  const double m0 = pde_mass(sol, 0);
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    CHECK(std::abs(pde_mass(sol, i) - m0 * std::exp(-sol.times[i])) <= 2.0 * dt);
  }
  // forward Euler in time: exactly (1 - r dt)^n up to rounding
  CHECK(pde_mass(sol, 2) == doctest::Approx(m0 * std::pow(1.0 - dt, 2000)).epsilon(1e-9));
}

TEST_CASE("full model ledger and bounds") {
  const GridSpec grid{-12.0, 12.0, 600};
  const ModelParams p{1.0, 1.0, 1.0, 0.5, 1.0};
  PdeOptions opt;
  for (int i = 1; i < 10; ++i) opt.record_times.push_back(0.1 * i);
  const auto sol = solve_pde(gaussian(grid, 0.0, 1.0), p, k05, grid, 0.0004, 1.0, {}, opt);
  CHECK(sol.times.size() == 11);
  CHECK(sol.ledger.max_balance_residual <= 1e-10);
  CHECK(sol.ledger.max_boundary_flux <= 1e-10);
  CHECK(sol.ledger.total_clipped <= 1e-6);
  CHECK(sol.bounds.holds());
  for (std::size_t s = 1; s < sol.mass.size(); ++s) {
    REQUIRE(sol.mass[s] < sol.mass[s - 1]);
    REQUIRE(sol.mass[s] <= 1.0);
  }
  for (const auto& r : sol.rho) {
    for (double v : r) REQUIRE(v >= 0.0);
  }
  // mass lost equals the logged reaction sink
  CHECK(sol.mass.front() - sol.mass.back() ==
        doctest::Approx(sol.ledger.total_reaction_loss).epsilon(1e-9));
  // R = int rho dt: its integral is the time integral of the mass (left rule)
  double tm = 0.0;
  for (std::size_t s = 0; s + 1 < sol.mass.size(); ++s) tm += 0.0004 * sol.mass[s];
  CHECK(trapezoid(sol.R, grid.h()) == doctest::Approx(tm).epsilon(1e-10));
  const auto cu = convolve_with_kernel(sol.R, k05, grid);
  for (double v : cu) REQUIRE(v >= 0.0);
}

TEST_CASE("weak residual shrinks under refinement") {
  const ModelParams p{1.0, 1.0, 1.0, 0.5, 0.64};
  PdeOptions opt;
  opt.probes = {TestFunction::gaussian_bump(0.0, 1.0), TestFunction::x_gaussian_bump(0.0, 1.0)};
  std::vector<double> res[2];
  for (std::size_t cells : {300u, 600u}) {
    const GridSpec grid{-12.0, 12.0, cells};
    const double dt = cells == 300 ? 0.0016 : 0.0004;
    const auto sol = solve_pde(gaussian(grid, 0.0, 1.0), p, k05, grid, dt, 0.64, {}, opt);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(weak_form_residual(sol.weak_form, i, 0) == 0.0);
      res[i].push_back(std::abs(weak_form_residual(sol.weak_form, i, 1)));
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(res[i][1] > 0.0);
    CHECK(res[i][0] / res[i][1] >= 2.0);
  }
}

TEST_CASE("errors") {
  const GridSpec grid{-8.0, 8.0, 400};
  const auto rho0 = gaussian(grid, 0.0, 1.0);
  const ModelParams p{1.0, 1.0, 1.0, 0.5, 0.5};
  CHECK(max_stable_dt(grid, 0.0) == doctest::Approx(0.25 * grid.h() * grid.h()));
  CHECK(max_stable_dt(grid, 100.0) == doctest::Approx(0.4 * grid.h() / 100.0));
  CHECK_THROWS_AS(solve_pde(rho0, p, k05, grid, 0.01, 0.5), CflViolation);

  const GridSpec narrow{-3.0, 3.0, 150};
  CHECK_THROWS_AS(solve_pde(gaussian(narrow, 0.0, 1.0), p, k05, narrow, 0.0004, 0.5),
                  MassAtBoundary);

  auto neg = rho0;
  neg[100] = -1.0;
  CHECK_THROWS_AS(solve_pde(neg, p, k05, grid, 0.0004, 0.5), ValidationError);
  auto heavy = rho0;
  for (auto& v : heavy) v *= 1.01;
  CHECK_THROWS_AS(solve_pde(heavy, p, k05, grid, 0.0004, 0.5), ValidationError);
  CHECK_THROWS_AS(solve_pde(std::vector<double>(10, 0.0), p, k05, grid, 0.0004, 0.5),
                  LengthMismatch);
  CHECK_THROWS_AS(solve_pde(rho0, ModelParams{1.0, 1.0, 0.1, -1.0, 0.5}, k05, grid, 0.0004, 0.5),
                  NonpositiveDenominator);

  InitLaw point;
  point.kind = InitLaw::Kind::point_mass;
  CHECK_THROWS_AS(initial_density(point, k05, grid), ValidationError);
}

TEST_CASE("initial densities") {
  const GridSpec grid{-10.0, 10.0, 1000};
  CHECK(trapezoid(gaussian(grid, 0.5, 0.8), grid.h()) == doctest::Approx(1.0).epsilon(1e-10));
  InitLaw list;
  list.kind = InitLaw::Kind::explicit_list;
  list.points = {-1.0, 0.0, 2.0};
  const auto kde = initial_density(list, k05, grid);
  CHECK(trapezoid(kde, grid.h()) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(kde[500] == doctest::Approx((kernel_value(1.0, k05) + kernel_value(0.0, k05) +
                                     kernel_value(-2.0, k05)) / 3.0));
}
