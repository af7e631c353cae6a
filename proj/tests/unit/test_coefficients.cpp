#include <doctest.h>

#include <cmath>

#include "kmv/coefficients.hpp"
#include "kmv/errors.hpp"
#include "kmv/kernel.hpp"

using namespace kmv;

TEST_CASE("drift examples") {
  const ModelParams p{1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK(drift_b(0.0, 1.0, p) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(drift_b(std::log(2.0), 1.0, p) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  for (double u : {0.0, 0.3, 5.0}) CHECK(drift_b(u, 0.0, p) == 0.0);
  CHECK_THROWS_AS(drift_b(-1e-3, 1.0, p), DomainError);
}

TEST_CASE("killing rate and concentration") {
  ModelParams p;
  p.lambda = 1.0;
  p.c0 = 2.0;
  CHECK(killing_rate(0.0, p) == p.lambda * p.c0);
  CHECK(killing_rate(1.0, p) == doctest::Approx(0.7357588824).epsilon(1e-10));
  CHECK(killing_rate(1e6, p) <= 1e-300);
  CHECK_THROWS_AS(killing_rate(-0.5, p), DomainError);

  ModelParams q;
  q.lambda = 2.0;
  q.c0 = 1.0;
  CHECK(concentration_c(0.0, q) == q.c0);
  CHECK(concentration_c(0.5, q) == doctest::Approx(0.3678794412).epsilon(1e-10));
  const KernelSpec k{0.5};
  const double mk = kernel_constants(k).max_value;
  CHECK(concentration_c(mk * q.T, q) == doctest::Approx(q.c0 * std::exp(-q.lambda * mk * q.T)));
  CHECK_THROWS_AS(concentration_c(-1.0, q), DomainError);
}

TEST_CASE("rate identity and monotonicity") {
  ModelParams p;
  p.lambda = 1.7;
  p.c0 = 0.6;
  double prev = killing_rate(0.0, p);
  for (int i = 0; i <= 2000; ++i) {
    const double u = 0.005 * i;
    const double r = killing_rate(u, p);
    REQUIRE(r == p.lambda * concentration_c(u, p));
    REQUIRE(r <= prev);
    REQUIRE(r <= p.lambda * p.c0);
    prev = r;
  }
}

TEST_CASE("validate_params") {
  const KernelSpec k{0.5};
  const double mk = kernel_constants(k).max_value;

  const auto b = validate_params(ModelParams{1.0, 1.0, 1.0, 0.5, 1.0}, k);
  CHECK(b.m == doctest::Approx(1.0 + 0.5 * std::exp(-mk)).epsilon(1e-15));
  CHECK(b.M == doctest::Approx(1.5).epsilon(1e-15));

  const auto flat = validate_params(ModelParams{3.0, 2.0, 1.0, 0.0, 2.0}, k);
  CHECK(flat.m == 1.0);
  CHECK(flat.M == 1.0);

  // 0.1 - exp(-M_K) < 0 at the top of the feasible range
  CHECK(0.1 - std::exp(-mk) < 0.0);
  CHECK_THROWS_AS(validate_params(ModelParams{1.0, 1.0, 0.1, -1.0, 1.0}, k), NonpositiveDenominator);
  try {
    validate_params(ModelParams{1.0, 1.0, 0.1, -1.0, 1.0}, k);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("phi0") != std::string::npos);
  }

  CHECK_THROWS_AS(validate_params(ModelParams{1.0, 0.0, 1.0, 0.5, 1.0}, k), ValidationError);
  CHECK_THROWS_AS(validate_params(ModelParams{1.0, 1.0, 0.0, 0.5, 1.0}, k), ValidationError);
  CHECK_THROWS_AS(validate_params(ModelParams{1.0, 1.0, 1.0, 0.5, 0.0}, k), ValidationError);
  CHECK_THROWS_AS(validate_params(ModelParams{-1.0, 1.0, 1.0, 0.5, 1.0}, k), ValidationError);
  CHECK_NOTHROW(validate_params(ModelParams{0.0, 1.0, 1.0, 0.5, 1.0}, k));
}

TEST_CASE("drift bound and Lipschitz quotients on the feasible box") {
  const KernelSpec k{0.5};
  const auto kc = kernel_constants(k);
  for (const ModelParams& p :
       {ModelParams{1.0, 1.0, 1.0, 0.5, 1.0}, ModelParams{2.0, 0.5, 1.0, -0.8, 1.5}}) {
    const auto bounds = validate_params(p, k);
    const double mb = drift_bound(p, k, bounds);
    CHECK(mb == doctest::Approx(std::abs(p.phi1) * p.lambda * p.c0 * kc.max_grad * p.T / bounds.m));
    const double umax = kc.max_value * p.T;
    const double vmax = kc.max_grad * p.T;
    const int n = 120;
    const double du = umax / n, dv = 2 * vmax / n;
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double u = i * du, v = -vmax + j * dv;
        const double b = drift_b(u, v, p);
        REQUIRE(std::abs(b) <= mb * (1 + 1e-12));
        if (i < n) worst = std::max(worst, std::abs(drift_b(u + du, v, p) - b) / du);
        if (j < n) worst = std::max(worst, std::abs(drift_b(u, v + dv, p) - b) / dv);
      }
    }
    // A crude analytic Lipschitz constant: |db/dv| <= |phi1| lambda c0 / m,
    // |db/du| <= lambda |phi1| lambda c0 vmax (phi0 / m^2).
    const double c_v = std::abs(p.phi1) * p.lambda * p.c0 / bounds.m;
    const double c_u = p.lambda * std::abs(p.phi1) * p.lambda * p.c0 * vmax * p.phi0 /
                       (bounds.m * bounds.m);
    CHECK(worst <= std::max(c_u, c_v) * 1.01);
    CHECK(std::isfinite(worst));
  }
}

TEST_CASE("overrides") {
  const ModelParams p{1.0, 1.0, 1.0, 0.5, 1.0};
  Overrides o;
  o.constant_rate = 2.5;
  o.zero_drift = true;
  const Dynamics d(p, o);
  CHECK(d.rate(0.3) == 2.5);
  CHECK(d.rate_max() == 2.5);
  CHECK(d.drift(0.1, 0.4) == 0.0);
  const Dynamics plain(p, {});
  CHECK(plain.rate(0.3) == killing_rate(0.3, p));
  CHECK(plain.drift(0.1, 0.4) == drift_b(0.1, 0.4, p));
  CHECK(plain.rate_max() == 1.0);
}
