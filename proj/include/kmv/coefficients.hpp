#pragma once

#include <optional>

#include "kmv/kernel.hpp"

namespace kmv {

// Reaction/porosity parameters. lambda = 0 is accepted and switches off both
// the killing and the drift.
struct ModelParams {
  double lambda = 1.0;
  double c0 = 1.0;
  double phi0 = 1.0;
  double phi1 = 0.5;
  double T = 1.0;
};

// Range [m, M] of the porosity denominator phi0 + phi1 c0 exp(-lambda u)
// over the feasible u in [0, M_K T].
struct DenominatorBounds {
  double m;
  double M;
};

// Checks the scalar parameter ranges and the denominator positivity. Throws
// ValidationError (NonpositiveDenominator for the latter).
DenominatorBounds validate_params(const ModelParams& p, const KernelSpec& k);

// Advection coefficient b(u, v) for accumulated convolution u >= 0 and
// accumulated gradient convolution v.
double drift_b(double u, double v, const ModelParams& p);

// lambda c0 exp(-lambda u): hazard rate of the exponential clock.
double killing_rate(double u, const ModelParams& p);

// c0 exp(-lambda u): the reacting concentration.
double concentration_c(double u, const ModelParams& p);

// Upper bound of |b| over u in [0, M_K T], |v| <= M'_K T.
double drift_bound(const ModelParams& p, const KernelSpec& k, const DenominatorBounds& bounds);

// Test plumbing that lets the acceptance experiments switch off pieces of
// the model from configuration alone.
struct Overrides {
  std::optional<double> constant_rate;
  bool zero_drift = false;
};

// Coefficients as seen by the particle engine and the PDE solver: the model
// functions with overrides applied.
class Dynamics {
 public:
  Dynamics(const ModelParams& params, const Overrides& overrides) : p_(params), o_(overrides) {}

  double drift(double u, double v) const { return o_.zero_drift ? 0.0 : drift_b(u, v, p_); }
  double rate(double u) const { return o_.constant_rate ? *o_.constant_rate : killing_rate(u, p_); }
  // Bound on rate(u), used for the compensator invariant Lambda <= rate_max t.
  double rate_max() const { return o_.constant_rate ? *o_.constant_rate : p_.lambda * p_.c0; }
  double drift_max(const KernelSpec& k, const DenominatorBounds& b) const {
    return o_.zero_drift ? 0.0 : drift_bound(p_, k, b);
  }

  const ModelParams& params() const { return p_; }
  const Overrides& overrides() const { return o_; }

 private:
  ModelParams p_;
  Overrides o_;
};

}  // namespace kmv
