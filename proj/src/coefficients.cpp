#include "kmv/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kmv/errors.hpp"

namespace kmv {

namespace {

void require_nonnegative(double u) {
  if (!(u >= 0.0)) {
    std::ostringstream os;
    os << "accumulated convolution must be nonnegative, got " << u;
    throw DomainError(os.str());
  }
}

double denominator(double u, const ModelParams& p) {
  return p.phi0 + p.phi1 * p.c0 * std::exp(-p.lambda * u);
}

}  // namespace

DenominatorBounds validate_params(const ModelParams& p, const KernelSpec& k) {
  k.validate();
  if (!(std::isfinite(p.lambda) && p.lambda >= 0.0)) {
    throw ValidationError("model.lambda", "must be finite and nonnegative");
  }
  if (!(std::isfinite(p.c0) && p.c0 > 0.0)) {
    throw ValidationError("model.c0", "must be positive");
  }
  if (!(std::isfinite(p.phi0) && p.phi0 > 0.0)) {
    throw ValidationError("model.phi0", "must be positive");
  }
  if (!std::isfinite(p.phi1)) {
    throw ValidationError("model.phi1", "must be finite");
  }
  if (!(std::isfinite(p.T) && p.T > 0.0)) {
    throw ValidationError("model.T", "must be positive");
  }
  // The denominator is monotone in u, so the endpoints bound it.
  const double u_max = kernel_constants(k).max_value * p.T;
  const double at_zero = denominator(0.0, p);
  const double at_max = denominator(u_max, p);
  const double lo = std::min(at_zero, at_max);
  const double hi = std::max(at_zero, at_max);
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os << "phi0 + phi1 c0 exp(-lambda u) reaches " << lo << " <= 0 on u in [0, " << u_max << "]";
    throw NonpositiveDenominator(os.str());
  }
  return {lo, hi};
}

double drift_b(double u, double v, const ModelParams& p) {
  require_nonnegative(u);
  const double e = std::exp(-p.lambda * u);
  const double den = p.phi0 + p.phi1 * p.c0 * e;
  if (!(den > 0.0)) {
    throw NonpositiveDenominator("denominator vanished at u = " + std::to_string(u));
  }
  return -p.phi1 * p.lambda * p.c0 * e * v / den;
}

double concentration_c(double u, const ModelParams& p) {
  require_nonnegative(u);
  return p.c0 * std::exp(-p.lambda * u);
}

double killing_rate(double u, const ModelParams& p) {
  return p.lambda * concentration_c(u, p);
}

double drift_bound(const ModelParams& p, const KernelSpec& k, const DenominatorBounds& bounds) {
  return std::abs(p.phi1) * p.lambda * p.c0 * kernel_constants(k).max_grad * p.T / bounds.m;
}

}  // namespace kmv
