#include "kmv/kernel.hpp"

#include <cmath>
#include <numbers>

#include "kmv/errors.hpp"

namespace kmv {

void KernelSpec::validate() const {
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw ValidationError("kernel.sigma", "bandwidth must be positive and finite");
  }
}

double kernel_value(double x, const KernelSpec& spec) {
  const double s = spec.sigma;
  return std::exp(-0.5 * (x * x) / (s * s)) / (std::sqrt(2.0 * std::numbers::pi) * s);
}

double kernel_gradient(double x, const KernelSpec& spec) {
  const double s2 = spec.sigma * spec.sigma;
  return -(x / s2) * kernel_value(x, spec);
}

double kernel_second_derivative(double x, const KernelSpec& spec) {
  const double s2 = spec.sigma * spec.sigma;
  return ((x * x) / (s2 * s2) - 1.0 / s2) * kernel_value(x, spec);
}

double kernel_third_derivative(double x, const KernelSpec& spec) {
  const double s2 = spec.sigma * spec.sigma;
  return (3.0 * x / (s2 * s2) - (x * x * x) / (s2 * s2 * s2)) * kernel_value(x, spec);
}

KernelConstants kernel_constants(const KernelSpec& spec) {
  spec.validate();
  const double s = spec.sigma;
  KernelConstants c{};
  c.max_value = kernel_value(0.0, spec);
  c.max_grad = std::abs(kernel_gradient(s, spec));
  c.max_hess = std::abs(kernel_second_derivative(0.0, spec));
  // |K'''| peaks where x^4 - 6 x^2 s^2 + 3 s^4 = 0, i.e. x^2 = (3 - sqrt 6) s^2.
  c.max_third = std::abs(kernel_third_derivative(s * std::sqrt(3.0 - std::sqrt(6.0)), spec));
  c.lipschitz = c.max_grad;
  c.lipschitz_grad = c.max_hess;
  return c;
}

double kernel_normalization(const KernelSpec& spec, double quadrature_step) {
  spec.validate();
  if (!(quadrature_step > 0.0)) {
    throw ValidationError("quadrature_step", "must be positive");
  }
  const double r = spec.support_radius();
  const auto n = static_cast<long>(std::ceil(2.0 * r / quadrature_step));
  const double h = 2.0 * r / static_cast<double>(n);
  double sum = 0.5 * (kernel_value(-r, spec) + kernel_value(r, spec));
  for (long i = 1; i < n; ++i) {
    sum += kernel_value(-r + static_cast<double>(i) * h, spec);
  }
  return sum * h;
}

}  // namespace kmv
