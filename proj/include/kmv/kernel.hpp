#pragma once

namespace kmv {

// Kernel contributions are truncated beyond this many bandwidths.
inline constexpr double kSupportRadiusSigmas = 10.0;
// Particles must stay this many bandwidths away from the grid boundary.
inline constexpr double kBoundaryMarginSigmas = 5.0;

// Gaussian mollifier with standard deviation `sigma`.
struct KernelSpec {
  double sigma = 0.5;

  // Throws ValidationError unless sigma is finite and positive.
  void validate() const;
  double support_radius() const { return kSupportRadiusSigmas * sigma; }
};

// Bounds and Lipschitz constants of the mollifier and its derivatives.
//   max_value   = sup K        (= K(0))
//   max_grad    = sup |K'|     (attained at x = sigma)
//   max_hess    = sup |K''|    (attained at x = 0)
//   max_third   = sup |K'''|   (interpolation bound for the gradient field)
//   lipschitz   = Lipschitz constant of K  (= max_grad in 1D)
//   lipschitz_grad = Lipschitz constant of K' (= max_hess in 1D)
struct KernelConstants {
  double max_value;
  double max_grad;
  double max_hess;
  double max_third;
  double lipschitz;
  double lipschitz_grad;
};

double kernel_value(double x, const KernelSpec& spec);
double kernel_gradient(double x, const KernelSpec& spec);
double kernel_second_derivative(double x, const KernelSpec& spec);
double kernel_third_derivative(double x, const KernelSpec& spec);

KernelConstants kernel_constants(const KernelSpec& spec);

// Trapezoidal integral of K over [-10 sigma, 10 sigma] with the given step.
double kernel_normalization(const KernelSpec& spec, double quadrature_step);

}  // namespace kmv
