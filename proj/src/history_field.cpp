#include "kmv/history_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kmv/errors.hpp"

namespace kmv {

namespace {

// Relative size of the first dropped Taylor term of exp(k * eps).
constexpr double kTaylorTolerance = 1e-17;
// Target bound on max |k eps|; sets how many nodes share one expansion centre.
constexpr double kExpansionArgument = 1.5;

std::size_t taylor_terms(double arg) {
  // Relative to the smallest value of exp(k eps), exp(-arg).
  const double tol = kTaylorTolerance * std::exp(-arg);
  double term = 1.0;
  std::size_t n = 0;
  while (term >= tol) {
    ++n;
    term *= arg / static_cast<double>(n);
  }
  return n;
}

void check_inputs(std::span<const double> positions, std::span<const double> weights,
                  std::size_t n_total, double dt) {
  if (positions.size() != weights.size()) {
    throw LengthMismatch("deposit: positions and weights differ in length");
  }
  if (n_total == 0) throw DomainError("deposit: n_total must be positive");
  if (!(dt > 0.0)) throw DomainError("deposit: dt must be positive");
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("deposit: weights must lie in [0, 1]");
  }
}

}  // namespace

HistoryField::HistoryField(const GridSpec& grid, const KernelSpec& kernel, DepositMethod method)
    : grid_(grid), kernel_(kernel), h_(grid.h()) {
  grid_.validate();
  kernel_.validate();
  radius_nodes_ = static_cast<std::size_t>(std::floor(kernel_.support_radius() / h_));
  u_.assign(grid_.n_nodes(), 0.0);
  v_.assign(grid_.n_nodes(), 0.0);

  if (method == DepositMethod::automatic) {
    // Bins of B nodes put |delta| <= (B + 1) h / 2, so max |k eps| <= 10 sigma (B + 1) h / (2 sigma^2).
    const double s = kernel_.sigma;
    const double b = std::floor(kExpansionArgument * s / (5.0 * h_)) - 1.0;
    if (b >= 1.0 && radius_nodes_ >= 1) {
      bin_nodes_ = static_cast<std::size_t>(b);
      const double arg = static_cast<double>(radius_nodes_) * h_ *
                         0.5 * static_cast<double>(bin_nodes_ + 1) * h_ / (s * s);
      n_terms_ = taylor_terms(arg);
    }
  }
  if (n_terms_ > 0) {
    const std::size_t width = 2 * radius_nodes_ + 1;
    gauss_table_.resize(width);
    offsets_.resize(width);
    for (std::size_t i = 0; i < width; ++i) {
      const double k = static_cast<double>(i) - static_cast<double>(radius_nodes_);
      offsets_[i] = k;
      gauss_table_[i] = kernel_value(k * h_, kernel_);
    }
    moments_.assign(grid_.n_nodes() * 2 * n_terms_, 0.0);
    is_touched_.assign(grid_.n_nodes(), 0);
    poly_p_.resize(width);
    poly_q_.resize(width);
  }
}

void HistoryField::deposit(std::span<const double> positions, std::span<const double> weights,
                           std::size_t n_total, double dt) {
  check_inputs(positions, weights, n_total, dt);
  const double margin = kBoundaryMarginSigmas * kernel_.sigma;
  for (double x : positions) {
    if (!(x >= grid_.x_min + margin && x <= grid_.x_max - margin)) {
      std::ostringstream os;
      os << "particle at " << x << " is within " << margin << " of the grid boundary ["
         << grid_.x_min << ", " << grid_.x_max << "]; widen the grid";
      throw PositionOutOfGrid(os.str());
    }
  }
  const double scale = dt / static_cast<double>(n_total);
  if (n_terms_ > 0) {
    deposit_binned(positions, weights, scale);
  } else {
    deposit_direct(positions, weights, scale);
  }
  t_accumulated_ += dt;
}

void HistoryField::deposit_direct(std::span<const double> positions,
                                  std::span<const double> weights, double scale) {
  const double radius = kernel_.support_radius();
  const std::size_t last = grid_.n_cells;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (weights[j] == 0.0) continue;
    const double x = positions[j];
    const double a = scale * weights[j];
    const auto lo = static_cast<std::size_t>(
        std::max(0.0, std::ceil((x - radius - grid_.x_min) / h_)));
    const auto hi = std::min(
        last, static_cast<std::size_t>(std::max(0.0, std::floor((x + radius - grid_.x_min) / h_))));
    for (std::size_t g = lo; g <= hi; ++g) {
      const double d = grid_.node(g) - x;
      if (std::abs(d) > radius) continue;
      const double k = kernel_value(d, kernel_);
      u_[g] += a * k;
      v_[g] += a * (-(d / (kernel_.sigma * kernel_.sigma)) * k);
    }
  }
}

// Particles are binned by nearest node into groups of B consecutive nodes,
// each with a centre node x_c. For a particle at x = x_c + delta and node x_c + k h,
//   K(k h - delta) = K(k h) exp(k eps) exp(-delta^2 / 2 sigma^2),  eps = h delta / sigma^2,
// and exp(k eps) is expanded in powers of k. Per cell this leaves two
// polynomials in k whose coefficients are moments of the particles binned
// there:
//   sum_j K(kh - delta_j)        = K(kh) sum_n k^n / n! M_n
//   sum_j delta_j K(kh - delta_j) = K(kh) sum_n k^n / n! D_n
// with M_n = sum_j a_j eps_j^n, D_n = sum_j a_j delta_j eps_j^n, a_j the
// scaled weight times exp(-delta_j^2 / 2 sigma^2). Nodes are covered for
// |k h| <= 10 sigma around the centre; the kernel mass this drops beyond the
// per-particle radius is below 1e-20 relative.
void HistoryField::deposit_binned(std::span<const double> positions,
                                  std::span<const double> weights, double scale) {
  const double s2 = kernel_.sigma * kernel_.sigma;
  const std::size_t nt = n_terms_;
  touched_.clear();

  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (weights[j] == 0.0) continue;
    const double x = positions[j];
    const auto nearest = static_cast<std::size_t>(std::lround((x - grid_.x_min) / h_));
    const std::size_t c = std::min(grid_.n_cells, (nearest / bin_nodes_) * bin_nodes_ + bin_nodes_ / 2);
    const double delta = x - grid_.node(c);
    const double eps = h_ * delta / s2;
    double a = scale * weights[j] * std::exp(-0.5 * delta * delta / s2);
    double* m = &moments_[c * 2 * nt];
    double* d = m + nt;
    for (std::size_t n = 0; n < nt; ++n) {
      m[n] += a;
      d[n] += a * delta;
      a *= eps;
    }
    if (!is_touched_[c]) {
      is_touched_[c] = 1;
      touched_.push_back(c);
    }
  }
  std::sort(touched_.begin(), touched_.end());

  std::vector<double> factorial(nt);
  factorial[0] = 1.0;
  for (std::size_t n = 1; n < nt; ++n) factorial[n] = factorial[n - 1] * static_cast<double>(n);

  const auto radius = static_cast<std::ptrdiff_t>(radius_nodes_);
  const auto last = static_cast<std::ptrdiff_t>(grid_.n_cells);
  for (std::size_t c : touched_) {
    double* m = &moments_[c * 2 * nt];
    double* d = m + nt;
    const auto cc = static_cast<std::ptrdiff_t>(c);
    const std::ptrdiff_t k_lo = std::max(-radius, -cc);
    const std::ptrdiff_t k_hi = std::min(radius, last - cc);
    const auto i_lo = static_cast<std::size_t>(k_lo + radius);
    const auto i_hi = static_cast<std::size_t>(k_hi + radius);

    // Horner in k, vectorized over the node offsets.
    for (std::size_t i = i_lo; i <= i_hi; ++i) {
      poly_p_[i] = m[nt - 1] / factorial[nt - 1];
      poly_q_[i] = d[nt - 1] / factorial[nt - 1];
    }
    for (std::size_t n = nt - 1; n-- > 0;) {
      const double cm = m[n] / factorial[n];
      const double cd = d[n] / factorial[n];
      for (std::size_t i = i_lo; i <= i_hi; ++i) {
        poly_p_[i] = poly_p_[i] * offsets_[i] + cm;
        poly_q_[i] = poly_q_[i] * offsets_[i] + cd;
      }
    }
    double* u = &u_[static_cast<std::size_t>(cc + k_lo)];
    double* v = &v_[static_cast<std::size_t>(cc + k_lo)];
    for (std::size_t i = i_lo; i <= i_hi; ++i) {
      const double g = gauss_table_[i];
      const double p = g * poly_p_[i];
      u[i - i_lo] += p;
      v[i - i_lo] -= (offsets_[i] * h_ * p - g * poly_q_[i]) / s2;
    }
    std::fill(m, m + 2 * nt, 0.0);
    is_touched_[c] = 0;
  }
}

double HistoryField::interpolate(const std::vector<double>& values, double x) const {
  if (!grid_.contains(x)) {
    std::ostringstream os;
    os << "field evaluated at " << x << " outside [" << grid_.x_min << ", " << grid_.x_max << "]";
    throw PositionOutOfGrid(os.str());
  }
  const double s = (x - grid_.x_min) / h_;
  auto g = static_cast<std::size_t>(s);
  if (g >= grid_.n_cells) g = grid_.n_cells - 1;
  const double theta = s - static_cast<double>(g);
  if (theta == 0.0) return values[g];
  return (1.0 - theta) * values[g] + theta * values[g + 1];
}

double HistoryField::eval_U(double x) const { return interpolate(u_, x); }
double HistoryField::eval_V(double x) const { return interpolate(v_, x); }

void HistoryOracle::record(std::span<const double> positions, std::span<const double> weights,
                           std::size_t n_total, double dt) {
  check_inputs(positions, weights, n_total, dt);
  snapshots_.push_back(Snapshot{dt / static_cast<double>(n_total),
                                {positions.begin(), positions.end()},
                                {weights.begin(), weights.end()}});
  t_accumulated_ += dt;
}

double HistoryOracle::eval_U(double x) const {
  double total = 0.0;
  for (const auto& s : snapshots_) {
    double sum = 0.0;
    for (std::size_t j = 0; j < s.positions.size(); ++j) {
      sum += s.weights[j] * kernel_value(x - s.positions[j], kernel_);
    }
    total += s.scale * sum;
  }
  return total;
}

double HistoryOracle::eval_V(double x) const {
  double total = 0.0;
  for (const auto& s : snapshots_) {
    double sum = 0.0;
    for (std::size_t j = 0; j < s.positions.size(); ++j) {
      sum += s.weights[j] * kernel_gradient(x - s.positions[j], kernel_);
    }
    total += s.scale * sum;
  }
  return total;
}

}  // namespace kmv
