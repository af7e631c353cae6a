#include "kmv/weak_form.hpp"

#include <cmath>
#include <sstream>

namespace kmv {

TestFunction TestFunction::gaussian_bump(double a, double w) {
  const double w2 = w * w;
  std::ostringstream name;
  name << "bump(a=" << a << ",w=" << w << ")";
  return {name.str(), [a, w2](double x) {
            const double d = x - a;
            const double g = std::exp(-0.5 * d * d / w2);
            return Jet{g, -d / w2 * g, (d * d / (w2 * w2) - 1.0 / w2) * g};
          }};
}

TestFunction TestFunction::x_gaussian_bump(double a, double w) {
  const auto base = gaussian_bump(a, w);
  std::ostringstream name;
  name << "x*bump(a=" << a << ",w=" << w << ")";
  return {name.str(), [base](double x) {
            const Jet g = base.jet(x);
            return Jet{x * g.f, g.f + x * g.df, 2.0 * g.df + x * g.d2f};
          }};
}

TestFunction TestFunction::constant(double c) {
  std::ostringstream name;
  name << "const(" << c << ")";
  return {name.str(), [c](double) { return Jet{c, 0.0, 0.0}; }};
}

double residual(const WeakFormTerms& t, ResidualEstimator estimator) {
  const double r = t.lhs - (t.initial + t.laplacian + t.drift - t.reaction);
  return estimator == ResidualEstimator::plain ? r : r - t.martingale;
}

WeakFormAccumulator::WeakFormAccumulator(std::vector<TestFunction> probes)
    : probes_(std::move(probes)), running_(probes_.size()) {
  for (const auto& p : probes_) ledger_.names.push_back(p.name);
  ledger_.terms.resize(probes_.size());
}

void WeakFormAccumulator::record(double t, const std::vector<double>& lhs) {
  ledger_.times.push_back(t);
  for (std::size_t i = 0; i < probes_.size(); ++i) {
    if (ledger_.times.size() == 1) running_[i].initial = lhs[i];
    WeakFormTerms terms = running_[i];
    terms.lhs = lhs[i];
    ledger_.terms[i].push_back(terms);
  }
}

}  // namespace kmv
