#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace kmv {

// Value and first two derivatives of a test function at one point.
struct Jet {
  double f;
  double df;
  double d2f;
};

// A C_b^2 test function with analytic first and second derivatives.
struct TestFunction {
  std::string name;
  std::function<Jet(double)> jet;

  double operator()(double x) const { return jet(x).f; }

  // exp(-(x - a)^2 / (2 w^2))
  static TestFunction gaussian_bump(double a, double w);
  // x exp(-(x - a)^2 / (2 w^2))
  static TestFunction x_gaussian_bump(double a, double w);
  static TestFunction constant(double c);
};

// Terms of the weak identity
//   <f, v_t> = <f, v_0> + int_0^t <f'', v_s> ds + int_0^t <f' b, v_s> ds
//              - int_0^t <f c, v_s> ds
// accumulated alongside a particle run or a PDE solve. `martingale` holds the
// zero-mean noise the particle estimator carries (Brownian term and, for
// hard killing, the compensated jump term); it is zero for the PDE.
struct WeakFormTerms {
  double lhs = 0.0;
  double initial = 0.0;
  double laplacian = 0.0;
  double drift = 0.0;
  double reaction = 0.0;
  double martingale = 0.0;
};

enum class ResidualEstimator {
  // LHS - RHS as written.
  plain,
  // LHS - RHS minus the accumulated martingale: same expectation, without
  // the O(N^{-1/2}) Monte Carlo noise.
  martingale_corrected,
};

double residual(const WeakFormTerms& terms, ResidualEstimator estimator);

// Weak-form terms for several test functions at a list of record times.
struct WeakFormLedger {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<WeakFormTerms>> terms;  // [probe][time index]

  std::size_t probe_count() const { return names.size(); }
};

// Running sums used while a run is in progress.
class WeakFormAccumulator {
 public:
  explicit WeakFormAccumulator(std::vector<TestFunction> probes);

  std::size_t size() const { return probes_.size(); }
  const TestFunction& probe(std::size_t i) const { return probes_[i]; }
  WeakFormTerms& running(std::size_t i) { return running_[i]; }

  // Stores the current running sums (with the given lhs values) as the
  // record for time t.
  void record(double t, const std::vector<double>& lhs);

  const WeakFormLedger& ledger() const { return ledger_; }
  WeakFormLedger take() { return std::move(ledger_); }

 private:
  std::vector<TestFunction> probes_;
  std::vector<WeakFormTerms> running_;
  WeakFormLedger ledger_;
};

}  // namespace kmv
