#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "kmv/coefficients.hpp"
#include "kmv/grid.hpp"
#include "kmv/history_field.hpp"
#include "kmv/kernel.hpp"
#include "kmv/rng.hpp"
#include "kmv/weak_form.hpp"

namespace kmv {

enum class KillMode {
  // Exponential clocks: a particle dies once its compensator reaches Z ~ Exp(1).
  hard,
  // Nobody dies; every particle carries the survival weight exp(-Lambda).
  soft,
};

const char* to_string(KillMode mode);

// Cemetery marker for the position of a dead particle.
inline constexpr double kCemetery = std::numeric_limits<double>::quiet_NaN();
inline bool is_cemetery(double x) { return x != x; }

struct ParticleState {
  double x = 0.0;        // kCemetery once dead
  bool alive = true;
  double lambda = 0.0;   // accumulated compensator
  double z = 1.0;        // Exp(1) threshold
  double weight = 1.0;   // exp(-lambda)
  double last_x = 0.0;   // position at death, kept for diagnostics
};

struct InitLaw {
  enum class Kind { gaussian, point_mass, explicit_list };
  Kind kind = Kind::gaussian;
  double mean = 0.0;
  double std = 1.0;
  double x0 = 0.0;
  std::vector<double> points;
};

struct SimConfig {
  std::size_t N = 10000;
  double dt = 1e-3;
  double T = 1.0;
  KillMode mode = KillMode::hard;
  std::uint64_t seed = 1;
  InitLaw init;
  GridSpec grid;
  bool oracle_enabled = false;
  // Times at which full particle snapshots and weak-form terms are stored.
  // Rounded to the nearest step; t = 0 is always recorded.
  std::vector<double> record_times;
  // Substream id of each particle (defaults to its index).
  std::vector<std::uint64_t> stream_ids;
  // Test functions whose weak-form terms are accumulated during the run.
  std::vector<TestFunction> probes;
  unsigned workers = 1;

  void validate() const;
  std::size_t n_steps() const;
};

// Per-particle random streams that live for the whole run.
struct ParticleStreams {
  Xoshiro256 noise;
  std::normal_distribution<double> normal{0.0, 1.0};

  double next_normal() { return normal(noise); }
};

// What happened to one particle during one step; consumed by deposits and
// weak-form bookkeeping.
struct StepRecord {
  bool active = false;  // particle was updated this step
  double x_pre = 0.0;
  double weight_pre = 0.0;
  double u = 0.0;
  double v = 0.0;
  double drift = 0.0;
  double rate = 0.0;
  double dW = 0.0;  // sqrt(2 dt) * xi
  double x_post = 0.0;
  bool killed = false;
};

struct ParticleSnapshot {
  double t;
  std::vector<ParticleState> particles;
};

struct SimOutput {
  explicit SimOutput(HistoryField f) : field(std::move(f)) {}

  KillMode mode = KillMode::hard;
  std::size_t N = 0;
  std::vector<double> times;  // every step, starting at 0
  std::vector<double> mass;
  std::vector<ParticleSnapshot> snapshots;
  HistoryField field;
  std::optional<HistoryOracle> oracle;
  std::vector<std::pair<std::size_t, double>> death_times;
  WeakFormLedger weak_form;

  // Snapshot whose time is closest to t.
  const ParticleSnapshot& snapshot_at(double t) const;
};

// Draws initial positions and clock thresholds. Positions, noise and clocks
// use separate substreams derived from (seed, stream id, purpose).
std::vector<ParticleState> init_particles(const SimConfig& cfg,
                                          std::vector<ParticleStreams>& streams);

using NoiseSource = std::function<double(std::size_t)>;

// One Euler-Maruyama step of every particle that is updated in `mode`:
//   (1) u, v from the field at the current position,
//   (2) Lambda += rate(u) dt,
//   (3) x += b(u, v) dt + sqrt(2 dt) xi,
//   (4) weight = exp(-Lambda); in hard mode the particle dies if Lambda >= Z.
// Dead particles are left untouched. `records`, if non-empty, must have one
// entry per particle. `workers` > 1 splits the particles over threads; the
// result does not depend on the worker count.
void step(std::span<ParticleState> particles, const HistoryField& field, const Dynamics& dyn,
          double dt, KillMode mode, const NoiseSource& noise, std::span<StepRecord> records = {},
          unsigned workers = 1);

// Full particle run on [0, T]. Validates the model parameters first.
SimOutput run(const SimConfig& cfg, const ModelParams& p, const KernelSpec& k,
              const Overrides& overrides = {});

// (1/N) sum_j w_j K(x_g - x_j) with w_j = 1{alive} (hard) or exp(-Lambda_j) (soft).
std::vector<double> empirical_density(std::span<const ParticleState> particles, KillMode mode,
                                      const KernelSpec& k, const GridSpec& grid);

// (1/N) sum_j f(x_j) exp(-Lambda_j); meant for soft-mode particles.
double fk_expectation(std::span<const ParticleState> particles,
                      const std::function<double(double)>& f);

// Mass estimator: |alive| / N (hard) or (1/N) sum exp(-Lambda) (soft).
double mass_estimate(std::span<const ParticleState> particles, KillMode mode);

// Standard error of mass_estimate.
double mass_standard_error(std::span<const ParticleState> particles, KillMode mode);

}  // namespace kmv
