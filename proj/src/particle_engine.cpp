#include "kmv/particle_engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <sstream>
#include <thread>

#include "kmv/errors.hpp"

namespace kmv {

const char* to_string(KillMode mode) { return mode == KillMode::hard ? "hard" : "soft"; }

void SimConfig::validate() const {
  if (N == 0) throw ValidationError("sim.N", "need at least one particle");
  if (!(std::isfinite(dt) && dt > 0.0)) throw ValidationError("sim.dt", "must be positive");
  if (!(std::isfinite(T) && T > 0.0)) throw ValidationError("model.T", "must be positive");
  const double steps = std::round(T / dt);
  if (steps < 1.0 || std::abs(steps * dt - T) > 1e-12 * T) {
    throw ValidationError("sim.dt", "dt must divide T");
  }
  grid.validate();
  switch (init.kind) {
    case InitLaw::Kind::gaussian:
      if (!(std::isfinite(init.std) && init.std >= 0.0)) {
        throw ValidationError("sim.init_std", "must be nonnegative");
      }
      break;
    case InitLaw::Kind::point_mass:
      break;
    case InitLaw::Kind::explicit_list:
      if (init.points.size() != N) {
        throw ValidationError("sim.init_points", "need exactly N points");
      }
      break;
  }
  if (!stream_ids.empty() && stream_ids.size() != N) {
    throw ValidationError("sim.stream_ids", "need one stream id per particle");
  }
  if (workers == 0) throw ValidationError("sim.workers", "need at least one worker");
  for (double t : record_times) {
    if (!(t >= 0.0 && t <= T * (1.0 + 1e-12))) {
      throw ValidationError("sim.record_times", "record time outside [0, T]");
    }
  }
}

std::size_t SimConfig::n_steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

const ParticleSnapshot& SimOutput::snapshot_at(double t) const {
  if (snapshots.empty()) throw Error("no particle snapshots were recorded");
  return *std::min_element(snapshots.begin(), snapshots.end(), [t](const auto& a, const auto& b) {
    return std::abs(a.t - t) < std::abs(b.t - t);
  });
}

std::vector<ParticleState> init_particles(const SimConfig& cfg,
                                          std::vector<ParticleStreams>& streams) {
  std::vector<ParticleState> particles(cfg.N);
  streams.clear();
  streams.reserve(cfg.N);
  std::exponential_distribution<double> exp1(1.0);
  for (std::size_t i = 0; i < cfg.N; ++i) {
    const std::uint64_t id = cfg.stream_ids.empty() ? i : cfg.stream_ids[i];
    auto position_stream = make_stream(cfg.seed, id, StreamPurpose::position_init);
    auto clock_stream = make_stream(cfg.seed, id, StreamPurpose::clock);
    streams.push_back(ParticleStreams{make_stream(cfg.seed, id, StreamPurpose::noise)});

    ParticleState& p = particles[i];
    switch (cfg.init.kind) {
      case InitLaw::Kind::gaussian:
        p.x = std::normal_distribution<double>(cfg.init.mean, cfg.init.std)(position_stream);
        break;
      case InitLaw::Kind::point_mass:
        p.x = cfg.init.x0;
        break;
      case InitLaw::Kind::explicit_list:
        p.x = cfg.init.points[i];
        break;
    }
    p.last_x = p.x;
    p.z = exp1(clock_stream);
  }
  return particles;
}

namespace {

void step_range(std::span<ParticleState> particles, const HistoryField& field, const Dynamics& dyn,
                double dt, KillMode mode, const NoiseSource& noise, std::span<StepRecord> records,
                std::size_t lo, std::size_t hi) {
  const double diffusion = std::sqrt(2.0 * dt);
  for (std::size_t i = lo; i < hi; ++i) {
    ParticleState& p = particles[i];
    StepRecord* rec = records.empty() ? nullptr : &records[i];
    if (!p.alive) {
      if (rec) *rec = StepRecord{};
      continue;
    }
    const double x = p.x;
    const double weight_pre = p.weight;
    const double u = field.eval_U(x);
    const double v = field.eval_V(x);
    const double rate = dyn.rate(u);
    const double b = dyn.drift(u, v);
    p.lambda += rate * dt;
    const double dW = diffusion * noise(i);
    p.x = x + b * dt + dW;
    p.weight = std::exp(-p.lambda);
    bool killed = false;
    if (mode == KillMode::hard && p.lambda >= p.z) {
      killed = true;
      p.alive = false;
      p.last_x = p.x;
      p.x = kCemetery;
    }
    if (rec) {
      *rec = StepRecord{true, x, weight_pre, u, v, b, rate, dW, killed ? p.last_x : p.x, killed};
    }
  }
}

}  // namespace

void step(std::span<ParticleState> particles, const HistoryField& field, const Dynamics& dyn,
          double dt, KillMode mode, const NoiseSource& noise, std::span<StepRecord> records,
          unsigned workers) {
  if (!records.empty() && records.size() != particles.size()) {
    throw LengthMismatch("step: need one record per particle");
  }
  const std::size_t n = particles.size();
  if (workers <= 1 || n < 2 * static_cast<std::size_t>(workers)) {
    step_range(particles, field, dyn, dt, mode, noise, records, 0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = std::min(n, w * chunk);
      const std::size_t hi = std::min(n, lo + chunk);
      threads.emplace_back([&, w, lo, hi] {
        try {
          step_range(particles, field, dyn, dt, mode, noise, records, lo, hi);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

std::vector<double> probe_lhs(const WeakFormAccumulator& acc,
                              std::span<const ParticleState> particles, KillMode mode) {
  std::vector<double> lhs(acc.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(particles.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    double sum = 0.0;
    for (const auto& p : particles) {
      if (!p.alive) continue;
      const double w = mode == KillMode::hard ? 1.0 : p.weight;
      sum += w * acc.probe(i)(p.x);
    }
    lhs[i] = sum * inv_n;
  }
  return lhs;
}

void accumulate_weak_terms(WeakFormAccumulator& acc, std::span<const StepRecord> records,
                           KillMode mode, double dt, std::size_t n_total) {
  const double inv_n = 1.0 / static_cast<double>(n_total);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const TestFunction& f = acc.probe(i);
    double lap = 0.0, drift = 0.0, reaction = 0.0, mart = 0.0;
    for (const auto& r : records) {
      if (!r.active) continue;
      const double w = mode == KillMode::hard ? 1.0 : r.weight_pre;
      const Jet j = f.jet(r.x_pre);
      lap += w * j.d2f;
      drift += w * j.df * r.drift;
      reaction += w * j.f * r.rate;
      mart += w * j.df * r.dW;
      if (mode == KillMode::hard) {
        // Compensated jump: the mass lost at the kill minus its intensity.
        mart -= (r.killed ? f(r.x_post) : 0.0) - dt * r.rate * j.f;
      }
    }
    WeakFormTerms& t = acc.running(i);
    t.laplacian += dt * lap * inv_n;
    t.drift += dt * drift * inv_n;
    t.reaction += dt * reaction * inv_n;
    t.martingale += mart * inv_n;
  }
}

}  // namespace

SimOutput run(const SimConfig& cfg, const ModelParams& p, const KernelSpec& k,
              const Overrides& overrides) {
  validate_params(p, k);
  cfg.validate();
  if (overrides.constant_rate && !(*overrides.constant_rate >= 0.0)) {
    throw ValidationError("overrides.constant_rate", "must be nonnegative");
  }
  const Dynamics dyn(p, overrides);
  const std::size_t n_steps = cfg.n_steps();
  const double dt = cfg.dt;

  std::vector<ParticleStreams> streams;
  std::vector<ParticleState> particles = init_particles(cfg, streams);

  std::set<std::size_t> record_steps{0};
  for (double t : cfg.record_times) {
    record_steps.insert(std::min(n_steps, static_cast<std::size_t>(std::llround(t / dt))));
  }

  SimOutput out{HistoryField(cfg.grid, k)};
  out.mode = cfg.mode;
  out.N = cfg.N;
  if (cfg.oracle_enabled) out.oracle.emplace(k);
  WeakFormAccumulator weak(cfg.probes);

  std::vector<StepRecord> records(cfg.N);
  std::vector<double> dep_x;
  std::vector<double> dep_w;
  dep_x.reserve(cfg.N);
  dep_w.reserve(cfg.N);
  const NoiseSource noise = [&streams](std::size_t i) { return streams[i].next_normal(); };

  out.times.reserve(n_steps + 1);
  out.mass.reserve(n_steps + 1);
  out.times.push_back(0.0);
  out.mass.push_back(mass_estimate(particles, cfg.mode));

  for (std::size_t s = 0;; ++s) {
    const double t = static_cast<double>(s) * dt;
    if (record_steps.contains(s)) {
      out.snapshots.push_back(ParticleSnapshot{t, particles});
      if (weak.size() > 0) weak.record(t, probe_lhs(weak, particles, cfg.mode));
    }
    if (s == n_steps) break;

    step(particles, out.field, dyn, dt, cfg.mode, noise, records, cfg.workers);

    // Left-endpoint deposit of the pre-move state.
    dep_x.clear();
    dep_w.clear();
    for (const auto& r : records) {
      if (!r.active) continue;
      dep_x.push_back(r.x_pre);
      dep_w.push_back(cfg.mode == KillMode::hard ? 1.0 : r.weight_pre);
    }
    out.field.deposit(dep_x, dep_w, cfg.N, dt);
    if (out.oracle) out.oracle->record(dep_x, dep_w, cfg.N, dt);
    if (weak.size() > 0) accumulate_weak_terms(weak, records, cfg.mode, dt, cfg.N);

    const double t_next = static_cast<double>(s + 1) * dt;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].killed) out.death_times.emplace_back(i, t_next);
    }
    out.times.push_back(t_next);
    out.mass.push_back(mass_estimate(particles, cfg.mode));
  }
  out.weak_form = weak.take();
  return out;
}

std::vector<double> empirical_density(std::span<const ParticleState> particles, KillMode mode,
                                      const KernelSpec& k, const GridSpec& grid) {
  std::vector<double> density(grid.n_nodes(), 0.0);
  if (particles.empty()) return density;
  const double radius = k.support_radius();
  const double h = grid.h();
  const double inv_n = 1.0 / static_cast<double>(particles.size());
  for (const auto& p : particles) {
    if (!p.alive) continue;
    const double w = (mode == KillMode::hard ? 1.0 : p.weight) * inv_n;
    const double lo_f = std::ceil((p.x - radius - grid.x_min) / h);
    const double hi_f = std::floor((p.x + radius - grid.x_min) / h);
    if (hi_f < 0.0 || lo_f > static_cast<double>(grid.n_cells)) continue;
    const auto lo = static_cast<std::size_t>(std::max(0.0, lo_f));
    const auto hi = std::min(grid.n_cells, static_cast<std::size_t>(hi_f));
    for (std::size_t g = lo; g <= hi; ++g) {
      density[g] += w * kernel_value(grid.node(g) - p.x, k);
    }
  }
  return density;
}

double fk_expectation(std::span<const ParticleState> particles,
                      const std::function<double(double)>& f) {
  if (particles.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : particles) {
    if (!p.alive) continue;  // f(cemetery) = 0
    sum += f(p.x) * std::exp(-p.lambda);
  }
  return sum / static_cast<double>(particles.size());
}

double mass_estimate(std::span<const ParticleState> particles, KillMode mode) {
  if (particles.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : particles) {
    if (!p.alive) continue;
    sum += mode == KillMode::hard ? 1.0 : p.weight;
  }
  return sum / static_cast<double>(particles.size());
}

double mass_standard_error(std::span<const ParticleState> particles, KillMode mode) {
  const auto n = static_cast<double>(particles.size());
  if (particles.size() < 2) return 0.0;
  const double m = mass_estimate(particles, mode);
  if (mode == KillMode::hard) return std::sqrt(m * (1.0 - m) / n);
  double ss = 0.0;
  for (const auto& p : particles) {
    const double w = p.alive ? p.weight : 0.0;
    ss += (w - m) * (w - m);
  }
  return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace kmv
