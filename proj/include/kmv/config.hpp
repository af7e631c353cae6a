#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "kmv/coefficients.hpp"
#include "kmv/kernel.hpp"
#include "kmv/particle_engine.hpp"

namespace kmv {

struct PdeSection {
  bool enabled = true;
  double dt = 1e-4;
};

struct OutputSection {
  std::string directory = "out";
  // Every `snapshot_stride` particle steps a snapshot CSV row block is
  // written; 0 disables snapshot output.
  std::size_t snapshot_stride = 0;
  bool field_dump = false;
};

// Parameters of the two built-in test functions
//   f1(x) = exp(-(x - a)^2 / 2 w^2),  f2(x) = x f1(x).
struct WeakSection {
  double a = 0.0;
  double w = 1.0;
};

struct RunConfig {
  ModelParams model;
  KernelSpec kernel;
  SimConfig sim;  // sim.T mirrors model.T, sim.grid is shared with the PDE
  PdeSection pde;
  OutputSection outputs;
  Overrides overrides;
  WeakSection weak;

  std::vector<TestFunction> probes() const;
};

// Parses the flat `section.key = value` format and applies defaults and the
// cross-field checks of validate_run_config. Throws ParseError (syntax,
// unknown keys, malformed values) or ValidationError.
RunConfig parse_config(std::string_view text);

// Cross-field checks: model feasibility, grid width for the initial law,
// PDE stability. Throws ValidationError or CflViolation.
void validate_run_config(const RunConfig& cfg);

// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& cfg);

// Renders a double so that it parses back to the same value.
std::string format_double(double value);

}  // namespace kmv
