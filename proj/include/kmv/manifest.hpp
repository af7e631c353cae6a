#pragma once

#include <filesystem>
#include <string>

#include "kmv/config.hpp"

namespace kmv {

struct DerivedConstants {
  KernelConstants kernel;
  DenominatorBounds denominator;
  double drift_bound;  // M_b
};

DerivedConstants derive_constants(const RunConfig& cfg);

// Provenance record of one CLI run. The text form is a valid config document
// (manifest.* and derived.* keys are ignored by parse_config), so re-parsing
// a manifest reproduces the resolved configuration.
struct RunManifest {
  RunConfig config;
  std::string command;
  std::string version;
  std::string seed_source;  // "config" or "cli"
  std::string started;      // wall clock, ISO 8601 UTC
  std::string finished;     // empty until finalized
  DerivedConstants derived;

  std::string to_text() const;
  void write(const std::filesystem::path& path) const;
};

std::string version_string();
std::string utc_timestamp();

}  // namespace kmv
