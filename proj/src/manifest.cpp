#include "kmv/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "kmv/errors.hpp"

#ifndef KMV_VERSION
#define KMV_VERSION "unknown"
#endif

namespace kmv {

std::string version_string() { return std::string("kmv ") + KMV_VERSION; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

DerivedConstants derive_constants(const RunConfig& cfg) {
  DerivedConstants d{};
  d.kernel = kernel_constants(cfg.kernel);
  d.denominator = validate_params(cfg.model, cfg.kernel);
  d.drift_bound = drift_bound(cfg.model, cfg.kernel, d.denominator);
  return d;
}

std::string RunManifest::to_text() const {
  std::ostringstream os;
  os << "# run manifest\n";
  os << "manifest.command = \"" << command << "\"\n";
  os << "manifest.version = \"" << version << "\"\n";
  os << "manifest.seed = " << config.sim.seed << '\n';
  os << "manifest.seed_source = \"" << seed_source << "\"\n";
  os << "manifest.started = \"" << started << "\"\n";
  os << "manifest.finished = \"" << finished << "\"\n";
  os << "derived.M_K = " << format_double(derived.kernel.max_value) << '\n';
  os << "derived.M1_K = " << format_double(derived.kernel.max_grad) << '\n';
  os << "derived.M2_K = " << format_double(derived.kernel.max_hess) << '\n';
  os << "derived.L_K = " << format_double(derived.kernel.lipschitz) << '\n';
  os << "derived.L1_K = " << format_double(derived.kernel.lipschitz_grad) << '\n';
  os << "derived.m = " << format_double(derived.denominator.m) << '\n';
  os << "derived.M = " << format_double(derived.denominator.M) << '\n';
  os << "derived.M_b = " << format_double(derived.drift_bound) << '\n';
  os << format_config(config);
  return os.str();
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string text = to_text();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace kmv
