#include "kmv/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "kmv/errors.hpp"
#include "kmv/pde_solver.hpp"

namespace kmv {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::vector<TestFunction> RunConfig::probes() const {
  return {TestFunction::gaussian_bump(weak.a, weak.w), TestFunction::x_gaussian_bump(weak.a, weak.w)};
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Strips a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

struct Value {
  std::string text;
  bool quoted;
  int line;
};

double to_double(const Value& v, const std::string& key) {
  double out = 0.0;
  const char* end = v.text.data() + v.text.size();
  const auto res = std::from_chars(v.text.data(), end, out);
  if (v.quoted || res.ec != std::errc() || res.ptr != end) {
    throw ParseError(v.line, key + ": expected a number, got '" + v.text + "'");
  }
  return out;
}

std::uint64_t to_u64(const Value& v, const std::string& key) {
  std::uint64_t out = 0;
  const char* end = v.text.data() + v.text.size();
  const auto res = std::from_chars(v.text.data(), end, out);
  if (v.quoted || res.ec != std::errc() || res.ptr != end) {
    throw ParseError(v.line, key + ": expected a nonnegative integer, got '" + v.text + "'");
  }
  return out;
}

bool to_bool(const Value& v, const std::string& key) {
  if (!v.quoted && v.text == "true") return true;
  if (!v.quoted && v.text == "false") return false;
  throw ParseError(v.line, key + ": expected true or false, got '" + v.text + "'");
}

std::string to_path(const Value& v, const std::string& key) {
  if (!v.quoted) throw ParseError(v.line, key + ": paths must be quoted");
  return v.text;
}

std::vector<double> to_list(const Value& v, const std::string& key) {
  std::vector<double> out;
  std::string_view rest = v.text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    out.push_back(to_double(Value{std::string(item), false, v.line}, key));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const Value&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.lambda", [](RunConfig& c, const Value& v, const std::string& k) { c.model.lambda = to_double(v, k); }},
      {"model.c0", [](RunConfig& c, const Value& v, const std::string& k) { c.model.c0 = to_double(v, k); }},
      {"model.phi0", [](RunConfig& c, const Value& v, const std::string& k) { c.model.phi0 = to_double(v, k); }},
      {"model.phi1", [](RunConfig& c, const Value& v, const std::string& k) { c.model.phi1 = to_double(v, k); }},
      {"model.T", [](RunConfig& c, const Value& v, const std::string& k) { c.model.T = to_double(v, k); }},
      {"kernel.sigma", [](RunConfig& c, const Value& v, const std::string& k) { c.kernel.sigma = to_double(v, k); }},
      {"sim.N", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.N = to_u64(v, k); }},
      {"sim.dt", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.dt = to_double(v, k); }},
      {"sim.mode",
       [](RunConfig& c, const Value& v, const std::string& k) {
         if (v.text == "hard") {
           c.sim.mode = KillMode::hard;
         } else if (v.text == "soft") {
           c.sim.mode = KillMode::soft;
         } else {
           throw ParseError(v.line, k + ": expected hard or soft, got '" + v.text + "'");
         }
       }},
      {"sim.seed", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.seed = to_u64(v, k); }},
      {"sim.init",
       [](RunConfig& c, const Value& v, const std::string& k) {
         if (v.text == "gaussian") {
           c.sim.init.kind = InitLaw::Kind::gaussian;
         } else if (v.text == "point") {
           c.sim.init.kind = InitLaw::Kind::point_mass;
         } else if (v.text == "explicit") {
           c.sim.init.kind = InitLaw::Kind::explicit_list;
         } else {
           throw ParseError(v.line, k + ": expected gaussian, point or explicit, got '" + v.text + "'");
         }
       }},
      {"sim.init_mean", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.init.mean = to_double(v, k); }},
      {"sim.init_std", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.init.std = to_double(v, k); }},
      {"sim.init_x0", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.init.x0 = to_double(v, k); }},
      {"sim.init_points", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.init.points = to_list(v, k); }},
      {"sim.oracle", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.oracle_enabled = to_bool(v, k); }},
      {"sim.workers",
       [](RunConfig& c, const Value& v, const std::string& k) { c.sim.workers = static_cast<unsigned>(to_u64(v, k)); }},
      {"grid.x_min", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.grid.x_min = to_double(v, k); }},
      {"grid.x_max", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.grid.x_max = to_double(v, k); }},
      {"grid.n_cells", [](RunConfig& c, const Value& v, const std::string& k) { c.sim.grid.n_cells = to_u64(v, k); }},
      {"pde.enabled", [](RunConfig& c, const Value& v, const std::string& k) { c.pde.enabled = to_bool(v, k); }},
      {"pde.dt", [](RunConfig& c, const Value& v, const std::string& k) { c.pde.dt = to_double(v, k); }},
      {"output.dir", [](RunConfig& c, const Value& v, const std::string& k) { c.outputs.directory = to_path(v, k); }},
      {"output.snapshot_stride",
       [](RunConfig& c, const Value& v, const std::string& k) { c.outputs.snapshot_stride = to_u64(v, k); }},
      {"output.field_dump", [](RunConfig& c, const Value& v, const std::string& k) { c.outputs.field_dump = to_bool(v, k); }},
      {"overrides.constant_rate",
       [](RunConfig& c, const Value& v, const std::string& k) {
         if (!v.quoted && v.text == "none") {
           c.overrides.constant_rate.reset();
         } else {
           c.overrides.constant_rate = to_double(v, k);
         }
       }},
      {"overrides.zero_drift", [](RunConfig& c, const Value& v, const std::string& k) { c.overrides.zero_drift = to_bool(v, k); }},
      {"weak.a", [](RunConfig& c, const Value& v, const std::string& k) { c.weak.a = to_double(v, k); }},
      {"weak.w", [](RunConfig& c, const Value& v, const std::string& k) { c.weak.w = to_double(v, k); }},
  };
  return table;
}

// Sections written into run manifests that carry provenance, not settings.
bool is_informational(std::string_view key) {
  return key.starts_with("manifest.") || key.starts_with("derived.");
}

std::pair<double, double> init_support(const InitLaw& init) {
  switch (init.kind) {
    case InitLaw::Kind::gaussian:
      return {init.mean, init.std};
    case InitLaw::Kind::point_mass:
      return {init.x0, 0.0};
    case InitLaw::Kind::explicit_list:
      break;
  }
  const auto [lo, hi] = std::minmax_element(init.points.begin(), init.points.end());
  return {0.5 * (*lo + *hi), 0.5 * (*hi - *lo)};
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'section.key = value'");
    const std::string key(trim(line.substr(0, eq)));
    std::string_view raw = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.') {
      throw ParseError(line_no, "key '" + key + "' must have the form section.key");
    }
    if (raw.empty()) throw ParseError(line_no, key + ": missing value");
    Value value{std::string(raw), false, line_no};
    if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"') throw ParseError(line_no, key + ": unterminated string");
      value.text = std::string(raw.substr(1, raw.size() - 2));
      value.quoted = true;
    }
    if (is_informational(key)) continue;
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(line_no, "unknown key '" + key + "'");
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw ParseError(line_no, key + ": already set on line " + std::to_string(prev->second));
    }
    seen[key] = line_no;
    it->second(cfg, value, key);
  }
  cfg.sim.T = cfg.model.T;
  if (cfg.sim.init.kind == InitLaw::Kind::explicit_list) cfg.sim.N = cfg.sim.init.points.size();
  validate_run_config(cfg);
  return cfg;
}

void validate_run_config(const RunConfig& cfg) {
  const DenominatorBounds bounds = validate_params(cfg.model, cfg.kernel);
  if (cfg.sim.T != cfg.model.T) throw ValidationError("model.T", "simulation horizon differs from model.T");
  if (cfg.sim.init.kind == InitLaw::Kind::explicit_list && cfg.sim.init.points.empty()) {
    throw ValidationError("sim.init_points", "explicit init needs at least one point");
  }
  cfg.sim.validate();
  if (cfg.overrides.constant_rate && !(*cfg.overrides.constant_rate >= 0.0)) {
    throw ValidationError("overrides.constant_rate", "must be nonnegative");
  }
  if (!(cfg.weak.w > 0.0)) throw ValidationError("weak.w", "must be positive");

  // The particle cloud must stay 5 sigma inside the grid: require the initial
  // support widened by 6 (spread + sqrt(2T)) to fit.
  const auto [center, spread] = init_support(cfg.sim.init);
  const double reach = 6.0 * (spread + std::sqrt(2.0 * cfg.model.T)) +
                       kBoundaryMarginSigmas * cfg.kernel.sigma;
  const GridSpec& grid = cfg.sim.grid;
  if (center - reach < grid.x_min || center + reach > grid.x_max) {
    std::ostringstream os;
    os << "grid [" << grid.x_min << ", " << grid.x_max << "] does not cover [" << center - reach
       << ", " << center + reach << "] (initial law +- 6 (std + sqrt(2T)) + 5 sigma)";
    throw ValidationError(center - reach < grid.x_min ? "grid.x_min" : "grid.x_max", os.str());
  }

  if (cfg.pde.enabled) {
    if (cfg.sim.init.kind == InitLaw::Kind::point_mass) {
      throw ValidationError("sim.init", "the PDE needs an initial density; use gaussian or explicit");
    }
    if (cfg.sim.init.kind == InitLaw::Kind::gaussian && !(cfg.sim.init.std > 0.0)) {
      throw ValidationError("sim.init_std", "the PDE needs a positive initial spread");
    }
    if (!(cfg.pde.dt > 0.0)) throw ValidationError("pde.dt", "must be positive");
    const double steps = std::round(cfg.model.T / cfg.pde.dt);
    if (steps < 1.0 || std::abs(steps * cfg.pde.dt - cfg.model.T) > 1e-12 * cfg.model.T) {
      throw ValidationError("pde.dt", "dt must divide T");
    }
    const Dynamics dyn(cfg.model, cfg.overrides);
    const double dt_max = max_stable_dt(grid, dyn.drift_max(cfg.kernel, bounds));
    if (cfg.pde.dt > dt_max * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "pde.dt = " << cfg.pde.dt << " exceeds the stability limit " << dt_max;
      throw CflViolation(os.str());
    }
  }
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  auto line = [&os](const char* key, const std::string& value) { os << key << " = " << value << '\n'; };
  auto num = [](double v) { return format_double(v); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };

  line("model.lambda", num(c.model.lambda));
  line("model.c0", num(c.model.c0));
  line("model.phi0", num(c.model.phi0));
  line("model.phi1", num(c.model.phi1));
  line("model.T", num(c.model.T));
  line("kernel.sigma", num(c.kernel.sigma));
  line("sim.N", std::to_string(c.sim.N));
  line("sim.dt", num(c.sim.dt));
  line("sim.mode", to_string(c.sim.mode));
  line("sim.seed", std::to_string(c.sim.seed));
  switch (c.sim.init.kind) {
    case InitLaw::Kind::gaussian:
      line("sim.init", "gaussian");
      break;
    case InitLaw::Kind::point_mass:
      line("sim.init", "point");
      break;
    case InitLaw::Kind::explicit_list:
      line("sim.init", "explicit");
      break;
  }
  line("sim.init_mean", num(c.sim.init.mean));
  line("sim.init_std", num(c.sim.init.std));
  line("sim.init_x0", num(c.sim.init.x0));
  if (!c.sim.init.points.empty()) {
    std::string list;
    for (std::size_t i = 0; i < c.sim.init.points.size(); ++i) {
      if (i) list += ',';
      list += num(c.sim.init.points[i]);
    }
    line("sim.init_points", list);
  }
  line("sim.oracle", flag(c.sim.oracle_enabled));
  line("sim.workers", std::to_string(c.sim.workers));
  line("grid.x_min", num(c.sim.grid.x_min));
  line("grid.x_max", num(c.sim.grid.x_max));
  line("grid.n_cells", std::to_string(c.sim.grid.n_cells));
  line("pde.enabled", flag(c.pde.enabled));
  line("pde.dt", num(c.pde.dt));
  line("output.dir", "\"" + c.outputs.directory + "\"");
  line("output.snapshot_stride", std::to_string(c.outputs.snapshot_stride));
  line("output.field_dump", flag(c.outputs.field_dump));
  line("overrides.constant_rate", c.overrides.constant_rate ? num(*c.overrides.constant_rate) : "none");
  line("overrides.zero_drift", flag(c.overrides.zero_drift));
  line("weak.a", num(c.weak.a));
  line("weak.w", num(c.weak.w));
  return os.str();
}

}  // namespace kmv
