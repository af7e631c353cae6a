#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>
#include <sys/wait.h>

#include "kmv/cli.hpp"
#include "kmv/config.hpp"
#include "kmv/manifest.hpp"

using namespace kmv;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "kmv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir() {
  const fs::path d = fs::temp_directory_path() / ("kmv_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = workdir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Manifest text without the wall-clock lines.
std::string stable_manifest(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.starts_with("manifest.started") || line.starts_with("manifest.finished")) continue;
    kept += line + '\n';
  }
  return kept;
}

const std::string kSmall =
    "model.T = 0.2\n"
    "sim.N = 300\n"
    "sim.dt = 0.01\n"
    "grid.x_min = -14\n"
    "grid.x_max = 14\n"
    "grid.n_cells = 350\n"
    "pde.dt = 0.0016\n";

int run_binary(const std::string& args) {
  const std::string cmd = std::string(KMV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  const auto r = cli({"simulate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("--config") != std::string::npos);
  CHECK(cli({"simulate", "--config", "x.cfg", "--mode", "medium"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("validate") {
  const auto bad = write_file("bad.cfg", "model.phi0 = 0.1\nmodel.phi1 = -1\n");
  const auto r = cli({"validate", "--config", bad.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("phi0") != std::string::npos);
  CHECK(r.err.find("phi1") != std::string::npos);

  CHECK(cli({"validate"}, "model.lambda = 0\n").code == 0);
  CHECK(cli({"validate"}, "model.nope = 0\n").code == 1);
  CHECK(cli({"validate", "--config", (workdir() / "missing.cfg").string()}).code == 2);
  // stability limit is a runtime error
  CHECK(cli({"validate"}, "pde.dt = 0.01\n").code == 2);
  const auto ok = cli({"validate"}, "");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("sim.N = 10000") != std::string::npos);
}

TEST_CASE("constants") {
  const auto def = write_file("default.cfg", "");
  const auto r = cli({"constants", "--config", def.string()});
  REQUIRE(r.code == 0);
  const RunConfig c = parse_config("");
  const auto d = derive_constants(c);
  auto value = [&](const std::string& name) {
    std::istringstream in(r.out);
    std::string key;
    double v;
    while (in >> key >> v) {
      if (key == name) return v;
    }
    FAIL("missing " << name);
    return 0.0;
  };
  CHECK(value("M_K") == doctest::Approx(d.kernel.max_value).epsilon(1e-11));
  CHECK(value("L_K") == doctest::Approx(d.kernel.lipschitz).epsilon(1e-11));
  CHECK(value("m") == doctest::Approx(d.denominator.m).epsilon(1e-11));
  CHECK(value("M") == doctest::Approx(d.denominator.M).epsilon(1e-11));
  CHECK(value("M_b") == doctest::Approx(d.drift_bound).epsilon(1e-11));
  CHECK(value("M_K") == doctest::Approx(0.7978845608).epsilon(1e-9));
}

TEST_CASE("simulate and solve outputs") {
  const auto cfg = write_file("small.cfg", kSmall + "output.snapshot_stride = 10\noutput.field_dump = true\n");
  const fs::path out = workdir() / "sim";
  fs::remove_all(out);
  auto r = cli({"simulate", "--config", cfg.string(), "--out", out.string(), "--mode", "soft",
                "--seed", "7", "--quiet"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(fs::exists(out / "mass_soft.csv"));
  CHECK(fs::exists(out / "snapshots_soft.csv"));
  CHECK(fs::exists(out / "field_soft.csv"));
  CHECK(slurp(out / "mass_soft.csv").starts_with("t,mass_soft\n0,1\n"));
  CHECK(slurp(out / "snapshots_soft.csv").starts_with("t,particle_id,x,alive,lambda,weight\n"));
  CHECK(slurp(out / "field_soft.csv").starts_with("x,U,V\n"));
  const std::string manifest = slurp(out / "manifest.cfg");
  CHECK(manifest.find("manifest.seed = 7") != std::string::npos);
  CHECK(manifest.find("manifest.seed_source = \"cli\"") != std::string::npos);
  CHECK(manifest.find("manifest.finished = \"\"") == std::string::npos);
  const RunConfig back = parse_config(manifest);
  CHECK(back.sim.seed == 7);
  CHECK(back.sim.mode == KillMode::soft);

  const fs::path pout = workdir() / "pde";
  fs::remove_all(pout);
  r = cli({"solve", "--config", cfg.string(), "--out", pout.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("final mass") != std::string::npos);
  CHECK(slurp(pout / "mass_pde.csv").starts_with("t,mass_pde\n"));
  CHECK(slurp(pout / "density_pde.csv").starts_with("t,x,rho\n"));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(pout)) ++files;
  CHECK(files == 3);
}

TEST_CASE("runtime errors exit with 2") {
  const auto cfg = write_file("small_io.cfg", kSmall);
  const auto r = cli({"simulate", "--config", cfg.string(), "--out", "/proc/kmv_no_such_dir"});
  CHECK(r.code == 2);
  CHECK(r.err.find("kmv_no_such_dir") != std::string::npos);
}

TEST_CASE("compare is deterministic") {
  const auto cfg = write_file("cmp.cfg", kSmall);
  const fs::path a = workdir() / "cmp_a", b = workdir() / "cmp_b";
  fs::remove_all(a);
  fs::remove_all(b);
  // same target path both times, the first result moved aside
  const auto rb = cli({"compare", "--config", cfg.string(), "--seed", "42", "--out", a.string()});
  fs::rename(a, b);
  const auto ra = cli({"compare", "--config", cfg.string(), "--seed", "42", "--out", a.string()});
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(ra.out == rb.out);
  CHECK(ra.out.find("mass_hard") != std::string::npos);
  std::size_t lines = 0;
  for (char ch : ra.out) lines += ch == '\n';
  CHECK(lines == 12);

  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  CHECK(names == std::vector<std::string>{"density_pde.csv", "manifest.cfg", "mass_hard.csv",
                                          "mass_pde.csv", "mass_soft.csv", "report.csv"});
  for (const auto& n : names) {
    if (n == "manifest.cfg") {
      CHECK(stable_manifest(a / n) == stable_manifest(b / n));
    } else {
      CHECK(slurp(a / n) == slurp(b / n));
    }
  }
  CHECK(slurp(a / "report.csv")
            .starts_with("t,l1_gap,mass_hard,mass_soft,mass_pde,w1,residual_f1,residual_f2\n"));

  const fs::path c = workdir() / "cmp_c";
  fs::remove_all(c);
  REQUIRE(cli({"compare", "--config", cfg.string(), "--seed", "43", "--out", c.string()}).code == 0);
  CHECK(slurp(a / "mass_hard.csv") != slurp(c / "mass_hard.csv"));
}

TEST_CASE("installed binary") {
  const auto bad = write_file("bad2.cfg", "model.phi0 = 0.1\nmodel.phi1 = -1\n");
  CHECK(run_binary("validate --config " + bad.string()) == 1);
  CHECK(run_binary("constants --config " + write_file("d2.cfg", "").string()) == 0);
  CHECK(run_binary("nonsense") == 1);
}
