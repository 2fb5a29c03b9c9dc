#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "fracopt.h"

namespace fs = std::filesystem;

namespace {

const char* kSmallConfig =
    "domain = l-shape\n"
    "s = 0.5\n"
    "sigma = 0.1\n"
    "nu = 0.5\n"
    "u_d = 1\n"
    "max_iterations = 3\n"
    "initial_refinements = 1\n";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("version and error strings exist") {
  CHECK(std::string(fracopt_version()) == "0.1.0");
  CHECK(fracopt_last_error() != nullptr);
}

TEST_CASE("config parsing through the C surface") {
  fracopt_config* cfg = nullptr;
  CHECK(fracopt_config_parse_string(kSmallConfig, &cfg) == FRACOPT_OK);
  REQUIRE(cfg != nullptr);
  fracopt_config_free(cfg);

  cfg = nullptr;
  CHECK(fracopt_config_parse_string("domain = l-shape\ns = 0.5\nu_d = 1\na = 0.2\n", &cfg) ==
        FRACOPT_ERR_VALIDATION);
  CHECK(cfg == nullptr);
  CHECK(std::string(fracopt_last_error()).find("a < 0 < b") != std::string::npos);

  CHECK(fracopt_config_parse_file("/nonexistent/path.cfg", &cfg) == FRACOPT_ERR_IO);
}

TEST_CASE("overrides reuse the config schema") {
  fracopt_config* cfg = nullptr;
  REQUIRE(fracopt_config_parse_string(kSmallConfig, &cfg) == FRACOPT_OK);
  CHECK(fracopt_config_override(cfg, "jobs", "2") == FRACOPT_OK);
  CHECK(fracopt_config_override(cfg, "vtk", "true") == FRACOPT_OK);
  CHECK(fracopt_config_override(cfg, "nonsense", "1") == FRACOPT_ERR_VALIDATION);
  CHECK(fracopt_config_override(cfg, "theta", "1.5") == FRACOPT_ERR_VALIDATION);
  fracopt_config_free(cfg);
}

TEST_CASE("run writes artifacts and exposes the trace") {
  TempDir dir("fracopt_capi_run");
  fracopt_config* cfg = nullptr;
  REQUIRE(fracopt_config_parse_string(kSmallConfig, &cfg) == FRACOPT_OK);
  REQUIRE(fracopt_config_override(cfg, "vtk", "true") == FRACOPT_OK);

  fracopt_run* run = nullptr;
  REQUIRE(fracopt_run_execute(cfg, dir.path.c_str(), &run) == FRACOPT_OK);
  fracopt_config_free(cfg);
  REQUIRE(run != nullptr);

  CHECK(fracopt_run_iteration_count(run) == 3);
  double total = 0.0, ncyl = 0.0, bad = 0.0;
  CHECK(fracopt_run_trace_value(run, 2, "total", &total) == FRACOPT_OK);
  CHECK(total > 0.0);
  CHECK(fracopt_run_trace_value(run, 2, "nT_cyl", &ncyl) == FRACOPT_OK);
  CHECK(ncyl > 0.0);
  CHECK(fracopt_run_trace_value(run, 2, "no_such_column", &bad) == FRACOPT_ERR_VALIDATION);
  CHECK(fracopt_run_trace_value(run, 99, "total", &bad) == FRACOPT_ERR_VALIDATION);
  fracopt_run_free(run);

  for (const char* name :
       {"trace.csv", "mesh_final.txt", "control_final.txt", "control_final.vtk", "manifest.txt"})
    CHECK(fs::exists(dir.path / name));

  const std::string manifest = slurp(dir.path / "manifest.txt");
  CHECK(manifest.find("version: 0.1.0") != std::string::npos);
  CHECK(manifest.find("domain = l-shape") != std::string::npos);
}

TEST_CASE("reruns produce byte-identical traces") {
  TempDir d1("fracopt_capi_det1");
  TempDir d2("fracopt_capi_det2");
  for (const auto& dir : {d1.path, d2.path}) {
    fracopt_config* cfg = nullptr;
    REQUIRE(fracopt_config_parse_string(kSmallConfig, &cfg) == FRACOPT_OK);
    fracopt_run* run = nullptr;
    REQUIRE(fracopt_run_execute(cfg, dir.c_str(), &run) == FRACOPT_OK);
    fracopt_run_free(run);
    fracopt_config_free(cfg);
  }
  CHECK(slurp(d1.path / "trace.csv") == slurp(d2.path / "trace.csv"));
}

TEST_CASE("report over a written trace") {
  TempDir dir("fracopt_capi_report");
  fracopt_config* cfg = nullptr;
  REQUIRE(fracopt_config_parse_string(kSmallConfig, &cfg) == FRACOPT_OK);
  REQUIRE(fracopt_config_override(cfg, "max_iterations", "5") == FRACOPT_OK);
  fracopt_run* run = nullptr;
  REQUIRE(fracopt_run_execute(cfg, dir.path.c_str(), &run) == FRACOPT_OK);
  fracopt_run_free(run);
  fracopt_config_free(cfg);

  fracopt_report* rep = nullptr;
  REQUIRE(fracopt_report_csv((dir.path / "trace.csv").c_str(), 5, &rep) == FRACOPT_OK);
  CHECK(std::string(fracopt_report_text(rep)).find("verdict") != std::string::npos);
  double slope = 0.0;
  CHECK(fracopt_report_slope(rep, "total", &slope) == FRACOPT_OK);
  CHECK(slope < 0.5);  // sanity: a finite number came back
  CHECK(fracopt_report_slope(rep, "unknown", &slope) == FRACOPT_ERR_VALIDATION);
  fracopt_report_free(rep);

  CHECK(fracopt_report_csv("/nonexistent/trace.csv", 5, &rep) == FRACOPT_ERR_IO);
}
