// Exercises the shared library through the C header only.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "dk/dk.h"

namespace {

int failures = 0;

void expect(bool ok, const char* what) {
  if (!ok) {
    ++failures;
    std::printf("FAIL %s (last error: %s)\n", what, dk_last_error());
  }
}

std::string out_dir(const char* name) {
  const auto p = std::filesystem::temp_directory_path() / (std::string("dk_capi_") + name);
  std::filesystem::remove_all(p);
  return p.string();
}

}  // namespace

int main() {
  expect(std::strlen(dk_version()) > 0, "version string");
  expect(dk_catalogue_size() == 9, "catalogue size");

  dk_result* r = nullptr;
  expect(dk_catalogue(1, &r) == DK_OK, "catalogue call");
  expect(std::strstr(dk_result_text(r), "\"name\":\"heat-oracle\"") != nullptr, "catalogue json");
  dk_result_free(r);

  dk_config* c = nullptr;
  expect(dk_config_new(&c) == DK_OK, "config handle");
  dk_config_set(c, "experiment", "heat-oracle");
  dk_config_set(c, "domain.n_cells", "32");
  dk_config_set(c, "solver.dt", "0.0002");
  dk_config_set(c, "solver.T", "0.02");
  dk_config_set(c, "check.tolerance", "1e-2");
  char buf[32];
  expect(dk_config_get(c, "solver.T", buf, sizeof buf) == DK_OK && std::string(buf) == "0.02", "config get");
  expect(dk_config_get(c, "solver.alpha", buf, sizeof buf) == DK_INVALID_ARGUMENT, "unset key");
  expect(dk_config_get(c, "experiment", buf, 4) == DK_INVALID_ARGUMENT, "short buffer");

  const std::string dir = out_dir("run");
  expect(dk_run(c, dir.c_str(), &r) == DK_OK, "run call");
  expect(dk_result_exit_code(r) == 0, "run exit code");
  dk_result_free(r);
  expect(std::filesystem::exists(dir + "/manifest.json"), "manifest written");

  expect(dk_replay((dir + "/manifest.json").c_str(), nullptr, &r) == DK_OK, "replay call");
  expect(dk_result_exit_code(r) == 0, "replay exit code");
  dk_result_free(r);
  expect(std::filesystem::exists(dir + "/replay/manifest.json"), "replay output");

  dk_config_set(c, "solver.bogus", "1");
  expect(dk_run(c, out_dir("bad").c_str(), &r) == DK_OK, "bad run call");
  expect(dk_result_exit_code(r) == DK_CONFIG_ERROR, "config error exit code");
  expect(std::strstr(dk_result_text(r), "solver.bogus") != nullptr, "key path in message");
  dk_result_free(r);
  dk_config_free(c);

  dk_config* missing = nullptr;
  expect(dk_config_load("/nonexistent.ini", &missing) == DK_CONFIG_ERROR && missing == nullptr, "missing file");
  expect(dk_run_file(nullptr, nullptr, &r) == DK_INVALID_ARGUMENT, "null path");
  expect(dk_run(nullptr, nullptr, &r) == DK_INVALID_ARGUMENT, "null config");

  std::filesystem::remove_all(dir);
  std::printf("%s: %d failure(s)\n", failures ? "FAIL" : "PASS", failures);
  return failures ? EXIT_FAILURE : EXIT_SUCCESS;
}
