#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "dk/dk.h"

namespace {

int finish(dk_status status, dk_result* result) {
  if (status != DK_OK) {
    std::cerr << "error: " << dk_last_error() << '\n';
    return status == DK_INVALID_ARGUMENT ? DK_CONFIG_ERROR : static_cast<int>(status);
  }
  const int code = dk_result_exit_code(result);
  (code == 0 ? std::cout : std::cerr) << dk_result_text(result);
  dk_result_free(result);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularised Dean-Kawasaki solver and diagnostics"};
  app.set_version_flag("--version", std::string(dk_version()));
  app.require_subcommand(1);

  std::string config, manifest, out_dir;
  bool json = false;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config, "INI config file")->required();
  run->add_option("-o,--out", out_dir, "Output directory (overrides the config)");

  auto* list = app.add_subcommand("list", "List the experiments");
  list->add_flag("--json", json, "One JSON object per line");

  auto* replay = app.add_subcommand("replay", "Re-run the configuration recorded in a manifest");
  replay->add_option("manifest", manifest, "manifest.json of a previous run")->required();
  replay->add_option("-o,--out", out_dir, "Output directory (default: <manifest dir>/replay)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : DK_CONFIG_ERROR;
  }

  const char* dir = out_dir.empty() ? nullptr : out_dir.c_str();
  dk_result* result = nullptr;
  if (*run) {
    const dk_status s = dk_run_file(config.c_str(), dir, &result);
    return finish(s, result);
  }
  if (*replay) {
    const dk_status s = dk_replay(manifest.c_str(), dir, &result);
    return finish(s, result);
  }
  if (*list) {
    const dk_status s = dk_catalogue(json ? 1 : 0, &result);
    if (s == DK_OK) std::cout << dk_result_text(result);
    dk_result_free(result);
    return s == DK_OK ? 0 : static_cast<int>(s);
  }
  return 0;
}
