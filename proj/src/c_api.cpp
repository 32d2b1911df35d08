#include "dk/dk.h"

#include <cstring>
#include <exception>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dk/config.hpp"
#include "dk/error.hpp"
#include "dk/experiments.hpp"

struct dk_config {
  std::map<std::string, std::string> values;
};

struct dk_result {
  int exit_code = 0;
  std::string text;
};

namespace {

thread_local std::string last_error;

dk_status fail(dk_status s, const std::string& what) {
  last_error = what;
  return s;
}

template <class F>
dk_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const dk::ConfigError& e) {
    return fail(DK_CONFIG_ERROR, e.what());
  } catch (const dk::InvalidArgument& e) {
    return fail(DK_INVALID_ARGUMENT, e.what());
  } catch (const dk::NumericalError& e) {
    return fail(DK_NUMERICAL_FAILURE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DK_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(DK_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(DK_INTERNAL_ERROR, "unknown error");
  }
}

template <class F>
dk_status with_result(dk_result** out, F&& body) {
  if (!out) return fail(DK_INVALID_ARGUMENT, "null result pointer");
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<dk_result>();
    std::ostringstream log;
    r->exit_code = body(log);
    r->text = log.str();
    if (r->exit_code == DK_CONFIG_ERROR || r->exit_code == DK_NUMERICAL_FAILURE)
      last_error = r->text;
    *out = r.release();
    return DK_OK;
  });
}

std::optional<std::string> optional_dir(const char* dir) {
  if (dir && *dir) return std::string(dir);
  return std::nullopt;
}

}  // namespace

extern "C" {

const char* dk_version(void) { return dk::library_version(); }

const char* dk_last_error(void) { return last_error.c_str(); }

dk_status dk_config_new(dk_config** out) {
  if (!out) return fail(DK_INVALID_ARGUMENT, "null config pointer");
  return guarded([&] {
    *out = new dk_config;
    return DK_OK;
  });
}

dk_status dk_config_load(const char* path, dk_config** out) {
  if (!out || !path) return fail(DK_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<dk_config>();
    c->values = dk::read_config_file(path);
    *out = c.release();
    return DK_OK;
  });
}

dk_status dk_config_set(dk_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(DK_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    config->values[key] = value;
    return DK_OK;
  });
}

dk_status dk_config_get(const dk_config* config, const char* key, char* buf, size_t size) {
  if (!config || !key || !buf || size == 0) return fail(DK_INVALID_ARGUMENT, "null argument");
  const auto it = config->values.find(key);
  if (it == config->values.end()) return fail(DK_INVALID_ARGUMENT, std::string("key not set: ") + key);
  if (it->second.size() + 1 > size) return fail(DK_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, it->second.c_str(), it->second.size() + 1);
  return DK_OK;
}

void dk_config_free(dk_config* config) { delete config; }

dk_status dk_run(const dk_config* config, const char* out_dir, dk_result** out) {
  if (!config) return fail(DK_INVALID_ARGUMENT, "null config");
  return with_result(out, [&](std::ostream& log) {
    return dk::run_config_map(config->values, optional_dir(out_dir), log);
  });
}

dk_status dk_run_file(const char* path, const char* out_dir, dk_result** out) {
  if (!path) return fail(DK_INVALID_ARGUMENT, "null path");
  return with_result(out, [&](std::ostream& log) {
    return dk::run_config_file(path, optional_dir(out_dir), log);
  });
}

dk_status dk_replay(const char* manifest_path, const char* out_dir, dk_result** out) {
  if (!manifest_path) return fail(DK_INVALID_ARGUMENT, "null path");
  return with_result(out, [&](std::ostream& log) {
    return dk::replay_manifest(manifest_path, optional_dir(out_dir), log);
  });
}

dk_status dk_catalogue(int machine_readable, dk_result** out) {
  return with_result(out, [&](std::ostream& log) {
    for (const auto& e : dk::experiment_catalogue()) {
      if (machine_readable) {
        const nlohmann::ordered_json j = {{"name", e.name},
                                          {"description", e.description},
                                          {"statement", e.statement},
                                          {"criteria", e.criteria}};
        log << j.dump() << '\n';
      } else {
        log << e.name << "\n  " << e.description << "\n  exercises: " << e.statement;
        if (!e.criteria.empty()) {
          log << "\n  criteria:";
          for (const auto& c : e.criteria) log << ' ' << c;
        }
        log << '\n';
      }
    }
    return 0;
  });
}

size_t dk_catalogue_size(void) { return dk::experiment_catalogue().size(); }

int dk_result_exit_code(const dk_result* result) { return result ? result->exit_code : DK_INVALID_ARGUMENT; }

const char* dk_result_text(const dk_result* result) { return result ? result->text.c_str() : ""; }

void dk_result_free(dk_result* result) { delete result; }

}  // extern "C"
