#ifndef DK_DK_H
#define DK_DK_H

#include <stddef.h>

#if defined(DK_BUILDING_LIBRARY)
#define DK_API __attribute__((visibility("default")))
#else
#define DK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The first four double as process exit codes. */
typedef enum dk_status {
  DK_OK = 0,
  DK_CHECK_FAILED = 1,
  DK_CONFIG_ERROR = 2,
  DK_NUMERICAL_FAILURE = 3,
  DK_INVALID_ARGUMENT = 4,
  DK_INTERNAL_ERROR = 5
} dk_status;

/* Dotted key/value run configuration. */
typedef struct dk_config dk_config;

/* Outcome of a call: exit code plus the text it produced. */
typedef struct dk_result dk_result;

DK_API const char* dk_version(void);

/* Message of the last failed call on this thread ("" if none). */
DK_API const char* dk_last_error(void);

DK_API dk_status dk_config_new(dk_config** out);
DK_API dk_status dk_config_load(const char* path, dk_config** out);
DK_API dk_status dk_config_set(dk_config* config, const char* key, const char* value);
/* Copies the value of a key set on the handle into buf; DK_INVALID_ARGUMENT if unset. */
DK_API dk_status dk_config_get(const dk_config* config, const char* key, char* buf, size_t size);
DK_API void dk_config_free(dk_config* config);

/* out_dir may be NULL: then DK_OUTPUT_DIR, then output.dir apply. */
DK_API dk_status dk_run(const dk_config* config, const char* out_dir, dk_result** out);
DK_API dk_status dk_run_file(const char* path, const char* out_dir, dk_result** out);
/* out_dir may be NULL: outputs go to <manifest dir>/replay. */
DK_API dk_status dk_replay(const char* manifest_path, const char* out_dir, dk_result** out);

/* Experiment catalogue: plain text, or one JSON object per line. */
DK_API dk_status dk_catalogue(int machine_readable, dk_result** out);
DK_API size_t dk_catalogue_size(void);

DK_API int dk_result_exit_code(const dk_result* result);
DK_API const char* dk_result_text(const dk_result* result);
DK_API void dk_result_free(dk_result* result);

#ifdef __cplusplus
}
#endif

#endif
