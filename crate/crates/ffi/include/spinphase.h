#ifndef SPINPHASE_H
#define SPINPHASE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpFieldKind {
  SP_FIELD_KIND_FREE = 0,
  SP_FIELD_KIND_HOMOGENEOUS_B = 1,
  SP_FIELD_KIND_HARMONIC_PLUS_B = 2,
  SP_FIELD_KIND_QUADRUPOLE_B = 3,
} SpFieldKind;

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  SP_STATUS_CONFIG = 3,
  SP_STATUS_IO = 4,
  // A solver left its validity window or a check failed.
  SP_STATUS_PHYSICS = 5,
  SP_STATUS_PANIC = 6,
} SpStatus;

// Experiment configuration handle.
typedef struct SpConfig SpConfig;

// Field configuration handle.
typedef struct SpField SpField;

// Property-suite result handle.
typedef struct SpSuiteReport SpSuiteReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into the library on this thread.
const char *sp_last_error(void);

// Library version as a static NUL-terminated string.
const char *sp_version(void);

// # Safety
// `out` must be valid for a write.
enum SpStatus sp_field_new(enum SpFieldKind kind,
                           double h0,
                           double epsilon,
                           double omega0,
                           double charge_sign,
                           struct SpField **out);

// # Safety
// `field` must come from `sp_field_new` and not be used afterwards.
void sp_field_free(struct SpField *field);

// Magnetic field at `r`.
//
// # Safety
// `field` must be a live handle; `r` and `out` point to three doubles.
enum SpStatus sp_field_magnetic(const struct SpField *field, const double *r, double *out);

// Vector potential (including gauge terms) at `r`.
//
// # Safety
// As for `sp_field_magnetic`.
enum SpStatus sp_field_vector_potential(const struct SpField *field, const double *r, double *out);

// Mean angular momentum of the Gaussian packet in a uniform field after
// turn-on, by the classical and by the quantum closed form.
//
// # Safety
// `classical` and `quantum` point to three writable doubles each.
enum SpStatus sp_homogeneous_l(double e,
                               double m,
                               double c,
                               double hbar,
                               double h0,
                               double d,
                               double t,
                               double *classical,
                               double *quantum);

// Parse a TOML experiment config.
//
// # Safety
// `text` is a NUL-terminated string; `out` must be valid for a write.
enum SpStatus sp_config_parse(const char *text, struct SpConfig **out);

// Read a config file (a run manifest is also accepted). Honours the
// output-directory environment override.
//
// # Safety
// As for `sp_config_parse`.
enum SpStatus sp_config_load(const char *path, struct SpConfig **out);

// # Safety
// `config` must be a live handle; `dir` a NUL-terminated string.
enum SpStatus sp_config_set_output_dir(struct SpConfig *config, const char *dir);

// # Safety
// `config` must come from this library and not be used afterwards.
void sp_config_free(struct SpConfig *config);

// Run the experiment and write its CSVs and manifest into the output
// directory. `SP_STATUS_PHYSICS` keeps the files written before the halt.
//
// # Safety
// `config` must be a live handle.
enum SpStatus sp_run(const struct SpConfig *config);

// Run the property suite. `dt_scale` multiplies the classical time steps.
//
// # Safety
// `out` must be valid for a write.
enum SpStatus sp_property_suite(uint64_t seed, double dt_scale, struct SpSuiteReport **out);

// Number of checks in the report (0 for a null handle).
//
// # Safety
// `report` is null or a live handle.
size_t sp_suite_len(const struct SpSuiteReport *report);

// Number of failing gating checks (0 for a null handle).
//
// # Safety
// `report` is null or a live handle.
size_t sp_suite_failures(const struct SpSuiteReport *report);

// Check `index`: `module/invariant` name (owned by the report), measured
// value, bound and pass flag. `gating` is false for informational checks.
//
// # Safety
// `report` is a live handle; every out pointer is valid for a write.
enum SpStatus sp_suite_result(const struct SpSuiteReport *report,
                              size_t index,
                              const char **name,
                              double *measured,
                              double *bound,
                              bool *pass,
                              bool *gating);

// # Safety
// `report` must come from `sp_property_suite` and not be used afterwards.
void sp_suite_free(struct SpSuiteReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINPHASE_H */
