/* C interface to the schedsec library.
 *
 * Objects are opaque handles created by *_from_* / *_builtin / *_load calls and
 * released with the matching *_free. Every fallible call returns a
 * schedsec_status; on failure schedsec_last_error() describes the problem
 * (per calling thread, valid until the next call on that thread). Strings
 * returned through char ** are owned by the caller and released with
 * schedsec_free_string().
 */
#ifndef SCHEDSEC_H
#define SCHEDSEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(SCHEDSEC_BUILDING_LIBRARY)
#define SCHEDSEC_API __attribute__((visibility("default")))
#else
#define SCHEDSEC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum schedsec_status {
    SCHEDSEC_OK = 0,
    SCHEDSEC_INVALID_ARGUMENT = 1,
    SCHEDSEC_VALIDATION = 2,
    SCHEDSEC_INFEASIBLE = 3,
    SCHEDSEC_BUDGET = 4,
    SCHEDSEC_CONVERGENCE = 5,
    SCHEDSEC_NUMERICAL = 6,
    SCHEDSEC_IO = 7,
    SCHEDSEC_INTERNAL = 8
} schedsec_status;

typedef enum schedsec_format { SCHEDSEC_FORMAT_CSV = 0, SCHEDSEC_FORMAT_JSON = 1 } schedsec_format;

typedef enum schedsec_attack_method { SCHEDSEC_METHOD_BNB = 0, SCHEDSEC_METHOD_BRUTE_FORCE = 1 } schedsec_attack_method;

/* Validated systems with their steady-state covariances. */
typedef struct schedsec_systems schedsec_systems;
/* Transmission schedule; carries duty factors when it is a policy set. */
typedef struct schedsec_schedule schedsec_schedule;
/* Per-sensor clock offsets. */
typedef struct schedsec_shift schedsec_shift;

SCHEDSEC_API const char *schedsec_version(void);
SCHEDSEC_API const char *schedsec_last_error(void);
SCHEDSEC_API const char *schedsec_status_name(schedsec_status status);
SCHEDSEC_API void schedsec_free_string(char *s);

/* Cap on exhaustive enumeration sizes; 0 restores SCHEDSEC_BUDGET or the default. */
SCHEDSEC_API void schedsec_set_budget(uint64_t max_enumeration);
SCHEDSEC_API uint64_t schedsec_budget(void);

/* ---- systems ---- */
SCHEDSEC_API schedsec_status schedsec_systems_builtin(schedsec_systems **out);
SCHEDSEC_API schedsec_status schedsec_systems_from_json(const char *json, schedsec_systems **out);
SCHEDSEC_API schedsec_status schedsec_systems_load(const char *path, schedsec_systems **out);
SCHEDSEC_API void schedsec_systems_free(schedsec_systems *systems);
SCHEDSEC_API size_t schedsec_systems_count(const schedsec_systems *systems);
/* Tr[h^t(P̄_i)]; t = 0 is Tr P̄_i. */
SCHEDSEC_API schedsec_status schedsec_systems_ladder(const schedsec_systems *systems, size_t sensor, size_t t,
                                                     double *out);
SCHEDSEC_API schedsec_status schedsec_systems_report_json(const schedsec_systems *systems, size_t ladder_entries,
                                                          char **out);

/* ---- schedules and policy sets ---- */
/* Accepts {"T", "rows"} and, optionally, "factors". */
SCHEDSEC_API schedsec_status schedsec_schedule_from_json(const char *json, schedsec_schedule **out);
SCHEDSEC_API schedsec_status schedsec_schedule_load(const char *path, schedsec_schedule **out);
/* bits is row-major, sensors x period. */
SCHEDSEC_API schedsec_status schedsec_schedule_from_rows(const uint8_t *bits, size_t sensors, size_t period,
                                                         schedsec_schedule **out);
SCHEDSEC_API schedsec_status schedsec_schedule_to_json(const schedsec_schedule *sched, char **out);
SCHEDSEC_API void schedsec_schedule_free(schedsec_schedule *sched);
SCHEDSEC_API size_t schedsec_schedule_sensors(const schedsec_schedule *sched);
SCHEDSEC_API size_t schedsec_schedule_period(const schedsec_schedule *sched);
/* 0/1, or -1 when out of range. */
SCHEDSEC_API int schedsec_schedule_bit(const schedsec_schedule *sched, size_t sensor, size_t slot);
SCHEDSEC_API int schedsec_schedule_is_exclusive(const schedsec_schedule *sched);
SCHEDSEC_API int schedsec_schedule_has_factors(const schedsec_schedule *sched);

/* Optimal exclusive schedule over the candidate periods. */
SCHEDSEC_API schedsec_status schedsec_schedule_search(const schedsec_systems *systems, const size_t *periods,
                                                      size_t n_periods, schedsec_schedule **out, double *cost);

/* ---- cost ---- */
/* attack may be NULL (no attack). */
SCHEDSEC_API schedsec_status schedsec_cost_report(const schedsec_systems *systems, const schedsec_schedule *sched,
                                                  const schedsec_shift *attack, schedsec_format format, char **out);
/* *divergent is set to 1 (and *total to 0) when some sensor never receives. */
SCHEDSEC_API schedsec_status schedsec_cost_total(const schedsec_systems *systems, const schedsec_schedule *sched,
                                                 const schedsec_shift *attack, double *total, int *divergent);

/* ---- attacks ---- */
SCHEDSEC_API schedsec_status schedsec_shift_from_json(const char *json, schedsec_shift **out);
SCHEDSEC_API schedsec_status schedsec_shift_load(const char *path, schedsec_shift **out);
SCHEDSEC_API schedsec_status schedsec_shift_from_taus(const size_t *taus, size_t n, schedsec_shift **out);
SCHEDSEC_API schedsec_status schedsec_shift_to_json(const schedsec_shift *shift, char **out);
SCHEDSEC_API void schedsec_shift_free(schedsec_shift *shift);
SCHEDSEC_API size_t schedsec_shift_size(const schedsec_shift *shift);
SCHEDSEC_API size_t schedsec_shift_at(const schedsec_shift *shift, size_t sensor);
SCHEDSEC_API size_t schedsec_shift_spoofed_count(const schedsec_shift *shift);

SCHEDSEC_API schedsec_status schedsec_attack_random(const schedsec_schedule *sched, uint64_t seed,
                                                    schedsec_shift **out);
SCHEDSEC_API schedsec_status schedsec_attack_isolate(const schedsec_schedule *sched, size_t target,
                                                     schedsec_shift **out);
/* Least-spoofing attack that blocks some sensor. Returns SCHEDSEC_INFEASIBLE
 * when none exists. report_json may be NULL. */
SCHEDSEC_API schedsec_status schedsec_attack_optimal(const schedsec_schedule *sched, schedsec_attack_method method,
                                                     schedsec_shift **out, char **report_json);
/* JSON list of sensors with zero receptions under the attack. */
SCHEDSEC_API schedsec_status schedsec_attack_blocked_json(const schedsec_schedule *sched,
                                                          const schedsec_shift *attack, char **out);

/* ---- defenses ---- */
SCHEDSEC_API schedsec_status schedsec_defend_construct(const int64_t *n, const int64_t *d, size_t sensors,
                                                       schedsec_schedule **out);
/* Same duty factors as the reference schedule, made shift invariant. */
SCHEDSEC_API schedsec_status schedsec_defend_same_duty(const schedsec_schedule *reference, schedsec_schedule **out);
/* All duty factors 1/2, period 2^sensors. */
SCHEDSEC_API schedsec_status schedsec_defend_shortest_period(size_t sensors, schedsec_schedule **out);
/* Cost bounds under arbitrary offsets for shift-invariant policies with the
 * schedule's duty factors; out_json, lower and upper may be NULL. */
SCHEDSEC_API schedsec_status schedsec_defend_bounds(const schedsec_systems *systems, const schedsec_schedule *policy,
                                                    char **out_json, double *lower, double *upper);
/* Exhaustive check, falling back to `samples` random shift tuples per tuple
 * of sensors that exceeds the budget (0 makes that a budget error). */
SCHEDSEC_API schedsec_status schedsec_verify_shift_invariance(const schedsec_schedule *sched, uint64_t samples,
                                                              uint64_t seed, int *invariant, char **report_json);

/* ---- simulation ---- */
typedef struct schedsec_sim_config {
    size_t horizon;
    uint64_t seed;
    size_t trials;
    size_t threads;     /* 0: hardware concurrency */
    int resample_sigma; /* Monte Carlo: fresh interleaving vectors per trial */
} schedsec_sim_config;

SCHEDSEC_API schedsec_sim_config schedsec_sim_config_default(void);

/* Exact covariance traces; CSV rows per (k, sensor) or a JSON summary. */
SCHEDSEC_API schedsec_status schedsec_simulate_series(const schedsec_systems *systems, const schedsec_schedule *sched,
                                                      const schedsec_shift *attack, const schedsec_sim_config *cfg,
                                                      schedsec_format format, char **out);
/* attack NULL draws uniform offsets per trial; otherwise the tuple is fixed. */
SCHEDSEC_API schedsec_status schedsec_simulate_monte_carlo(const schedsec_systems *systems,
                                                           const schedsec_schedule *policy,
                                                           const schedsec_shift *attack,
                                                           const schedsec_sim_config *cfg, schedsec_format format,
                                                           char **out);
/* Mean exact periodic cost over trials and its 95% half-width. */
SCHEDSEC_API schedsec_status schedsec_monte_carlo_cost(const schedsec_systems *systems,
                                                       const schedsec_schedule *policy, const schedsec_shift *attack,
                                                       const schedsec_sim_config *cfg, double *mean,
                                                       double *half_width);

/* ---- files ---- */
SCHEDSEC_API schedsec_status schedsec_write_file(const char *path, const char *content);

#ifdef __cplusplus
}
#endif

#endif /* SCHEDSEC_H */
