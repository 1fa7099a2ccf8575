/*
 * phasecell - simulation, calibration and estimation for I/Q phase detector
 * cells with a four-section linearized 360-degree estimator.
 *
 * C API over the C++ core. All functions return a pdc_status; on failure
 * pdc_last_error() holds a thread-local message describing the problem.
 * Opaque handles (pdc_table) are created by the library and released with
 * their matching free function. Angles are degrees, voltages volts,
 * frequencies GHz unless a suffix says otherwise.
 */
#ifndef PHASECELL_H
#define PHASECELL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdc_status {
    PDC_OK = 0,
    PDC_ERR_PRECONDITION = 1, /* invalid argument / violated contract */
    PDC_ERR_FORMAT = 2,       /* unparseable or corrupt serialized data */
    PDC_ERR_IO = 3,           /* file system failure */
    PDC_ERR_INTERNAL = 4
} pdc_status;

const char* pdc_version(void);
const char* pdc_status_name(pdc_status status);
/* Message for the most recent failure on the calling thread. */
const char* pdc_last_error(void);

/* Wrap an angle to the canonical (-180, +180] interval. */
double pdc_wrap_degrees(double deg);
/* Decorrelated child seed for stream `index` of a master seed. */
uint64_t pdc_derive_seed(uint64_t master, uint64_t index);

/* ------------------------------------------------------------ detector */

typedef enum pdc_switch_path { PDC_PATH_0 = 0, PDC_PATH_90 = 1 } pdc_switch_path;

typedef struct pdc_harmonic {
    int32_t order;    /* >= 2 */
    double amplitude; /* relative to the fundamental, in [0, 1) */
    double phase_deg;
} pdc_harmonic;

typedef struct pdc_detector_params {
    double gain_i;   /* volts, > 0 */
    double gain_q;   /* volts, > 0 */
    double offset_i; /* volts */
    double offset_q; /* volts */
    double delta_q;  /* quadrature deviation from 90 deg, |x| < 90 */
    double eps_i;    /* residual in-phase path error, degrees */
    const pdc_harmonic* harmonics; /* may be NULL when count is 0 */
    size_t harmonic_count;
    double noise_sigma; /* volts, >= 0 */
} pdc_detector_params;

typedef struct pdc_adc_params {
    int32_t bits; /* 2..16 */
    double v_min;
    double v_max; /* > v_min */
    double conditioner_gain;
    double conditioner_offset;
} pdc_adc_params;

typedef struct pdc_sweep_record {
    double phase_deg;
    double vdi_v;
    double vdq_v;
} pdc_sweep_record;

/* Settled branch voltage for a true phase shift. Pass seed = NULL for an
 * unseeded (non-deterministic) noise draw; noise_sigma == 0 is exact. Only
 * switch states (0,0) and (90,0) are valid. */
pdc_status pdc_branch_voltage(const pdc_detector_params* params, double delta_alpha_deg,
                              pdc_switch_path sw1, pdc_switch_path sw0, const uint64_t* seed,
                              double* out_volts);

/* Conditioner + saturating quantizer; round half away from zero. */
pdc_status pdc_adc_quantize(const pdc_adc_params* adc, double volts, int32_t* out_code);
pdc_status pdc_adc_dequantize(const pdc_adc_params* adc, int32_t code, double* out_volts);

/* Switch to (0,0) then (90,0), quantizing each branch; independent noise. */
pdc_status pdc_measure_pair(const pdc_detector_params* params, const pdc_adc_params* adc,
                            double delta_alpha_deg, const uint64_t* seed, int32_t* out_code_i,
                            int32_t* out_code_q);

/* Full-circle sweep at phases 0, step, ..., < 360. Two-call pattern: with
 * out == NULL only *out_count is written. */
pdc_status pdc_simulate_sweep(const pdc_detector_params* params, double step_deg,
                              const uint64_t* seed, pdc_sweep_record* out, size_t cap,
                              size_t* out_count);

typedef struct pdc_profile_anchor {
    double freq_ghz;
    double delta_deg;
} pdc_profile_anchor;

/* Linear interpolation between anchors (strictly increasing freq_ghz);
 * lookup outside the anchored span fails. */
pdc_status pdc_profile_delta(const pdc_profile_anchor* anchors, size_t count, double freq_ghz,
                             double* out_delta_deg);

/* Sweep CSV ("phase_deg,vdi_v,vdq_v" header). Two-call pattern on both. */
pdc_status pdc_sweep_to_csv(const pdc_sweep_record* records, size_t count, char* buf, size_t cap,
                            size_t* out_len);
pdc_status pdc_sweep_from_csv(const char* text, pdc_sweep_record* out, size_t cap,
                              size_t* out_count);

/* -------------------------------------------------------------- linfit */

typedef struct pdc_line_fit {
    double slope;     /* degrees per normalized-voltage unit */
    double intercept; /* degrees */
    double max_err;   /* degrees */
} pdc_line_fit;

typedef struct pdc_lr_error_sample {
    double lr_deg;
    double max_err_deg;
} pdc_lr_error_sample;

/* Best zero-intercept line inverting sin over [-lr/2, +lr/2], 0 < lr < 180. */
pdc_status pdc_minimax_line_sine(double lr_deg, pdc_line_fit* out);
/* Exact discrete Chebyshev line fit over n >= 3 points. */
pdc_status pdc_minimax_line_data(const double* v, const double* theta, size_t n,
                                 pdc_line_fit* out);
pdc_status pdc_error_vs_lr(double lr_min, double lr_max, double step, pdc_lr_error_sample* out,
                           size_t cap, size_t* out_count);
pdc_status pdc_required_lr(double deviation_deg, double* out_lr_deg);
pdc_status pdc_max_admissible_deviation(double err_budget_deg, double* out_deviation_deg);

/* --------------------------------------------------------- calibration */

typedef enum pdc_curve { PDC_CURVE_IN_PHASE = 0, PDC_CURVE_QUADRATURE = 1 } pdc_curve;
typedef enum pdc_slope_sign { PDC_SLOPE_PLUS = 0, PDC_SLOPE_MINUS = 1 } pdc_slope_sign;

typedef struct pdc_section_info {
    pdc_curve curve;
    pdc_slope_sign slope_sign;
    double center_deg; /* wrapped (-180, 180] */
    pdc_line_fit fit;
    double domain_lo_deg; /* unwrapped around center */
    double domain_hi_deg;
    double v_lo; /* normalized voltage at the domain endpoints */
    double v_hi;
} pdc_section_info;

typedef struct pdc_table_info {
    double delta_hat_deg;
    double norm_i_gain_v, norm_i_offset_v;
    double norm_q_gain_v, norm_q_offset_v;
    /* order: Quadrature/Plus, InPhase/Minus, Quadrature/Minus, InPhase/Plus */
    pdc_section_info sections[4];
} pdc_table_info;

typedef struct pdc_table pdc_table; /* opaque calibration table handle */

/* Build a table from a full-circle sweep (span the whole circle, circular
 * step <= 2 degrees, no duplicate phases). */
pdc_status pdc_table_build(const pdc_sweep_record* records, size_t count, pdc_table** out);
void pdc_table_free(pdc_table* table);

pdc_status pdc_table_get_info(const pdc_table* table, pdc_table_info* out);
/* Apply the table's channel normalization to raw voltages. */
pdc_status pdc_table_normalize(const pdc_table* table, double vdi_v, double vdq_v,
                               double* out_vdi_n, double* out_vdq_n);

/* Binary table image (see README for the 95-byte layout). Two-call pattern. */
pdc_status pdc_table_encode(const pdc_table* table, uint8_t* buf, size_t cap, size_t* out_len);
pdc_status pdc_table_decode(const uint8_t* bytes, size_t len, pdc_table** out);

/* JSON table image. Two-call pattern; *out_len includes the NUL. */
pdc_status pdc_table_to_json(const pdc_table* table, char* buf, size_t cap, size_t* out_len);
pdc_status pdc_table_from_json(const char* json_text, pdc_table** out);

/* ----------------------------------------------------------- estimator */

/* Selector decision: |vdq| <= |vdi| picks the quadrature curve (Plus when
 * vdi >= 0), otherwise the in-phase curve (Minus when vdq >= 0). */
pdc_status pdc_select_section(double vdi_n, double vdq_n, pdc_curve* out_curve,
                              pdc_slope_sign* out_sign);

/* Float reference path: normalized inputs must be within +/-1.25. Result is
 * wrapped to (-180, +180]. */
pdc_status pdc_estimate_phase(const pdc_table* table, double vdi_n, double vdq_n,
                              double* out_deg);

/* Integer-only path from raw ADC codes and an encoded table; returns
 * centidegrees wrapped to (-18000, +18000]. */
pdc_status pdc_estimate_phase_fixed(const uint8_t* table_bytes, size_t len,
                                    const pdc_adc_params* adc, int32_t code_i, int32_t code_q,
                                    int32_t* out_centideg);

/* The integer path's code -> normalized-voltage front end (q15 grid), for
 * hosts that want the float estimator to see exactly the inputs the integer
 * estimator sees. Near a selector tie the section choice rides on the last
 * normalization bit, so float/fixed comparisons need this shared front end. */
pdc_status pdc_normalize_codes_q15(const uint8_t* table_bytes, size_t len,
                                   const pdc_adc_params* adc, int32_t code_i, int32_t code_q,
                                   double* out_vdi_n, double* out_vdq_n);

/* Single-multiplier arcsine baseline, |vd_n| <= 1. Also reports the mirrored
 * 180 - asin(v) solution to expose the ambiguity. */
pdc_status pdc_baseline_single(double vd_n, double* out_deg, double* out_alternate_deg);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PHASECELL_H */
