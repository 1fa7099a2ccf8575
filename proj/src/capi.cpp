#include "phasecell.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "phasecell/angles.hpp"
#include "phasecell/calibration.hpp"
#include "phasecell/detector.hpp"
#include "phasecell/errors.hpp"
#include "phasecell/estimator.hpp"
#include "phasecell/linfit.hpp"
#include "phasecell/sweep.hpp"

// C shim over the C++ core. Exceptions stop at this boundary: every entry
// point converts them to a status code and stores the message thread-locally.

struct pdc_table {
    phasecell::CalibrationTable t;
};

namespace {

thread_local std::string g_last_error;

pdc_status map_kind(phasecell::ErrorKind kind) {
    using phasecell::ErrorKind;
    switch (kind) {
        case ErrorKind::precondition: return PDC_ERR_PRECONDITION;
        case ErrorKind::format: return PDC_ERR_FORMAT;
        case ErrorKind::io: return PDC_ERR_IO;
    }
    return PDC_ERR_INTERNAL;
}

template <typename Fn>
pdc_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return PDC_OK;
    } catch (const phasecell::Error& e) {
        g_last_error = e.what();
        return map_kind(e.kind());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PDC_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return PDC_ERR_INTERNAL;
    }
}

void need(bool ok, const char* msg) {
    if (!ok) phasecell::fail(phasecell::ErrorKind::precondition, msg);
}

phasecell::DetectorParams to_core(const pdc_detector_params* p) {
    need(p != nullptr, "detector params pointer is null");
    phasecell::DetectorParams d;
    d.gain_i = p->gain_i;
    d.gain_q = p->gain_q;
    d.offset_i = p->offset_i;
    d.offset_q = p->offset_q;
    d.delta_q = p->delta_q;
    d.eps_i = p->eps_i;
    d.noise_sigma = p->noise_sigma;
    if (p->harmonic_count > 0) {
        need(p->harmonics != nullptr, "harmonics pointer is null with nonzero count");
        d.harmonics.reserve(p->harmonic_count);
        for (size_t i = 0; i < p->harmonic_count; ++i)
            d.harmonics.push_back(
                {p->harmonics[i].order, p->harmonics[i].amplitude, p->harmonics[i].phase_deg});
    }
    return d;
}

phasecell::AdcParams to_core(const pdc_adc_params* p) {
    need(p != nullptr, "adc params pointer is null");
    return {p->bits, p->v_min, p->v_max, p->conditioner_gain, p->conditioner_offset};
}

std::optional<std::uint64_t> opt_seed(const uint64_t* seed) {
    return seed ? std::optional<std::uint64_t>(*seed) : std::nullopt;
}

// Fill a caller buffer with the two-call pattern: out == NULL reports the
// required count, a short buffer is an error.
template <typename T, typename Src>
void fill_buffer(const Src& src, T* out, size_t cap, size_t* out_count, auto&& convert) {
    need(out_count != nullptr, "count pointer is null");
    *out_count = src.size();
    if (out == nullptr) return;
    need(cap >= src.size(), "output buffer too small");
    for (size_t i = 0; i < src.size(); ++i) out[i] = convert(src[i]);
}

void fill_string(const std::string& s, char* buf, size_t cap, size_t* out_len) {
    need(out_len != nullptr, "length pointer is null");
    *out_len = s.size() + 1;
    if (buf == nullptr) return;
    need(cap >= s.size() + 1, "output buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
}

pdc_line_fit to_c(const phasecell::LineFit& f) { return {f.slope, f.intercept, f.max_err}; }

}  // namespace

extern "C" {

const char* pdc_version(void) { return "0.1.0"; }

const char* pdc_status_name(pdc_status status) {
    switch (status) {
        case PDC_OK: return "ok";
        case PDC_ERR_PRECONDITION: return "precondition";
        case PDC_ERR_FORMAT: return "format";
        case PDC_ERR_IO: return "io";
        case PDC_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* pdc_last_error(void) { return g_last_error.c_str(); }

double pdc_wrap_degrees(double deg) { return phasecell::wrap_degrees(deg); }

uint64_t pdc_derive_seed(uint64_t master, uint64_t index) {
    return phasecell::derive_seed(master, index);
}

pdc_status pdc_branch_voltage(const pdc_detector_params* params, double delta_alpha_deg,
                              pdc_switch_path sw1, pdc_switch_path sw0, const uint64_t* seed,
                              double* out_volts) {
    return guarded([&] {
        need(out_volts != nullptr, "output pointer is null");
        phasecell::SwitchState sw{static_cast<phasecell::SwitchPath>(sw1),
                                  static_cast<phasecell::SwitchPath>(sw0)};
        *out_volts = phasecell::branch_voltage(delta_alpha_deg, sw, to_core(params),
                                               opt_seed(seed));
    });
}

pdc_status pdc_adc_quantize(const pdc_adc_params* adc, double volts, int32_t* out_code) {
    return guarded([&] {
        need(out_code != nullptr, "output pointer is null");
        *out_code = phasecell::adc_quantize(volts, to_core(adc));
    });
}

pdc_status pdc_adc_dequantize(const pdc_adc_params* adc, int32_t code, double* out_volts) {
    return guarded([&] {
        need(out_volts != nullptr, "output pointer is null");
        *out_volts = phasecell::adc_dequantize(code, to_core(adc));
    });
}

pdc_status pdc_measure_pair(const pdc_detector_params* params, const pdc_adc_params* adc,
                            double delta_alpha_deg, const uint64_t* seed, int32_t* out_code_i,
                            int32_t* out_code_q) {
    return guarded([&] {
        need(out_code_i != nullptr && out_code_q != nullptr, "output pointer is null");
        auto [ci, cq] = phasecell::measure_pair(delta_alpha_deg, to_core(params), to_core(adc),
                                                opt_seed(seed));
        *out_code_i = ci;
        *out_code_q = cq;
    });
}

pdc_status pdc_simulate_sweep(const pdc_detector_params* params, double step_deg,
                              const uint64_t* seed, pdc_sweep_record* out, size_t cap,
                              size_t* out_count) {
    return guarded([&] {
        auto sweep = phasecell::simulate_sweep(to_core(params), step_deg, opt_seed(seed));
        fill_buffer(sweep, out, cap, out_count, [](const phasecell::SweepRecord& r) {
            return pdc_sweep_record{r.phase_deg, r.vdi_v, r.vdq_v};
        });
    });
}

pdc_status pdc_profile_delta(const pdc_profile_anchor* anchors, size_t count, double freq_ghz,
                             double* out_delta_deg) {
    return guarded([&] {
        need(out_delta_deg != nullptr, "output pointer is null");
        need(anchors != nullptr || count == 0, "anchors pointer is null");
        phasecell::FrequencyProfile profile;
        profile.anchors.reserve(count);
        for (size_t i = 0; i < count; ++i)
            profile.anchors.emplace_back(anchors[i].freq_ghz, anchors[i].delta_deg);
        *out_delta_deg = profile.delta_at(freq_ghz);
    });
}

pdc_status pdc_sweep_to_csv(const pdc_sweep_record* records, size_t count, char* buf, size_t cap,
                            size_t* out_len) {
    return guarded([&] {
        need(records != nullptr || count == 0, "records pointer is null");
        std::vector<phasecell::SweepRecord> recs(count);
        for (size_t i = 0; i < count; ++i)
            recs[i] = {records[i].phase_deg, records[i].vdi_v, records[i].vdq_v};
        fill_string(phasecell::sweep_to_csv(recs), buf, cap, out_len);
    });
}

pdc_status pdc_sweep_from_csv(const char* text, pdc_sweep_record* out, size_t cap,
                              size_t* out_count) {
    return guarded([&] {
        need(text != nullptr, "text pointer is null");
        auto recs = phasecell::sweep_from_csv(text);
        fill_buffer(recs, out, cap, out_count, [](const phasecell::SweepRecord& r) {
            return pdc_sweep_record{r.phase_deg, r.vdi_v, r.vdq_v};
        });
    });
}

pdc_status pdc_minimax_line_sine(double lr_deg, pdc_line_fit* out) {
    return guarded([&] {
        need(out != nullptr, "output pointer is null");
        *out = to_c(phasecell::minimax_line_sine(lr_deg));
    });
}

pdc_status pdc_minimax_line_data(const double* v, const double* theta, size_t n,
                                 pdc_line_fit* out) {
    return guarded([&] {
        need(out != nullptr, "output pointer is null");
        need(v != nullptr && theta != nullptr, "input pointer is null");
        *out = to_c(phasecell::minimax_line_data({v, n}, {theta, n}));
    });
}

pdc_status pdc_error_vs_lr(double lr_min, double lr_max, double step, pdc_lr_error_sample* out,
                           size_t cap, size_t* out_count) {
    return guarded([&] {
        auto curve = phasecell::error_vs_lr(lr_min, lr_max, step);
        fill_buffer(curve, out, cap, out_count, [](const phasecell::LrErrorSample& s) {
            return pdc_lr_error_sample{s.lr_deg, s.max_err_deg};
        });
    });
}

pdc_status pdc_required_lr(double deviation_deg, double* out_lr_deg) {
    return guarded([&] {
        need(out_lr_deg != nullptr, "output pointer is null");
        *out_lr_deg = phasecell::required_lr(deviation_deg);
    });
}

pdc_status pdc_max_admissible_deviation(double err_budget_deg, double* out_deviation_deg) {
    return guarded([&] {
        need(out_deviation_deg != nullptr, "output pointer is null");
        *out_deviation_deg = phasecell::max_admissible_deviation(err_budget_deg);
    });
}

pdc_status pdc_table_build(const pdc_sweep_record* records, size_t count, pdc_table** out) {
    return guarded([&] {
        need(out != nullptr, "output pointer is null");
        need(records != nullptr && count > 0, "records pointer is null or empty");
        std::vector<phasecell::SweepRecord> recs(count);
        for (size_t i = 0; i < count; ++i)
            recs[i] = {records[i].phase_deg, records[i].vdi_v, records[i].vdq_v};
        *out = new pdc_table{phasecell::build_table(recs)};
    });
}

void pdc_table_free(pdc_table* table) { delete table; }

pdc_status pdc_table_get_info(const pdc_table* table, pdc_table_info* out) {
    return guarded([&] {
        need(table != nullptr && out != nullptr, "pointer is null");
        const phasecell::CalibrationTable& t = table->t;
        out->delta_hat_deg = t.delta_hat;
        out->norm_i_gain_v = t.norm_i.gain;
        out->norm_i_offset_v = t.norm_i.offset;
        out->norm_q_gain_v = t.norm_q.gain;
        out->norm_q_offset_v = t.norm_q.offset;
        for (int i = 0; i < 4; ++i) {
            const phasecell::Section& s = t.sections[i];
            out->sections[i] = {static_cast<pdc_curve>(s.curve),
                                static_cast<pdc_slope_sign>(s.slope_sign),
                                s.center_deg,
                                to_c(s.fit),
                                s.domain_lo,
                                s.domain_hi,
                                s.v_lo,
                                s.v_hi};
        }
    });
}

pdc_status pdc_table_normalize(const pdc_table* table, double vdi_v, double vdq_v,
                               double* out_vdi_n, double* out_vdq_n) {
    return guarded([&] {
        need(table != nullptr && out_vdi_n != nullptr && out_vdq_n != nullptr,
             "pointer is null");
        *out_vdi_n = table->t.norm_i.normalize(vdi_v);
        *out_vdq_n = table->t.norm_q.normalize(vdq_v);
    });
}

pdc_status pdc_table_encode(const pdc_table* table, uint8_t* buf, size_t cap, size_t* out_len) {
    return guarded([&] {
        need(table != nullptr, "table pointer is null");
        auto bytes = phasecell::encode_table(table->t);
        need(out_len != nullptr, "length pointer is null");
        *out_len = bytes.size();
        if (buf == nullptr) return;
        need(cap >= bytes.size(), "output buffer too small");
        std::memcpy(buf, bytes.data(), bytes.size());
    });
}

pdc_status pdc_table_decode(const uint8_t* bytes, size_t len, pdc_table** out) {
    return guarded([&] {
        need(out != nullptr, "output pointer is null");
        need(bytes != nullptr, "bytes pointer is null");
        *out = new pdc_table{phasecell::decode_table({bytes, len})};
    });
}

pdc_status pdc_table_to_json(const pdc_table* table, char* buf, size_t cap, size_t* out_len) {
    return guarded([&] {
        need(table != nullptr, "table pointer is null");
        fill_string(phasecell::table_to_json(table->t), buf, cap, out_len);
    });
}

pdc_status pdc_table_from_json(const char* json_text, pdc_table** out) {
    return guarded([&] {
        need(out != nullptr, "output pointer is null");
        need(json_text != nullptr, "json pointer is null");
        *out = new pdc_table{phasecell::table_from_json(json_text)};
    });
}

pdc_status pdc_select_section(double vdi_n, double vdq_n, pdc_curve* out_curve,
                              pdc_slope_sign* out_sign) {
    return guarded([&] {
        need(out_curve != nullptr && out_sign != nullptr, "output pointer is null");
        auto id = phasecell::select_section({vdi_n, vdq_n});
        *out_curve = static_cast<pdc_curve>(id.curve);
        *out_sign = static_cast<pdc_slope_sign>(id.sign);
    });
}

pdc_status pdc_estimate_phase(const pdc_table* table, double vdi_n, double vdq_n,
                              double* out_deg) {
    return guarded([&] {
        need(table != nullptr && out_deg != nullptr, "pointer is null");
        *out_deg = phasecell::estimate_phase({vdi_n, vdq_n}, table->t);
    });
}

pdc_status pdc_estimate_phase_fixed(const uint8_t* table_bytes, size_t len,
                                    const pdc_adc_params* adc, int32_t code_i, int32_t code_q,
                                    int32_t* out_centideg) {
    return guarded([&] {
        need(out_centideg != nullptr, "output pointer is null");
        need(table_bytes != nullptr, "table bytes pointer is null");
        *out_centideg =
            phasecell::estimate_phase_fixed(code_i, code_q, {table_bytes, len}, to_core(adc));
    });
}

pdc_status pdc_normalize_codes_q15(const uint8_t* table_bytes, size_t len,
                                   const pdc_adc_params* adc, int32_t code_i, int32_t code_q,
                                   double* out_vdi_n, double* out_vdq_n) {
    return guarded([&] {
        need(out_vdi_n != nullptr && out_vdq_n != nullptr, "output pointer is null");
        need(table_bytes != nullptr, "table bytes pointer is null");
        auto iq = phasecell::normalize_codes_fixed(code_i, code_q, {table_bytes, len},
                                                   to_core(adc));
        *out_vdi_n = iq.vdi_n;
        *out_vdq_n = iq.vdq_n;
    });
}

pdc_status pdc_baseline_single(double vd_n, double* out_deg, double* out_alternate_deg) {
    return guarded([&] {
        need(out_deg != nullptr && out_alternate_deg != nullptr, "output pointer is null");
        auto b = phasecell::baseline_single(vd_n);
        *out_deg = b.primary_deg;
        *out_alternate_deg = b.alternate_deg;
    });
}

}  // extern "C"
