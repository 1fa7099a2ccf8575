#include "phasecell/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "phasecell/angles.hpp"
#include "phasecell/errors.hpp"

namespace phasecell {

SectionId select_section(const IqNormalized& iq) { return select_section_raw(iq.vdi_n, iq.vdq_n); }

double estimate_phase(const IqNormalized& iq, const CalibrationTable& table) {
    require(std::isfinite(iq.vdi_n) && std::isfinite(iq.vdq_n),
            "normalized voltages must be finite");
    require(std::abs(iq.vdi_n) <= 1.25 && std::abs(iq.vdq_n) <= 1.25,
            "normalized voltage outside the [-1.25, +1.25] slack");
    const Section& s = table.section(select_section(iq));
    double v = s.curve == Curve::quadrature ? iq.vdq_n : iq.vdi_n;
    v = std::clamp(v, std::min(s.v_lo, s.v_hi), std::max(s.v_lo, s.v_hi));
    return wrap_degrees(s.fit.slope * v + s.fit.intercept);
}

namespace {

// Divide rounding half away from zero. d must be nonzero.
std::int64_t div_round(std::int64_t n, std::int64_t d) {
    if (d < 0) {
        n = -n;
        d = -d;
    }
    return n >= 0 ? (n + d / 2) / d : -((-n + d / 2) / d);
}

std::int32_t checked_uv(double volts, const char* what) {
    double uv = std::round(volts * 1e6);
    require(uv >= -2147483648.0 && uv <= 2147483647.0,
            std::string(what) + " too large for the fixed path");
    return static_cast<std::int32_t>(uv);
}

}  // namespace

namespace {

struct CodesQ15 {
    std::int32_t vdi, vdq;
};

CodesQ15 normalize_codes_q15(int code_i, int code_q, const FixedTable& ft,
                             const AdcParams& adc) {
    adc.validate();
    require(code_i >= 0 && code_i <= adc.max_code() && code_q >= 0 && code_q <= adc.max_code(),
            "adc code out of range");
    const std::int32_t vmin_uv = checked_uv(adc.v_min, "adc v_min");
    const std::int32_t span_uv = checked_uv(adc.v_max - adc.v_min, "adc span");
    const std::int32_t cond_off_uv = checked_uv(adc.conditioner_offset, "conditioner offset");
    const std::int32_t cond_gain_q15 =
        static_cast<std::int32_t>(std::llround(adc.conditioner_gain * 32768.0));
    require(cond_gain_q15 != 0, "conditioner gain too small for the fixed path");

    auto one = [&](int code, std::int32_t gain_uv, std::int32_t offset_uv) {
        std::int64_t v_uv =
            vmin_uv + div_round(static_cast<std::int64_t>(code) * span_uv, adc.max_code());
        std::int64_t det_uv = div_round((v_uv - cond_off_uv) * 32768, cond_gain_q15);
        std::int64_t n_q15 = div_round((det_uv - offset_uv) * 32768, gain_uv);
        return static_cast<std::int32_t>(std::clamp<std::int64_t>(n_q15, -(1 << 28), 1 << 28));
    };
    return {one(code_i, ft.gain_i_uv, ft.offset_i_uv), one(code_q, ft.gain_q_uv, ft.offset_q_uv)};
}

}  // namespace

IqNormalized normalize_codes_fixed(int code_i, int code_q,
                                   std::span<const std::uint8_t> table_bytes,
                                   const AdcParams& adc) {
    FixedTable ft = decode_table_fixed(table_bytes);
    CodesQ15 n = normalize_codes_q15(code_i, code_q, ft, adc);
    return {n.vdi / 32768.0, n.vdq / 32768.0};
}

std::int32_t estimate_phase_fixed(int code_i, int code_q,
                                  std::span<const std::uint8_t> table_bytes,
                                  const AdcParams& adc) {
    FixedTable ft = decode_table_fixed(table_bytes);
    auto [ni, nq] = normalize_codes_q15(code_i, code_q, ft, adc);

    // Same decision tree as the float path, on the q15 integers.
    int idx;
    if (std::abs(nq) <= std::abs(ni))
        idx = ni >= 0 ? 0 : 2;  // Quadrature Plus / Minus
    else
        idx = nq >= 0 ? 1 : 3;  // InPhase Minus / Plus
    const FixedSection& s = ft.sections[idx];

    std::int32_t vn = s.curve == 1 ? nq : ni;
    std::int32_t v_min_q15 = std::min(s.v_lo_q15, s.v_hi_q15);
    std::int32_t v_max_q15 = std::max(s.v_lo_q15, s.v_hi_q15);
    vn = std::clamp(vn, v_min_q15, v_max_q15);

    std::int64_t mdeg = div_round(static_cast<std::int64_t>(s.slope_mdeg) * vn, 32768);
    std::int64_t cd = div_round(mdeg, 10) + s.intercept_cd;

    std::int64_t r = ((cd % 36000) + 36000) % 36000;
    if (r > 18000) r -= 36000;
    return static_cast<std::int32_t>(r);
}

BaselineEstimate baseline_single(double vd_n) {
    require(std::isfinite(vd_n) && std::abs(vd_n) <= 1.0,
            "baseline needs a normalized voltage in [-1, +1]");
    double primary = asin_deg(vd_n);
    return {primary, wrap_degrees(180.0 - primary)};
}

}  // namespace phasecell
