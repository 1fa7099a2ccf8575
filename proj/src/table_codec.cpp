#include <cmath>
#include <cstring>
#include <string>

#include "phasecell/calibration.hpp"
#include "phasecell/errors.hpp"

// Binary table image. The layout is fixed and little-endian so the same bytes
// load on the target device and on any host; see calibration.hpp for the map.

namespace phasecell {

namespace {

constexpr char kMagic[4] = {'P', 'D', 'C', '1'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kEncodedSize = 4 + 1 + 2 + 4 * 4 + 4 * 18;  // 95 bytes

std::int16_t to_i16(double value, const std::string& field) {
    double r = std::round(value);
    if (!(r >= -32768.0 && r <= 32767.0))
        fail(ErrorKind::precondition, "field " + field + " exceeds its i16 range");
    return static_cast<std::int16_t>(r);
}

std::int32_t to_i32(double value, const std::string& field) {
    double r = std::round(value);
    if (!(r >= -2147483648.0 && r <= 2147483647.0))
        fail(ErrorKind::precondition, "field " + field + " exceeds its i32 range");
    return static_cast<std::int32_t>(r);
}

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_i16(std::vector<std::uint8_t>& out, std::int16_t v) {
    std::uint16_t u = static_cast<std::uint16_t>(v);
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
    std::uint32_t u = static_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((u >> (8 * i)) & 0xFF));
}

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    std::uint8_t u8() { return bytes[pos++]; }
    std::int16_t i16() {
        std::uint16_t u = static_cast<std::uint16_t>(bytes[pos]) |
                          (static_cast<std::uint16_t>(bytes[pos + 1]) << 8);
        pos += 2;
        return static_cast<std::int16_t>(u);
    }
    std::int32_t i32() {
        std::uint32_t u = 0;
        for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return static_cast<std::int32_t>(u);
    }
};

FixedTable to_fixed(const CalibrationTable& table) {
    FixedTable ft;
    ft.delta_cd = to_i16(table.delta_hat * 100.0, "delta_hat");
    ft.gain_i_uv = to_i32(table.norm_i.gain * 1e6, "norm_i.gain");
    ft.offset_i_uv = to_i32(table.norm_i.offset * 1e6, "norm_i.offset");
    ft.gain_q_uv = to_i32(table.norm_q.gain * 1e6, "norm_q.gain");
    ft.offset_q_uv = to_i32(table.norm_q.offset * 1e6, "norm_q.offset");
    for (int i = 0; i < 4; ++i) {
        const Section& s = table.sections[i];
        std::string tag = std::string("sections[") + std::to_string(i) + "].";
        FixedSection& f = ft.sections[i];
        f.curve = static_cast<std::uint8_t>(s.curve);
        f.sign = static_cast<std::uint8_t>(s.slope_sign);
        f.center_cd = to_i16(s.center_deg * 100.0, tag + "center");
        f.slope_mdeg = to_i32(s.fit.slope * 1000.0, tag + "slope");
        f.intercept_cd = to_i16(s.fit.intercept * 100.0, tag + "intercept");
        f.lo_cd = to_i16(s.domain_lo * 100.0, tag + "domain_lo");
        f.hi_cd = to_i16(s.domain_hi * 100.0, tag + "domain_hi");
        f.v_lo_q15 = to_i16(s.v_lo * 32768.0, tag + "v_lo");
        f.v_hi_q15 = to_i16(s.v_hi * 32768.0, tag + "v_hi");
    }
    return ft;
}

}  // namespace

std::vector<std::uint8_t> encode_table(const CalibrationTable& table) {
    FixedTable ft = to_fixed(table);
    std::vector<std::uint8_t> out;
    out.reserve(kEncodedSize);
    for (char c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
    put_u8(out, kVersion);
    put_i16(out, ft.delta_cd);
    put_i32(out, ft.gain_i_uv);
    put_i32(out, ft.offset_i_uv);
    put_i32(out, ft.gain_q_uv);
    put_i32(out, ft.offset_q_uv);
    for (const FixedSection& f : ft.sections) {
        put_u8(out, f.curve);
        put_u8(out, f.sign);
        put_i16(out, f.center_cd);
        put_i32(out, f.slope_mdeg);
        put_i16(out, f.intercept_cd);
        put_i16(out, f.lo_cd);
        put_i16(out, f.hi_cd);
        put_i16(out, f.v_lo_q15);
        put_i16(out, f.v_hi_q15);
    }
    return out;
}

FixedTable decode_table_fixed(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5) fail(ErrorKind::format, "table image truncated");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        fail(ErrorKind::format, "table image has a bad magic header");
    if (bytes[4] != kVersion)
        fail(ErrorKind::format,
             "unsupported table image version " + std::to_string(int(bytes[4])));
    if (bytes.size() != kEncodedSize)
        fail(ErrorKind::format, "table image has " + std::to_string(bytes.size()) +
                                    " bytes, expected " + std::to_string(kEncodedSize));
    Reader rd{bytes, 5};
    FixedTable ft;
    ft.delta_cd = rd.i16();
    ft.gain_i_uv = rd.i32();
    ft.offset_i_uv = rd.i32();
    ft.gain_q_uv = rd.i32();
    ft.offset_q_uv = rd.i32();
    if (ft.gain_i_uv <= 0 || ft.gain_q_uv <= 0)
        fail(ErrorKind::format, "table image has non-positive channel gain");
    for (int i = 0; i < 4; ++i) {
        FixedSection& f = ft.sections[i];
        f.curve = rd.u8();
        f.sign = rd.u8();
        if (f.curve > 1 || f.sign > 1)
            fail(ErrorKind::format, "table image has an invalid section tag");
        if (section_index({static_cast<Curve>(f.curve), static_cast<SlopeSign>(f.sign)}) != i)
            fail(ErrorKind::format, "table image sections out of canonical order");
        f.center_cd = rd.i16();
        f.slope_mdeg = rd.i32();
        f.intercept_cd = rd.i16();
        f.lo_cd = rd.i16();
        f.hi_cd = rd.i16();
        f.v_lo_q15 = rd.i16();
        f.v_hi_q15 = rd.i16();
        if (f.hi_cd <= f.lo_cd) fail(ErrorKind::format, "table image has an empty domain");
        if (f.slope_mdeg == 0) fail(ErrorKind::format, "table image has a zero slope");
    }
    return ft;
}

CalibrationTable decode_table(std::span<const std::uint8_t> bytes) {
    FixedTable ft = decode_table_fixed(bytes);
    CalibrationTable t;
    t.delta_hat = ft.delta_cd / 100.0;
    t.norm_i = {ft.gain_i_uv / 1e6, ft.offset_i_uv / 1e6};
    t.norm_q = {ft.gain_q_uv / 1e6, ft.offset_q_uv / 1e6};
    for (int i = 0; i < 4; ++i) {
        const FixedSection& f = ft.sections[i];
        Section& s = t.sections[i];
        s.curve = static_cast<Curve>(f.curve);
        s.slope_sign = static_cast<SlopeSign>(f.sign);
        s.center_deg = f.center_cd / 100.0;
        s.fit = {f.slope_mdeg / 1000.0, f.intercept_cd / 100.0, 0.0};  // max_err not stored
        s.domain_lo = f.lo_cd / 100.0;
        s.domain_hi = f.hi_cd / 100.0;
        s.v_lo = f.v_lo_q15 / 32768.0;
        s.v_hi = f.v_hi_q15 / 32768.0;
    }
    t.validate();
    return t;
}

}  // namespace phasecell
