#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phasecell/linfit.hpp"
#include "phasecell/sweep.hpp"

// Turns a swept-phase I/Q capture into the calibration table an embedded
// estimator runs from: per-channel normalization, the estimated quadrature
// deviation, and four linearized sections (one line per monotone half of each
// curve). Also provides the bit-exact fixed-point encoding of that table.

namespace phasecell {

/// Per-channel normalization: normalize(v) = (v - offset) / gain.
struct ChannelNorm {
    double gain = 1.0;    // volts
    double offset = 0.0;  // volts
    double normalize(double v) const { return (v - offset) / gain; }
};

enum class Curve : std::uint8_t { in_phase = 0, quadrature = 1 };
enum class SlopeSign : std::uint8_t { plus = 0, minus = 1 };

struct SectionId {
    Curve curve = Curve::quadrature;
    SlopeSign sign = SlopeSign::plus;
};

/// Canonical section order: Quadrature/Plus, InPhase/Minus, Quadrature/Minus,
/// InPhase/Plus (centers near delta, 90, 180+delta, 270).
int section_index(SectionId id);
SectionId section_id_at(int index);
const char* section_name(SectionId id);

struct NormalizedRecord {
    double phase_deg = 0.0;  // wrapped to [0, 360)
    double vdi_n = 0.0;
    double vdq_n = 0.0;
};

/// A full-circle sweep after normalization, sorted by wrapped phase.
struct NormalizedSweep {
    std::vector<NormalizedRecord> records;
    ChannelNorm norm_i, norm_q;
    double max_gap_deg = 0.0;  ///< largest circular gap between phases
};

/// One linearized section. `domain` is the symmetric interval around the
/// section's zero crossing (unwrapped degrees, center +/- half-width) that the
/// section owns for coverage purposes; `v_lo`/`v_hi` are the normalized
/// voltages at the domain endpoints and bound the fit's evaluation range.
struct Section {
    Curve curve = Curve::quadrature;
    SlopeSign slope_sign = SlopeSign::plus;
    double center_deg = 0.0;  // wrapped (-180, 180]
    LineFit fit;
    double domain_lo = 0.0;
    double domain_hi = 0.0;
    double v_lo = 0.0;
    double v_hi = 0.0;

    double half_width() const { return 0.5 * (domain_hi - domain_lo); }
    bool contains(double theta_deg) const;  // mod-360 containment
};

struct CalibrationTable {
    ChannelNorm norm_i, norm_q;
    double delta_hat = 0.0;  // estimated quadrature deviation, degrees
    std::array<Section, 4> sections;

    const Section& section(SectionId id) const { return sections[section_index(id)]; }

    /// Lowest-indexed section whose domain contains theta, -1 if none.
    /// Domains overlap near boundaries; ties resolve to the lower index.
    int section_index_for_phase(double theta_deg) const;

    void validate() const;
};

/// Extrema-based normalization: per channel, offset = (max+min)/2 and
/// gain = (max-min)/2, with extrema read from a 5-point circular moving
/// average so single noisy samples do not set the scale. A channel whose
/// smoothed swing is below 1 mV is reported as dead.
NormalizedSweep normalize_sweep(std::span<const SweepRecord> records);

/// Quadrature deviation from the two rising zero crossings: the Q crossing
/// phase minus the I crossing phase minus 90, wrapped. Self-referenced to the
/// I channel so absolute cabling offsets cancel.
double estimate_deviation(const NormalizedSweep& sweep);

struct SectionSpan {
    Curve curve = Curve::quadrature;
    SlopeSign sign = SlopeSign::plus;
    double center_deg = 0.0;  // measured zero crossing, [0, 360)
    double lo_deg = 0.0;      // unwrapped, center - half_width
    double hi_deg = 0.0;      // unwrapped, center + half_width
};

/// Section decision for one normalized I/Q pair; the single source of truth
/// for the selector comparisons (inclusive, exactly as deployed).
SectionId select_section_raw(double vdi_n, double vdq_n);

/// Runs the runtime selector over the sweep and returns the four section
/// intervals, each symmetric about its curve's measured zero crossing and
/// widened by one local sweep step per side so adjacent domains overlap.
std::array<SectionSpan, 4> partition_sections(const NormalizedSweep& sweep);

/// normalize -> estimate deviation -> partition -> per-section minimax fit.
CalibrationTable build_table(std::span<const SweepRecord> records);

/// Fixed-point image of one section as serialized (see encode_table).
struct FixedSection {
    std::uint8_t curve = 0;
    std::uint8_t sign = 0;
    std::int16_t center_cd = 0;     // centidegrees
    std::int32_t slope_mdeg = 0;    // millidegrees per normalized unit
    std::int16_t intercept_cd = 0;  // centidegrees
    std::int16_t lo_cd = 0;         // centidegrees, relative-unwrapped
    std::int16_t hi_cd = 0;
    std::int16_t v_lo_q15 = 0;  // normalized voltage in units of 2^-15
    std::int16_t v_hi_q15 = 0;
};

/// Fixed-point image of the whole table (what the target device stores).
struct FixedTable {
    std::int16_t delta_cd = 0;
    std::int32_t gain_i_uv = 0;  // microvolts
    std::int32_t offset_i_uv = 0;
    std::int32_t gain_q_uv = 0;
    std::int32_t offset_q_uv = 0;
    std::array<FixedSection, 4> sections;
};

/// Binary layout (little endian, 95 bytes total):
///   magic "PDC1", version u8 = 1, delta i16 centideg,
///   norm_i {gain i32 uV, offset i32 uV}, norm_q {gain, offset},
///   4 x section { curve u8, sign u8, center i16 cd, slope i32 mdeg/unit,
///                 intercept i16 cd, lo i16 cd, hi i16 cd,
///                 v_lo i16 q15, v_hi i16 q15 }.
/// max_err is not serialized. Values that do not fit a field are an error
/// naming the field. decode(encode(t)) == t up to the documented quantization
/// steps and encode(decode(b)) == b exactly.
std::vector<std::uint8_t> encode_table(const CalibrationTable& table);
CalibrationTable decode_table(std::span<const std::uint8_t> bytes);
FixedTable decode_table_fixed(std::span<const std::uint8_t> bytes);

/// JSON with field names matching the struct fields; enums as strings
/// ("InPhase"/"Quadrature", "Plus"/"Minus").
std::string table_to_json(const CalibrationTable& table);
CalibrationTable table_from_json(const std::string& json_text);

}  // namespace phasecell
