#pragma once

#include <cstdint>
#include <span>

#include "phasecell/calibration.hpp"

// Runtime phase recovery. The selector picks whichever curve is in its linear
// region (|vdq| <= |vdi| means the Q curve is near a zero crossing) plus sign
// tests to disambiguate the two monotone halves; the matching section's line
// then inverts the voltage. Covers the full (-180, +180] circle without
// ambiguity. A float reference path and an integer-only path that mirrors the
// microcontroller are provided, plus the single-multiplier arcsine baseline
// whose +/-90 range limitation the dual-curve scheme removes.

namespace phasecell {

/// Normalized I/Q pair presented to the estimator. Values beyond +/-1.25 are
/// outside plausible normalization slack and rejected.
struct IqNormalized {
    double vdi_n = 0.0;
    double vdq_n = 0.0;
};

/// Selector decision tree, inclusive comparisons kept exactly as deployed:
///   |vdq| <= |vdi| -> quadrature curve, Plus if vdi >= 0 else Minus;
///   otherwise      -> in-phase curve,  Minus if vdq >= 0 else Plus.
/// Total for all finite inputs; the four outcomes partition the plane.
SectionId select_section(const IqNormalized& iq);

/// Select a section, clamp the chosen channel's voltage to the section's
/// v bounds and evaluate its line. Returns degrees wrapped to (-180, +180].
/// Clamping (not rejection) handles voltages noise pushes past calibration.
double estimate_phase(const IqNormalized& iq, const CalibrationTable& table);

/// Integer-only estimate from raw ADC codes and an encoded table, mirroring a
/// small target device: normalization, selection, clamping and the slope
/// multiply all run on the fixed-point representations (32-bit values, 64-bit
/// intermediates for the widening multiplies). Returns centidegrees wrapped to
/// (-18000, +18000]. No heap allocation on the success path.
std::int32_t estimate_phase_fixed(int code_i, int code_q,
                                  std::span<const std::uint8_t> table_bytes,
                                  const AdcParams& adc);

/// The integer path's code -> q15 normalization, as exact doubles. Feeding
/// these to estimate_phase gives the float estimator the same inputs the
/// integer estimator sees; the section choice near a selector tie is decided
/// by the last normalization bit, so comparing the two paths is only
/// well-defined on a shared front-end.
IqNormalized normalize_codes_fixed(int code_i, int code_q,
                                   std::span<const std::uint8_t> table_bytes,
                                   const AdcParams& adc);

/// Single-multiplier baseline: arcsine of one normalized voltage. The result
/// is confined to [-90, +90] and inherently ambiguous; `alternate_deg` is the
/// mirrored solution 180 - asin(v) for comparison harnesses.
struct BaselineEstimate {
    double primary_deg = 0.0;
    double alternate_deg = 0.0;
};
BaselineEstimate baseline_single(double vd_n);

}  // namespace phasecell
