#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

// Behavioral model of one analog phase detector cell: two switched hybrid
// branches feeding a multiplier + low-pass stage, a signal conditioner and the
// microcontroller ADC. Only the settled DC output of each branch is modeled.
//
// Measurement convention (fixed here, absorbed downstream by calibration):
//   I branch (SW1=0,  SW0=0):  gain_i * g(da + eps_i)          + offset_i
//   Q branch (SW1=90, SW0=0):  gain_q * g(da - delta_q - 90)   + offset_q
// where g(x) = cos(x) plus any configured harmonics, so the ideal Q curve is
// gain_q * sin(da - delta_q) + offset_q.
//
// All functions are pure given (inputs, seed) and safe to call concurrently.

namespace phasecell {

/// One additive harmonic on the detector transfer curve.
struct Harmonic {
    int order = 2;           ///< n >= 2
    double amplitude = 0.0;  ///< relative to the fundamental, in [0, 1)
    double phase_deg = 0.0;
};

struct DetectorParams {
    double gain_i = 1.0;    // volts
    double gain_q = 1.0;    // volts
    double offset_i = 0.0;  // volts
    double offset_q = 0.0;  // volts
    double delta_q = 0.0;   // quadrature deviation from 90 deg, |delta_q| < 90
    double eps_i = 0.0;     // residual in-phase path error, degrees
    std::vector<Harmonic> harmonics;
    double noise_sigma = 0.0;  // additive Gaussian noise, volts

    void validate() const;
};

enum class SwitchPath : std::uint8_t { path_0 = 0, path_90 = 1 };

/// RF switch pair. Only (0,0) and (90,0) are used by the measurement sequence;
/// the other two states are rejected rather than silently returning zero.
struct SwitchState {
    SwitchPath sw1 = SwitchPath::path_0;
    SwitchPath sw0 = SwitchPath::path_0;
};

/// Signal conditioner (amp + DC shifter) followed by the ADC.
struct AdcParams {
    int bits = 10;  // 2..16
    double v_min = -1.5;
    double v_max = 1.5;
    double conditioner_gain = 1.0;
    double conditioner_offset = 0.0;

    void validate() const;
    int max_code() const { return (1 << bits) - 1; }
};

/// Quadrature deviation vs carrier frequency, interpolated linearly between
/// anchors. Lookup outside the anchored span is an error.
struct FrequencyProfile {
    std::vector<std::pair<double, double>> anchors;  // (GHz, degrees), GHz strictly increasing

    void validate() const;
    double delta_at(double freq_ghz) const;
};

/// Settled branch voltage for a true input phase shift, in volts.
/// Noise is drawn once per call; with a seed the draw is deterministic, and
/// with noise_sigma == 0 no randomness enters at all.
double branch_voltage(double delta_alpha_deg, SwitchState sw, const DetectorParams& params,
                      std::optional<std::uint64_t> rng_seed = std::nullopt);

/// code = round((clamp(gain*v + offset, v_min, v_max) - v_min) / span * max_code)
/// with round-half-away-from-zero. Saturates at the rails, never wraps.
int adc_quantize(double v, const AdcParams& adc);

/// Inverse of the conditioner + quantizer mapping (code center voltage).
double adc_dequantize(int code, const AdcParams& adc);

/// Sequence (SW1=0,SW0=0) then (SW1=90,SW0=0), quantizing each branch.
/// The two noise draws are independent streams derived from the seed.
std::pair<int, int> measure_pair(double delta_alpha_deg, const DetectorParams& params,
                                 const AdcParams& adc,
                                 std::optional<std::uint64_t> rng_seed = std::nullopt);

/// Decorrelated child seed for stream `index` of a master seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace phasecell
