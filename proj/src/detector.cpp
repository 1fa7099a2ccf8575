#include "phasecell/detector.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "phasecell/angles.hpp"
#include "phasecell/errors.hpp"

namespace phasecell {

void DetectorParams::validate() const {
    require(std::isfinite(gain_i) && gain_i > 0.0, "detector gain_i must be > 0");
    require(std::isfinite(gain_q) && gain_q > 0.0, "detector gain_q must be > 0");
    require(std::isfinite(offset_i) && std::isfinite(offset_q), "detector offsets must be finite");
    require(std::isfinite(delta_q) && std::abs(delta_q) < 90.0,
            "quadrature deviation must satisfy |delta_q| < 90");
    require(std::isfinite(eps_i), "eps_i must be finite");
    for (const Harmonic& h : harmonics) {
        require(h.order >= 2, "harmonic order must be >= 2");
        require(std::isfinite(h.amplitude) && h.amplitude >= 0.0 && h.amplitude < 1.0,
                "harmonic amplitude must be in [0, 1)");
        require(std::isfinite(h.phase_deg), "harmonic phase must be finite");
    }
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "noise_sigma must be >= 0");
}

void AdcParams::validate() const {
    require(bits >= 2 && bits <= 16, "adc bits must be in [2, 16]");
    require(std::isfinite(v_min) && std::isfinite(v_max) && v_max > v_min,
            "adc range requires v_max > v_min");
    require(std::isfinite(conditioner_gain) && conditioner_gain != 0.0,
            "conditioner gain must be finite and nonzero");
    require(std::isfinite(conditioner_offset), "conditioner offset must be finite");
}

void FrequencyProfile::validate() const {
    require(!anchors.empty(), "frequency profile needs at least one anchor");
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        require(std::isfinite(anchors[i].first) && std::isfinite(anchors[i].second),
                "frequency profile anchors must be finite");
        if (i > 0)
            require(anchors[i].first > anchors[i - 1].first,
                    "frequency profile anchors must be strictly increasing in frequency");
    }
}

double FrequencyProfile::delta_at(double freq_ghz) const {
    validate();
    require(std::isfinite(freq_ghz), "frequency must be finite");
    require(freq_ghz >= anchors.front().first && freq_ghz <= anchors.back().first,
            "frequency outside the profile span");
    auto hi = std::lower_bound(anchors.begin(), anchors.end(), freq_ghz,
                               [](const auto& a, double f) { return a.first < f; });
    if (hi == anchors.begin()) return hi->second;
    auto lo = std::prev(hi);
    if (hi == anchors.end()) return lo->second;
    double t = (freq_ghz - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    // splitmix64 step over master advanced by the stream index
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

// Detector transfer curve: cosine plus the configured harmonics.
double transfer(double arg_deg, const DetectorParams& params) {
    double v = cos_deg(arg_deg);
    for (const Harmonic& h : params.harmonics)
        v += h.amplitude * cos_deg(h.order * arg_deg + h.phase_deg);
    return v;
}

double noise_draw(double sigma, std::optional<std::uint64_t> seed) {
    std::uint64_t s;
    if (seed) {
        s = *seed;
    } else {
        std::random_device rd;
        s = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    }
    std::mt19937_64 rng(s);
    std::normal_distribution<double> dist(0.0, sigma);
    return dist(rng);
}

}  // namespace

double branch_voltage(double delta_alpha_deg, SwitchState sw, const DetectorParams& params,
                      std::optional<std::uint64_t> rng_seed) {
    params.validate();
    require(std::isfinite(delta_alpha_deg), "phase shift must be finite");
    require(sw.sw0 == SwitchPath::path_0,
            "unsupported switch state: SW0 must stay on the 0-degree path");

    double v;
    if (sw.sw1 == SwitchPath::path_0) {
        v = params.gain_i * transfer(delta_alpha_deg + params.eps_i, params) + params.offset_i;
    } else {
        v = params.gain_q * transfer(delta_alpha_deg - params.delta_q - 90.0, params) +
            params.offset_q;
    }
    if (params.noise_sigma > 0.0) v += noise_draw(params.noise_sigma, rng_seed);
    return v;
}

int adc_quantize(double v, const AdcParams& adc) {
    adc.validate();
    double conditioned = adc.conditioner_gain * v + adc.conditioner_offset;
    double clamped = std::clamp(conditioned, adc.v_min, adc.v_max);
    double scaled = (clamped - adc.v_min) / (adc.v_max - adc.v_min) * adc.max_code();
    return static_cast<int>(std::llround(scaled));  // llround: half away from zero
}

double adc_dequantize(int code, const AdcParams& adc) {
    adc.validate();
    require(code >= 0 && code <= adc.max_code(), "adc code out of range");
    double v_cond = adc.v_min + static_cast<double>(code) * (adc.v_max - adc.v_min) /
                                    adc.max_code();
    return (v_cond - adc.conditioner_offset) / adc.conditioner_gain;
}

std::pair<int, int> measure_pair(double delta_alpha_deg, const DetectorParams& params,
                                 const AdcParams& adc, std::optional<std::uint64_t> rng_seed) {
    std::optional<std::uint64_t> seed_i, seed_q;
    if (rng_seed) {
        seed_i = derive_seed(*rng_seed, 0);
        seed_q = derive_seed(*rng_seed, 1);
    }
    double vi = branch_voltage(delta_alpha_deg, {SwitchPath::path_0, SwitchPath::path_0}, params,
                               seed_i);
    double vq = branch_voltage(delta_alpha_deg, {SwitchPath::path_90, SwitchPath::path_0}, params,
                               seed_q);
    return {adc_quantize(vi, adc), adc_quantize(vq, adc)};
}

}  // namespace phasecell
