#pragma once

#include <cmath>

// Angle helpers. Phases are plain doubles in degrees throughout the library;
// the canonical wrapped representation is the half-open interval (-180, +180].

namespace phasecell {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegPerRad = 180.0 / kPi;

inline double sin_deg(double deg) { return std::sin(deg * (kPi / 180.0)); }
inline double cos_deg(double deg) { return std::cos(deg * (kPi / 180.0)); }
inline double asin_deg(double v) { return std::asin(v) * kDegPerRad; }

/// Wrap an angle to (-180, +180]. Idempotent; wrap(a) - a is a multiple of 360.
inline double wrap_degrees(double deg) {
    double w = std::fmod(deg + 180.0, 360.0);
    if (w <= 0.0) w += 360.0;
    return w - 180.0;
}

/// Wrap an angle to [0, 360).
inline double wrap_degrees_pos(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    return w;
}

/// Shortest signed arc from `from` to `to`, in (-180, +180].
inline double wrap_delta(double to, double from) { return wrap_degrees(to - from); }

}  // namespace phasecell
