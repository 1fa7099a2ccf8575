#pragma once

// Brute-force reference for the minimax line fits, kept independent of the
// library implementation: a dense grid over candidate slopes with the error
// evaluated on a fine angle grid, then two local refinement passes.

#include <algorithm>
#include <cmath>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double sine_fit_error(double slope, double half_deg, double theta_step) {
    double worst = 0.0;
    for (double t = 0.0; t < half_deg; t += theta_step) {
        double e = std::abs(slope * std::sin(t * kPi / 180.0) - t);
        worst = std::max(worst, e);
    }
    double e_end = std::abs(slope * std::sin(half_deg * kPi / 180.0) - half_deg);
    return std::max(worst, e_end);
}

struct SineFit {
    double slope = 0.0;
    double max_err = 0.0;
};

inline SineFit minimax_sine_brute(double lr_deg) {
    double h = lr_deg / 2.0;
    auto scan = [&](double a_lo, double a_hi, double a_step, double t_step) {
        SineFit best{0.0, 1e300};
        for (double a = a_lo; a <= a_hi; a += a_step) {
            double e = sine_fit_error(a, h, t_step);
            if (e < best.max_err) best = {a, e};
        }
        return best;
    };
    SineFit coarse = scan(45.0, 100.0, 0.05, 0.01);
    SineFit mid = scan(coarse.slope - 0.05, coarse.slope + 0.05, 0.001, 0.001);
    SineFit fine = scan(mid.slope - 0.001, mid.slope + 0.001, 0.00002, 0.001);
    return fine;
}

}  // namespace oracle
