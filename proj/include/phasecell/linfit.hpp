#pragma once

#include <span>
#include <vector>

// Minimax (Chebyshev) straight-line approximation of arcsine-like segments.
// A single line inverts one monotone section of a sinusoid; the achievable
// error grows with the linearized range (LR) the line has to cover, and the
// admissible quadrature deviation grows with the accepted error budget.

namespace phasecell {

/// Slope/intercept/max-error of a minimax straight-line fit.
struct LineFit {
    double slope = 0.0;      ///< degrees per normalized-voltage unit
    double intercept = 0.0;  ///< degrees
    double max_err = 0.0;    ///< minimized maximum absolute error, degrees
};

struct LrErrorSample {
    double lr_deg = 0.0;
    double max_err_deg = 0.0;
};

/// (lr, max_err) samples; lr strictly increasing, max_err non-decreasing.
using LrErrorCurve = std::vector<LrErrorSample>;

/// Best zero-intercept line inverting sin over theta in [-lr/2, +lr/2]:
/// minimizes max |slope * sin(theta) - theta|. Requires 0 < lr < 180.
LineFit minimax_line_sine(double lr_deg);

/// Exact discrete Chebyshev line fit: minimizes max |slope*v + intercept - theta|
/// over the given points. Needs >= 3 points, not all v equal, theta unwrapped.
/// The result always satisfies the equioscillation certificate.
LineFit minimax_line_data(std::span<const double> v, std::span<const double> theta);

/// True when >= 3 points attain +/-max_err with alternating signs in v order,
/// within `rel_tol` of max_err.
bool has_equioscillation(std::span<const double> v, std::span<const double> theta,
                         const LineFit& fit, double rel_tol = 1e-9);

/// Tabulate minimax_line_sine over [lr_min, lr_max] at the given step.
LrErrorCurve error_vs_lr(double lr_min, double lr_max, double step);

/// Linearized range needed to cover the circle with four sections when the
/// quadrature deviation is `deviation_deg`: 90 + |deviation|.
double required_lr(double deviation_deg);

/// Largest deviation whose required LR still fits the error budget, by
/// bisection to better than 0.01 degrees resolution.
double max_admissible_deviation(double err_budget_deg);

}  // namespace phasecell
