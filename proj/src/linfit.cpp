#include "phasecell/linfit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "phasecell/angles.hpp"
#include "phasecell/errors.hpp"

namespace phasecell {

namespace {

// Peak |a*sin(theta) - theta| over [0, lr/2] (the error is odd, so the
// positive half suffices). The only interior extremum of the signed error is
// where a*cos(theta) = 180/pi, which makes the evaluation exact.
double peak_error(double a, double half_deg) {
    double worst = std::abs(a * sin_deg(half_deg) - half_deg);
    double c = kDegPerRad / a;
    if (c < 1.0) {
        double ts = std::acos(c) * kDegPerRad;
        if (ts < half_deg) worst = std::max(worst, std::abs(a * sin_deg(ts) - ts));
    }
    return worst;
}

}  // namespace

LineFit minimax_line_sine(double lr_deg) {
    require(std::isfinite(lr_deg) && lr_deg > 0.0 && lr_deg < 180.0,
            "linearized range must be in (0, 180)");
    double h = lr_deg / 2.0;
    // peak_error is convex in the slope; ternary search over a safe bracket
    // (tangent slope 180/pi up to just past the steepest chord slope).
    double lo = kDegPerRad - 1.0, hi = 100.0;
    for (int i = 0; i < 240; ++i) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        if (peak_error(m1, h) < peak_error(m2, h))
            hi = m2;
        else
            lo = m1;
    }
    double a = 0.5 * (lo + hi);
    return {a, 0.0, peak_error(a, h)};
}

namespace {

struct Pt {
    double v, th;
};

// Monotone-chain half hull. keep_right = true builds the upper hull.
std::vector<Pt> half_hull(const std::vector<Pt>& pts, bool upper) {
    std::vector<Pt> out;
    for (const Pt& p : pts) {
        while (out.size() >= 2) {
            const Pt& a = out[out.size() - 2];
            const Pt& b = out[out.size() - 1];
            double cross = (b.v - a.v) * (p.th - a.th) - (b.th - a.th) * (p.v - a.v);
            bool drop = upper ? cross >= 0.0 : cross <= 0.0;
            if (!drop) break;
            out.pop_back();
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace

LineFit minimax_line_data(std::span<const double> v, std::span<const double> theta) {
    require(v.size() == theta.size(), "v and theta lengths differ");
    require(v.size() >= 3, "need at least 3 points");
    std::vector<Pt> pts(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        require(std::isfinite(v[i]) && std::isfinite(theta[i]), "points must be finite");
        pts[i] = {v[i], theta[i]};
    }
    std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
        return a.v < b.v || (a.v == b.v && a.th < b.th);
    });
    require(pts.back().v > pts.front().v, "degenerate fit: all v values equal");

    // The minimal vertical width of the point set is attained at a slope equal
    // to some hull edge; scanning both hulls' edge slopes is therefore exact.
    std::vector<Pt> hulls[2] = {half_hull(pts, true), half_hull(pts, false)};
    double best_w = std::numeric_limits<double>::infinity();
    double best_a = 0.0, best_b = 0.0;
    for (const auto& hull : hulls) {
        for (std::size_t e = 1; e < hull.size(); ++e) {
            if (hull[e].v == hull[e - 1].v) continue;
            double a = (hull[e].th - hull[e - 1].th) / (hull[e].v - hull[e - 1].v);
            double f = -std::numeric_limits<double>::infinity();
            double g = std::numeric_limits<double>::infinity();
            for (const Pt& p : pts) {
                double r = p.th - a * p.v;
                f = std::max(f, r);
                g = std::min(g, r);
            }
            double w = 0.5 * (f - g);
            if (w < best_w) {
                best_w = w;
                best_a = a;
                best_b = 0.5 * (f + g);
            }
        }
    }
    LineFit fit{best_a, best_b, best_w};
    if (!has_equioscillation(v, theta, fit))
        throw std::logic_error("minimax fit lost its equioscillation certificate");
    return fit;
}

bool has_equioscillation(std::span<const double> v, std::span<const double> theta,
                         const LineFit& fit, double rel_tol) {
    if (v.size() != theta.size() || v.size() < 3) return false;
    std::vector<std::pair<double, double>> rs(v.size());  // (v, residual)
    double peak = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        rs[i] = {v[i], theta[i] - (fit.slope * v[i] + fit.intercept)};
        peak = std::max(peak, std::abs(rs[i].second));
    }
    if (peak > fit.max_err * (1.0 + rel_tol) + 1e-15) return false;  // claimed bound violated
    if (peak <= 1e-12) return true;                                  // interpolating fit
    std::sort(rs.begin(), rs.end());
    double tol = peak * rel_tol + 1e-15;
    int alternations = 0, last_sign = 0;
    for (const auto& [x, r] : rs) {
        (void)x;
        if (std::abs(r) < peak - tol) continue;
        int sign = r >= 0.0 ? 1 : -1;
        if (sign != last_sign) {
            ++alternations;
            last_sign = sign;
        }
    }
    return alternations >= 3;
}

LrErrorCurve error_vs_lr(double lr_min, double lr_max, double step) {
    require(std::isfinite(lr_min) && std::isfinite(lr_max) && lr_min > 0.0 && lr_min < lr_max &&
                lr_max < 180.0,
            "lr grid must satisfy 0 < lr_min < lr_max < 180");
    require(std::isfinite(step) && step > 0.0, "lr step must be > 0");
    LrErrorCurve curve;
    for (double lr = lr_min; lr <= lr_max + 1e-9; lr += step) {
        double clipped = std::min(lr, lr_max);
        curve.push_back({clipped, minimax_line_sine(clipped).max_err});
    }
    return curve;
}

double required_lr(double deviation_deg) {
    require(std::isfinite(deviation_deg) && std::abs(deviation_deg) < 90.0,
            "deviation beyond the +/-90 degree limit");
    return 90.0 + std::abs(deviation_deg);
}

double max_admissible_deviation(double err_budget_deg) {
    double floor = minimax_line_sine(90.0).max_err;
    require(std::isfinite(err_budget_deg) && err_budget_deg >= floor - 1e-9,
            "error budget below the LR=90 minimax floor");
    double lo = 0.0, hi = 89.99;
    if (minimax_line_sine(90.0 + hi).max_err <= err_budget_deg) return hi;
    for (int i = 0; i < 60 && hi - lo > 1e-4; ++i) {
        double mid = 0.5 * (lo + hi);
        if (minimax_line_sine(90.0 + mid).max_err <= err_budget_deg)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace phasecell
