#include "phasecell/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "phasecell/angles.hpp"
#include "phasecell/errors.hpp"

namespace phasecell {

int section_index(SectionId id) {
    if (id.curve == Curve::quadrature) return id.sign == SlopeSign::plus ? 0 : 2;
    return id.sign == SlopeSign::minus ? 1 : 3;
}

SectionId section_id_at(int index) {
    switch (index) {
        case 0: return {Curve::quadrature, SlopeSign::plus};
        case 1: return {Curve::in_phase, SlopeSign::minus};
        case 2: return {Curve::quadrature, SlopeSign::minus};
        case 3: return {Curve::in_phase, SlopeSign::plus};
    }
    fail(ErrorKind::precondition, "section index out of range");
}

const char* section_name(SectionId id) {
    static const char* names[4] = {"Quadrature/Plus", "InPhase/Minus", "Quadrature/Minus",
                                   "InPhase/Plus"};
    return names[section_index(id)];
}

bool Section::contains(double theta_deg) const {
    double u = wrap_delta(theta_deg, wrap_degrees(0.5 * (domain_lo + domain_hi)));
    double hw = half_width();
    return u >= -hw - 1e-9 && u <= hw + 1e-9;
}

int CalibrationTable::section_index_for_phase(double theta_deg) const {
    for (int i = 0; i < 4; ++i)
        if (sections[i].contains(theta_deg)) return i;
    return -1;
}

void CalibrationTable::validate() const {
    require(std::isfinite(delta_hat) && std::abs(delta_hat) < 90.0,
            "table delta_hat must satisfy |delta_hat| < 90");
    require(norm_i.gain > 0.0 && norm_q.gain > 0.0, "table channel gains must be > 0");
    for (int i = 0; i < 4; ++i) {
        const Section& s = sections[i];
        SectionId want = section_id_at(i);
        require(s.curve == want.curve && s.slope_sign == want.sign,
                "table sections out of canonical order");
        double hw = s.half_width();
        require(hw > 0.0 && hw <= 90.0 + 1e-9, "section domain width must be in (0, 180]");
        require(std::isfinite(s.fit.slope) && std::isfinite(s.fit.intercept) &&
                    s.fit.max_err >= 0.0,
                "section fit values must be finite");
        bool positive = s.slope_sign == SlopeSign::plus;
        require(positive ? s.fit.slope > 0.0 : s.fit.slope < 0.0,
                "section slope sign inconsistent with its tag");
        require(std::min(s.v_lo, s.v_hi) < std::max(s.v_lo, s.v_hi),
                "section voltage bounds must span a nonempty interval");
    }
    for (int k = 0; k < 3600; ++k) {
        if (section_index_for_phase(k * 0.1) < 0)
            fail(ErrorKind::precondition,
                 "section domains leave a coverage gap at " + std::to_string(k * 0.1) + " deg");
    }
}

namespace {

// Circular 5-point moving average.
std::vector<double> smooth5(const std::vector<double>& x) {
    std::size_t n = x.size();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int d = -2; d <= 2; ++d) acc += x[(i + n + static_cast<std::size_t>(d + 2) - 2) % n];
        out[i] = acc / 5.0;
    }
    return out;
}

struct Crossing {
    double phase_deg;  // [0, 360)
    double steepness;  // |dv| / dphase across the bracketing pair
};

// Zero crossings of a circular sampled curve, by linear interpolation between
// the bracketing samples. rising: - to +; falling: + to -.
std::vector<Crossing> find_crossings(const std::vector<double>& phases,
                                     const std::vector<double>& values, bool rising) {
    std::vector<Crossing> out;
    std::size_t n = phases.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t j = (k + 1) % n;
        double a = values[k], b = values[j];
        bool hit = rising ? (a < 0.0 && b >= 0.0) : (a > 0.0 && b <= 0.0);
        if (!hit) continue;
        double gap = j == 0 ? phases[0] + 360.0 - phases[k] : phases[j] - phases[k];
        double frac = a / (a - b);  // in [0, 1]
        out.push_back({wrap_degrees_pos(phases[k] + frac * gap), std::abs(b - a) / gap});
    }
    return out;
}

double steepest_crossing(const std::vector<Crossing>& xs, const char* what) {
    if (xs.empty()) fail(ErrorKind::precondition, std::string("no ") + what + " found");
    return std::max_element(xs.begin(), xs.end(), [](const Crossing& a, const Crossing& b) {
               return a.steepness < b.steepness;
           })->phase_deg;
}

}  // namespace

NormalizedSweep normalize_sweep(std::span<const SweepRecord> records) {
    require(records.size() >= 8, "sweep too short");
    std::vector<NormalizedRecord> recs(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const SweepRecord& r = records[i];
        require(std::isfinite(r.phase_deg) && std::isfinite(r.vdi_v) && std::isfinite(r.vdq_v),
                "sweep records must be finite");
        recs[i] = {wrap_degrees_pos(r.phase_deg), r.vdi_v, r.vdq_v};
    }
    std::sort(recs.begin(), recs.end(),
              [](const NormalizedRecord& a, const NormalizedRecord& b) {
                  return a.phase_deg < b.phase_deg;
              });

    double max_gap = 0.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        std::size_t j = (i + 1) % recs.size();
        double gap = j == 0 ? recs[0].phase_deg + 360.0 - recs[i].phase_deg
                            : recs[j].phase_deg - recs[i].phase_deg;
        if (j != 0 && gap < 1e-9)
            fail(ErrorKind::precondition,
                 "duplicate sweep phase at " + std::to_string(recs[i].phase_deg) + " deg");
        max_gap = std::max(max_gap, gap);
    }
    if (max_gap > 2.0 + 1e-9)
        fail(ErrorKind::precondition,
             "sweep must cover the full circle at a step <= 2 deg (largest gap " +
                 std::to_string(max_gap) + " deg)");

    std::vector<double> vi(recs.size()), vq(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        vi[i] = recs[i].vdi_n;  // still raw volts at this point
        vq[i] = recs[i].vdq_n;
    }
    auto smooth_i = smooth5(vi);
    auto smooth_q = smooth5(vq);

    auto norm_of = [](const std::vector<double>& s, const char* channel) {
        auto [mn, mx] = std::minmax_element(s.begin(), s.end());
        ChannelNorm norm{0.5 * (*mx - *mn), 0.5 * (*mx + *mn)};
        if (norm.gain < 1e-3)
            fail(ErrorKind::precondition,
                 std::string("dead ") + channel + " branch: swing below 1 mV");
        return norm;
    };
    NormalizedSweep out;
    out.norm_i = norm_of(smooth_i, "vdi");
    out.norm_q = norm_of(smooth_q, "vdq");
    out.max_gap_deg = max_gap;
    out.records = std::move(recs);
    for (NormalizedRecord& r : out.records) {
        r.vdi_n = out.norm_i.normalize(r.vdi_n);
        r.vdq_n = out.norm_q.normalize(r.vdq_n);
    }
    return out;
}

namespace {

struct Columns {
    std::vector<double> phase, vdi, vdq;
};

Columns columns_of(const NormalizedSweep& sweep) {
    Columns c;
    c.phase.reserve(sweep.records.size());
    c.vdi.reserve(sweep.records.size());
    c.vdq.reserve(sweep.records.size());
    for (const NormalizedRecord& r : sweep.records) {
        c.phase.push_back(r.phase_deg);
        c.vdi.push_back(r.vdi_n);
        c.vdq.push_back(r.vdq_n);
    }
    return c;
}

}  // namespace

double estimate_deviation(const NormalizedSweep& sweep) {
    require(sweep.records.size() >= 8, "sweep too short");
    Columns c = columns_of(sweep);
    auto qs = smooth5(c.vdq);
    auto is = smooth5(c.vdi);
    double q0 = steepest_crossing(find_crossings(c.phase, qs, true),
                                  "rising zero crossing in the Q channel");
    double i0 = steepest_crossing(find_crossings(c.phase, is, true),
                                  "rising zero crossing in the I channel");
    double delta = wrap_degrees(q0 - i0 - 90.0);
    require(std::abs(delta) < 90.0, "estimated deviation beyond the +/-90 degree limit");
    return delta;
}

SectionId select_section_raw(double vdi_n, double vdq_n) {
    if (std::abs(vdq_n) <= std::abs(vdi_n))
        return {Curve::quadrature, vdi_n >= 0.0 ? SlopeSign::plus : SlopeSign::minus};
    return {Curve::in_phase, vdq_n >= 0.0 ? SlopeSign::minus : SlopeSign::plus};
}

std::array<SectionSpan, 4> partition_sections(const NormalizedSweep& sweep) {
    std::size_t n = sweep.records.size();
    require(n >= 8, "sweep too short");
    Columns c = columns_of(sweep);
    auto is = smooth5(c.vdi);
    auto qs = smooth5(c.vdq);

    std::vector<int> pick(n);
    for (std::size_t k = 0; k < n; ++k) pick[k] = section_index(select_section_raw(is[k], qs[k]));

    // Maximal contiguous runs, circularly.
    struct Run {
        int id;
        std::size_t first, last;  // sample indices, inclusive
    };
    std::vector<Run> runs;
    for (std::size_t k = 0; k < n; ++k) {
        if (runs.empty() || runs.back().id != pick[k])
            runs.push_back({pick[k], k, k});
        else
            runs.back().last = k;
    }
    if (runs.size() > 1 && runs.front().id == runs.back().id) {
        runs.front().first = runs.back().first;  // wrapped run
        runs.pop_back();
    }
    if (runs.size() != 4)
        fail(ErrorKind::precondition, "selector produced " + std::to_string(runs.size()) +
                                          " contiguous runs (expected 4); sweep is not an I/Q "
                                          "sinusoid pair");
    {
        bool seen[4] = {false, false, false, false};
        for (const Run& r : runs) seen[r.id] = true;
        require(seen[0] && seen[1] && seen[2] && seen[3],
                "selector runs do not cover all four sections");
    }

    auto gap_before = [&](std::size_t k) {
        std::size_t p = (k + n - 1) % n;
        double g = c.phase[k] - c.phase[p];
        return k == 0 ? g + 360.0 : g;
    };

    std::array<SectionSpan, 4> spans;
    for (const Run& run : runs) {
        SectionId id = section_id_at(run.id);
        bool rising = id.sign == SlopeSign::plus;  // Plus sections ride a rising curve
        const std::vector<double>& col = id.curve == Curve::quadrature ? qs : is;
        auto crossings = find_crossings(c.phase, col, rising);

        double p_first = c.phase[run.first];
        double p_last = c.phase[run.last];
        double run_width = wrap_degrees_pos(p_last - p_first);
        std::vector<Crossing> inside;
        for (const Crossing& x : crossings)
            if (wrap_degrees_pos(x.phase_deg - p_first) <= run_width + 1e-9) inside.push_back(x);
        double center = steepest_crossing(
            inside, (std::string(section_name(id)) + " zero crossing inside its run").c_str());

        double d_lo = wrap_degrees_pos(center - p_first) + gap_before(run.first);
        double d_hi = wrap_degrees_pos(p_last - center) + gap_before((run.last + 1) % n);
        double w = std::max(d_lo, d_hi);
        spans[run.id] = {id.curve, id.sign, center, center - w, center + w};
    }
    return spans;
}

namespace {

// Circular linear interpolation of one normalized channel at an arbitrary phase.
double interp_channel(const Columns& c, bool quadrature, double phase_deg) {
    const std::vector<double>& col = quadrature ? c.vdq : c.vdi;
    double p = wrap_degrees_pos(phase_deg);
    auto it = std::lower_bound(c.phase.begin(), c.phase.end(), p);
    std::size_t hi = static_cast<std::size_t>(it - c.phase.begin()) % c.phase.size();
    std::size_t lo = (hi + c.phase.size() - 1) % c.phase.size();
    double p_lo = c.phase[lo], p_hi = c.phase[hi];
    double gap = wrap_degrees_pos(p_hi - p_lo);
    if (gap < 1e-12) return col[lo];
    double t = wrap_degrees_pos(p - p_lo) / gap;
    if (t > 1.0) t = 1.0;
    return col[lo] + t * (col[hi] - col[lo]);
}

}  // namespace

CalibrationTable build_table(std::span<const SweepRecord> records) {
    NormalizedSweep sweep = normalize_sweep(records);
    double delta_hat = estimate_deviation(sweep);
    std::array<SectionSpan, 4> spans = partition_sections(sweep);
    Columns c = columns_of(sweep);

    // Fits use the core of each domain: the linearized range implied by the
    // estimated deviation plus a small guard. The extra widened margin stays
    // part of the domain (coverage, clamp bounds) but would otherwise dilate
    // the fit window and its minimax error past the LR target.
    double fit_half_cap = 45.0 + 0.5 * std::abs(delta_hat) + 0.25;

    CalibrationTable table;
    table.norm_i = sweep.norm_i;
    table.norm_q = sweep.norm_q;
    table.delta_hat = delta_hat;
    for (int i = 0; i < 4; ++i) {
        const SectionSpan& span = spans[i];
        double w_domain = 0.5 * (span.hi_deg - span.lo_deg);
        double w_fit = std::min(w_domain, fit_half_cap);
        double center = wrap_degrees(span.center_deg);

        std::vector<double> vs, ths;
        for (const NormalizedRecord& r : sweep.records) {
            double u = wrap_delta(r.phase_deg, span.center_deg);
            if (std::abs(u) > w_fit + 1e-9) continue;
            vs.push_back(span.curve == Curve::quadrature ? r.vdq_n : r.vdi_n);
            ths.push_back(center + u);
        }
        require(vs.size() >= 3, std::string(section_name({span.curve, span.sign})) +
                                    " has fewer than 3 samples to fit");

        Section& s = table.sections[i];
        s.curve = span.curve;
        s.slope_sign = span.sign;
        s.center_deg = center;
        s.fit = minimax_line_data(vs, ths);
        s.domain_lo = center - w_domain;
        s.domain_hi = center + w_domain;
        double q15_max = 32767.0 / 32768.0;
        s.v_lo = std::clamp(interp_channel(c, span.curve == Curve::quadrature, span.lo_deg),
                            -1.0, q15_max);
        s.v_hi = std::clamp(interp_channel(c, span.curve == Curve::quadrature, span.hi_deg),
                            -1.0, q15_max);
    }
    table.validate();
    return table;
}

}  // namespace phasecell
