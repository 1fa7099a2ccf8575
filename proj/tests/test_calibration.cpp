#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "phasecell/angles.hpp"
#include "phasecell/calibration.hpp"
#include "phasecell/errors.hpp"
#include "phasecell/estimator.hpp"
#include "phasecell/sweep.hpp"

using namespace phasecell;

namespace {

DetectorParams with_delta(double delta_q) {
    DetectorParams p;
    p.delta_q = delta_q;
    return p;
}

// Hand-built normalized sweep for exercising the pipeline's guards.
NormalizedSweep fake_sweep(const std::vector<double>& vdi, const std::vector<double>& vdq) {
    NormalizedSweep s;
    s.norm_i = {1.0, 0.0};
    s.norm_q = {1.0, 0.0};
    s.max_gap_deg = 360.0 / vdi.size();
    for (std::size_t k = 0; k < vdi.size(); ++k)
        s.records.push_back({k * 360.0 / vdi.size(), vdi[k], vdq[k]});
    return s;
}

}  // namespace

TEST_CASE("normalization of an ideal sweep is the identity") {
    auto sweep = simulate_sweep(DetectorParams{}, 1.0);
    NormalizedSweep n = normalize_sweep(sweep);
    CHECK(n.norm_i.gain == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(n.norm_i.offset == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(n.norm_q.gain == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(n.norm_q.offset == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(n.max_gap_deg == doctest::Approx(1.0));

    double lo = 1e9, hi = -1e9;
    for (const auto& r : n.records) {
        lo = std::min(lo, r.vdq_n);
        hi = std::max(hi, r.vdq_n);
    }
    CHECK(lo == doctest::Approx(-1.0).epsilon(5e-3));
    CHECK(hi == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("normalization recovers channel gain and offset") {
    DetectorParams p;
    p.gain_q = 2.0;
    p.offset_q = 0.5;
    NormalizedSweep n = normalize_sweep(simulate_sweep(p, 1.0));
    CHECK(n.norm_q.gain == doctest::Approx(2.0).epsilon(0.005));
    CHECK(n.norm_q.offset == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("a flat channel is reported as dead") {
    auto sweep = simulate_sweep(DetectorParams{}, 1.0);
    for (auto& r : sweep) r.vdq_v = 0.0;
    CHECK_THROWS_WITH_AS(static_cast<void>(normalize_sweep(sweep)),
                         doctest::Contains("dead vdq"), Error);
}

TEST_CASE("sweep ordering is repaired, duplicates and gaps rejected") {
    auto sweep = simulate_sweep(DetectorParams{}, 1.0);
    std::mt19937 rng(5);
    std::shuffle(sweep.begin(), sweep.end(), rng);
    CHECK(normalize_sweep(sweep).records.front().phase_deg == doctest::Approx(0.0));

    auto dup = simulate_sweep(DetectorParams{}, 1.0);
    dup.push_back(dup[10]);
    CHECK_THROWS_WITH_AS(static_cast<void>(normalize_sweep(dup)),
                         doctest::Contains("duplicate"), Error);

    auto half = simulate_sweep(DetectorParams{}, 1.0);
    half.resize(180);
    CHECK_THROWS_WITH_AS(static_cast<void>(normalize_sweep(half)), doctest::Contains("gap"),
                         Error);

    auto coarse = simulate_sweep(DetectorParams{}, 3.0);
    CHECK_THROWS_AS(static_cast<void>(normalize_sweep(coarse)), Error);
}

TEST_CASE("deviation estimation recovers the configured quadrature error") {
    for (double delta : {0.0, 5.75, 30.0, -38.0}) {
        CAPTURE(delta);
        NormalizedSweep n = normalize_sweep(simulate_sweep(with_delta(delta), 1.0));
        CHECK(estimate_deviation(n) == doctest::Approx(delta).scale(1.0).epsilon(0.1));
    }
}

TEST_CASE("deviation folds in the residual in-phase path error") {
    DetectorParams p = with_delta(10.0);
    p.eps_i = 4.0;
    NormalizedSweep n = normalize_sweep(simulate_sweep(p, 1.0));
    // only the I-to-Q quadrature error is observable: delta + eps
    CHECK(estimate_deviation(n) == doctest::Approx(14.0).epsilon(0.02));
}

TEST_CASE("deviation estimation needs a sign change") {
    std::vector<double> vdi(64), vdq(64);
    for (int k = 0; k < 64; ++k) {
        vdi[k] = cos_deg(k * 360.0 / 64);
        vdq[k] = 0.5;  // never crosses zero
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(estimate_deviation(fake_sweep(vdi, vdq))),
                         doctest::Contains("rising zero crossing"), Error);
}

TEST_CASE("partition of an ideal sweep puts boundaries near the diagonals") {
    NormalizedSweep n = normalize_sweep(simulate_sweep(with_delta(0.0), 1.0));
    auto spans = partition_sections(n);
    double expected_centers[4] = {0.0, 90.0, 180.0, 270.0};
    for (int i = 0; i < 4; ++i) {
        CAPTURE(i);
        SectionId id = section_id_at(i);
        CHECK(spans[i].curve == id.curve);
        CHECK(spans[i].sign == id.sign);
        double center_err = std::abs(wrap_delta(spans[i].center_deg, expected_centers[i]));
        CHECK(center_err <= 0.05);
        double width = spans[i].hi_deg - spans[i].lo_deg;
        CHECK(width >= 88.0);
        CHECK(width <= 92.5);
    }
    // boundary between the first two sections sits by 45 within one grid step
    CHECK(std::abs(wrap_degrees_pos(spans[0].hi_deg) - 45.0) <= 1.1);
}

TEST_CASE("partition widths follow the linearized range rule") {
    NormalizedSweep n30 = normalize_sweep(simulate_sweep(with_delta(30.0), 1.0));
    auto s30 = partition_sections(n30);
    CHECK(wrap_degrees_pos(s30[0].center_deg) == doctest::Approx(30.0).epsilon(0.05));
    CHECK(s30[0].hi_deg - s30[0].lo_deg == doctest::Approx(120.0).scale(1.0).epsilon(2.5));

    NormalizedSweep n38 = normalize_sweep(simulate_sweep(with_delta(38.0), 1.0));
    auto s38 = partition_sections(n38);
    double widest = 0.0;
    for (const auto& s : s38) widest = std::max(widest, s.hi_deg - s.lo_deg);
    CHECK(widest >= 126.0);
    CHECK(widest <= 130.01);
}

TEST_CASE("partition rejects non-sinusoidal selector patterns") {
    std::vector<double> vdi(360), vdq(360);
    for (int k = 0; k < 360; ++k) {
        vdi[k] = cos_deg(k);
        vdq[k] = (k / 60) % 2 == 0 ? 2.0 : -2.0;  // six selector runs
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(partition_sections(fake_sweep(vdi, vdq))),
                         doctest::Contains("runs"), Error);

    for (int k = 0; k < 360; ++k) vdq[k] = (k / 90) % 2 == 0 ? 2.0 : -2.0;  // four, two ids
    CHECK_THROWS_AS(static_cast<void>(partition_sections(fake_sweep(vdi, vdq))), Error);
}

TEST_CASE("ideal table: four tight sections with the expected slope") {
    CalibrationTable t = build_table(simulate_sweep(with_delta(0.0), 1.0));
    CHECK(t.delta_hat == doctest::Approx(0.0).scale(1.0).epsilon(0.05));
    LineFit ref = minimax_line_sine(90.0);
    for (const Section& s : t.sections) {
        CHECK(s.fit.max_err <= 1.31);
        CHECK(std::abs(std::abs(s.fit.slope) - ref.slope) / ref.slope <= 0.01);
    }
    CHECK(t.sections[0].fit.slope > 0.0);  // Quadrature/Plus rises
    CHECK(t.sections[1].fit.slope < 0.0);  // InPhase/Minus falls
    double c0 = t.section({Curve::quadrature, SlopeSign::plus}).center_deg;
    CHECK(std::abs(wrap_delta(c0, 0.0)) <= 0.05);
}

TEST_CASE("a 30 degree deviation costs roughly a 3 degree fit error") {
    CalibrationTable t = build_table(simulate_sweep(with_delta(30.0), 1.0));
    CHECK(t.delta_hat == doctest::Approx(30.0).epsilon(0.005));
    double widest = 0.0;
    for (const Section& s : t.sections) widest = std::max(widest, s.fit.max_err);
    CHECK(widest >= 2.8);
    CHECK(widest <= 3.2);
}

TEST_CASE("section fit errors stay within the linearized-range budget") {
    for (double delta : {0.0, 5.75, 30.0, 38.0}) {
        CAPTURE(delta);
        CalibrationTable t = build_table(simulate_sweep(with_delta(delta), 1.0));
        double budget = minimax_line_sine(required_lr(delta)).max_err + 0.1;
        for (const Section& s : t.sections) CHECK(s.fit.max_err <= budget);
    }
}

TEST_CASE("deviation recovery across the tested range") {
    for (double delta : {-60.0, -38.0, -5.75, 0.0, 5.75, 30.0, 38.0, 60.0}) {
        CAPTURE(delta);
        CalibrationTable t = build_table(simulate_sweep(with_delta(delta), 1.0));
        CHECK(std::abs(t.delta_hat - delta) <= 0.1);
    }
}

TEST_CASE("section domains cover the circle with lower-index tie-break") {
    for (double delta : {0.0, 38.0, -60.0}) {
        CAPTURE(delta);
        CalibrationTable t = build_table(simulate_sweep(with_delta(delta), 1.0));
        for (int k = 0; k < 3600; ++k) {
            int idx = t.section_index_for_phase(k * 0.1);
            REQUIRE(idx >= 0);
            // the resolved owner is the first containing section
            for (int j = 0; j < idx; ++j) CHECK(!t.sections[j].contains(k * 0.1));
        }
    }
}

TEST_CASE("calibration is invariant to channel gain and offset") {
    auto base = simulate_sweep(with_delta(5.75), 1.0);
    auto scaled = base;
    for (auto& r : scaled) {
        r.vdi_v = 2.3 * r.vdi_v + 0.74;
        r.vdq_v = 0.6 * r.vdq_v - 0.2;
    }
    CalibrationTable a = build_table(base);
    CalibrationTable b = build_table(scaled);
    CHECK(std::abs(a.delta_hat - b.delta_hat) <= 0.05);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(a.sections[i].domain_lo - b.sections[i].domain_lo) <= 1.0);
        CHECK(std::abs(a.sections[i].domain_hi - b.sections[i].domain_hi) <= 1.0);
    }
    DetectorParams probe = with_delta(5.75);
    for (double theta = 0.0; theta < 360.0; theta += 1.0) {
        double vi = branch_voltage(theta, {SwitchPath::path_0, SwitchPath::path_0}, probe);
        double vq = branch_voltage(theta, {SwitchPath::path_90, SwitchPath::path_0}, probe);
        double ea = estimate_phase({a.norm_i.normalize(vi), a.norm_q.normalize(vq)}, a);
        double eb = estimate_phase(
            {b.norm_i.normalize(2.3 * vi + 0.74), b.norm_q.normalize(0.6 * vq - 0.2)}, b);
        CHECK(std::abs(wrap_delta(ea, eb)) <= 0.05);
    }
}

TEST_CASE("harmonic distortion inflates the fit error but still calibrates") {
    DetectorParams clean = with_delta(38.0);
    DetectorParams dirty = clean;
    dirty.harmonics = {{3, 0.05, 180.0}};
    CalibrationTable tc = build_table(simulate_sweep(clean, 1.0));
    CalibrationTable td = build_table(simulate_sweep(dirty, 1.0));
    double worst_clean = 0.0, worst_dirty = 0.0;
    for (int i = 0; i < 4; ++i) {
        worst_clean = std::max(worst_clean, tc.sections[i].fit.max_err);
        worst_dirty = std::max(worst_dirty, td.sections[i].fit.max_err);
    }
    CHECK(worst_dirty > worst_clean);
}

TEST_CASE("noisy sweeps still calibrate close to the clean table") {
    DetectorParams p = with_delta(5.75);
    p.noise_sigma = 0.005;
    CalibrationTable t = build_table(simulate_sweep(p, 1.0, 42u));
    CHECK(std::abs(t.delta_hat - 5.75) <= 0.5);
    for (const Section& s : t.sections) CHECK(s.fit.max_err <= 3.0);
}

TEST_CASE("binary image is tiny, byte-stable and quantized as documented") {
    CalibrationTable t = build_table(simulate_sweep(with_delta(5.75), 1.0));
    auto bytes = encode_table(t);
    CHECK(bytes.size() == 95);
    CHECK(bytes.size() <= 2048);
    CHECK(bytes[0] == 'P');
    CHECK(bytes[1] == 'D');
    CHECK(bytes[2] == 'C');
    CHECK(bytes[3] == '1');

    CalibrationTable d = decode_table(bytes);
    CHECK(encode_table(d) == bytes);  // byte-exact re-encode
    CHECK(std::abs(d.delta_hat - t.delta_hat) <= 0.005);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(d.sections[i].fit.slope - t.sections[i].fit.slope) <= 0.002);
        CHECK(std::abs(d.sections[i].fit.intercept - t.sections[i].fit.intercept) <= 0.005);
        CHECK(std::abs(d.sections[i].center_deg - t.sections[i].center_deg) <= 0.005);
        CHECK(std::abs(d.sections[i].v_lo - t.sections[i].v_lo) <= 1.0 / 32768.0);
        CHECK(std::abs(d.sections[i].domain_lo - t.sections[i].domain_lo) <= 0.005);
    }
    CHECK(std::abs(d.norm_i.gain - t.norm_i.gain) <= 1e-6);
}

TEST_CASE("decoder rejects corrupt images") {
    CalibrationTable t = build_table(simulate_sweep(with_delta(0.0), 1.0));
    auto bytes = encode_table(t);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(static_cast<void>(decode_table(bad_magic)), doctest::Contains("magic"),
                         Error);

    auto bad_version = bytes;
    bad_version[4] = 9;
    CHECK_THROWS_WITH_AS(static_cast<void>(decode_table(bad_version)),
                         doctest::Contains("version"), Error);

    auto truncated = bytes;
    truncated.resize(40);
    CHECK_THROWS_AS(static_cast<void>(decode_table(truncated)), Error);

    std::vector<std::uint8_t> empty;
    CHECK_THROWS_AS(static_cast<void>(decode_table(empty)), Error);
}

TEST_CASE("encoder names the field that does not fit") {
    CalibrationTable t = build_table(simulate_sweep(with_delta(0.0), 1.0));
    t.sections[2].fit.slope = -9.9e6;  // over the i32 millidegree range
    CHECK_THROWS_WITH_AS(static_cast<void>(encode_table(t)),
                         doctest::Contains("sections[2].slope"), Error);
}

TEST_CASE("JSON image round trips exactly") {
    CalibrationTable t = build_table(simulate_sweep(with_delta(-38.0), 1.0));
    std::string json = table_to_json(t);
    CHECK(json.find("\"Quadrature\"") != std::string::npos);
    CHECK(json.find("\"delta_hat\"") != std::string::npos);
    CalibrationTable d = table_from_json(json);
    CHECK(d.delta_hat == doctest::Approx(t.delta_hat).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) {
        CHECK(d.sections[i].fit.slope == doctest::Approx(t.sections[i].fit.slope).epsilon(1e-12));
        CHECK(d.sections[i].fit.max_err ==
              doctest::Approx(t.sections[i].fit.max_err).epsilon(1e-12));
        CHECK(d.sections[i].v_hi == doctest::Approx(t.sections[i].v_hi).epsilon(1e-12));
    }

    CHECK_THROWS_AS(static_cast<void>(table_from_json("{ not json")), Error);
    CHECK_THROWS_AS(static_cast<void>(table_from_json("{\"delta_hat\": 1}")), Error);
}

TEST_CASE("section naming and indexing are consistent") {
    for (int i = 0; i < 4; ++i) CHECK(section_index(section_id_at(i)) == i);
    CHECK(std::string(section_name({Curve::quadrature, SlopeSign::plus})) == "Quadrature/Plus");
    CHECK(std::string(section_name({Curve::in_phase, SlopeSign::minus})) == "InPhase/Minus");
}
