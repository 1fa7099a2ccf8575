#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "phasecell/angles.hpp"
#include "phasecell/errors.hpp"
#include "phasecell/linfit.hpp"

using namespace phasecell;

// Frozen from the brute-force oracle (oracle.hpp): the zero-intercept minimax
// inversion of sin over +/-45 deg has slope 61.93843 and error 1.20292 deg.
// Widely quoted figures for this fit (1.216 deg, slope 61.97) sit about 1% off
// the true optimum; the oracle-equivalence test below is the arbiter.
static constexpr double kErr90 = 1.20292;
static constexpr double kSlope90 = 61.93843;
static constexpr double kErr120 = 2.94284;
static constexpr double kErr128 = 3.60791;

TEST_CASE("sine fit reproduces the frozen oracle values") {
    LineFit f90 = minimax_line_sine(90.0);
    CHECK(f90.max_err == doctest::Approx(kErr90).epsilon(0.004));
    CHECK(f90.slope == doctest::Approx(kSlope90).epsilon(0.001));
    CHECK(f90.intercept == 0.0);

    CHECK(minimax_line_sine(120.0).max_err == doctest::Approx(kErr120).epsilon(0.002));
    CHECK(minimax_line_sine(128.0).max_err == doctest::Approx(kErr128).epsilon(0.002));
}

TEST_CASE("tiny ranges converge to the small-angle slope") {
    LineFit f = minimax_line_sine(1.0);
    CHECK(f.max_err < 0.001);
    CHECK(f.slope == doctest::Approx(180.0 / oracle::kPi).epsilon(1e-5));
}

TEST_CASE("sine fit rejects ranges outside (0, 180)") {
    CHECK_THROWS_AS(minimax_line_sine(0.0), Error);
    CHECK_THROWS_AS(minimax_line_sine(180.0), Error);
    CHECK_THROWS_AS(minimax_line_sine(-30.0), Error);
}

TEST_CASE("sine fit agrees with the independent brute-force search") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> lr_dist(20.0, 170.0);
    for (int i = 0; i < 10; ++i) {
        double lr = lr_dist(rng);
        CAPTURE(lr);
        oracle::SineFit ref = oracle::minimax_sine_brute(lr);
        LineFit got = minimax_line_sine(lr);
        CHECK(std::abs(got.max_err - ref.max_err) <= 0.005);
        CHECK(std::abs(got.slope - ref.slope) <= 0.01);
    }
}

TEST_CASE("sine fit error equioscillates, endpoint included") {
    for (double lr : {60.0, 90.0, 120.0, 150.0}) {
        CAPTURE(lr);
        LineFit f = minimax_line_sine(lr);
        double h = lr / 2.0;
        double hit_pos = -1.0, hit_neg = -1.0;
        for (double t = 0.0; t <= h + 1e-12; t += 0.001) {
            double th = std::min(t, h);
            double e = f.slope * sin_deg(th) - th;
            if (e >= f.max_err - 0.01) hit_pos = th;
            if (e <= -f.max_err + 0.01) hit_neg = th;
        }
        CHECK(hit_pos >= 0.0);
        CHECK(hit_neg >= 0.0);
        CHECK(hit_pos != hit_neg);
        // one of the extremes sits at the range end
        CHECK(std::max(hit_pos, hit_neg) == doctest::Approx(h).epsilon(1e-4));
    }
}

TEST_CASE("data fit recovers an exact line") {
    std::vector<double> v, th;
    for (double x = -1.0; x <= 1.0; x += 0.25) {
        v.push_back(x);
        th.push_back(2.0 * x + 5.0);
    }
    LineFit f = minimax_line_data(v, th);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(f.max_err <= 1e-12);
}

TEST_CASE("data fit solves the symmetric 3-point case") {
    std::vector<double> v{0.0, 1.0, 0.5};
    std::vector<double> th{0.0, 0.0, 1.0};
    LineFit f = minimax_line_data(v, th);
    CHECK(f.slope == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.max_err == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("data fit on dense sine samples matches the analytic fit") {
    std::vector<double> v, th;
    for (double t = -45.0; t <= 45.0 + 1e-9; t += 0.1) {
        v.push_back(sin_deg(t));
        th.push_back(t);
    }
    LineFit data = minimax_line_data(v, th);
    LineFit ana = minimax_line_sine(90.0);
    CHECK(std::abs(data.max_err - ana.max_err) <= 0.01);
    CHECK(std::abs(data.slope - ana.slope) <= 0.05);
    CHECK(std::abs(data.intercept) <= 0.01);
}

TEST_CASE("data fit converges to the analytic fit as the step shrinks") {
    LineFit ana = minimax_line_sine(90.0);
    double prev_gap = 1e9;
    for (double step : {1.0, 0.2, 0.05}) {
        std::vector<double> v, th;
        for (double t = -45.0; t <= 45.0 + 1e-9; t += step) {
            v.push_back(sin_deg(t));
            th.push_back(t);
        }
        double gap = std::abs(minimax_line_data(v, th).max_err - ana.max_err);
        CHECK(gap <= prev_gap + 1e-9);
        prev_gap = gap;
    }
    CHECK(prev_gap <= 0.01);
}

TEST_CASE("data fit rejects degenerate inputs") {
    std::vector<double> two_v{0.0, 1.0}, two_th{0.0, 1.0};
    CHECK_THROWS_AS(minimax_line_data(two_v, two_th), Error);
    std::vector<double> same_v{0.5, 0.5, 0.5}, any_th{0.0, 1.0, 2.0};
    CHECK_THROWS_AS(minimax_line_data(same_v, any_th), Error);
}

TEST_CASE("data fit keeps its equioscillation certificate on noisy data") {
    std::mt19937 rng(7);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::uniform_real_distribution<double> slope_dist(-80.0, 80.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v, th;
        double a = slope_dist(rng), b = slope_dist(rng) / 10.0;
        for (int i = 0; i < 60; ++i) {
            double x = -1.0 + 2.0 * i / 59.0;
            v.push_back(x);
            th.push_back(a * x + b + noise(rng));
        }
        LineFit f = minimax_line_data(v, th);
        CHECK(has_equioscillation(v, th, f));
        // no point may exceed the reported peak
        for (std::size_t i = 0; i < v.size(); ++i)
            CHECK(std::abs(th[i] - (f.slope * v[i] + f.intercept)) <=
                  f.max_err * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("error curve is monotone and hits the frozen values") {
    LrErrorCurve curve = error_vs_lr(46.0, 178.0, 2.0);
    REQUIRE(!curve.empty());
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].lr_deg > curve[i - 1].lr_deg);
        CHECK(curve[i].max_err_deg >= curve[i - 1].max_err_deg - 1e-12);
    }
    bool saw90 = false, saw120 = false, saw128 = false;
    for (const auto& s : curve) {
        if (std::abs(s.lr_deg - 90.0) < 1e-9) {
            saw90 = true;
            CHECK(s.max_err_deg == doctest::Approx(kErr90).epsilon(0.004));
        }
        if (std::abs(s.lr_deg - 120.0) < 1e-9) {
            saw120 = true;
            CHECK(s.max_err_deg == doctest::Approx(kErr120).epsilon(0.002));
        }
        if (std::abs(s.lr_deg - 128.0) < 1e-9) {
            saw128 = true;
            CHECK(s.max_err_deg == doctest::Approx(kErr128).epsilon(0.002));
        }
    }
    CHECK(saw90);
    CHECK(saw120);
    CHECK(saw128);

    CHECK_THROWS_AS(error_vs_lr(90.0, 60.0, 1.0), Error);
    CHECK_THROWS_AS(error_vs_lr(0.0, 60.0, 1.0), Error);
    CHECK_THROWS_AS(error_vs_lr(60.0, 90.0, 0.0), Error);
}

TEST_CASE("required linearized range") {
    CHECK(required_lr(0.0) == 90.0);
    CHECK(required_lr(30.0) == 120.0);
    CHECK(required_lr(-30.0) == 120.0);
    CHECK(required_lr(38.0) == 128.0);
    CHECK_THROWS_AS(required_lr(90.0), Error);
    CHECK_THROWS_AS(required_lr(-95.0), Error);
}

TEST_CASE("admissible deviation inverts the error curve") {
    // frozen from the oracle: err(120) = 2.943, so a 3 deg budget buys ~30.7 deg
    CHECK(max_admissible_deviation(3.0) == doctest::Approx(30.736).epsilon(0.01));
    CHECK(std::abs(max_admissible_deviation(3.0) - 30.0) <= 1.0);
    CHECK(max_admissible_deviation(1.46) == doctest::Approx(5.831).epsilon(0.02));

    double floor = minimax_line_sine(90.0).max_err;
    CHECK(max_admissible_deviation(floor) <= 0.01);
    CHECK_THROWS_AS(max_admissible_deviation(floor - 0.1), Error);
}

TEST_CASE("required_lr and max_admissible_deviation are mutual inverses") {
    for (double dev : {5.0, 15.0, 30.0, 45.0, 60.0}) {
        CAPTURE(dev);
        double budget = minimax_line_sine(required_lr(dev)).max_err;
        CHECK(std::abs(max_admissible_deviation(budget) - dev) <= 0.02);
    }
}
