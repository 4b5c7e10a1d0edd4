#include "helpers.hpp"

#include "roughdrift/corpus.hpp"
#include "roughdrift/girsanov.hpp"

#include <doctest.h>

using namespace roughdrift;

namespace {

SimConfig cfg(double T, std::size_t steps, std::size_t paths) {
    SimConfig s;
    s.horizon = T;
    s.steps = steps;
    s.paths = paths;
    s.seed = 5;
    return s;
}

const PathFunctional terminal = [](const PathView& v) { return v.state(v.steps)[0]; };

}  // namespace

TEST_CASE("zero drift: unit weights and plain brownian expectation") {
    const auto s = cfg(1.0, 20, 4000);
    const std::vector<double> x{0.5};
    const auto w = girsanov_weights(DriftField::zero(1), s, x);
    for (double l : w.log_rho) CHECK(l == 0.0);
    const auto g = girsanov_expectation(terminal, w);
    const auto d = direct_expectation(terminal, w.brownian);
    CHECK(g.estimate == d.estimate);
    CHECK(martingale_check(w).estimate == 1.0);
    CHECK(effective_sample_size(w.log_rho) == doctest::Approx(4000.0));
}

TEST_CASE("constant drift: both estimators recover x + cT") {
    const double c = 0.4, T = 1.0;
    const auto s = cfg(T, 50, 20000);
    const std::vector<double> x{0.1};
    const auto rows = two_estimator_check(test::constant_drift(1, c), s, x, {{"terminal", terminal}});
    REQUIRE(rows.size() == 1);
    const double exact = 0.1 + c * T;
    CHECK(std::abs(rows[0].direct.estimate - exact) <= 3.0 * rows[0].direct.se);
    CHECK(std::abs(rows[0].weighted.estimate - exact) <= 3.0 * rows[0].weighted.se);
    CHECK(rows[0].pass);
}

TEST_CASE("bump drift: positive-part functional agrees across estimators") {
    PresetParams p;
    p.preset = "gaussian_bump";
    const auto b = make_drift(p);
    const auto rows = two_estimator_check(b, cfg(1.0, 100, 20000), std::vector<double>{0.0}, standard_functionals());
    CHECK(rows.size() == 3);
    for (const auto& r : rows) CHECK(r.pass);
    CHECK(martingale_check(girsanov_weights(b, cfg(1.0, 100, 20000), std::vector<double>{0.0})).pass);
}

TEST_CASE("kernel exponent arithmetic and the constant field") {
    CHECK(kernel_beta(4.0, 4.0, 1) == doctest::Approx(0.625));
    const auto one = FieldFn::constant(1, {1.0});
    const std::vector<double> x{0.3};
    CHECK(additive_functional(one, 0.1, 0.5, x) == doctest::Approx(0.4).epsilon(1e-12));
    const std::vector<std::pair<double, double>> pairs{{0.0, 0.4}, {0.0, 0.2}, {0.0, 0.1}, {0.0, 0.05}};
    const auto kb = kernel_bound_estimate(one, 4.0, 4.0, pairs, {{0.0}}, SpaceTimeBox::cube(1, 0.4, 1.0, 101, 3));
    CHECK(kb.fitted_exponent == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(kb.pass);
}

TEST_CASE("indicator kernel exponent clears beta - 0.1") {
    const auto ind = FieldFn(1, 1, [](double, std::span<const double> x, std::span<double> out) {
        out[0] = std::abs(x[0]) <= 0.5 ? 1.0 : 0.0;
    });
    const std::vector<std::pair<double, double>> pairs{{0.0, 0.4}, {0.0, 0.2}, {0.0, 0.1}, {0.0, 0.05}};
    const auto kb = kernel_bound_estimate(ind, 4.0, 4.0, pairs, {{0.0}, {0.25}, {0.5}}, SpaceTimeBox::cube(1, 0.4, 2.0, 2001, 3));
    CHECK(kb.fitted_exponent >= 0.525);
    CHECK(kb.pass);
}

TEST_CASE("gaussian smoothing of a quadratic") {
    const auto sq = FieldFn(1, 1, [](double, std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0]; });
    const std::vector<double> x{0.7};
    CHECK(gaussian_expectation(sq, 0.0, x, 0.3) == doctest::Approx(0.49 + 0.3).epsilon(1e-10));
    const std::vector<double> y{0.1, -0.2};
    CHECK(gaussian_expectation(FieldFn::constant(2, {2.5}), 0.0, y, 0.7) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("khasminskii closed forms") {
    const auto s = cfg(1.0, 100, 500);
    const auto half = khasminskii_check(FieldFn::constant(1, {0.5}), s, {{0.0}, {1.0}});
    CHECK(half.alpha == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(half.mc.estimate == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
    CHECK(half.mc.bound == doctest::Approx(2.0));
    CHECK(half.mc.pass);
    const auto zero = khasminskii_check(FieldFn::zero(1, 1), s, {{0.0}});
    CHECK(zero.alpha == 0.0);
    CHECK(zero.mc.estimate == 1.0);
    CHECK(zero.mc.pass);
}

TEST_CASE("exponential moments: zero and constant fields") {
    const auto s = cfg(1.0, 40, 1000);
    const std::vector<double> x{0.0};
    for (const auto& r : exp_moment_check(DriftField::zero(1), {-1.0, 1.0, 2.0}, s, x)) {
        CHECK(r.estimate == 1.0);
        CHECK(r.pass);
    }
    const double c = 0.6;
    const auto reps = exp_moment_check(test::constant_drift(1, c), {1.0, 2.0}, s, x);
    CHECK(reps[0].estimate == doctest::Approx(std::exp(c * c)).epsilon(1e-12));
    CHECK(reps[1].estimate == doctest::Approx(std::exp(2.0 * c * c)).epsilon(1e-12));
}
