#include "helpers.hpp"

#include "roughdrift/corpus.hpp"
#include "roughdrift/zvonkin.hpp"

#include <doctest.h>

using namespace roughdrift;

namespace {

DriftField small_bump(double amplitude) {
    PresetParams p;
    p.preset = "gaussian_bump";
    p.amplitude = amplitude;
    p.width = 0.25;
    p.radius = 1.5;
    return make_drift(p);
}

}  // namespace

TEST_CASE("apply_T trivial cases") {
    const auto box = SpaceTimeBox::cube(1, 0.3, 2.0, 65, 9);
    const auto b = test::constant_drift(1, 1.0);
    CHECK(apply_T(b, FieldFn::zero(1, 1), box).max_abs() == 0.0);
    const auto x = FieldFn(1, 1, [](double, std::span<const double> y, std::span<double> out) { out[0] = y[0]; });
    CHECK(apply_T(DriftField::zero(1), x, box).max_abs() == 0.0);
}

TEST_CASE("apply_T with unit drift on an affine forcing") {
    const double T = 0.5;
    const auto box = SpaceTimeBox::cube(1, T, 2.0, 81, 11);
    const auto x = FieldFn(1, 1, [](double, std::span<const double> y, std::span<double> out) { out[0] = y[0]; });
    const auto r = apply_T(test::constant_drift(1, 1.0), x, box);
    double err = 0.0;
    for (std::size_t ti = 0; ti < box.time_nodes; ++ti) {
        for (std::size_t i = 0; i < box.nodes[0]; ++i) err = std::max(err, std::abs(r.at(ti, i, 0) - (T - box.time(ti))));
    }
    CHECK(err < 1e-10);
}

TEST_CASE("constant drift ladder") {
    const double a = 0.7, T = 0.5;
    const auto box = SpaceTimeBox::cube(1, T, 2.0, 81, 11);
    const auto b = test::constant_drift(1, a);
    const auto L = build_ladder(b, 2, box, LadderMode::lqp);
    // U_b = a (T - t) is spatially constant, so the first iterate vanishes.
    CHECK(L.levels[1].phi.max_abs() < 1e-10);
    double err = 0.0;
    for (std::size_t ti = 0; ti < box.time_nodes; ++ti) {
        err = std::max(err, std::abs(L.levels[0].U.u.at(ti, 40, 0) - a * (T - box.time(ti))));
    }
    CHECK(err < 1e-10);
    // The a^2 (T - t) chain arises from the affine forcing a x.
    const auto ax = FieldFn(1, 1, [a](double, std::span<const double> y, std::span<double> out) { out[0] = a * y[0]; });
    const auto r = apply_T(b, ax, box);
    for (std::size_t ti = 0; ti < box.time_nodes; ++ti) {
        CHECK(r.at(ti, 40, 0) == doctest::Approx(a * a * (T - box.time(ti))).epsilon(1e-9));
    }
}

TEST_CASE("zero drift ladder is identically zero") {
    const auto box = SpaceTimeBox::cube(2, 0.2, 1.0, 17, 5);
    const auto L = build_ladder(DriftField::zero(2), 4, box, LadderMode::lqp);
    CHECK(L.depth() == 4);
    for (const auto& lv : L.levels) {
        CHECK(lv.phi.max_abs() == 0.0);
        CHECK(lv.U.u.max_abs() == 0.0);
        CHECK(lv.grad_sup == 0.0);
    }
    const auto tf = transformed_fields(L);
    CHECK(tf.U.max_abs() == 0.0);
    CHECK(tf.drift.max_abs() == 0.0);
    const auto rep = contraction_report(DriftField::zero(2), 3, box, LadderMode::lqp, {0.2, 0.1});
    for (const auto& r : rep.rows) {
        CHECK(r.C_n == 0.0);
        CHECK(r.D_n == 0.0);
        CHECK(r.contracting);
    }
    REQUIRE(rep.T0);
    CHECK(*rep.T0 == 0.2);
}

TEST_CASE("small bump contracts at a small horizon") {
    const auto b = small_bump(0.2);
    const auto box = SpaceTimeBox::cube(1, 0.1, 1.5 + 6.0 * std::sqrt(0.1), 128, 17);
    const auto L = build_ladder(b, 4, box, LadderMode::lqp);
    const auto row = summarize(L);
    for (const auto& l : row.levels) {
        if (l.k < 4) CHECK(l.ratio <= 0.5);
    }
    CHECK(row.C_n <= 0.5);

    // n = 0 truncation is U_b itself.
    const auto t0 = transformed_fields(L, 0);
    for (std::size_t i = 0; i < t0.U.values().size(); ++i) CHECK(t0.U.values()[i] == L.levels[0].U.u.values()[i]);

    const auto tf = transformed_fields(L);
    CHECK(tf.grad.sup_norm() <= row.C_n * (1.0 + 1e-12));
    const auto [lo, hi] = comparability_range(tf.U, 2000, 3);
    CHECK(lo >= 0.5);
    CHECK(hi <= 1.5);
}

TEST_CASE("hoelder kink: C_n decreases with the horizon") {
    PresetParams p;
    p.preset = "holder_kink";
    p.alpha = 0.5;
    p.radius = 1.0;
    const auto b = make_drift(p);
    const std::vector<double> horizons{0.4, 0.2, 0.1, 0.05};
    const auto box = SpaceTimeBox::cube(1, 0.4, 1.0 + 6.0 * std::sqrt(0.4), 128, 17);
    const auto rep = contraction_report(b, 4, box, LadderMode::holder, horizons);
    REQUIRE(rep.rows.size() == 4);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].C_n < rep.rows[i - 1].C_n);
    CHECK(rep.rows.back().C_n <= 0.5);
}

TEST_CASE("ladder mode strings") {
    CHECK(ladder_mode_from_string("holder") == LadderMode::holder);
    CHECK(ladder_mode_from_string("lqp") == LadderMode::lqp);
    CHECK(std::string(to_string(LadderMode::lqp)) == "lqp");
    CHECK_THROWS(ladder_mode_from_string("other"));
}
