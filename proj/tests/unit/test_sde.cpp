#include "helpers.hpp"

#include "roughdrift/corpus.hpp"
#include "roughdrift/error.hpp"
#include "roughdrift/parallel.hpp"
#include "roughdrift/sde.hpp"

#include <doctest.h>

#include <cstring>

using namespace roughdrift;

namespace {

SimConfig cfg(double T, std::size_t steps, std::size_t paths, std::uint64_t seed = 11) {
    SimConfig s;
    s.horizon = T;
    s.steps = steps;
    s.paths = paths;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("step count from a step size") {
    CHECK(SimConfig::steps_for(1.0, 0.01) == 100);
    CHECK(SimConfig::steps_for(0.25, 0.25 / 200) == 200);
    CHECK_THROWS_AS(SimConfig::steps_for(1.0, 0.03), Error);
    auto bad = cfg(1.0, 10, 10);
    bad.moment_orders = {1.0};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("driftless paths are x + W") {
    const auto s = cfg(1.0, 50, 200);
    const std::vector<double> x{0.3, -0.1};
    const auto batch = simulate(DriftField::zero(2), s, x);
    for (std::size_t p = 0; p < batch.paths; p += 17) {
        double w0 = 0, w1 = 0;
        for (std::size_t st = 0; st < batch.steps; ++st) {
            w0 += batch.increments->at(p, st, 0);
            w1 += batch.increments->at(p, st, 1);
            CHECK(batch.state(p, st + 1)[0] == doctest::Approx(0.3 + w0).epsilon(1e-14));
            CHECK(batch.state(p, st + 1)[1] == doctest::Approx(-0.1 + w1).epsilon(1e-14));
        }
    }
}

TEST_CASE("constant drift is exact at grid times") {
    const double c = 0.7;
    const auto s = cfg(0.5, 40, 100);
    const std::vector<double> x{0.0};
    const auto batch = simulate(test::constant_drift(1, c), s, x);
    double err = 0.0;
    for (std::size_t p = 0; p < batch.paths; ++p) {
        double w = 0;
        for (std::size_t st = 0; st < batch.steps; ++st) {
            w += batch.increments->at(p, st, 0);
            err = std::max(err, std::abs(batch.state(p, st + 1)[0] - (c * s.step() * double(st + 1) + w)));
        }
    }
    CHECK(err < 1e-12);
}

TEST_CASE("ornstein-uhlenbeck mean") {
    const auto s = cfg(1.0, 100, 20000);
    const std::vector<double> x{1.0};
    const auto batch = simulate(test::drift_1d("ou", [](double y) { return -y; }), s, x);
    std::vector<double> xt(batch.paths);
    for (std::size_t p = 0; p < batch.paths; ++p) xt[p] = batch.state(p, batch.steps)[0];
    const auto ms = mean_se(xt);
    const double bias = std::abs(std::exp(-1.0) - std::pow(1.0 - s.step(), 100));
    CHECK(std::abs(ms.mean - std::exp(-1.0)) <= 3.0 * ms.se + 2.0 * bias);
}

TEST_CASE("coupled runs") {
    const auto s = cfg(1.0, 64, 500);
    const std::vector<double> a{0.2}, b{0.5};
    const auto [s1, s2] = simulate_coupled(DriftField::zero(1), s, a, a);
    for (double d : s1.sup_distance) CHECK(d == 0.0);
    const auto [z1, z2] = simulate_coupled(DriftField::zero(1), s, a, b);
    for (double d : z1.sup_distance) CHECK(d == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(z1.increments->checksum == z2.increments->checksum);
    // Lipschitz drift with L = 1.
    const auto [l1, l2] = simulate_coupled(test::drift_1d("sin", [](double y) { return std::sin(y); }), s, a, b);
    for (double d : l1.sup_distance) CHECK(d <= 2.0 * 0.3 * std::exp(1.0));
}

TEST_CASE("hoelder moment ratio: driftless and lipschitz") {
    const auto s = cfg(1.0, 50, 2000);
    const std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs{
        {{0.0}, {0.2}}, {{0.0}, {0.1}}, {{0.0}, {0.05}}, {{0.0}, {0.025}}};
    const auto zero = holder_moment_estimate(DriftField::zero(1), s, pairs, 2.0);
    for (const auto& r : zero.rows) CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-10));
    const auto lip = holder_moment_estimate(test::drift_1d("sin", [](double y) { return std::sin(y); }), s, pairs, 4.0);
    for (const auto& r : lip.rows) CHECK(r.ratio <= std::exp(1.0));
    CHECK(lip.summary.pass);
}

TEST_CASE("zero ladder transform is the identity and the residual vanishes") {
    const auto box = SpaceTimeBox::cube(1, 0.5, 3.0, 65, 9);
    const auto L = build_ladder(DriftField::zero(1), 2, box, LadderMode::lqp);
    const auto s = cfg(0.5, 32, 300);
    const std::vector<double> x{0.1};
    const auto batch = simulate(DriftField::zero(1), s, x);
    const auto tr = transformed_process(batch, L);
    for (std::size_t i = 0; i < tr.Y.size(); ++i) CHECK(tr.Y[i] == batch.traj[i]);
    const auto r = ito_residual(batch, tr);
    CHECK(r.estimate < 1e-13);

    const auto [c1, c2] = simulate_coupled(DriftField::zero(1), s, x, std::vector<double>{0.4});
    const auto A = a_process(c1, transformed_process(c1, L), c2, transformed_process(c2, L));
    for (double v : A) CHECK(v == 0.0);
    CHECK(exp_a_estimate(A, 6.0).estimate == 1.0);
}

TEST_CASE("equal starts give a vanishing A process") {
    PresetParams p;
    p.preset = "gaussian_bump";
    p.amplitude = 0.3;
    const auto b = make_drift(p);
    const auto box = SpaceTimeBox::cube(1, 0.1, 1.5 + 6.0 * std::sqrt(0.1), 128, 17);
    const auto L = build_ladder(b, 2, box, LadderMode::lqp);
    const auto s = cfg(0.1, 16, 200);
    const std::vector<double> x{0.2};
    const auto [c1, c2] = simulate_coupled(b, s, x, x);
    const auto A = a_process(c1, transformed_process(c1, L), c2, transformed_process(c2, L));
    for (double v : A) CHECK(v == 0.0);
    CHECK(exp_a_estimate(A, 1.0).estimate == 1.0);
}

TEST_CASE("constant drift residual reduces to quadrature error") {
    const double T = 0.5;
    const auto box = SpaceTimeBox::cube(1, T, 3.0, 65, 33);
    const auto b = test::constant_drift(1, 0.5);
    const auto L = build_ladder(b, 1, box, LadderMode::lqp);
    const auto s = cfg(T, 32, 200);
    const std::vector<double> x{0.0};
    const auto batch = simulate(b, s, x);
    CHECK(ito_residual(batch, transformed_process(batch, L)).estimate < 1e-9);
}

TEST_CASE("transform horizon must match the batch") {
    const auto box = SpaceTimeBox::cube(1, 0.5, 3.0, 33, 5);
    const auto L = build_ladder(DriftField::zero(1), 1, box, LadderMode::lqp);
    const auto batch = simulate(DriftField::zero(1), cfg(1.0, 8, 4), std::vector<double>{0.0});
    CHECK_THROWS_AS(transformed_process(batch, L), Error);
}

TEST_CASE("non-finite drift is a singularity error") {
    const auto b = test::drift_1d("nan", [](double y) { return y > 0.05 ? std::nan("") : 1.0; });
    CHECK_THROWS_AS(simulate(b, cfg(1.0, 20, 10), std::vector<double>{0.0}), SingularityError);
}

TEST_CASE("simulation is independent of the worker count") {
    PresetParams p;
    p.preset = "gaussian_bump";
    const auto b = make_drift(p);
    const auto s = cfg(1.0, 50, 3000, 99);
    const std::vector<double> x{0.1};
    set_worker_count(1);
    const auto one = simulate(b, s, x);
    set_worker_count(4);
    const auto four = simulate(b, s, x);
    set_worker_count(0);
    REQUIRE(one.traj.size() == four.traj.size());
    CHECK(std::memcmp(one.traj.data(), four.traj.data(), one.traj.size() * sizeof(double)) == 0);
    CHECK(one.increments->checksum == four.increments->checksum);
    CHECK(make_increments(1, cfg(1.0, 50, 3000, 100))->checksum != one.increments->checksum);
}

TEST_CASE("power fit, ito constant, percentile") {
    std::vector<double> h{0.1, 0.05, 0.025}, y;
    for (double v : h) y.push_back(3.0 * std::pow(v, 0.75));
    const auto f = fit_power(h, y);
    CHECK(f.order == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(ito_constant(4.0) == 6.0);
    CHECK(percentile({4.0, 1.0, 3.0, 2.0, 5.0}, 0.5) == 3.0);
}

TEST_CASE("moment stability and integrability monitor on brownian paths") {
    const auto batch = simulate(DriftField::zero(1), cfg(1.0, 20, 20000), std::vector<double>{0.0});
    const auto reps = moment_stability(batch, {2.0});
    CHECK(reps[0].estimate == doctest::Approx(1.0).epsilon(0.05));
    CHECK(integrability_monitor(DriftField::zero(1), batch).estimate == 0.0);
}
