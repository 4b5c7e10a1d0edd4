#include "helpers.hpp"

#include "roughdrift/corpus.hpp"
#include "roughdrift/error.hpp"
#include "roughdrift/parallel.hpp"
#include "roughdrift/quadrature.hpp"
#include "roughdrift/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cstdio>
#include <filesystem>

using namespace roughdrift;
using boost::math::quadrature::gauss_kronrod;

TEST_CASE("prodi-serrin arithmetic") {
    auto a = prodi_serrin_check(7, 15, 3);
    CHECK(a.admissible);
    CHECK(a.margin == doctest::Approx(1.0 - 3.0 / 7.0 - 2.0 / 15.0).epsilon(1e-14));
    CHECK(a.margin == doctest::Approx(0.4381).epsilon(1e-4));
    CHECK_FALSE(prodi_serrin_check(2, 2, 1).admissible);
    auto c = prodi_serrin_check(4, 8, 2);
    CHECK(c.admissible);
    CHECK(c.margin == doctest::Approx(0.25));
}

TEST_CASE("mixed norm of an indicator is T^(1/q) V^(1/p)") {
    const auto box = SpaceTimeBox::cube(2, 0.5, 1.0, 41, 11);
    const auto one = FieldFn::constant(2, {1.0});
    const auto n = lqp_norm(one, {4.0, 6.0}, box);
    CHECK(n.value == doctest::Approx(std::pow(0.5, 1.0 / 6.0) * std::pow(4.0, 1.0 / 4.0)).epsilon(1e-12));
    CHECK(lqp_norm(FieldFn::zero(2, 1), {4.0, 6.0}, box).value == 0.0);
}

TEST_CASE("mixed norm of a separable field factorizes") {
    const double p = 4.0, q = 3.0, T = 1.0;
    const auto f = FieldFn(1, 1, [](double t, std::span<const double> x, std::span<double> out) {
        out[0] = (1.0 + t) * std::exp(-x[0] * x[0]);
    });
    const auto box = SpaceTimeBox::cube(1, T, 4.0, 4001, 2001);
    const double gq = std::pow(gauss_kronrod<double, 61>::integrate([&](double t) { return std::pow(1.0 + t, q); }, 0.0, T),
                               1.0 / q);
    const double hp = std::pow(
        gauss_kronrod<double, 61>::integrate([&](double x) { return std::exp(-p * x * x); }, -4.0, 4.0, 10, 1e-14), 1.0 / p);
    CHECK(lqp_norm(f, {p, q}, box).value == doctest::Approx(gq * hp).epsilon(1e-5));
}

TEST_CASE("grid norm matches evaluator norm for slice-constant fields") {
    const auto box = SpaceTimeBox::cube(1, 1.0, 2.0, 201, 9);
    const auto f = FieldFn(1, 1, [](double t, std::span<const double> x, std::span<double> out) {
        out[0] = std::floor(t * 8.0 + 1e-9) + x[0] * x[0];
    });
    const auto g = GridField::sample(f, box);
    CHECK(lqp_norm(g, {3.0, 5.0}).value == doctest::Approx(lqp_norm(f, {3.0, 5.0}, box).value).epsilon(1e-12));
}

TEST_CASE("hoelder norms") {
    const auto box01 = test::interval(0.0, 1.0, 101);
    CHECK(holder_norm(FieldFn::constant(1, {-3.0}), 0.5, box01) == doctest::Approx(3.0));
    const auto id = FieldFn(1, 1, [](double, std::span<const double> x, std::span<double> out) { out[0] = x[0]; });
    CHECK(holder_norm(id, 0.5, box01) == doctest::Approx(2.0).epsilon(1e-12));
    const auto sq = FieldFn(1, 1, [](double, std::span<const double> x, std::span<double> out) {
        out[0] = std::sqrt(std::abs(x[0]));
    });
    const auto sym = test::interval(-1.0, 1.0, 201);
    CHECK(holder_norm(sq, 0.5, sym) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("philox known answers") {
    const Philox4x32 zero(Philox4x32::Key{0, 0});
    CHECK(zero({0, 0, 0, 0}) == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    const Philox4x32 ones(Philox4x32::Key{0xffffffffu, 0xffffffffu});
    CHECK(ones({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}) ==
          Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("normal stream moments") {
    const NormalStream rng(7);
    const std::size_t n = 200000;
    double m = 0, m2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = rng.normal(i, 0, 0);
        m += z;
        m2 += z * z;
    }
    m /= n;
    m2 /= n;
    CHECK(std::abs(m) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / double(n)));
    CHECK(rng.normal(5, 3, 1) == NormalStream(7).normal(5, 3, 1));
    CHECK(rng.normal(5, 3, 1) != NormalStream(8).normal(5, 3, 1));
}

TEST_CASE("grid field interpolation, arithmetic and round trip") {
    const auto box = SpaceTimeBox::cube(2, 1.0, 1.0, 21, 5);
    const auto affine = FieldFn(2, 2, [](double t, std::span<const double> x, std::span<double> out) {
        out[0] = 1.0 + 2.0 * x[0] - x[1] + t;
        out[1] = x[0] * 0.5;
    });
    auto g = GridField::sample(affine, box);
    std::array<double, 2> x{0.123, -0.456}, v{};
    g.evaluate(0.3, x, v);
    CHECK(v[0] == doctest::Approx(1.0 + 2.0 * 0.123 + 0.456 + 0.25).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.0615).epsilon(1e-12));

    auto h = g;
    h += g;
    h *= 0.5;
    for (std::size_t i = 0; i < g.values().size(); ++i) CHECK(h.values()[i] == doctest::Approx(g.values()[i]));

    const auto path = (std::filesystem::temp_directory_path() / "roughdrift_grid_roundtrip.bin").string();
    g.save(path);
    const auto r = GridField::load(path);
    std::filesystem::remove(path);
    CHECK(r.components() == 2);
    CHECK(r.box().same_grid(g.box()));
    CHECK(std::equal(r.values().begin(), r.values().end(), g.values().begin()));
}

TEST_CASE("parallel_for results do not depend on worker count") {
    std::vector<double> a(1000), b(1000);
    set_worker_count(1);
    parallel_for(a.size(), [&](std::size_t i) { a[i] = std::sin(double(i)); });
    set_worker_count(4);
    parallel_for(b.size(), [&](std::size_t i) { b[i] = std::sin(double(i)); });
    set_worker_count(0);
    CHECK(a == b);
}

TEST_CASE("gauss-legendre exactness") {
    const auto r = gauss_legendre_unit(5);
    double s = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 9);
    CHECK(s == doctest::Approx(0.1).epsilon(1e-14));
    const auto c = composite_gauss(-1.0, 2.0, 7, 3);
    double w = 0;
    for (double x : c.weights) w += x;
    CHECK(w == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("corpus registry invariants") {
    const auto list = corpus_list();
    CHECK(list.size() >= 5);
    bool radial = false;
    for (const auto& e : list) {
        CHECK((e.prodi_serrin.admissible || e.holder_mode));
        if (e.params.preset == "truncated_radial" && e.params.beta == 0.3 && e.params.dim == 1) {
            radial = true;
            CHECK(e.params.exponents.p == 7.0);
            CHECK(e.params.exponents.q == 15.0);
            CHECK(e.prodi_serrin.margin > 0.4);
        }
    }
    CHECK(radial);
}

TEST_CASE("singular preset requires explicit regularization") {
    PresetParams p;
    p.preset = "truncated_radial";
    CHECK_THROWS_AS(make_drift(p), Error);
    p.cap = 10.0;
    const auto b = make_drift(p);
    std::array<double, 1> x{0.0}, v{};
    b.evaluate(0.0, x, v);
    CHECK(std::isfinite(v[0]));
    std::array<double, 1> far{5.0};
    b.evaluate(0.0, far, v);
    CHECK(v[0] == 0.0);
    p.preset = "nope";
    CHECK_THROWS_AS(make_drift(p), Error);
}
