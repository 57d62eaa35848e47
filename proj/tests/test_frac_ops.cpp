#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fracalc/frac_ops.hpp"
#include "fracalc/special.hpp"
#include "fracalc/verify.hpp"

using namespace fracalc;

namespace {

double max_diff(const GridFn& a, const GridFn& b, std::size_t from = 0) {
    double m = 0.0;
    for (std::size_t j = from; j < a.size(); ++j) {
        m = std::max(m, std::abs(a[j] - b[j]));
    }
    return m;
}

double max_diff_from_t(const GridFn& a, const GridFn& b, double t_min) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a.mesh().node(j) < t_min) continue;
        m = std::max(m, std::abs(a[j] - b[j]));
    }
    return m;
}

} // namespace

TEST_CASE("weights: causality, positivity, Toeplitz structure") {
    for (auto mesh : {Mesh::uniform(12, 1.0), Mesh::graded(12, 1.0, 2.5)}) {
        for (auto basis : {Convention::CellConstant, Convention::NodeLinear}) {
            ConvolutionWeights w(mesh, FracOrder(0.6), basis);
            for (std::size_t i = 0; i <= 12; ++i) {
                for (std::size_t j = 0; j <= 12; ++j) {
                    const double wij = w.weight(i, j);
                    if (j > i) CHECK(wij == 0.0);
                    CHECK(wij >= 0.0);
                }
            }
        }
    }
    // Uniform cell-constant weights depend on i - j only.
    ConvolutionWeights w(Mesh::uniform(16, 1.0), FracOrder(0.4),
                         Convention::CellConstant);
    for (std::size_t i = 2; i < 16; ++i) {
        for (std::size_t j = 1; j <= i; ++j) {
            CHECK(w.weight(i, j)
                  == doctest::Approx(w.weight(i + 1, j + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("frac_integral_left: linearity on zero input") {
    auto mesh = Mesh::uniform(32, 1.0);
    for (auto conv : {Convention::CellConstant, Convention::NodeLinear}) {
        GridFn z = GridFn::zeros(mesh, conv);
        GridFn img = frac_integral_left(z, FracOrder(0.7));
        CHECK(max_norm(img) == 0.0);
    }
}

TEST_CASE("frac_integral_left: constants reproduce the power rule exactly") {
    // The kernel is integrated exactly against the step reconstruction, so
    // J^alpha 1 telescopes to t^alpha/Gamma(alpha+1) up to rounding.
    for (auto mesh : {Mesh::uniform(64, 1.0), Mesh::graded(64, 1.0, 3.0)}) {
        for (double a : {0.3, 0.5, 1.0, 1.7}) {
            GridFn ones = GridFn::constant(mesh, 1.0, Convention::CellConstant);
            GridFn img = frac_integral_left(ones, FracOrder(a));
            const double coeff = power_rule(0.0, FracOrder(a));
            for (std::size_t j = 0; j <= mesh->cells(); ++j) {
                const double expect = coeff * std::pow(mesh->node(j), a);
                CHECK(std::abs(img[j] - expect) <= 1e-13 * std::max(1.0, expect));
            }
        }
    }
}

TEST_CASE("frac_integral_left: alpha = 1 integrates t exactly (node-linear)") {
    auto mesh = Mesh::uniform(32, 1.0);
    GridFn v = GridFn::sample(mesh, [](double t) { return t; }, Convention::NodeLinear);
    GridFn img = frac_integral_left(v, FracOrder(1.0));
    for (std::size_t j = 0; j <= 32; ++j) {
        const double t = mesh->node(j);
        CHECK(img[j] == doctest::Approx(0.5 * t * t).epsilon(1e-14));
    }
}

TEST_CASE("frac_integral_left: cell-constant reconstruction error is O(1/N)") {
    const double coeff = power_rule(0.5, FracOrder(0.5));
    double prev = 0.0;
    for (std::size_t n : {64, 128, 256, 512}) {
        auto mesh = Mesh::uniform(n, 1.0);
        GridFn v = GridFn::sample(mesh, [](double t) { return std::sqrt(t); },
                                  Convention::CellConstant);
        GridFn img = frac_integral_left(v, FracOrder(0.5));
        double err = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            err = std::max(err, std::abs(img[j] - coeff * mesh->node(j)));
        }
        CHECK(err < 4.0 / static_cast<double>(n));
        if (prev > 0.0) CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("frac_integral_left: positivity") {
    auto mesh = Mesh::graded(40, 1.0, 2.0);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (auto conv : {Convention::CellConstant, Convention::NodeLinear}) {
        std::vector<double> vals(mesh->node_count());
        for (auto& x : vals) x = uni(rng);
        if (conv == Convention::CellConstant) vals[0] = vals[1];
        GridFn v(mesh, vals, conv);
        GridFn img = frac_integral_left(v, FracOrder(0.5));
        for (std::size_t j = 0; j < img.size(); ++j) {
            CHECK(img[j] >= -1e-15);
        }
    }
}

TEST_CASE("semigroup: J^0.3 J^0.4 = J^0.7 under refinement") {
    double prev = 0.0;
    for (std::size_t n : {256, 512, 1024}) {
        auto mesh = Mesh::uniform(n, 1.0);
        GridFn v = smoothed_random(mesh, 2024);
        GridFn lhs = frac_integral_left(frac_integral_left(v, FracOrder(0.4)),
                                        FracOrder(0.3));
        GridFn rhs = frac_integral_left(v, FracOrder(0.7));
        const double d = max_diff(lhs, rhs) / max_norm(v);
        if (prev > 0.0) CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("frac_integral_right: closed form for constants") {
    auto mesh = Mesh::uniform(64, 1.0);
    GridFn ones = GridFn::constant(mesh, 1.0, Convention::CellConstant);
    for (double a : {0.4, 0.8}) {
        GridFn img = frac_integral_right(ones, FracOrder(a));
        const double coeff = power_rule(0.0, FracOrder(a));
        for (std::size_t j = 0; j <= 64; ++j) {
            const double expect = coeff * std::pow(1.0 - mesh->node(j), a);
            CHECK(std::abs(img[j] - expect) <= 1e-13);
        }
    }
    GridFn z = GridFn::zeros(mesh, Convention::NodeLinear);
    CHECK(max_norm(frac_integral_right(z, FracOrder(0.4))) == 0.0);
}

TEST_CASE("reflection identity: J_a v equals tau J^a tau v node for node") {
    auto mesh = Mesh::uniform(128, 1.0);
    const FracOrder a(0.6);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto conv : {Convention::CellConstant, Convention::NodeLinear}) {
        std::vector<double> vals(mesh->node_count());
        for (auto& x : vals) x = uni(rng);
        if (conv == Convention::CellConstant) vals[0] = vals[1];
        GridFn v(mesh, vals, conv);
        GridFn direct = frac_integral_right(v, a);
        GridFn mirrored = reflect(frac_integral_left(reflect(v), a));
        CHECK(max_diff(direct, mirrored) <= 1e-12);
    }
}

TEST_CASE("reflect: involution, linear flip, fixed point, mesh gate") {
    auto mesh = Mesh::uniform(16, 1.0);
    GridFn t = GridFn::sample(mesh, [](double x) { return x; }, Convention::NodeLinear);
    GridFn r = reflect(t);
    for (std::size_t j = 0; j <= 16; ++j) {
        CHECK(r[j] == doctest::Approx(1.0 - mesh->node(j)).epsilon(1e-15));
    }
    CHECK(max_diff(reflect(r), t) == 0.0);

    GridFn c = GridFn::constant(mesh, 3.0, Convention::NodeLinear);
    CHECK(max_diff(reflect(c), c) == 0.0);

    GridFn step = random_step(mesh, 77);
    CHECK(max_diff(reflect(reflect(step)), step) == 0.0);

    auto graded = Mesh::graded(16, 1.0, 2.0);
    GridFn g = GridFn::constant(graded, 1.0, Convention::NodeLinear);
    CHECK_THROWS_AS(reflect(g), std::invalid_argument);
}

TEST_CASE("caputo: constants annihilate") {
    auto mesh = Mesh::uniform(32, 1.0);
    GridFn c = GridFn::constant(mesh, 4.2, Convention::NodeLinear);
    GridFn d = caputo(c, FracOrder(0.5));
    CHECK(max_norm(d) == 0.0);
}

TEST_CASE("caputo: derivative of t is exact") {
    // dv/ds = 1 exactly, and J^(1-a) of a constant telescopes exactly.
    for (auto mesh : {Mesh::uniform(64, 1.0), Mesh::graded(64, 1.0, 2.0)}) {
        for (double a : {0.3, 0.5, 0.8}) {
            GridFn v = GridFn::sample(mesh, [](double t) { return t; },
                                      Convention::NodeLinear);
            GridFn d = caputo(v, FracOrder(a));
            const double coeff = 1.0 / gamma_fn(2.0 - a);
            for (std::size_t j = 0; j <= mesh->cells(); ++j) {
                const double expect = coeff * std::pow(mesh->node(j), 1.0 - a);
                CHECK(std::abs(d[j] - expect) <= 1e-13);
            }
        }
    }
}

TEST_CASE("caputo: t^alpha maps to the constant Gamma(alpha+1)") {
    const double a = 0.5;
    double prev = 0.0;
    for (std::size_t n : {256, 512, 1024}) {
        auto mesh = Mesh::uniform(n, 1.0);
        GridFn v = GridFn::sample(mesh, [&](double t) { return std::pow(t, a); },
                                  Convention::NodeLinear);
        GridFn d = caputo(v, FracOrder(a));
        GridFn expect = GridFn::constant(mesh, gamma_fn(a + 1.0), Convention::NodeLinear);
        const double err = max_diff_from_t(d, expect, 0.2);
        if (prev > 0.0) CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 5e-3);
}

TEST_CASE("caputo: preconditions") {
    auto mesh = Mesh::uniform(8, 1.0);
    GridFn cc = GridFn::constant(mesh, 1.0, Convention::CellConstant);
    CHECK_THROWS_AS(caputo(cc, FracOrder(0.5)), std::invalid_argument);
    GridFn nl = GridFn::constant(mesh, 1.0, Convention::NodeLinear);
    CHECK_THROWS_AS(caputo(nl, FracOrder(1.0)), std::domain_error);
    CHECK_THROWS_AS(caputo(nl, FracOrder(1.5)), std::domain_error);
}

TEST_CASE("riemann_liouville: inverts J^alpha under refinement") {
    const FracOrder a(0.5);
    double prev = 0.0;
    for (std::size_t n : {256, 512, 1024}) {
        auto mesh = Mesh::uniform(n, 1.0);
        GridFn v = GridFn::sample(mesh, [](double t) { return 1.0 + t - 0.5 * t * t; },
                                  Convention::NodeLinear);
        GridFn rl = riemann_liouville(frac_integral_left(v, a), a);
        const double err = max_diff_from_t(rl.with_convention(Convention::NodeLinear),
                                           v, 0.1);
        if (prev > 0.0) CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 5e-3);
}

TEST_CASE("riemann_liouville: non-vanishing derivative of a constant") {
    const double a = 0.4;
    const double value = 2.0;
    double prev = 0.0;
    for (std::size_t n : {256, 512, 1024}) {
        auto mesh = Mesh::uniform(n, 1.0);
        GridFn c = GridFn::constant(mesh, value, Convention::NodeLinear);
        GridFn rl = riemann_liouville(c, FracOrder(a));
        GridFn expect = GridFn::sample(mesh, [&](double t) {
            return t > 0.0 ? value * std::pow(t, -a) / gamma_fn(1.0 - a) : 0.0;
        }, Convention::CellConstant);
        const double err = max_diff_from_t(rl, expect, 0.2);
        if (prev > 0.0) CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 5e-3);
}

TEST_CASE("riemann_liouville: zero input and the integer-order gate") {
    auto mesh = Mesh::uniform(16, 1.0);
    GridFn z = GridFn::zeros(mesh, Convention::NodeLinear);
    CHECK(max_norm(riemann_liouville(z, FracOrder(0.5))) == 0.0);
    CHECK_THROWS_AS(riemann_liouville(z, FracOrder(1.0)), std::domain_error);
    CHECK_THROWS_AS(riemann_liouville(z, FracOrder(2.0)), std::domain_error);
}

TEST_CASE("invert_frac_integral: exact round trip on cell-constant data") {
    for (auto mesh : {Mesh::uniform(128, 1.0), Mesh::graded(128, 1.0, 2.5)}) {
        for (double a : {0.3, 0.5, 0.9, 1.4}) {
            GridFn w = random_step(mesh, 1234 + static_cast<std::uint64_t>(10 * a));
            GridFn back = invert_frac_integral(frac_integral_left(w, FracOrder(a)),
                                               FracOrder(a));
            CHECK(max_diff(w, back) <= 1e-10);
        }
    }
}

TEST_CASE("invert_frac_integral: recovers the power-rule preimage") {
    // J^a of the unit step telescopes to t^a/Gamma(a+1) exactly, so the
    // inverse image of that power is the constant 1 up to rounding.
    const FracOrder a(0.6);
    const double coeff = power_rule(0.0, a);
    for (std::size_t n : {128, 256, 512}) {
        auto mesh = Mesh::uniform(n, 1.0);
        GridFn u = GridFn::sample(mesh, [&](double t) {
            return coeff * std::pow(t, a.value());
        }, Convention::NodeLinear);
        GridFn w = invert_frac_integral(u, a);
        GridFn one = GridFn::constant(mesh, 1.0, Convention::CellConstant);
        CHECK(max_diff(w, one) < 1e-10);
    }
}

TEST_CASE("invert_frac_integral: isometry with the L^p norm is exact") {
    std::mt19937_64 rng(31);
    for (auto mesh : {Mesh::uniform(64, 1.0), Mesh::graded(64, 1.0, 3.0)}) {
        for (double a : {0.4, 0.8}) {
            for (double p : {1.0, 2.0, 3.0}) {
                GridFn w = random_step(mesh, rng());
                GridFn u = frac_integral_left(w, FracOrder(a));
                const double lhs = lp_norm(invert_frac_integral(u, FracOrder(a)), p);
                const double rhs = lp_norm(w, p);
                CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
            }
        }
    }
}

TEST_CASE("membership diagnostic: constants split at alpha p = 1") {
    const FracOrder a(0.5);
    auto base = Mesh::uniform(128, 1.0);
    auto ones = [](const MeshPtr& m) {
        return GridFn::constant(m, 1.0, Convention::CellConstant);
    };
    // alpha p = 0.75 < 1: constants lie in W_{alpha,p}; norms stay bounded.
    auto ok = membership_test(ones, base, 4, a, LpExponent::finite(1.5));
    CHECK_FALSE(ok.divergent);
    // alpha p = 1.5 > 1: the inverse behaves like t^(-1/2), not in L^3.
    auto bad = membership_test(ones, base, 4, a, LpExponent::finite(3.0));
    CHECK(bad.divergent);
    for (double ratio : bad.ratios) CHECK(ratio > 1.0);
}

TEST_CASE("commutation with the discrete derivative vanishes under refinement") {
    // Measured relative to ||dv/dt||, the scale that controls both sides.
    const FracOrder g(0.5);
    double prev = 0.0;
    for (std::size_t n : {256, 512, 1024}) {
        auto mesh = Mesh::uniform(n, 1.0);
        GridFn v = smoothed_random(mesh, 909);
        GridFn dv = discrete_derivative(v);
        GridFn lhs = discrete_derivative(frac_integral_left(v, g));
        GridFn rhs = frac_integral_left(dv, g)
                         .with_convention(Convention::CellConstant);
        const double d = max_diff(lhs, rhs, 1) / max_norm(dv);
        if (prev > 0.0) CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("reconstruction identity (J^a D J^(1-a) u = u) under refinement") {
    const FracOrder a(0.5);
    double prev = 0.0;
    for (std::size_t n : {256, 512, 1024}) {
        auto mesh = Mesh::uniform(n, 1.0);
        GridFn u = GridFn::sample(mesh, [](double t) { return std::pow(t, 0.8); },
                                  Convention::NodeLinear);
        GridFn rec = frac_integral_left(
            discrete_derivative(frac_integral_left(u, FracOrder(0.5))), a);
        const double err = max_diff_from_t(rec, u, 0.1);
        if (prev > 0.0) CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-2);
}
