#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fracalc/grid.hpp"

using namespace fracalc;

TEST_CASE("mesh: uniform and graded node formulas") {
    auto u = Mesh::uniform(8, 2.0);
    CHECK(u->node(0) == 0.0);
    CHECK(u->node(8) == 2.0);
    for (std::size_t j = 0; j <= 8; ++j) {
        CHECK(u->node(j) == doctest::Approx(2.0 * j / 8.0).epsilon(1e-15));
    }

    auto g = Mesh::graded(4, 1.0, 2.0);
    for (std::size_t j = 0; j <= 4; ++j) {
        const double expect = std::pow(static_cast<double>(j) / 4.0, 2.0);
        CHECK(g->node(j) == doctest::Approx(expect).epsilon(1e-15));
    }
    for (std::size_t j = 0; j < g->cells(); ++j) {
        CHECK(g->node(j) < g->node(j + 1));
    }
}

TEST_CASE("mesh: invalid construction") {
    CHECK_THROWS_AS(Mesh::uniform(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Mesh::uniform(4, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Mesh::uniform(4, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(Mesh::graded(4, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("refine: node formulas and composition") {
    auto u = Mesh::uniform(4, 1.0);
    auto u2 = refine(u, 2);
    CHECK(u2->cells() == 8);
    for (std::size_t j = 0; j <= 8; ++j) {
        CHECK(u2->node(j) == doctest::Approx(j / 8.0).epsilon(1e-16));
    }

    auto g = Mesh::graded(4, 1.0, 2.0);
    auto g2 = refine(g, 2);
    for (std::size_t j = 0; j <= 8; ++j) {
        CHECK(g2->node(j) == std::pow(j / 8.0, 2.0));
    }
    CHECK(g2->grading() == 2.0);

    // refine twice with factor 2 reproduces refine once with factor 4.
    auto twice = refine(refine(g, 2), 2);
    auto once = refine(g, 4);
    REQUIRE(twice->cells() == once->cells());
    for (std::size_t j = 0; j <= twice->cells(); ++j) {
        CHECK(twice->node(j) == once->node(j));
    }

    CHECK_THROWS_AS(refine(u, 1), std::invalid_argument);
}

TEST_CASE("lp_norm: constants and simple closed forms") {
    for (auto mesh : {Mesh::uniform(64, 1.0), Mesh::graded(64, 1.0, 2.0)}) {
        for (double p : {1.0, 2.0, 3.5}) {
            GridFn c = GridFn::constant(mesh, 1.0, Convention::NodeLinear);
            CHECK(lp_norm(c, p) == doctest::Approx(1.0).epsilon(1e-13));
            GridFn cc = GridFn::constant(mesh, 1.0, Convention::CellConstant);
            CHECK(lp_norm(cc, p) == doctest::Approx(1.0).epsilon(1e-13));
        }
        GridFn z = GridFn::zeros(mesh, Convention::NodeLinear);
        CHECK(lp_norm(z, 2.0) == 0.0);
        CHECK(lp_norm(z, LpExponent::infinity()) == 0.0);
    }
}

TEST_CASE("lp_norm: v(t) = t converges at second order for node-linear") {
    const double exact = 1.0 / std::sqrt(3.0);
    double prev_err = 0.0;
    for (std::size_t n : {16, 32, 64, 128}) {
        auto mesh = Mesh::uniform(n, 1.0);
        GridFn v = GridFn::sample(mesh, [](double t) { return t; },
                                  Convention::NodeLinear);
        const double err = std::abs(lp_norm(v, 2.0) - exact);
        CHECK(err < 10.0 / (static_cast<double>(n) * n));
        if (prev_err > 0.0) CHECK(err < prev_err);
        prev_err = err;
    }
}

TEST_CASE("lp_norm: infinity exponent is the max") {
    auto mesh = Mesh::uniform(8, 1.0);
    GridFn v = GridFn::sample(mesh, [](double t) { return t - 0.4; },
                              Convention::NodeLinear);
    CHECK(lp_norm(v, LpExponent::infinity()) == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("lp_norm: homogeneity and triangle inequality") {
    auto mesh = Mesh::uniform(41, 1.7);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> a(mesh->node_count()), b(mesh->node_count());
        for (auto& x : a) x = uni(rng);
        for (auto& x : b) x = uni(rng);
        GridFn v(mesh, a, Convention::NodeLinear);
        GridFn w(mesh, b, Convention::NodeLinear);
        const double c = 10.0 * uni(rng);
        for (double p : {1.0, 2.0, 4.0}) {
            CHECK(lp_norm(c * v, p)
                  == doctest::Approx(std::abs(c) * lp_norm(v, p)).epsilon(1e-13));
            CHECK(lp_norm(v + w, p) <= lp_norm(v, p) + lp_norm(w, p) + 1e-12);
        }
    }
}

TEST_CASE("grid fn: invariants") {
    auto mesh = Mesh::uniform(4, 1.0);
    CHECK_THROWS_AS(GridFn(mesh, std::vector<double>(3, 0.0), Convention::NodeLinear),
                    std::invalid_argument);
    std::vector<double> bad(5, 0.0);
    bad[2] = std::nan("");
    CHECK_THROWS_AS(GridFn(mesh, bad, Convention::NodeLinear), std::invalid_argument);

    // Mixing conventions or meshes is a type error.
    GridFn a = GridFn::constant(mesh, 1.0, Convention::NodeLinear);
    GridFn b = GridFn::constant(mesh, 1.0, Convention::CellConstant);
    CHECK_THROWS_AS(a + b, std::invalid_argument);
    auto other = Mesh::uniform(8, 1.0);
    GridFn c = GridFn::constant(other, 1.0, Convention::NodeLinear);
    CHECK_THROWS_AS(a + c, std::invalid_argument);

    // Same structure on a distinct object is fine.
    auto clone = Mesh::uniform(4, 1.0);
    GridFn d = GridFn::constant(clone, 2.0, Convention::NodeLinear);
    CHECK((a + d)[2] == doctest::Approx(3.0));
}

TEST_CASE("grid fn: csv serialization") {
    auto mesh = Mesh::uniform(4, 1.0);
    GridFn v = GridFn::sample(mesh, [](double t) { return 2.0 * t; },
                              Convention::NodeLinear);
    const std::string csv = to_csv(v);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,value");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("grid fn: json round trip") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (auto mesh : {Mesh::uniform(17, 1.3), Mesh::graded(17, 1.3, 3.0)}) {
        std::vector<double> vals(mesh->node_count());
        for (auto& x : vals) x = uni(rng);
        GridFn v(mesh, vals, Convention::NodeLinear);
        GridFn back = grid_fn_from_json(to_json(v));
        REQUIRE(back.size() == v.size());
        for (std::size_t j = 0; j < v.size(); ++j) {
            CHECK(back[j] == v[j]);
            CHECK(back.mesh().node(j) == doctest::Approx(v.mesh().node(j)).epsilon(1e-15));
        }
        CHECK(back.convention() == v.convention());
    }
}

TEST_CASE("mesh json round trip") {
    auto g = Mesh::graded(32, 2.5, 3.3333);
    auto back = mesh_from_json(to_json(*g));
    CHECK(back->cells() == 32);
    CHECK(back->horizon() == 2.5);
    CHECK(back->grading() == 3.3333);
    CHECK_THROWS_AS(mesh_from_json(nlohmann::json{{"N", 4}}), std::invalid_argument);
    CHECK_THROWS_AS(mesh_from_json(nlohmann::json{{"N", 4}, {"T", 1.0}, {"kind", "weird"}}),
                    std::invalid_argument);
}
