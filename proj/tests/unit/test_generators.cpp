#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heiskak/generators.hpp"

using namespace heiskak;

namespace {

// the base-family invariants checked from scratch
void check_family(const WeightedBallFamily& nu) {
    CHECK(nu.is_base());
    CHECK(nu.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    const double r = nu.radius();
    CHECK(r == doctest::Approx(nu.delta() * nu.delta()));
    for (std::size_t i = 0; i < nu.size(); ++i) {
        CHECK(koranyi_norm(nu.center(i)) <= 1.0 + 1e-12);
        CHECK(nu.weights()[i] > 0.0);
    }
    if (nu.size() <= 2000) {
        for (std::size_t i = 0; i < nu.size(); ++i) {
            for (std::size_t j = i + 1; j < nu.size(); ++j) {
                CHECK(euclidean_dist(nu.center(i), nu.center(j)) >= 2.0 * r * (1 - 1e-12));
            }
        }
    }
}

}  // namespace

TEST_CASE("IFS with one translate is a point mass") {
    const auto spec = make_ifs(0.5, {HPoint{}}, 3);
    CHECK(spec.similarity_dimension() == 0.0);
    const auto nu = heisenberg_cantor(spec);
    CHECK(nu.size() == 1);
    check_family(nu);
}

TEST_CASE("IFS validation") {
    CHECK_THROWS_AS(make_ifs(1.0, {HPoint{}}, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_ifs(0.3, {}, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_ifs(0.3, {HPoint{}}, -1), std::invalid_argument);
    // two translates closer than 2r
    try {
        make_ifs(0.3, {HPoint{0, 0, 0}, HPoint{1, 0, 0}, HPoint{1.5, 0, 0}}, 1);
        FAIL("expected a separation error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("1 and 2") != std::string::npos);
    }
    // 17 translates at ratio 1/2 exceed dimension 4
    std::vector<HPoint> many;
    for (int i = 0; i < 17; ++i) many.push_back({1.1 * i, 0, 0});
    CHECK_THROWS_AS(make_ifs(0.5, many, 1), std::invalid_argument);
}

TEST_CASE("Cantor family of dimension ln 41 / ln 3") {
    const auto spec = greedy_ifs(1.0 / 3.0, 41, 1, 1);
    CHECK(spec.translates.size() == 41);
    CHECK(spec.similarity_dimension() == doctest::Approx(std::log(41.0) / std::log(3.0)));
    CHECK(spec.similarity_dimension() > 3.0);
    CHECK(spec.separation() >= 2.0 / 3.0);
    CHECK(spec.outer_scale <= 1.0);
    // deterministic given the seed
    const auto again = greedy_ifs(1.0 / 3.0, 41, 1, 1);
    for (std::size_t i = 0; i < 41; ++i) CHECK(again.translates[i] == spec.translates[i]);

    auto s1 = spec;
    auto s2 = spec;
    s2.depth = 2;
    const auto nu1 = heisenberg_cantor(s1);
    const auto nu2 = heisenberg_cantor(s2);
    CHECK(nu1.size() == 41);
    CHECK(nu2.size() == 41 * 41);
    check_family(nu1);
    check_family(nu2);
    CHECK(nu2.delta() == doctest::Approx(nu1.delta() / 3.0));

    // self-similarity of the Frostman constant across depths
    const double t = spec.similarity_dimension();
    const double c1 = frostman_const(nu1, t, nu1.delta()).value;
    const double c2 = frostman_const(nu2, t, nu2.delta()).value;
    CHECK(c2 / c1 <= 4.0);
    CHECK(c1 / c2 <= 4.0);
}

TEST_CASE("vertical plane sample") {
    for (double d : {0.125, 0.0625}) {
        const auto nu = vertical_plane_sample(vertical_plane_count(d), d, 3);
        CHECK(nu.size() == static_cast<std::size_t>(vertical_plane_count(d)));
        check_family(nu);
        for (const auto& c : nu.centers()) CHECK(c.x == 0.0);
    }
    CHECK(vertical_plane_count(0.125) == 128);

    // c_3.5 grows like delta^(3 - t) at least at rate delta^-0.4 over two steps
    const double c_a = frostman_const(vertical_plane_sample(vertical_plane_count(0.125), 0.125, 1), 3.5, 0.125).value;
    const double c_b = frostman_const(vertical_plane_sample(vertical_plane_count(0.03125), 0.03125, 1), 3.5, 0.03125).value;
    CHECK(c_b / c_a >= std::pow(4.0, 0.4));
    CHECK_THROWS_AS(vertical_plane_sample(100000, 0.125, 1), std::invalid_argument);
}

TEST_CASE("projections of the vertical plane at theta = 0 collapse") {
    // at theta = 0 the chart coordinate mu equals y, so the image is the
    // plane itself; at theta = pi/2 the mu coordinate is -x = 0 and the
    // pushforward sits on a single line
    const auto nu = vertical_plane_sample(200, 0.125, 2);
    const auto d = pushforward_density(nu, Angle(std::numbers::pi / 2), 0.002, 16, 1);
    CHECK(d.n_mu <= 20);
    const auto e = pushforward_density(nu, Angle(0.0), 0.002, 16, 1);
    CHECK(e.n_mu > 500);
}

TEST_CASE("uniform solid packing") {
    for (double d : {0.25, 0.125}) {
        const auto nu = uniform_solid(d);
        check_family(nu);
        const double n = static_cast<double>(nu.size());
        CHECK(n >= std::pow(d, -4.0) / 8.0);
        CHECK(n <= 8.0 * std::pow(d, -4.0));
        CHECK(frostman_const(nu, 4.0, d).value <= 20.0);
    }
}

TEST_CASE("uniform solid energy stays bounded as delta halves") {
    const double e8 = sector_energy(uniform_solid(0.125), 1.5, 0.0, std::numbers::pi);
    const double e16 = sector_energy(uniform_solid(0.0625), 1.5, 0.0, std::numbers::pi);
    CHECK(e16 / e8 <= 1.5);
    CHECK(e8 / e16 <= 1.5);
}

TEST_CASE("random and clustered families") {
    const auto nu = random_family(50, 0.2, 4);
    CHECK(nu.size() == 50);
    check_family(nu);
    const auto tc = three_cluster_family();
    CHECK(tc.size() == 54);
    check_family(tc);
    CHECK_THROWS_AS(random_family(0, 0.2, 1), std::invalid_argument);
}
