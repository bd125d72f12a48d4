#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <sstream>
#include <string>

#include "heiskak/generators.hpp"
#include "heiskak/rng.hpp"
#include "heiskak/xray.hpp"

using namespace heiskak;

namespace {

constexpr double kPi = std::numbers::pi;

// X_E by counting Monte Carlo mass within rho0 of the line
double tube_count(const SampleCloud& cloud, const HorizontalLine& line, double rho0) {
    const Line3 l = line.as_line3();
    const std::size_t per = static_cast<std::size_t>(cloud.n_per_ball);
    double mass = 0.0;
    for (std::size_t k = 0; k < cloud.points.size(); ++k) {
        if (l.distance_to(as_vec(cloud.points[k])) <= rho0) mass += cloud.sample_mass[k / per];
    }
    return mass / (kPi * rho0 * rho0);
}

// line of direction theta passing at distance d (perpendicular, within the
// horizontal plane) from the point c
HorizontalLine line_near(const HPoint& c, const Angle& theta, double offset) {
    const HPoint p{c.x - offset * theta.sin(), c.y + offset * theta.cos(), c.t};
    const auto [mu, s] = project_to_chart(theta, p);
    return HorizontalLine::from_theta_w(theta, PlaneCoord{mu, s});
}

}  // namespace

TEST_CASE("chord length examples") {
    const Ball b{{0.1, 0.2, 0.3}, 0.5};
    const Line3 through{as_vec(b.center), Vec3{1, 0, 0}};
    CHECK(chord_length(through, b) == doctest::Approx(1.0));
    const Line3 tangent{as_vec(b.center) + Vec3{0, 0.5, 0}, Vec3{1, 0, 0}};
    // rounding in the offset leaves a sqrt(eps)-sized chord at most
    CHECK(chord_length(tangent, b) < 1e-7);
    const Line3 half{as_vec(b.center) + Vec3{0, 0.25, 0}, Vec3{1, 0, 0}};
    CHECK(chord_length(half, b) == doctest::Approx(0.5 * std::sqrt(3.0)));
    const Line3 miss{as_vec(b.center) + Vec3{0, 2, 0}, Vec3{1, 0, 0}};
    CHECK(chord_length(miss, b) == 0.0);
    // continuity towards tangency
    const Line3 near{as_vec(b.center) + Vec3{0, 0.5 - 1e-10, 0}, Vec3{1, 0, 0}};
    CHECK(chord_length(near, b) < 1e-4);
}

TEST_CASE("X-ray transform examples") {
    const double delta = 0.2, r = delta * delta;
    const auto single = make_family({HPoint{}}, {1.0}, delta);
    const auto axis = HorizontalLine::from_theta_w(Angle(0.0), PlaneCoord{0.0, 0.0});
    const double expect = 2.0 * r / (4.0 / 3.0 * kPi * r * r * r);
    CHECK(xray_transform(single, axis) == doctest::Approx(expect));
    CHECK(xray_transform_h(single, axis) == doctest::Approx(expect));
    const auto far = HorizontalLine::from_theta_w(Angle(0.0), PlaneCoord{0.5, 0.0});
    CHECK(xray_transform(single, far) == 0.0);
}

TEST_CASE("X-ray transform matches a tube-count oracle") {
    const auto base = random_family(3, 0.3, 4);
    const HPoint g{0.2, -0.1, 0.15};
    // the translated and dilated copies exercise the placed evaluation path
    const std::vector<WeightedBallFamily> fams{base, base.left_translated(g), base.dilated(0.8)};
    Rng rng(12);
    for (const auto& nu : fams) {
        const auto cloud = sample_family(nu, 1000000, 21);
        for (std::size_t i = 0; i < nu.size(); ++i) {
            const Angle th(rng.uniform(0.0, kPi));
            // 0.64 r fits inside every copy of the ball
            const double r = 0.64 * nu.radius();
            const HorizontalLine line = line_near(nu.center(i), th, rng.uniform(0.0, 0.4) * r);
            const double exact = xray_transform(nu, line);
            REQUIRE(exact > 0.0);
            const double mc = tube_count(cloud, line, 0.1 * r);
            // about 14000 samples land in the tube: 1% standard error
            CHECK(std::abs(mc / exact - 1.0) < 0.035);
        }
    }
}

TEST_CASE("X-ray transform commutes with left translation") {
    const auto nu = random_family(10, 0.25, 5);
    Rng rng(13);
    for (int k = 0; k < 200; ++k) {
        const HPoint g = rng.in_koranyi_ball(0.5);
        const std::size_t i = rng.below(nu.size());
        const HorizontalLine line = line_near(nu.center(i), Angle(rng.uniform(0.0, kPi)),
                                              rng.uniform(0.0, 0.5) * nu.radius());
        // X_H(L_g nu)(g L) = X_H nu(L): Koranyi length is left invariant
        const double a = xray_transform_h(nu.left_translated(g), line.left_translated(g));
        const double b = xray_transform_h(nu, line);
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("Fubini at q = 1") {
    const auto nu = random_family(10, 0.25, 6);
    Rng rng(14);
    for (int k = 0; k < 5; ++k) {
        const auto d = xray_density(nu, Angle(rng.uniform(0.0, kPi)), GridSpec::square(0.005));
        CHECK(std::abs(d.total_mass() - 1.0) < 0.01);
    }
    const auto cmp = xray_identity_check(nu, 1.0);
    CHECK(std::abs(cmp.rhs / kPi - 1.0) < 0.01);
    // a lone ball centred on the grid is the worst case for cell-centre sampling
    const auto single = make_family({HPoint{}}, {1.0}, 0.25);
    EnergyOptions centre;
    centre.xray_subsamples = 1;
    const double mid = xray_identity_check(single, 1.0, centre).rhs / kPi - 1.0;
    const double avg = xray_identity_check(single, 1.0).rhs / kPi - 1.0;
    CHECK(std::abs(avg) < 0.01);
    CHECK(std::abs(avg) < std::abs(mid));
    CHECK(cmp.lhs == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("X-ray identity on a single ball and under refinement") {
    const auto single = make_family({HPoint{}}, {1.0}, 0.25);
    const double r2 = xray_identity_check(single, 2.0).ratio();
    CHECK(r2 >= 0.9);
    CHECK(r2 <= 1.1);

    const auto nu = random_family(50, 0.25, 7);
    EnergyOptions o;
    const double coarse = xray_identity_check(nu, 1.5, o).ratio();
    const double fine = xray_identity_check(nu, 1.5, refined(o, nu)).ratio();
    CHECK(std::abs(coarse - 1.0) <= 0.1);
    CHECK(std::abs(fine - 1.0) <= std::abs(coarse - 1.0) + 0.005);
}

TEST_CASE("L_eps comparison") {
    const WeightedBallFamily empty;
    const auto z = xray_L3_comparison(empty, 1.5, kPi / 4);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
    CHECK_THROWS_AS(xray_L3_comparison(empty, 1.5, 0.0), std::invalid_argument);

    const auto single = make_family({HPoint{}}, {1.0}, 0.25);
    const double r = xray_L3_comparison(single, 1.5, kPi / 4).ratio();
    CHECK(r >= 1.0 / 8.0);
    CHECK(r <= 8.0);
    CHECK_THROWS_AS(xray_L3_comparison(single, 1.5, 0.0), std::invalid_argument);
}

TEST_CASE("translation invariance of the energy") {
    const auto nu = random_family(10, 0.25, 8);
    const auto same = translation_invariance_check(nu, HPoint{}, 1.5);
    CHECK(same.e1 == same.e2);
    CHECK(translation_invariance_check(nu, {0, 0, 0.3}, 2.0).relative_gap() < 0.02);
    CHECK(translation_invariance_check(nu, {0.2, 0.1, 0}, 1.5).relative_gap() < 0.02);
}

TEST_CASE("line samplers reproduce the quadratures") {
    const auto nu = random_family(4, 0.3, 9);
    EnergyOptions o;
    o.n_theta = 16;
    o.xray_subsamples = 1;  // the sampler emits cell-centre lines
    const GridSpec g = o.grid_for(nu);

    const auto hs = LineSampler::h_measure(nu, o.n_theta, g);
    CHECK(hs.mode() == LineSampler::Mode::HMeasure);
    double sum = 0.0;
    for (const auto& s : hs.samples()) sum += s.weight * std::pow(xray_transform_h(nu, s.line), 1.5);
    CHECK(sum == doctest::Approx(xray_identity_check(nu, 1.5, o).rhs).epsilon(1e-9));

    const double eps = kPi / 3, step = 0.5 * nu.delta() * nu.delta();
    const auto as = LineSampler::abc(nu, eps, step);
    CHECK(as.epsilon() == eps);
    sum = 0.0;
    for (const auto& s : as.samples()) {
        const double th = s.line.theta().radians();
        CHECK(th >= eps - 1e-12);
        CHECK(th <= kPi - eps + 1e-12);
        sum += s.weight * std::pow(xray_transform(nu, s.line), 1.5);
    }
    CHECK(sum == doctest::Approx(xray_L3_comparison(nu, 1.5, eps, o, step).rhs).epsilon(1e-9));

    std::ostringstream h_csv, a_csv;
    hs.write_csv(h_csv, nu);
    as.write_csv(a_csv, nu);
    CHECK(h_csv.str().rfind("theta,w_mu,w_s,xray_value\n", 0) == 0);
    CHECK(a_csv.str().rfind("a,b,c,xray_value\n", 0) == 0);
}
