#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "heiskak/generators.hpp"
#include "heiskak/incidence.hpp"
#include "heiskak/rng.hpp"

using namespace heiskak;

namespace {

// unit direction (1, -y, y^2/2) written out by hand
Vec3 ray(double y) {
    const Vec3 v{1.0, -y, 0.5 * y * y};
    return v * (1.0 / v.norm());
}

double det3(const Vec3& a, const Vec3& b, const Vec3& c) {
    return a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x);
}

// Euclidean distance from c to the horizontal line ell(x) = {q : x in ell*(q)},
// which is (x2, 0, x3) + y (x1, 1, x2 / 2)
double dist_to_primal_line(const Vec3& x, const HPoint& c) {
    const Vec3 a{x.y, 0.0, x.z};
    const Vec3 d{x.x, 1.0, 0.5 * x.y};
    const Vec3 diff = as_vec(c) - a;
    const double u = diff.dot(d) / d.dot(d);
    return (diff - d * u).norm();
}

Vec3 dual_point(const HPoint& q, double eta1) {
    return {eta1, q.x - q.y * eta1, q.t - 0.5 * q.x * q.y + 0.5 * q.y * q.y * eta1};
}

IncidenceSet synthetic(const std::vector<double>& ys, const std::vector<double>& ws, double rho) {
    std::vector<IncidenceMember> m;
    for (std::size_t i = 0; i < ys.size(); ++i) m.push_back({i, ws[i], ys[i]});
    return make_incidence_set({0, 0, 0}, std::move(m), cone_cap_cover(rho));
}

IncidenceSet random_set(Rng& rng, int n, double rho) {
    std::vector<double> ys, ws;
    for (int i = 0; i < n; ++i) {
        ys.push_back(rng.uniform(-1.0, 1.0));
        ws.push_back(rng.uniform(0.1, 1.0));
    }
    return synthetic(ys, ws, rho);
}

}  // namespace

TEST_CASE("cone caps") {
    const auto caps = cone_cap_cover(0.25);
    CHECK(caps.size() == 8);
    CHECK(cone_cap_cover(0.3).size() == 7);
    CHECK_THROWS_AS(cone_cap_cover(0.0), std::invalid_argument);
    Rng rng(1);
    for (int i = 0; i < 5000; ++i) {
        const double y = rng.uniform(-1.0, 1.0);
        int covering = 0;
        for (const auto& c : caps) covering += c.contains(y) ? 1 : 0;
        CHECK(covering >= 1);
        CHECK(covering <= 2);
        const auto& own = caps[cap_of(caps, y)];
        CHECK(own.contains(y));
        // angle between the direction and its cap direction is O(rho)
        CHECK(std::acos(std::min(1.0, ray(y).dot(own.direction))) <= 0.25);
    }
    for (const auto& c : caps) {
        const Vec3 u = c.direction;
        CHECK(std::abs(u.y * u.y - 2.0 * u.x * u.z) <= 1e-12);
        CHECK(std::abs(u.norm() - 1.0) <= 1e-12);
    }
    CHECK(cap_of(caps, -7.0) == 0);
    CHECK(cap_of(caps, 7.0) == caps.size() - 1);
}

TEST_CASE("incidence sets agree with the primal-line oracle") {
    const auto nu = random_family(40, 0.2, 2);
    const auto caps = cone_cap_cover(0.25);
    const double r2 = 2.0 * nu.radius();
    Rng rng(3);

    // far from every tube
    const auto far = incidence_set({0.0, 0.99, 0.0}, make_family({HPoint{0, 0, 0.2}}, {1.0}, 0.1), caps);
    CHECK(far.members.empty());
    CHECK(far.total_weight() == 0.0);

    int hits = 0;
    for (int k = 0; k < 4000; ++k) {
        Vec3 x;
        if (k % 2 == 0) {
            const std::size_t i = rng.below(nu.size());
            x = dual_point(as_hpoint(as_vec(nu.center(i)) + rng.in_unit_ball() * (3.0 * nu.radius())),
                           rng.uniform(-0.5, 0.5));
            if (x.dot(x) > 1.0) continue;
        } else {
            x = rng.in_unit_ball();
        }
        const auto s = incidence_set(x, nu, caps);
        std::vector<std::size_t> expect;
        for (std::size_t i = 0; i < nu.size(); ++i) {
            if (dist_to_primal_line(x, nu.center(i)) <= r2) expect.push_back(i);
        }
        std::vector<std::size_t> got;
        double w = 0.0;
        for (const auto& m : s.members) {
            got.push_back(m.index);
            w += m.weight;
            CHECK(m.y == nu.center(m.index).y);
        }
        std::sort(got.begin(), got.end());
        CHECK(got == expect);
        CHECK(s.total_weight() == doctest::Approx(w));
        CHECK(std::accumulate(s.by_cap.begin(), s.by_cap.end(), 0.0) == doctest::Approx(w));
        hits += got.empty() ? 0 : 1;
    }
    CHECK(hits > 500);

    CHECK_THROWS_AS(incidence_set({1.0, 1.0, 0.0}, nu, caps), std::invalid_argument);
    CHECK_THROWS_AS(incidence_set({0, 0, 0}, nu.dilated(0.5), caps), std::invalid_argument);
}

TEST_CASE("classification examples") {
    const double rho = 0.1;
    CHECK(is_narrow(classify_broad_narrow(synthetic({}, {}, rho), rho)));
    CHECK(is_narrow(classify_broad_narrow(synthetic({0.3, 0.31, 0.32}, {1, 1, 1}, rho), rho)));
    // two of three cone rays span a plane holding two thirds of the weight
    CHECK(is_narrow(classify_broad_narrow(synthetic({-1, 0, 1}, {1, 1, 1}, rho), rho)));
    // a plane meets the cone in at most two rays, so five spread directions
    // of equal weight leave at most two fifths near any plane
    const auto five = classify_broad_narrow(synthetic({-1, -0.5, 0, 0.5, 1}, {1, 1, 1, 1, 1}, rho), rho);
    REQUIRE_FALSE(is_narrow(five));
    CHECK(std::get<Broad>(five).best_captured < 0.5 * 5);

    // a Narrow witness really captures half the weight
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto s = random_set(rng, 2 + static_cast<int>(rng.below(8)), rho);
        const auto c = classify_broad_narrow(s, rho);
        if (const auto* n = std::get_if<Narrow>(&c)) {
            CHECK(std::abs(n->normal.norm() - 1.0) <= 1e-9);
            CHECK(captured_weight(s, n->normal, rho * rho) >= 0.5 * s.total_weight() * (1 - 1e-12));
        }
    }
}

TEST_CASE("classification agrees with the sphere-grid oracle") {
    Rng rng(6);
    int decided = 0, broad = 0;
    for (int i = 0; i < 100; ++i) {
        const double rho = rng.uniform(0.05, 0.3);
        const auto s = random_set(rng, 3 + static_cast<int>(rng.below(10)), rho);
        const auto c = classify_broad_narrow(s, rho);
        const auto v = sphere_grid_oracle(s, rho);
        if (v == OracleVerdict::Undetermined) continue;
        ++decided;
        broad += v == OracleVerdict::Broad ? 1 : 0;
        CHECK(is_narrow(c) == (v == OracleVerdict::Narrow));
    }
    CHECK(decided >= 90);
    CHECK(broad > 0);
}

TEST_CASE("trilinear wedge sums") {
    // det[u(0); u(1); u(-1)] = -1 / (3/2)^2, six orderings
    const auto s = synthetic({0, 1, -1}, {1, 1, 1}, 0.25);
    CHECK(trilinear_wedge_sum(s) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    CHECK(trilinear_wedge_sum(synthetic({0.2, 0.2, 0.5}, {1, 2, 3}, 0.25)) == doctest::Approx(0.0));

    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> ys, ws;
        for (int i = 0; i < 6; ++i) {
            ys.push_back(rng.uniform(-1, 1));
            ws.push_back(rng.uniform(0.1, 1));
        }
        double oracle = 0.0;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                for (int l = 0; l < 6; ++l)
                    oracle += ws[i] * ws[j] * ws[l] * std::abs(det3(ray(ys[i]), ray(ys[j]), ray(ys[l])));
        const double w = trilinear_wedge_sum(synthetic(ys, ws, 0.25));
        CHECK(w == doctest::Approx(oracle).epsilon(1e-10));

        // permutation invariance
        std::vector<std::size_t> perm(6);
        std::iota(perm.begin(), perm.end(), 0);
        std::reverse(perm.begin(), perm.end());
        std::vector<double> ys2, ws2;
        for (auto p : perm) {
            ys2.push_back(ys[p]);
            ws2.push_back(ws[p]);
        }
        CHECK(trilinear_wedge_sum(synthetic(ys2, ws2, 0.25)) == doctest::Approx(w).epsilon(1e-12));

        // homogeneity of degree three in the weights
        for (double lam : {0.5, 2.0, 8.0}) {
            std::vector<double> ws3 = ws;
            for (double& x : ws3) x *= lam;
            CHECK(trilinear_wedge_sum(synthetic(ys, ws3, 0.25)) == lam * lam * lam * w);
        }
    }
}

TEST_CASE("broad and narrow pointwise bounds") {
    const double rho = 0.1;
    const std::vector<double> ys{-1, -0.5, 0, 0.5, 1};
    const auto s = synthetic(ys, {1, 1, 1, 1, 1}, rho);
    const double r1 = broad_bound_check(s, rho).ratio();
    CHECK(r1 > 0.0);
    CHECK(r1 <= 10.0);
    const auto s2 = synthetic(ys, {4, 4, 4, 4, 4}, rho);
    CHECK(broad_bound_check(s2, rho).ratio() == doctest::Approx(r1).epsilon(1e-12));
    CHECK_THROWS_AS(narrow_decomposition_check(s, rho), std::invalid_argument);

    const auto one = synthetic({0.33}, {2.0}, rho);
    CHECK(narrow_decomposition_check(one, rho).ratio() == doctest::Approx(1.0));
    CHECK_THROWS_AS(broad_bound_check(one, rho), std::invalid_argument);
    const auto two = synthetic({0.33, 0.73}, {2.0, 2.0}, rho);
    CHECK(narrow_decomposition_check(two, rho, 1.5).ratio() == doctest::Approx(std::cbrt(2.0)));
    CHECK(narrow_decomposition_check(synthetic({}, {}, rho), rho).ratio() == 0.0);
}

TEST_CASE("plank cover and assignment") {
    const auto nu = random_family(60, 0.2, 8);
    const double rho = 0.25;
    const auto caps = cone_cap_cover(rho);
    Rng rng(9);
    for (std::size_t k = 0; k < caps.size(); ++k) {
        const auto planks = plank_cover_and_assign(nu, caps, k);
        std::vector<int> times(nu.size(), 0);
        for (const auto& pa : planks) {
            CHECK(pa.plank.cap == k);
            CHECK_FALSE(pa.members.empty());
            CHECK(std::abs(pa.plank.e1.dot(pa.plank.e2)) <= 1e-12);
            CHECK(std::abs(pa.plank.e1.dot(pa.plank.e3)) <= 1e-12);
            for (std::size_t i : pa.members) {
                ++times[i];
                CHECK(cap_of(caps, nu.center(i).y) == k);
                CHECK(pa.plank.contains_tube(nu.center(i), 2.0 * nu.radius()));
                // sampled points of the doubled dual tube lie in the plank
                for (int j = 0; j < 50; ++j) {
                    const HPoint q = as_hpoint(as_vec(nu.center(i)) + rng.in_unit_ball() * (2.0 * nu.radius()));
                    const Vec3 x = dual_point(q, rng.uniform(-1, 1));
                    if (x.dot(x) <= 1.0) CHECK(pa.plank.contains(x));
                }
            }
        }
        for (std::size_t i = 0; i < nu.size(); ++i) {
            if (cap_of(caps, nu.center(i).y) == k) {
                CHECK(times[i] >= 1);
            } else {
                CHECK(times[i] == 0);
            }
        }
        // multiplicity of the plank cover among returned planks
        for (int j = 0; j < 200 && !planks.empty(); ++j) {
            const Vec3 x = rng.in_unit_ball();
            int in = 0;
            for (const auto& pa : planks) in += pa.plank.contains(x) ? 1 : 0;
            CHECK(in <= 4);
        }
    }
    CHECK_THROWS_AS(plank_cover_and_assign(nu, caps, caps.size()), std::out_of_range);
}

TEST_CASE("cell measures and rescaling") {
    const auto nu = random_family(60, 0.2, 10);
    const double rho = 0.25;
    const auto caps = cone_cap_cover(rho);
    const double base = frostman_const(nu, 3.5, nu.delta()).value;
    int cells = 0;
    for (std::size_t k = 0; k < caps.size(); ++k) {
        for (const auto& pa : plank_cover_and_assign(nu, caps, k)) {
            const auto cell = cell_measure(nu, pa);
            ++cells;
            CHECK(cell.family.size() == pa.members.size());
            CHECK(cell.family.radius() == doctest::Approx(2.0 * nu.radius()));
            CHECK(std::find(pa.members.begin(), pa.members.end(), cell.representative) != pa.members.end());
            CHECK(cell.center == nu.center(cell.representative));
            // the 1-centre minimizes the largest distance
            double best = 1e300;
            for (std::size_t i : pa.members) {
                double far = 0.0;
                for (std::size_t j : pa.members) far = std::max(far, koranyi_dist(nu.center(i), nu.center(j)));
                best = std::min(best, far);
            }
            CHECK(cell.koranyi_radius == doctest::Approx(best));

            const auto up = rescale_cell(cell, rho);
            CHECK(up.delta() == doctest::Approx(nu.delta() / rho));
            for (std::size_t i = 0; i < up.size(); ++i) {
                const HPoint expect = dilate(1.0 / rho, group_mul(group_inv(cell.center), cell.family.center(i)));
                CHECK(euclidean_dist(up.center(i), expect) <= 1e-10);
                const HPoint back = group_mul(cell.center, dilate(rho, up.center(i)));
                CHECK(euclidean_dist(back, cell.family.center(i)) <= 1e-10);
                CHECK(koranyi_norm(up.center(i)) <= cell.koranyi_radius / rho + 1e-9);
            }
            const double fr = frostman_const(up, 3.5, std::min(1.0, nu.delta() / rho)).value;
            CHECK(fr <= 4.0 * std::pow(rho, 3.5) * base);
            CHECK_THROWS_AS(rescale_cell(cell, 1.0), std::invalid_argument);
            CHECK_THROWS_AS(rescale_cell(cell, 0.0), std::invalid_argument);
        }
    }
    CHECK(cells > 0);
}

TEST_CASE("energy decomposition") {
    DecompositionOptions o;
    o.spacing = 0.02;
    const auto single = make_family({HPoint{}}, {1.0}, 0.2);
    const auto rs = energy_decomposition_check(single, 0.125, o);
    CHECK(rs.n_broad == 0);
    CHECK(rs.n_broad + rs.n_narrow == rs.n_points);
    CHECK(rs.broad_part == 0.0);
    CHECK(rs.narrow_gate());

    o.keep_points = true;
    const auto rc = energy_decomposition_check(three_cluster_family(), 0.125, o);
    CHECK(rc.n_broad > 0);
    CHECK(rc.n_broad + rc.n_narrow == rc.n_points);
    CHECK(rc.points.size() == rc.n_points);
    CHECK(rc.total == doctest::Approx(rc.broad_part + rc.narrow_part).epsilon(1e-12));
    CHECK(rc.broad_gate());
    CHECK(rc.narrow_gate());
    CHECK(rc.max_plank_multiplicity <= 4);
    std::size_t b = 0;
    for (const auto& p : rc.points) {
        CHECK(p.x.dot(p.x) <= 1.0 + 1e-12);
        b += p.broad ? 1 : 0;
        if (p.broad) CHECK(p.wedge_sum > 0.0);
    }
    CHECK(b == rc.n_broad);
}
