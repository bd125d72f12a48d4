#pragma once

// Point-line duality between H and R^3: every point of H determines a line
// in R^3 (a light ray parallel to the cone eta_2^2 = 2 eta_1 eta_3) and every
// point of R^3 determines a horizontal line in H, with incidences preserved.

#include <cstdint>
#include <optional>
#include <utility>

#include "heiskak/hgroup.hpp"

namespace heiskak {

/// Euclidean line in R^3. The direction is a unit vector.
struct Line3 {
    Vec3 anchor;
    Vec3 direction;

    Vec3 point_at(double u) const { return anchor + direction * u; }
    double distance_to(const Vec3& p) const;
};

/// Euclidean ball in H ~ R^3.
struct Ball {
    HPoint center;
    double radius = 0.0;
};

/// Unnormalized light-ray direction (1, -y, y^2/2) on the cone Gamma.
Vec3 light_ray(double y);

/// Unit normal of the tangent plane of Gamma along the ray light_ray(y).
Vec3 cone_normal(double y);

/// Horizontal line w * V_theta, stored canonically through theta and the
/// chart coordinates of w. Lines with theta != 0 also admit the (a, b, c)
/// parametrization s -> (a s + b, s, c + b s / 2).
class HorizontalLine {
public:
    static HorizontalLine from_abc(double a, double b, double c);
    static HorizontalLine from_theta_w(const Angle& theta, const PlaneCoord& w);

    const Angle& theta() const { return theta_; }
    const PlaneCoord& w() const { return w_; }
    HPoint w_point() const { return plane_chart_inverse(theta_, w_); }

    /// (a, b, c) with this line = ell(a, b, c); empty for theta == 0.
    std::optional<Vec3> abc() const;

    /// w * (lambda e^{i theta}, 0); lambda is Koranyi arc length.
    HPoint point_at(double lambda) const;
    /// Euclidean tangent (cos, sin, -mu/2) matching point_at's parameter.
    Vec3 tangent() const;
    Line3 as_line3() const;

    /// dH^1_H / dH^1_E along the line, i.e. 1 / |tangent()|.
    double koranyi_length_ratio() const;

    /// Image of the line under the left translation by g.
    HorizontalLine left_translated(const HPoint& g) const;
    /// Image under a homogeneous map (translation then dilation).
    HorizontalLine mapped(const HomogeneousMap& m) const;

private:
    HorizontalLine(const Angle& theta, const PlaneCoord& w) : theta_(theta), w_(w) {}

    Angle theta_;
    PlaneCoord w_;
};

/// ell*(x, y, t) = (0, x, t - xy/2) + R (1, -y, y^2/2).
Line3 dual_line(const HPoint& p_star);

/// ell(a, b, c) for a point p = (a, b, c) of R^3.
HorizontalLine dual_point_line(const Vec3& p);

/// Euclidean distance from a point of H to the horizontal line ell(p),
/// computed in the coordinates of H ~ R^3.
double distance_to_dual_line(const Vec3& p, const HPoint& q);

struct IncidencePair {
    bool p_on_dual_line = false;   // p in ell*(p_star)
    bool p_star_on_line = false;   // p_star in ell(p)
};

IncidencePair incidence_check(const Vec3& p, const HPoint& p_star, double tol);

/// x in ell*(B) intersected with B_E(0, 1). Evaluated through duality as
/// "ell(x) meets B".
bool dual_tube_membership(const Vec3& x, const Ball& ball);

struct TubeConstants {
    double c1 = 0.0;  // N_delta(ell*(p)) inside ell*(B_E(p, C1 delta))
    double c2 = 0.0;  // B_E(0,100) cap ell*(B_E(p, delta)) inside N_{C2 delta}(ell*(p))
};

TubeConstants tube_constant_probe(const HPoint& p_star, double delta, int n_samples,
                                  std::uint64_t seed);

/// Explicit radius R such that ell*(B_E(c, r)) cap {|eta_1| <= 1} lies in the
/// R-neighbourhood of the segment {ell*(c)(lambda) : |lambda| <= 1}.
double dual_tube_radius_bound(const HPoint& c, double r);

}  // namespace heiskak
