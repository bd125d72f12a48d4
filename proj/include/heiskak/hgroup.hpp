#pragma once

// Heisenberg group H = C x R with the polarized group law, the Koranyi
// norm/metric, homogeneous dilations and the vertical projections onto the
// planes V_theta^perp.

#include <cmath>
#include <numbers>
#include <utility>

namespace heiskak {

/// A point (x, y, t) of H, z = x + iy. Every constructor path goes through
/// finite coordinates; use HPoint::make for checked construction.
struct HPoint {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;

    static HPoint make(double x, double y, double t);

    bool operator==(const HPoint&) const = default;
};

/// Euclidean vector in R^3. Used for the dual space of lines and for
/// Euclidean geometry on H ~ R^3.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const;

    bool operator==(const Vec3&) const = default;
};

inline Vec3 as_vec(const HPoint& p) { return {p.x, p.y, p.t}; }
inline HPoint as_hpoint(const Vec3& v) { return {v.x, v.y, v.z}; }

double euclidean_dist(const HPoint& p, const HPoint& q);

/// Angle in [0, pi), indexing the horizontal subgroup V_theta.
class Angle {
public:
    Angle() = default;
    explicit Angle(double radians);

    double radians() const { return theta_; }
    double cos() const { return cos_; }
    double sin() const { return sin_; }

private:
    double theta_ = 0.0;
    double cos_ = 1.0;
    double sin_ = 0.0;
};

HPoint group_mul(const HPoint& p, const HPoint& q);
HPoint group_inv(const HPoint& p);

double koranyi_norm(const HPoint& p);
double koranyi_dist(const HPoint& p, const HPoint& q);

/// D_lambda(x, y, t) = (lambda x, lambda y, lambda^2 t); throws for lambda <= 0.
HPoint dilate(double lambda, const HPoint& p);

/// p = w * v with w in V_theta^perp and v in V_theta.
struct VerticalSplit {
    HPoint w;  // vertical part, P_{V_theta^perp}(p)
    HPoint v;  // horizontal part, P_{V_theta}(p)
};

VerticalSplit vertical_decompose(const Angle& theta, const HPoint& p);

/// Shortcut for the vertical factor in chart coordinates, without building w.
/// Returns (mu, s) with P_{V_theta^perp}(p) = (mu i e^{i theta}, s).
std::pair<double, double> project_to_chart(const Angle& theta, const HPoint& p);

/// Chart coordinates on V_theta^perp: w = (mu * i e^{i theta}, s).
struct PlaneCoord {
    double mu = 0.0;
    double s = 0.0;
};

/// Throws std::invalid_argument if w is not in V_theta^perp (tolerance 1e-9).
PlaneCoord plane_chart(const Angle& theta, const HPoint& w);
HPoint plane_chart_inverse(const Angle& theta, const PlaneCoord& c);

/// Composite map p -> D_scale(shift * p). Closed under composition; used to
/// carry left translations and dilations of whole measures lazily.
struct HomogeneousMap {
    HPoint shift{};
    double scale = 1.0;

    HPoint apply(const HPoint& p) const;
    HPoint apply_inverse(const HPoint& p) const;
    /// (this o inner)(p) = this(inner(p))
    HomogeneousMap after(const HomogeneousMap& inner) const;
    bool is_identity() const;

    static HomogeneousMap translation(const HPoint& g) { return {g, 1.0}; }
    static HomogeneousMap dilation(double lambda);
};

}  // namespace heiskak
