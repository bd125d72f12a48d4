#pragma once

// Broad/narrow analysis of the dual-tube weight function
// F(x) = sum_B a_B chi_{ell*(2B)}(x) on B_E(0, 1): cone caps, incidence sets,
// the narrow-plane search, trilinear wedge sums, plank covers per cap, cell
// measures and their rescaling.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "heiskak/duality.hpp"
#include "heiskak/measures.hpp"

namespace heiskak {

/// Directions u(y) = normalize(1, -y, y^2/2) with |y - y_center| <= y_halfwidth.
struct ConeCap {
    double y_center = 0.0;
    double y_halfwidth = 0.0;
    Vec3 direction;

    bool contains(double y) const;
};

/// ceil((hi - lo) / rho) caps of width rho starting at lo.
std::vector<ConeCap> cone_cap_cover(double rho, double y_lo = -1.0, double y_hi = 1.0);

/// Index of the cap that owns direction y (the first cap containing it;
/// values outside the covered range go to the nearest end cap).
std::size_t cap_of(const std::vector<ConeCap>& caps, double y);

struct IncidenceMember {
    std::size_t index = 0;  // ball index in the family
    double weight = 0.0;
    double y = 0.0;  // direction parameter of the ball centre
};

struct IncidenceSet {
    Vec3 x;
    std::vector<IncidenceMember> members;
    std::vector<double> by_cap;
    std::vector<double> cap_centers;  // y_center of each cap, aligned with by_cap

    double total_weight() const;
};

/// Incidence set assembled from explicit members (used for synthetic tests).
IncidenceSet make_incidence_set(const Vec3& x, std::vector<IncidenceMember> members,
                                const std::vector<ConeCap>& caps);

/// Balls B of nu with x in ell*(2B), i.e. ell(x) meets the doubled ball.
/// Requires |x| <= 1 and an unplaced family.
IncidenceSet incidence_set(const Vec3& x, const WeightedBallFamily& nu,
                           const std::vector<ConeCap>& caps);

struct Narrow {
    Vec3 normal;             // unit normal of the witness plane
    double captured = 0.0;   // member weight within rho^2 of the plane
};
struct Broad {
    double best_captured = 0.0;  // largest weight any plane captures
};
using Classification = std::variant<Narrow, Broad>;

inline bool is_narrow(const Classification& c) { return std::holds_alternative<Narrow>(c); }

/// Narrow iff some 2-plane through 0 has half the member weight within
/// distance rho^2 of it. The search is exact: the best plane normal is found
/// among the vertices of the arrangement of circles n . u_i = +-rho^2, one
/// point on each such circle, the planes spanned by pairs of occupied cap
/// directions and the tangent planes of the cone at occupied caps.
Classification classify_broad_narrow(const IncidenceSet& s, double rho);

/// Weight captured by the plane with unit normal n: sum of w_i with
/// |n . u_i| <= band (plus 1e-12 for members on the boundary).
double captured_weight(const IncidenceSet& s, const Vec3& normal, double band);

enum class OracleVerdict { Narrow, Broad, Undetermined };

/// Brute-force search over plane normals on a k x k grid per cube face,
/// refined by bisection. A grid normal capturing half the weight proves
/// Narrow; a cell of covering radius h whose centre captures less than half
/// even with band rho^2 + h is discarded. Broad once every cell is discarded;
/// Undetermined if cells remain at max_depth.
OracleVerdict sphere_grid_oracle(const IncidenceSet& s, double rho, int k = 32,
                                 int max_depth = 12);

/// Sum over ordered triples of members of w_i w_j w_k |det[u_i; u_j; u_k]|.
double trilinear_wedge_sum(const IncidenceSet& s);

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;

    double ratio() const {
        if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return lhs / rhs;
    }
};

/// lhs = total weight, rhs = rho^-4 wedge^(1/3). Throws on narrow sets.
BoundCheck broad_bound_check(const IncidenceSet& s, double rho);
/// lhs = total weight, rhs = (sum over caps of weight^q)^(1/q). Throws on broad sets.
BoundCheck narrow_decomposition_check(const IncidenceSet& s, double rho, double q = 1.5);

/// Box with orthonormal axes: e1 along the cap direction (long side), e2 the
/// tangent of the cone across the cap, e3 the cone normal.
struct Plank {
    std::size_t cap = 0;
    Vec3 center;
    Vec3 e1, e2, e3;
    double h1 = 0.0, h2 = 0.0, h3 = 0.0;  // half extents

    bool contains(const Vec3& p, double margin = 0.0) const;
    /// ell*(B_E(c, r)) cap B_E(0, 1) inside the plank, certified through
    /// dual_tube_radius_bound.
    bool contains_tube(const HPoint& c, double r) const;
};

struct PlankAssignment {
    Plank plank;
    std::vector<std::size_t> members;
};

/// Plank cross-section widths for a cap: the spread of the unit-length dual
/// segments with directions in the cap plus the dual-tube thickness of a ball
/// of radius r centred in B_H(0, 1).
struct PlankWidths {
    double w2 = 0.0;
    double w3 = 0.0;
};
PlankWidths plank_widths(const ConeCap& cap, double r);

/// Planks parallel to the cap tiling B_E(0, 2): each cross-section axis is
/// covered by intervals of width 2W at spacing W (every point lies in at most
/// four planks). Ball B with direction in the cap goes to every plank that
/// contains ell*(2B) cap B_E(0, 1); only non-empty planks are returned.
std::vector<PlankAssignment> plank_cover_and_assign(const WeightedBallFamily& nu,
                                                    const std::vector<ConeCap>& caps,
                                                    std::size_t cap_index);

struct CellMeasure {
    WeightedBallFamily family;  // doubled balls
    std::size_t representative = 0;  // ball index in the parent family
    HPoint center;                   // (z_T, t_T)
    double koranyi_radius = 0.0;     // max d_H from center to member centres
};

/// nu restricted to the plank's balls, radii doubled, with a representative
/// ball chosen as the Koranyi 1-centre of the member centres.
CellMeasure cell_measure(const WeightedBallFamily& nu, const PlankAssignment& assignment);

/// D_{1/rho#} L_{center^-1 #} nu_T at scale delta / rho.
WeightedBallFamily rescale_cell(const CellMeasure& cell, double rho);

struct DecompositionOptions {
    std::optional<double> spacing;  // default delta^2 / 2
    double q = 1.5;
    double y_lo = -1.0;
    double y_hi = 1.0;
    bool keep_points = false;
};

struct PointRecord {
    Vec3 x;
    bool broad = false;
    double total_weight = 0.0;
    double wedge_sum = 0.0;
};

struct DecompositionReport {
    double rho = 0.0;
    double q = 0.0;
    double spacing = 0.0;
    std::size_t n_points = 0;
    std::size_t n_broad = 0;
    std::size_t n_narrow = 0;
    double total = 0.0;         // int F^q
    double broad_part = 0.0;    // int over broad points
    double narrow_part = 0.0;   // int over narrow points
    double wedge_integral = 0.0;  // int over broad points of wedge^(q/3)
    double tube_mass = 0.0;       // sum_B a_B |ell*(2B) cap B_E(0,1)|
    double cap_sum = 0.0;         // sum_tau int F_tau^q
    double plank_sum = 0.0;       // sum_tau sum_T int F_T^q
    double broad_constant = 0.0;  // max pointwise broad ratio
    double narrow_constant = 0.0; // max pointwise narrow ratio
    double kakeya_constant = 0.0; // wedge_integral / tube_mass^q
    std::size_t n_planks = 0;
    std::size_t max_plank_multiplicity = 0;
    std::vector<PointRecord> points;

    /// broad_part <= 10^q rho^(-4q) wedge_integral
    bool broad_gate() const;
    /// narrow_part <= 4^q 8^(q-1) plank_sum
    bool narrow_gate() const;
};

DecompositionReport energy_decomposition_check(const WeightedBallFamily& nu, double rho,
                                               const DecompositionOptions& opts = {});

}  // namespace heiskak
