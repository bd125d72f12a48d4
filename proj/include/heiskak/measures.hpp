#pragma once

// Discrete measures on H realized as weighted families of small Euclidean
// balls, their Frostman constants, and Monte Carlo pushforwards under the
// vertical projections together with the L^q energies integrated over theta.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heiskak/duality.hpp"
#include "heiskak/hgroup.hpp"

namespace heiskak {

/// Raised by make_family when two balls intersect.
class OverlapError : public std::invalid_argument {
public:
    OverlapError(std::size_t first, std::size_t second);
    std::size_t first() const { return first_; }
    std::size_t second() const { return second_; }

private:
    std::size_t first_;
    std::size_t second_;
};

/// A measure nu = sum_B a_B * (uniform probability on B) over Euclidean balls B
/// of a common radius. Base families (from make_family) have disjoint balls of
/// radius delta^2 centred in B_H(0, 1) and total mass 1. Derived families
/// (cell measures, rescalings, translates) relax those invariants and carry a
/// HomogeneousMap that places the source balls in H.
class WeightedBallFamily {
public:
    WeightedBallFamily() = default;

    double delta() const { return delta_; }
    /// Euclidean radius of the source balls.
    double radius() const { return radius_; }
    std::size_t size() const { return source_centers_.size(); }
    bool empty() const { return source_centers_.empty(); }
    bool is_base() const { return base_; }

    const std::vector<HPoint>& source_centers() const { return source_centers_; }
    const std::vector<double>& weights() const { return weights_; }
    const HomogeneousMap& placement() const { return placement_; }

    HPoint center(std::size_t i) const { return placement_.apply(source_centers_[i]); }
    std::vector<HPoint> centers() const;
    double total_mass() const;

    /// L_{g#} nu: pushforward under left translation by g.
    WeightedBallFamily left_translated(const HPoint& g) const;
    /// D_{lambda#} nu, with the scale parameter delta multiplied by lambda.
    WeightedBallFamily dilated(double lambda) const;
    /// Sub-measure on the given balls, radii multiplied by radius_factor.
    WeightedBallFamily subfamily(const std::vector<std::size_t>& indices,
                                 double radius_factor = 1.0) const;

    /// Unchecked constructor for derived measures.
    static WeightedBallFamily derived(std::vector<HPoint> source_centers,
                                      std::vector<double> weights, double delta, double radius,
                                      HomogeneousMap placement);

private:
    friend WeightedBallFamily make_family(std::vector<HPoint>, std::vector<double>, double);

    double delta_ = 0.0;
    double radius_ = 0.0;
    std::vector<HPoint> source_centers_;
    std::vector<double> weights_;
    HomogeneousMap placement_{};
    bool base_ = false;
};

/// Validated, normalized family of disjoint Euclidean delta^2-balls.
/// Throws OverlapError for intersecting balls and std::invalid_argument for
/// non-positive weights, mismatched lengths or centres outside B_H(0, 1).
WeightedBallFamily make_family(std::vector<HPoint> centers, std::vector<double> weights,
                               double delta);

/// Plain-text serialization: a `delta=<value>` header, then `x y t weight`
/// per ball. Lines starting with '#' are comments.
void write_family(std::ostream& out, const WeightedBallFamily& family);
WeightedBallFamily read_family(std::istream& in);
void save_family(const std::string& path, const WeightedBallFamily& family);
WeightedBallFamily load_family(const std::string& path);

struct FrostmanReport {
    double t_exponent = 0.0;
    double delta_floor = 0.0;
    double value = 0.0;
    HPoint argmax_center{};
    double argmax_radius = 0.0;
};

/// sup of nu(B_H(x, r)) / r^t over x in the ball centres and radii
/// r = r_floor * 2^k <= 2. A ball contributes its full weight when its centre
/// lies in B_H(x, r).
FrostmanReport frostman_const(const WeightedBallFamily& nu, double t, double r_floor);

/// Monte Carlo samples of a family: n_per_ball uniform points per ball
/// (rejection from the bounding cube, one seeded stream per ball), already
/// mapped through the family's placement.
struct SampleCloud {
    std::vector<HPoint> points;
    std::vector<double> sample_mass;  // per ball: weight / n_per_ball
    int n_per_ball = 0;
    std::uint64_t seed = 0;
};

SampleCloud sample_family(const WeightedBallFamily& nu, int n_per_ball, std::uint64_t seed);

/// Cell shape for gridding V_theta^perp in chart coordinates (mu, s). Cells
/// are anchored at the chart origin: cell (i, j) = [i cmu, (i+1) cmu) x [j cs, (j+1) cs).
struct GridSpec {
    double cell_mu = 0.0;
    double cell_s = 0.0;

    static GridSpec square(double cell) { return {cell, cell}; }
};

/// Gridded density of a pushforward measure on V_theta^perp.
struct PlaneDensity {
    Angle theta;
    GridSpec cell;
    long i0 = 0;  // chart index of column 0
    long j0 = 0;  // chart index of row 0
    long n_mu = 0;
    long n_s = 0;
    std::vector<double> density;  // row-major in (i_mu, j_s)

    double cell_area() const { return cell.cell_mu * cell.cell_s; }
    double at(long i, long j) const { return density[static_cast<std::size_t>(i * n_s + j)]; }
    double total_mass() const;
    void write_csv(std::ostream& out) const;
};

PlaneDensity pushforward_density(const SampleCloud& cloud, const Angle& theta,
                                 const GridSpec& cell);
PlaneDensity pushforward_density(const WeightedBallFamily& nu, const Angle& theta, double cell,
                                 int n_mc, std::uint64_t seed = 1);

/// Riemann sum of density^q over the grid.
double lq_norm(const PlaneDensity& d, double q);

struct EnergyOptions {
    int n_theta = 64;
    std::optional<double> cell;  // default delta^2 / 2
    std::optional<GridSpec> grid;  // overrides `cell` when set
    int n_mc = 256;
    std::uint64_t seed = 1;
    // X-ray side: each grid cell takes the mean of X_H over an m x m set of
    // sub-cell lines, matching the cell averages of the projected density
    int xray_subsamples = 4;

    GridSpec grid_for(const WeightedBallFamily& nu) const;
};

/// Theta nodes and weights used by sector_energy: the periodic rectangle rule
/// when [lo, hi] spans the whole period, the trapezoid rule otherwise.
struct ThetaRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
ThetaRule theta_rule(double theta_lo, double theta_hi, int n_theta);

/// int_lo^hi || P_{V_theta^perp #} nu ||_{L^q}^q d theta, one value per q.
std::vector<double> sector_energies(const WeightedBallFamily& nu, const std::vector<double>& qs,
                                    double theta_lo, double theta_hi, const EnergyOptions& opts);
double sector_energy(const WeightedBallFamily& nu, double q, double theta_lo, double theta_hi,
                     const EnergyOptions& opts = {});

}  // namespace heiskak
