#pragma once

// X-ray transforms of ball families along horizontal lines, in the Euclidean
// (X_E) and Koranyi (X_H) arc-length normalizations, and the quadratures that
// compare projection energies against integrals of X-ray transforms.

#include <cmath>
#include <iosfwd>
#include <optional>
#include <vector>

#include "heiskak/duality.hpp"
#include "heiskak/measures.hpp"

namespace heiskak {

/// Length of line cap ball; zero when the line misses or touches the ball.
double chord_length(const Line3& line, const Ball& ball);
double chord_length(const HorizontalLine& line, const Ball& ball);

/// X_E nu(line): integral of the density of nu against Euclidean arc length.
double xray_transform(const WeightedBallFamily& nu, const HorizontalLine& line);
/// X_H nu(line): the same integral against Koranyi arc length.
double xray_transform_h(const WeightedBallFamily& nu, const HorizontalLine& line);

/// X_H nu on every grid cell of V_theta^perp that a ball can reach: the mean
/// over subsamples x subsamples lines spread evenly inside the cell (1 gives
/// the cell centre). Same layout as pushforward_density, so the two can be
/// compared cell by cell.
PlaneDensity xray_density(const WeightedBallFamily& nu, const Angle& theta, const GridSpec& grid,
                          int subsamples = 1);

struct XrayComparison {
    double lhs = 0.0;
    double rhs = 0.0;

    double ratio() const { return rhs == 0.0 ? (lhs == 0.0 ? 1.0 : 0.0) : lhs / rhs; }
};

/// lhs: full-range projection energy (Monte Carlo). rhs: integral of
/// |X_H nu|^q over horizontal lines, parametrized by (theta, w) with
/// dtheta x area on V_theta^perp and the same theta nodes and grid.
XrayComparison xray_identity_check(const WeightedBallFamily& nu, double q,
                                   const EnergyOptions& opts = {});

/// lhs: projection energy over [eps, pi - eps]. rhs: integral of
/// |X_E nu(ell(a, b, c))|^q over |a| <= cot(eps) on a cubic (a, b, c) grid of
/// spacing abc_step (default delta^2 / 2).
XrayComparison xray_L3_comparison(const WeightedBallFamily& nu, double q, double eps,
                                  const EnergyOptions& opts = {},
                                  std::optional<double> abc_step = std::nullopt);

struct TranslationComparison {
    double e1 = 0.0;  // energy of nu
    double e2 = 0.0;  // energy of L_{p#} nu

    double relative_gap() const { return e1 == 0.0 ? 0.0 : std::abs(e1 - e2) / e1; }
};

TranslationComparison translation_invariance_check(const WeightedBallFamily& nu, const HPoint& p,
                                                   double q, const EnergyOptions& opts = {});

/// One refinement step: twice the theta nodes, half the cell, eight times
/// the samples per ball (so samples per cell double).
EnergyOptions refined(const EnergyOptions& opts, const WeightedBallFamily& nu);

/// Enumerates lines with quadrature weights, either for the (theta, w)
/// parametrization of the line measure or for the (a, b, c) grid on L_eps.
class LineSampler {
public:
    enum class Mode { HMeasure, Abc };

    struct Sample {
        HorizontalLine line;
        double weight;
    };

    /// Lines w * V_theta with theta on the periodic rule and w on the cells
    /// of `grid` that meet the projection of nu's support.
    static LineSampler h_measure(const WeightedBallFamily& nu, int n_theta, const GridSpec& grid);
    /// Lines ell(a, b, c) with |a| <= cot(eps) and (b, c) covering the lines
    /// that meet the support of nu; cell midpoints of a grid of spacing step.
    static LineSampler abc(const WeightedBallFamily& nu, double eps, double step);

    Mode mode() const { return mode_; }
    double epsilon() const { return eps_; }
    const std::vector<Sample>& samples() const { return samples_; }

    /// CSV rows `theta,w_mu,w_s,xray_value` (X_H) or `a,b,c,xray_value` (X_E).
    void write_csv(std::ostream& out, const WeightedBallFamily& nu) const;

private:
    Mode mode_ = Mode::HMeasure;
    double eps_ = 0.0;
    std::vector<Sample> samples_;
};

}  // namespace heiskak
