#pragma once

// Test measures of prescribed Koranyi dimension: self-similar Cantor families,
// a uniform packing of the unit ball, and samples of a vertical plane.

#include <cstdint>
#include <vector>

#include "heiskak/measures.hpp"

namespace heiskak {

/// Iterated function system {p -> D_scale(q_i * D_r(p))}: N similarities of
/// ratio r followed by one outer dilation that keeps the attractor inside
/// B_H(0, 1).
struct IFSSpec {
    double r = 0.5;
    std::vector<HPoint> translates;
    int depth = 1;
    double outer_scale = 1.0;

    /// ln N / ln(1/r).
    double similarity_dimension() const;
    /// Koranyi distance between the closest pair of translates.
    double separation() const;
};

/// Validates r in (0, 1), depth >= 0, a non-empty translate list whose
/// images q_i * D_r(B_H(0, 1)) are separated (d_H(q_i, q_j) >= 2r) and a
/// similarity dimension <= 4. Throws std::invalid_argument naming the
/// colliding pair.
IFSSpec make_ifs(double r, std::vector<HPoint> translates, int depth);

/// N translates by greedy farthest-point insertion among seeded candidates in
/// B_H(0, R), with R grown from 1 until the separation 2r is met. The outer
/// scale maps the attractor into B_H(0, 1).
IFSSpec greedy_ifs(double r, int n, int depth, std::uint64_t seed, int n_candidates = 4000);

/// Scale parameter of the depth-k family: half the outer_scale * r^depth
/// separation radius, small enough for disjoint Euclidean delta^2-balls.
double cantor_delta(const IFSSpec& spec);

/// Equal-weight family at the depth-fold compositions
/// D_s(q_{i1} * D_r(q_{i2} * ... D_r(q_{ik}))).
WeightedBallFamily heisenberg_cantor(const IFSSpec& spec);

/// n equal-weight balls centred on V_0^perp = {x = 0} inside B_H(0, 1), drawn
/// by seeded rejection sampling with Euclidean disjointness.
WeightedBallFamily vertical_plane_sample(int n, double delta, std::uint64_t seed = 1);

/// Ball count used for the vertical-plane control at scale delta: the plane
/// is three-dimensional for d_H, so n grows like delta^-3.
int vertical_plane_count(double delta);

/// Equal-weight packing of B_H(0, 1) by disjoint Koranyi delta-balls on the
/// lattice (2 delta Z)^2 x 2 delta^2 Z.
WeightedBallFamily uniform_solid(double delta);

/// n balls with centres uniform in B_H(0, 0.9) (rejection keeps them
/// disjoint) and weights uniform in [0.5, 1.5] before normalization.
WeightedBallFamily random_family(int n, double delta, std::uint64_t seed);

/// Equal-weight balls on horizontal lines ell(a, b, c): one ball at each
/// parameter s in `ys` (the ball's direction parameter) on every line.
WeightedBallFamily direction_clusters(double delta, const std::vector<double>& ys,
                                      const std::vector<Vec3>& lines);

/// Three clusters of three directions each (y near -0.5, 0 and 0.5) on six
/// parallel lines. No plane holds half of nine spread directions, so points
/// where the dual tubes cross are broad.
WeightedBallFamily three_cluster_family(double delta = 0.2);

}  // namespace heiskak
