// bnb.hpp - normal simplicial branch-and-bound over the reduced variable u.
//
// The feasible correspondences map to U = Q^T Omega, a compact set in n_u
// dimensions. U is enclosed by up to 2^n_u simplexes (one per orthant around the
// fuzziest correspondence), the concave part of the energy is bounded from below
// by its convex envelope on each simplex, and the simplex with the lowest bound
// is split at its longest edge until the epsilon certificate (or the depth
// limit, under the fast bounding scheme) is reached.
#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pomatch/energy_reg.hpp"
#include "pomatch/reduced_energy.hpp"

namespace pomatch {

struct Simplex {
    Eigen::MatrixXd vertices;   // n_u x (n_u + 1), one vertex per column
    Eigen::VectorXd ecValues;   // cached E_c at the vertices
    double lowerBound = 0.0;
    Eigen::VectorXd witness;    // feasible p achieving the bound problem
    int depth = 0;
};

enum class BoundScheme { Lp, Fast };

struct BnBConfig {
    BoundScheme scheme = BoundScheme::Fast;
    double epsilon = 1e-6;  // pruning tolerance; certifies optimality when the
                            // frontier empties before the depth rule fires
    // Stop once the lowest-bound simplex has been bisected maxDepth times and
    // report the incumbent as approximate (no certificate). The envelope gap
    // shrinks with the square of the simplex diameter, so certifying epsilon
    // from cold bounds is unreachable on all but tiny regions.
    int maxDepth = 15;
    int workers = 1;
    bool roundWitness = true;  // k-LAP rounding of fractional LP witnesses
    // Alternation polish of incumbent candidates (closed-form transform fit /
    // k-LAP reassignment until the energy stops dropping). Cheap, and only ever
    // lowers the incumbent; disable together with roundWitness for runs that
    // mirror the plain algorithm.
    bool polishWitness = true;
    int batchSize = 1;       // simplexes expanded per wave (1 = classic loop)
    long maxIterations = 0;  // 0 = unlimited; used for scheme comparisons
};

enum class Certificate { EpsOptimal, DepthTerminated, IterationCapped };

struct BnBResult {
    Eigen::VectorXd bestP;
    double bestE = 0.0;
    // Per-iteration (global lower bound, incumbent upper bound).
    std::vector<std::pair<double, double>> boundsHistory;
    long iterations = 0;
    long simplexesExpanded = 0;
    double wallMs = 0.0;
    Certificate certificate = Certificate::EpsOptimal;
};

// One enclosing simplex per orthant with positive supporting-plane distance,
// E_c cached at all vertices (after prepare_for_region ran on them). Throws
// input_error when every orthant is degenerate (U is the single point v0).
std::vector<Simplex> initial_region(ReducedEnergy& energy, int workers = 1);

// H = (-lambda0 + eps0) I with lambda0 the most negative eigenvalue of A over
// the given vertices (clamped at zero). Sets the energy's H and returns the
// scalar. Approach-one energies only.
double choose_H(const std::vector<Eigen::VectorXd>& vertices, ReducedEnergyReg& energy);

struct BoundResult {
    double bound = 0.0;
    Eigen::VectorXd witness;
    bool feasible = true;  // false: simplex disjoint from U, prunable
};

// Envelope bound via the linear program over (alpha, p).
BoundResult lower_bound_lp(const Simplex& s, const ReducedEnergy& energy);

// Envelope bound with the alpha >= 0 constraints dropped: a k-cardinality
// linear assignment, valid over all of Omega and never above the LP bound.
BoundResult lower_bound_fast(const Simplex& s, const ReducedEnergy& energy);

// Longest-edge bisection; ties broken by the lexicographically smallest vertex
// index pair. The shared midpoint E_c is evaluated once.
std::pair<Simplex, Simplex> bisect(const Simplex& s, const ReducedEnergy& energy);

BnBResult minimize(ReducedEnergy& energy, const BnBConfig& config);

}  // namespace pomatch
