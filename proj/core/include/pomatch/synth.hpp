// synth.hpp - synthetic matching experiments: prototype shapes, nonrigid
// deformation, outlier injection, occlusion along a traveling-salesman tour,
// ground-truth bookkeeping and batch trials.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pomatch/matcher.hpp"
#include "pomatch/point_set.hpp"

namespace pomatch::synth {

// Fully seeded description of one matching trial.
struct TrialSpec {
    std::string shape = "fish";  // fish | glyph | quadruped | path to a point file
    int d = 2;
    int count = 100;               // prototype sample count
    double outlierRatio = 0.0;     // in [0,1)
    double occlusionFraction = 0.0;
    ScaleRange gtScale{0.5, 1.5};  // ground-truth similarity scale range
    bool randomRotation = false;   // rotate the model set (similarity modes)
    double deformation = 0.0;      // mean displacement as a fraction of the diameter
    uint64_t seed = 0;
};

struct GroundTruth {
    std::vector<std::pair<int, int>> pairs;  // (model index, scene index) inliers
    TransformEstimate transform;             // similarity applied to the model set
    double diameter = 1.0;                   // prototype diameter after normalization
};

struct MatchInstance {
    PointSet model, scene;
    GroundTruth gt;
};

// Deterministic sampling of a parametric shape, normalized to unit diameter and
// centered at the origin. A shape name containing '/' (or ending in .pts) is
// loaded from file instead and subsampled to `count` without renormalization.
PointSet make_prototype(const std::string& shape, int count);

// Smooth Gaussian radial-basis warp with 5 random centers; coefficients are
// scaled so the mean point displacement equals magnitude * diameter.
PointSet deform(const PointSet& ps, double magnitude, uint64_t seed);

enum class Side { Left, Right };

// Appends ceil(ratio*N) normal outliers (std 0.3*diameter) centered one
// diameter away on the given side. Returns the augmented set and the map from
// original indices to indices in the result.
std::pair<PointSet, std::vector<int>> add_outliers(const PointSet& ps, double ratio,
                                                   Side side, uint64_t seed,
                                                   double stdFraction = 0.3,
                                                   double offsetFraction = 1.0);

// Keeps a contiguous segment of ceil((1-fraction)*N) points along a heuristic
// shortest tour (nearest neighbor + 2-opt). Returns the retained set and the
// retained original indices (ascending).
std::pair<PointSet, std::vector<int>> occlude(const PointSet& ps, double fraction,
                                              uint64_t seed);

// Tour helpers (exposed for tests): nearest-neighbor construction and 2-opt
// improvement capped at `maxSwaps` applied swaps.
std::vector<int> nearest_neighbor_tour(const PointSet& ps, int start);
int two_opt(const PointSet& ps, std::vector<int>& tour, int maxSwaps = 10000);
double tour_length(const PointSet& ps, const std::vector<int>& tour);

// Mean distance between transformed ground-truth model inliers and their
// corresponding scene inliers.
double match_error(const TransformEstimate& estimate, const GroundTruth& gt,
                   const PointSet& model, const PointSet& scene);

MatchInstance make_instance(const TrialSpec& spec);

struct MatcherConfig {
    std::string mode = "sim2d";
    BoundScheme scheme = BoundScheme::Fast;
    double npFraction = 1.0;  // fraction of the ground-truth inlier count
    int npAbsolute = 0;       // overrides npFraction when > 0
    double epsilon = 1e-6;
    int maxDepth = 15;
    int workers = 1;
};

struct TrialRecord {
    uint64_t seed = 0;
    std::string shape;
    int d = 0, m = 0, n = 0, np = 0;
    double ratio = 0.0, fraction = 0.0;
    std::string scheme;
    double error = 0.0, energy = 0.0;
    long iterations = 0;
    double wallMs = 0.0;
    std::vector<std::pair<double, double>> boundsHistory;
};

// Runs every trial (independent, parallelizable) and returns one record each.
std::vector<TrialRecord> run_trials(const std::vector<TrialSpec>& specs,
                                    const MatcherConfig& config, int trialWorkers = 1);

// CSV schema: seed, shape, d, m, n, n_p, ratio, fraction, scheme, error, energy,
// iterations, wall_ms.
void write_trial_csv(std::ostream& out, const std::vector<TrialRecord>& records);

double mean(const std::vector<double>& xs);
double median(std::vector<double> xs);

}  // namespace pomatch::synth
