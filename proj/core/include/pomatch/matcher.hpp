// matcher.hpp - one-call matching: build the energy for a mode, run the
// branch-and-bound, recover the transform.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pomatch/bnb.hpp"
#include "pomatch/energy_reg.hpp"
#include "pomatch/energy_sim.hpp"
#include "pomatch/point_set.hpp"

namespace pomatch {

// Modes: reg-sim2d, reg-aff2d, reg-scale3d (regularized families) and
// sim2d, sim3d (constrained similarity).
struct MatchConfig {
    std::string mode = "sim2d";
    int np = 1;
    ScaleRange scaleRange{0.5, 1.5};
    std::optional<Eigen::VectorXd> theta0;  // regularized families only
    BnBConfig bnb;
};

struct MatchResult {
    BnBResult bnb;
    std::vector<std::pair<int, int>> pairs;  // binary correspondence
    TransformEstimate transform;
    double energy = 0.0;          // E at the binary correspondence
    double regularizerH = 0.0;    // chosen H scalar (reg modes; 0 otherwise)
};

bool mode_is_reg(const std::string& mode);
int mode_dimension(const std::string& mode);

MatchResult match_point_sets(const PointSet& model, const PointSet& scene,
                             const MatchConfig& config);

}  // namespace pomatch
