#include "pomatch/matcher.hpp"

#include <memory>

#include "pomatch/assign.hpp"

namespace pomatch {

namespace {

RegFamilyKind regKindForMode(const std::string& mode) {
    if (mode == "reg-sim2d") return RegFamilyKind::Similarity2d;
    if (mode == "reg-aff2d") return RegFamilyKind::Affine2d;
    if (mode == "reg-scale3d") return RegFamilyKind::ScaleTrans3d;
    throw input_error("unknown mode '" + mode + "'");
}

}  // namespace

bool mode_is_reg(const std::string& mode) { return mode.rfind("reg-", 0) == 0; }

int mode_dimension(const std::string& mode) {
    if (mode == "reg-sim2d" || mode == "reg-aff2d" || mode == "sim2d") return 2;
    if (mode == "reg-scale3d" || mode == "sim3d") return 3;
    throw input_error("unknown mode '" + mode + "'");
}

MatchResult match_point_sets(const PointSet& model, const PointSet& scene,
                             const MatchConfig& config) {
    const int d = mode_dimension(config.mode);
    if (model.dim() != d || scene.dim() != d)
        throw input_error("mode '" + config.mode + "' expects " + std::to_string(d) +
                          "-dimensional points, got model d=" + std::to_string(model.dim()) +
                          ", scene d=" + std::to_string(scene.dim()));
    if (config.np < 1 || config.np > std::min(model.size(), scene.size()))
        throw input_error("n_p = " + std::to_string(config.np) +
                          " out of range 1..min(m,n) = " +
                          std::to_string(std::min(model.size(), scene.size())));

    std::unique_ptr<ReducedEnergy> energy;
    ReducedEnergyReg* reg = nullptr;
    ReducedEnergySim* sim = nullptr;
    if (mode_is_reg(config.mode)) {
        auto family = TransformFamilyReg::make(regKindForMode(config.mode));
        if (config.theta0) {
            if (config.theta0->size() != family.n_theta)
                throw input_error("theta0 override must have " +
                                  std::to_string(family.n_theta) + " entries");
            family.theta0 = *config.theta0;
        }
        auto e = std::make_unique<ReducedEnergyReg>(model, scene, family, config.np);
        reg = e.get();
        energy = std::move(e);
    } else {
        if (config.theta0) throw input_error("theta0 applies to reg-* modes only");
        auto e = std::make_unique<ReducedEnergySim>(model, scene, config.np,
                                                    config.scaleRange, true);
        sim = e.get();
        energy = std::move(e);
    }

    MatchResult result;
    result.bnb = minimize(*energy, config.bnb);

    // Report a binary correspondence: the solver's best point if it is binary,
    // otherwise its nearest assignment rounding.
    Eigen::VectorXd p = result.bnb.bestP;
    if (!is_binary(p)) {
        Assignment rounded = solve_k_lap(
            {-cell_matrix(p, model.size(), scene.size()), config.np});
        p = binary_from_pairs(rounded.pairs, model.size(), scene.size());
    }
    result.pairs = pairs_from_binary(p, model.size(), scene.size());
    result.energy = energy->eval_E(p);
    result.transform = reg ? reg->recover_transform(p) : sim->recover_transform(p);
    result.regularizerH = reg ? reg->h() : 0.0;
    return result;
}

}  // namespace pomatch
