// energy_sim.hpp - correspondence energy for 2D/3D similarity transforms with a
// bounded scale and free proper rotation. The inner minimization over (s, R) is
// closed form: Kabsch rotation from an SVD (3D) or a norm identity (2D), then a
// one-variable quadratic in s over the scale interval.
#pragma once

#include <vector>

#include <Eigen/Core>

#include "pomatch/point_set.hpp"
#include "pomatch/reduced_energy.hpp"
#include "pomatch/types.hpp"

namespace pomatch {

struct ScaleRange {
    double lo = 0.5;
    double hi = 1.5;
};

// R maximizing tr(R G) over proper rotations, from the SVD of G^T. When G is
// numerically zero every rotation is optimal and the identity is returned;
// `ambiguous`, when given, is set if the smallest singular value is below
// 1e-12 * ||G||.
Eigen::MatrixXd optimal_rotation(const Eigen::MatrixXd& G, bool* ambiguous = nullptr);

struct ScaleMin {
    double s = 1.0;
    double value = 0.0;
};

// Minimizes s^2 c2 - 2 s c1 over [range.lo, range.hi]. Candidates are the two
// endpoints plus the stationary point when c2 > 0 and strictly interior; ties
// break toward the smaller s.
ScaleMin min_scale_quadratic(double c2, double c1, const ScaleRange& range);

struct DesignMatricesSim {
    Eigen::MatrixXd B;       // d^2 x mn, or 2 x mn in the specialized 2D form
    Eigen::MatrixXd C, D;    // d x mn each
    Eigen::RowVectorXd a;    // 1 x mn
    bool specialized2d = false;
};

// B = X^T (x) Y^T (2D specialized: W (X^T (x) Y^T)), C = X^T (x) 1^T,
// D = 1^T (x) Y^T, a = xtilde (x) 1, built row by row.
DesignMatricesSim build_design_sim(const PointSet& X, const PointSet& Y,
                                   bool specialized2d);

class ReducedEnergySim : public ReducedEnergy {
public:
    // specialized2d selects the 2-row B form for d == 2 (the default); the
    // generic d^2-row pipeline stays available for consistency checks.
    ReducedEnergySim(const PointSet& X, const PointSet& Y, int np, ScaleRange range,
                     bool specialized2d = true);

    double eval_Ec(const Eigen::VectorXd& u) const override;

    // (s*, R*, t*) for a feasible correspondence, with residual E(p).
    TransformEstimate recover_transform(const Eigen::VectorXd& p) const;

    Eigen::VectorXd improve_correspondence(const Eigen::VectorXd& p) const override;

    const ScaleRange& scale_range() const { return range_; }
    bool specialized2d() const { return design_.specialized2d; }

private:
    struct Blocks {
        Eigen::VectorXd wB, wC, wD;
        double wa = 0.0;
    };
    Blocks split(const Eigen::VectorXd& gtu) const;
    double inner_min(const Blocks& blk, Eigen::MatrixXd* rotOut, double* sOut) const;

    DesignMatricesSim design_;
    ScaleRange range_;
    Eigen::MatrixXd xRows_, yRows_;
    int d_ = 2;
    int nB_ = 0;
};

}  // namespace pomatch
