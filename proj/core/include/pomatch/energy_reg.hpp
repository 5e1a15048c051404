// energy_reg.hpp - correspondence energy for regularized linear-in-parameter
// transforms (2D similarity, 2D affine, 3D per-axis scaling; translation is
// eliminated in closed form, the remaining parameters are pulled toward theta0
// by a quadratic regularizer theta^T H theta - 2 theta0^T H theta).
#pragma once

#include <vector>

#include <Eigen/Core>

#include "pomatch/point_set.hpp"
#include "pomatch/reduced_energy.hpp"
#include "pomatch/types.hpp"

namespace pomatch {

enum class RegFamilyKind { Similarity2d, Affine2d, ScaleTrans3d };

// Non-translational transform family phi(x|theta) = J(x) theta with J linear in
// x and independent of theta.
struct TransformFamilyReg {
    RegFamilyKind kind;
    int d = 2;
    int n_theta = 2;
    Eigen::VectorXd theta0;  // identity transform of the family

    static TransformFamilyReg make(RegFamilyKind kind);

    // d x n_theta Jacobian at a point.
    Eigen::MatrixXd jacobian(const Eigen::RowVectorXd& x) const;
    // d x d linear map x -> phi(x|theta).
    Eigen::MatrixXd linear_matrix(const Eigen::VectorXd& theta) const;
    const char* name() const;
};

// Where each row of the uncompressed design went: either a kept compressed row
// (with sign) or a constant multiple of the all-ones row, whose product with any
// feasible p equals constant * np.
struct RowMapEntry {
    bool isConstant = false;
    int keptIndex = -1;
    double sign = 1.0;
    double constant = 0.0;
};

struct DesignMatricesReg {
    Eigen::MatrixXd B2, D2, C, F;       // compressed/unique rows x mn
    std::vector<RowMapEntry> bMap;      // size n_theta^2
    std::vector<RowMapEntry> dMap;      // size n_theta*d
};

// Builds the design matrices row by row (each row is an explicit linear
// functional of p indexed by the cell (i,j)); rows that are multiples of the
// all-ones vector are dropped into the row map, duplicates up to sign are merged.
DesignMatricesReg build_design_reg(const PointSet& X, const PointSet& Y,
                                   const TransformFamilyReg& family, int np);

class ReducedEnergyReg : public ReducedEnergy {
public:
    ReducedEnergyReg(const PointSet& X, const PointSet& Y, TransformFamilyReg family,
                     int np);

    double eval_Ec(const Eigen::VectorXd& u) const override;
    // Selects H = (-lambda0 + eps0) I from the region vertices (see choose_h).
    void prepare_for_region(const std::vector<Eigen::VectorXd>& vertices) override;

    // A(u) and b(u) reconstructed through the row map (H not included).
    Eigen::MatrixXd build_A(const Eigen::VectorXd& u) const;
    Eigen::VectorXd build_b(const Eigen::VectorXd& u) const;

    // Smallest eigenvalue of A over a vertex set, clamped at zero, plus eps0.
    double choose_h(const std::vector<Eigen::VectorXd>& vertices);
    void set_h(double h);
    double h() const { return h_; }

    // Closed-form (theta*, t*) for a feasible correspondence, with residual E(p).
    TransformEstimate recover_transform(const Eigen::VectorXd& p) const;

    Eigen::VectorXd improve_correspondence(const Eigen::VectorXd& p) const override;

    const TransformFamilyReg& family() const { return family_; }
    const DesignMatricesReg& design() const { return design_; }

    static constexpr double kEpsilon0 = 1e-5;

private:
    // Blocks of gamma^T u in stack order [B2 | D2 | C | F].
    struct Blocks {
        Eigen::VectorXd wB2, wD2, wC, wF;
    };
    Blocks split(const Eigen::VectorXd& gtu) const;
    Eigen::MatrixXd matB(const Eigen::VectorXd& wB2) const;
    Eigen::MatrixXd matD(const Eigen::VectorXd& wD2) const;

    TransformFamilyReg family_;
    DesignMatricesReg design_;
    Eigen::MatrixXd xRows_, yRows_;  // copies of the point coordinates
    double h_ = kEpsilon0;
    int nB2_ = 0, nD2_ = 0;
};

}  // namespace pomatch
