// reduced_energy.hpp - common shape of both correspondence energies.
//
// Both energies have the form E(p) = E_c(Q^T p) + l . p where Q comes from a QR
// factorization of the stacked design matrices and E_c is concave (everywhere,
// or over a spectrahedral region made positive definite by a regularizer). The
// branch-and-bound solver only sees this interface.
#pragma once

#include <vector>

#include <Eigen/Core>

#include "pomatch/correspondence.hpp"
#include "pomatch/types.hpp"

namespace pomatch {

struct QrReduction {
    Eigen::MatrixXd Q;      // rows x cols, orthonormal columns
    Eigen::MatrixXd gamma;  // cols x cols, upper triangular with nonnegative diagonal
};

// Thin Householder QR of the stacked design (rows >= cols required). Signs are
// normalized so the diagonal of gamma is nonnegative. Rank deficiency (collinear
// or otherwise degenerate point sets) raises input_error naming the first
// deficient column.
QrReduction qr_reduce(const Eigen::MatrixXd& stacked);

class ReducedEnergy {
public:
    virtual ~ReducedEnergy() = default;

    int model_size() const { return m_; }
    int scene_size() const { return n_; }
    int pair_count() const { return np_; }
    int dim_u() const { return static_cast<int>(Q_.cols()); }

    const Eigen::MatrixXd& Q() const { return Q_; }
    const Eigen::MatrixXd& gamma() const { return gamma_; }
    // l = 1_m (x) ytilde: per-cell squared scene-point norms.
    const Eigen::VectorXd& linear_cost() const { return ell_; }

    // Concave part, defined for any u in the enclosing region.
    virtual double eval_Ec(const Eigen::VectorXd& u) const = 0;

    // E(p) = E_c(Q^T p) + l . p for feasible p (checked to 1e-8).
    double eval_E(const Eigen::VectorXd& p) const {
        require_feasible(p, m_, n_, np_);
        return eval_E_unchecked(p);
    }
    double eval_E_unchecked(const Eigen::VectorXd& p) const {
        return eval_Ec(Q_.transpose() * p) + ell_.dot(p);
    }

    // Called once the vertices of the initial enclosing simplexes are known,
    // before any eval_Ec over the region. Used by the regularized energy to pick
    // its weighting matrix; a no-op otherwise.
    virtual void prepare_for_region(const std::vector<Eigen::VectorXd>& vertices) {
        (void)vertices;
    }

    // One alternation step of the energy's own block structure: fit the
    // transform to p in closed form, then re-assign correspondences by a
    // k-cardinality assignment on the resulting per-cell residuals. Used by the
    // solver to polish incumbent candidates; returns p unchanged when the
    // energy has no such structure.
    virtual Eigen::VectorXd improve_correspondence(const Eigen::VectorXd& p) const {
        return p;
    }

protected:
    ReducedEnergy() = default;

    int m_ = 0, n_ = 0, np_ = 0;
    Eigen::MatrixXd Q_, gamma_;
    Eigen::VectorXd ell_;
};

}  // namespace pomatch
