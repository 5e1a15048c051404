#include "pomatch/simplex_lp.hpp"

#include <cmath>
#include <limits>

namespace pomatch {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

// Tableau rows: one per constraint, columns: structural + slack + artificial,
// plus the rhs held separately. basis[r] is the column basic in row r.
struct Tableau {
    Eigen::MatrixXd A;  // rows x cols
    Eigen::VectorXd b;  // rows
    std::vector<int> basis;

    void pivot(int row, int col) {
        const double piv = A(row, col);
        A.row(row) /= piv;
        b[row] /= piv;
        for (Eigen::Index r = 0; r < A.rows(); ++r) {
            if (r == row) continue;
            const double f = A(r, col);
            if (f != 0.0) {
                A.row(r) -= f * A.row(row);
                b[r] -= f * b[row];
            }
        }
        basis[row] = col;
    }
};

// Bland: entering = lowest-index column with negative reduced cost; leaving =
// smallest ratio, ties broken by the lowest basic column index.
// Returns false when optimal. Throws on unboundedness.
bool simplexIterate(Tableau& t, Eigen::RowVectorXd& reduced) {
    int entering = -1;
    for (Eigen::Index j = 0; j < reduced.size(); ++j) {
        if (reduced[j] < -kCostTol) {
            entering = static_cast<int>(j);
            break;
        }
    }
    if (entering < 0) return false;

    int leaving = -1;
    double bestRatio = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < t.A.rows(); ++r) {
        const double a = t.A(r, entering);
        if (a > kPivotTol) {
            const double ratio = t.b[r] / a;
            if (ratio < bestRatio - 1e-12 ||
                (ratio <= bestRatio + 1e-12 &&
                 (leaving < 0 || t.basis[r] < t.basis[leaving]))) {
                if (ratio < bestRatio) bestRatio = ratio;
                leaving = static_cast<int>(r);
            }
        }
    }
    if (leaving < 0) throw std::logic_error("solve_dense_lp: unbounded linear program");

    t.pivot(leaving, entering);
    // Price out the entering column from the reduced costs.
    const double f = reduced[entering];
    reduced -= f * t.A.row(leaving);
    return true;
}

void runSimplex(Tableau& t, const Eigen::VectorXd& costs, double& objective,
                Eigen::RowVectorXd& reduced) {
    // Reduced costs for the current basis.
    reduced = costs.transpose();
    for (Eigen::Index r = 0; r < t.A.rows(); ++r) {
        const double cb = costs[t.basis[r]];
        if (cb != 0.0) reduced -= cb * t.A.row(r);
    }
    // Clean basic columns exactly.
    for (int col : t.basis) reduced[col] = 0.0;

    const long maxIter = 50L * (t.A.rows() + t.A.cols()) + 10000L;
    long iter = 0;
    while (simplexIterate(t, reduced)) {
        if (++iter > maxIter)
            throw std::logic_error("solve_dense_lp: iteration limit exceeded");
    }
    // Recompute the objective from the final basis; avoids pivot drift.
    objective = 0.0;
    for (Eigen::Index r = 0; r < t.A.rows(); ++r) objective += costs[t.basis[r]] * t.b[r];
}

}  // namespace

LpSolution solve_dense_lp(const LinearProgram& lp) {
    const Eigen::Index nvar = lp.c.size();
    const Eigen::Index meq = lp.Aeq.rows();
    const Eigen::Index mineq = lp.Aineq.rows();
    const Eigen::Index rows = meq + mineq;
    if ((meq && lp.Aeq.cols() != nvar) || (mineq && lp.Aineq.cols() != nvar))
        throw input_error("solve_dense_lp: constraint/variable dimension mismatch");

    const Eigen::Index nslack = mineq;
    const Eigen::Index nart = rows;
    const Eigen::Index cols = nvar + nslack + nart;

    Tableau t;
    t.A = Eigen::MatrixXd::Zero(rows, cols);
    t.b = Eigen::VectorXd::Zero(rows);
    t.basis.assign(rows, -1);
    if (meq) {
        t.A.topLeftCorner(meq, nvar) = lp.Aeq;
        t.b.head(meq) = lp.beq;
    }
    if (mineq) {
        t.A.block(meq, 0, mineq, nvar) = lp.Aineq;
        t.A.block(meq, nvar, mineq, nslack).setIdentity();
        t.b.tail(mineq) = lp.bineq;
    }
    // Make rhs nonnegative, then give every row an artificial basis column.
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (t.b[r] < 0.0) {
            t.A.row(r) = -t.A.row(r);
            t.b[r] = -t.b[r];
        }
        t.A(r, nvar + nslack + r) = 1.0;
        t.basis[r] = static_cast<int>(nvar + nslack + r);
    }

    // Phase 1: drive the artificials to zero.
    Eigen::VectorXd phase1Costs = Eigen::VectorXd::Zero(cols);
    phase1Costs.tail(nart).setOnes();
    double objective = 0.0;
    Eigen::RowVectorXd reduced;
    runSimplex(t, phase1Costs, objective, reduced);
    const double scale = std::max(1.0, t.b.cwiseAbs().maxCoeff());
    if (objective > 1e-8 * scale) {
        LpSolution sol;
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    // Pivot remaining artificials out of the basis where possible.
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (t.basis[r] >= nvar + nslack) {
            int col = -1;
            for (Eigen::Index j = 0; j < nvar + nslack; ++j) {
                if (std::abs(t.A(r, j)) > kPivotTol) {
                    col = static_cast<int>(j);
                    break;
                }
            }
            if (col >= 0) t.pivot(static_cast<int>(r), col);
            // else: redundant row, the (zeroed) artificial stays basic at level 0.
        }
    }
    // Forbid artificials from re-entering.
    t.A.rightCols(nart).setZero();
    for (Eigen::Index r = 0; r < rows; ++r)
        if (t.basis[r] >= nvar + nslack) t.A(r, t.basis[r]) = 1.0;

    // Phase 2.
    Eigen::VectorXd phase2Costs = Eigen::VectorXd::Zero(cols);
    phase2Costs.head(nvar) = lp.c;
    runSimplex(t, phase2Costs, objective, reduced);

    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x = Eigen::VectorXd::Zero(nvar);
    for (Eigen::Index r = 0; r < rows; ++r)
        if (t.basis[r] < nvar) sol.x[t.basis[r]] = t.b[r];
    sol.value = objective;
    sol.basis = t.basis;
    return sol;
}

}  // namespace pomatch
