// simplex_lp.hpp - dense primal simplex with Bland's anti-cycling rule.
//
// Engine for the envelope lower-bound linear programs. Desk scale only
// (a few thousand variables); no sparsity, no presolve.
#pragma once

#include <vector>

#include <Eigen/Core>

#include "pomatch/types.hpp"

namespace pomatch {

// min c.x  s.t.  Aeq x = beq,  Aineq x <= bineq,  x >= 0.
struct LinearProgram {
    Eigen::VectorXd c;
    Eigen::MatrixXd Aeq;
    Eigen::VectorXd beq;
    Eigen::MatrixXd Aineq;
    Eigen::VectorXd bineq;
};

enum class LpStatus { Optimal, Infeasible };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;        // basic optimal solution (original variables only)
    double value = 0.0;
    std::vector<int> basis;   // basic column indices of the tableau
};

// Two-phase tableau simplex. Unbounded problems raise logic_error (the feasible
// regions used here are compact, so that would be an internal bug).
LpSolution solve_dense_lp(const LinearProgram& lp);

}  // namespace pomatch
