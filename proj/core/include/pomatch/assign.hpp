// assign.hpp - linear assignment problems of prescribed cardinality.
//
// The square solver is the Jonker-Volgenant shortest-augmenting-path algorithm;
// rectangular k-cardinality problems are transformed into a square problem by
// appending zero-cost dummy rows/columns (dummy-dummy cells forbidden via a
// finite big-M), then stripping dummy pairs from the solution.
#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pomatch/types.hpp"

namespace pomatch {

// Rectangular cost matrix with prescribed cardinality 1 <= k <= min(m,n).
struct AssignmentProblem {
    Eigen::MatrixXd cost;
    int k = 1;
};

// k disjoint (row, col) pairs; value is the sum of the covered cost entries.
struct Assignment {
    std::vector<std::pair<int, int>> pairs;
    double value = 0.0;
};

// Minimum-cost perfect assignment of a square finite cost matrix.
Assignment solve_lap(const Eigen::MatrixXd& cost);

// Minimum-cost assignment of exactly k pairs.
Assignment solve_k_lap(const AssignmentProblem& prob);

// Maximum-cost assignment of exactly k pairs (negate and minimize).
Assignment maximize_k_lap(const AssignmentProblem& prob);

}  // namespace pomatch
