// correspondence.hpp - the feasible region of vectorized correspondence matrices.
//
// A correspondence between m model and n scene points with prescribed cardinality
// np is an m x n matrix P with row sums <= 1, column sums <= 1, total sum = np and
// entries in [0,1]. Throughout the library P is handled in row-major vectorized
// form p with p[(i,j)] = p[i*n + j].
#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pomatch/types.hpp"

namespace pomatch {

inline int cell_index(int i, int j, int n) { return i * n + j; }

// The "fuzziest" correspondence: every entry np/(mn). Interior point of the polytope.
inline Eigen::VectorXd fuzziest_p(int m, int n, int np) {
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m) * n,
                                     static_cast<double>(np) / (static_cast<double>(m) * n));
}

inline bool is_feasible(const Eigen::VectorXd& p, int m, int n, int np, double tol = 1e-8) {
    if (p.size() != static_cast<Eigen::Index>(m) * n) return false;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        double rs = 0.0;
        for (int j = 0; j < n; ++j) {
            double v = p[cell_index(i, j, n)];
            if (v < -tol || v > 1.0 + tol) return false;
            rs += v;
            total += v;
        }
        if (rs > 1.0 + tol) return false;
    }
    for (int j = 0; j < n; ++j) {
        double cs = 0.0;
        for (int i = 0; i < m; ++i) cs += p[cell_index(i, j, n)];
        if (cs > 1.0 + tol) return false;
    }
    return std::abs(total - np) <= tol * std::max(1.0, static_cast<double>(np));
}

inline void require_feasible(const Eigen::VectorXd& p, int m, int n, int np,
                             double tol = 1e-8) {
    if (!is_feasible(p, m, n, np, tol))
        throw input_error("correspondence vector violates the assignment constraints");
}

inline bool is_binary(const Eigen::VectorXd& p, double tol = 1e-6) {
    for (Eigen::Index c = 0; c < p.size(); ++c) {
        double v = p[c];
        if (std::abs(v) > tol && std::abs(v - 1.0) > tol) return false;
    }
    return true;
}

inline std::vector<std::pair<int, int>> pairs_from_binary(const Eigen::VectorXd& p, int m,
                                                          int n, double tol = 1e-6) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(p[cell_index(i, j, n)] - 1.0) <= tol) out.emplace_back(i, j);
    return out;
}

inline Eigen::VectorXd binary_from_pairs(const std::vector<std::pair<int, int>>& pairs,
                                         int m, int n) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) * n);
    for (auto [i, j] : pairs) p[cell_index(i, j, n)] = 1.0;
    return p;
}

// Reshape a vectorized per-cell quantity into its m x n matrix form.
inline Eigen::MatrixXd cell_matrix(const Eigen::VectorXd& v, int m, int n) {
    Eigen::MatrixXd out(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = v[cell_index(i, j, n)];
    return out;
}

}  // namespace pomatch
