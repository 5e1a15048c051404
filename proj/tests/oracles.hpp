// oracles.hpp - independent test oracles: exhaustive enumeration, literal dense
// energy evaluation, grid searches. Everything here recomputes results from
// first principles and must stay independent of the library's reduction paths.
#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "pomatch/correspondence.hpp"
#include "pomatch/energy_reg.hpp"
#include "pomatch/point_set.hpp"
#include "pomatch/reduced_energy.hpp"
#include "pomatch/rng.hpp"

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Exhaustive enumeration of binary feasible correspondences (k disjoint pairs).

inline void forEachKAssignment(
    int m, int n, int k,
    const std::function<void(const std::vector<std::pair<int, int>>&)>& visit) {
    std::vector<int> rows;
    std::vector<std::pair<int, int>> pairs;
    std::vector<char> colUsed(n, 0);

    std::function<void(size_t)> assignCols = [&](size_t idx) {
        if (idx == rows.size()) {
            visit(pairs);
            return;
        }
        for (int j = 0; j < n; ++j) {
            if (colUsed[j]) continue;
            colUsed[j] = 1;
            pairs.emplace_back(rows[idx], j);
            assignCols(idx + 1);
            pairs.pop_back();
            colUsed[j] = 0;
        }
    };
    std::function<void(int, int)> chooseRows = [&](int from, int left) {
        if (left == 0) {
            assignCols(0);
            return;
        }
        for (int i = from; i <= m - left; ++i) {
            rows.push_back(i);
            chooseRows(i + 1, left - 1);
            rows.pop_back();
        }
    };
    chooseRows(0, k);
}

inline std::vector<VectorXd> enumerateBinaryFeasible(int m, int n, int k) {
    std::vector<VectorXd> out;
    forEachKAssignment(m, n, k, [&](const std::vector<std::pair<int, int>>& pairs) {
        out.push_back(pomatch::binary_from_pairs(pairs, m, n));
    });
    return out;
}

inline double klapMinOracle(const MatrixXd& cost, int k) {
    double best = std::numeric_limits<double>::infinity();
    forEachKAssignment(static_cast<int>(cost.rows()), static_cast<int>(cost.cols()), k,
                       [&](const std::vector<std::pair<int, int>>& pairs) {
                           double v = 0.0;
                           for (auto [i, j] : pairs) v += cost(i, j);
                           best = std::min(best, v);
                       });
    return best;
}

inline double klapMaxOracle(const MatrixXd& cost, int k) {
    return -klapMinOracle(-cost, k);
}

// ---------------------------------------------------------------------------
// Literal Kronecker-product construction of the regularized-energy design
// matrices (definition-level, used to validate the row-compressed build).

struct DenseRegDesign {
    MatrixXd B;  // nt^2 x mn
    MatrixXd C;  // nt   x mn
    MatrixXd D;  // nt*d x mn
    MatrixXd F;  // d    x mn
};

inline DenseRegDesign denseRegDesign(const pomatch::PointSet& X, const pomatch::PointSet& Y,
                                     const pomatch::TransformFamilyReg& fam) {
    const int m = X.size(), n = Y.size(), d = fam.d, nt = fam.n_theta;
    const int mn = m * n;
    DenseRegDesign out;
    out.B = MatrixXd::Zero(nt * nt, mn);
    out.C = MatrixXd::Zero(nt, mn);
    out.D = MatrixXd::Zero(nt * d, mn);
    out.F = MatrixXd::Zero(d, mn);
    // Column for cell (i,j) is the coefficient of p_ij in each stacked quantity,
    // obtained by evaluating the defining expression at P = e_i e_j^T.
    for (int i = 0; i < m; ++i) {
        const MatrixXd Ji = fam.jacobian(X.pts.row(i));
        for (int j = 0; j < n; ++j) {
            const int col = i * n + j;
            const MatrixXd JtJ = Ji.transpose() * Ji;          // J^T[diag(P1)xI]J at e_ie_j^T
            const MatrixXd JT = Ji.transpose();                // J^T[(P1)xI]
            const VectorXd Cy = Ji.transpose() * Y.pts.row(j).transpose();
            for (int r = 0; r < nt; ++r)
                for (int s = 0; s < nt; ++s) out.B(r * nt + s, col) = JtJ(r, s);
            for (int r = 0; r < nt; ++r)
                for (int s = 0; s < d; ++s) out.D(r * d + s, col) = JT(r, s);
            out.C.col(col) = Cy;
            out.F.col(col) = Y.pts.row(j).transpose();
        }
    }
    return out;
}

// Count of rows that are neither multiples of the all-ones row nor duplicates
// (up to sign) of an earlier such row.
inline int uniqueNonConstantRowCount(const MatrixXd& M) {
    std::vector<int> kept;
    for (int r = 0; r < M.rows(); ++r) {
        const auto row = M.row(r);
        const double c = row.mean();
        if ((row.array() - c).matrix().norm() <= 1e-9 * std::max(row.norm(), 1e-300))
            continue;
        bool dup = false;
        for (int k : kept)
            if ((row - M.row(k)).norm() <= 1e-9 * row.norm() ||
                (row + M.row(k)).norm() <= 1e-9 * row.norm())
                dup = true;
        if (!dup) kept.push_back(r);
    }
    return static_cast<int>(kept.size());
}

// ---------------------------------------------------------------------------
// Regularized energy by direct joint least squares over (theta, t): minimize
// sum_ij p_ij ||y_j - J(x_i) theta - t||^2 + theta^T H theta - 2 theta0^T H theta
// through the normal equations of the stacked quadratic. No vectorization, no
// translation elimination, no QR.

struct DenseRegSolution {
    VectorXd theta, t;
    double energy = 0.0;
};

inline DenseRegSolution denseRegEnergyOracle(const pomatch::PointSet& X,
                                             const pomatch::PointSet& Y,
                                             const pomatch::TransformFamilyReg& fam,
                                             double h, const VectorXd& p) {
    const int m = X.size(), n = Y.size(), d = fam.d, nt = fam.n_theta;
    const int nz = nt + d;  // z = [theta; t]
    MatrixXd Nmat = MatrixXd::Zero(nz, nz);
    VectorXd rhs = VectorXd::Zero(nz);
    for (int i = 0; i < m; ++i) {
        MatrixXd Ji(d, nz);
        Ji << fam.jacobian(X.pts.row(i)), MatrixXd::Identity(d, d);
        for (int j = 0; j < n; ++j) {
            const double pij = p[pomatch::cell_index(i, j, n)];
            if (pij == 0.0) continue;
            Nmat += pij * Ji.transpose() * Ji;
            rhs += pij * Ji.transpose() * Y.pts.row(j).transpose();
        }
    }
    Nmat.topLeftCorner(nt, nt) += h * MatrixXd::Identity(nt, nt);
    rhs.head(nt) += h * fam.theta0;
    const VectorXd z = Nmat.fullPivLu().solve(rhs);

    DenseRegSolution sol;
    sol.theta = z.head(nt);
    sol.t = z.tail(d);
    double e = 0.0;
    for (int i = 0; i < m; ++i) {
        const VectorXd phi = fam.jacobian(X.pts.row(i)) * sol.theta + sol.t;
        for (int j = 0; j < n; ++j) {
            const double pij = p[pomatch::cell_index(i, j, n)];
            if (pij != 0.0) e += pij * (Y.pts.row(j).transpose() - phi).squaredNorm();
        }
    }
    e += h * sol.theta.squaredNorm() - 2.0 * h * fam.theta0.dot(sol.theta);
    sol.energy = e;
    return sol;
}

// Residual at a fixed theta with only t optimized (translation is a weighted
// mean); used to pin the large-regularizer limit.
inline double residualAtTheta(const pomatch::PointSet& X, const pomatch::PointSet& Y,
                              const pomatch::TransformFamilyReg& fam,
                              const VectorXd& theta, const VectorXd& p, int np) {
    const int m = X.size(), n = Y.size(), d = fam.d;
    VectorXd t = VectorXd::Zero(d);
    for (int i = 0; i < m; ++i) {
        const VectorXd phi = fam.jacobian(X.pts.row(i)) * theta;
        for (int j = 0; j < n; ++j) {
            const double pij = p[pomatch::cell_index(i, j, n)];
            if (pij != 0.0) t += pij * (Y.pts.row(j).transpose() - phi);
        }
    }
    t /= static_cast<double>(np);
    double e = 0.0;
    for (int i = 0; i < m; ++i) {
        const VectorXd phi = fam.jacobian(X.pts.row(i)) * theta + t;
        for (int j = 0; j < n; ++j) {
            const double pij = p[pomatch::cell_index(i, j, n)];
            if (pij != 0.0) e += pij * (Y.pts.row(j).transpose() - phi).squaredNorm();
        }
    }
    return e;
}

// ---------------------------------------------------------------------------
// Similarity energy by literal grid search over (s, R) with t re-derived as the
// weighted mean for every candidate.

inline double simResidual(const pomatch::PointSet& X, const pomatch::PointSet& Y,
                          const VectorXd& p, int np, double s, const MatrixXd& R) {
    const int m = X.size(), n = Y.size(), d = X.dim();
    VectorXd t = VectorXd::Zero(d);
    for (int i = 0; i < m; ++i) {
        const VectorXd phi = s * R * X.pts.row(i).transpose();
        for (int j = 0; j < n; ++j) {
            const double pij = p[pomatch::cell_index(i, j, n)];
            if (pij != 0.0) t += pij * (Y.pts.row(j).transpose() - phi);
        }
    }
    t /= static_cast<double>(np);
    double e = 0.0;
    for (int i = 0; i < m; ++i) {
        const VectorXd phi = s * R * X.pts.row(i).transpose() + t;
        for (int j = 0; j < n; ++j) {
            const double pij = p[pomatch::cell_index(i, j, n)];
            if (pij != 0.0) e += pij * (Y.pts.row(j).transpose() - phi).squaredNorm();
        }
    }
    return e;
}

struct SimOracleResult {
    double energy = 0.0;
    double s = 1.0;
    MatrixXd R;
};

inline MatrixXd rot2d(double beta) {
    MatrixXd R(2, 2);
    R << std::cos(beta), -std::sin(beta), std::sin(beta), std::cos(beta);
    return R;
}

inline SimOracleResult denseSimEnergyOracle2d(const pomatch::PointSet& X,
                                              const pomatch::PointSet& Y, const VectorXd& p,
                                              int np, double sLo, double sHi) {
    SimOracleResult best;
    best.energy = std::numeric_limits<double>::infinity();
    double bestBeta = 0.0;
    // Coarse grid, then one zoom.
    auto scan = [&](double b0, double b1, int nb, double s0, double s1, int ns) {
        for (int ib = 0; ib <= nb; ++ib) {
            const double beta = b0 + (b1 - b0) * ib / nb;
            const MatrixXd R = rot2d(beta);
            for (int is = 0; is <= ns; ++is) {
                const double s = s0 + (s1 - s0) * is / ns;
                const double e = simResidual(X, Y, p, np, s, R);
                if (e < best.energy) {
                    best.energy = e;
                    best.s = s;
                    best.R = R;
                    bestBeta = beta;
                }
            }
        }
    };
    scan(0.0, 2.0 * std::numbers::pi, 720, sLo, sHi, 200);
    const double db = 2.0 * std::numbers::pi / 720, ds = (sHi - sLo) / 200;
    scan(bestBeta - db, bestBeta + db, 200,
         std::max(sLo, best.s - ds), std::min(sHi, best.s + ds), 200);
    return best;
}

inline SimOracleResult denseSimEnergyOracle3d(const pomatch::PointSet& X,
                                              const pomatch::PointSet& Y, const VectorXd& p,
                                              int np, double sLo, double sHi,
                                              uint64_t seed) {
    pomatch::Rng rng(seed);
    SimOracleResult best;
    best.energy = std::numeric_limits<double>::infinity();
    auto tryRot = [&](const MatrixXd& R, int ns, double s0, double s1) {
        for (int is = 0; is <= ns; ++is) {
            const double s = s0 + (s1 - s0) * is / ns;
            const double e = simResidual(X, Y, p, np, s, R);
            if (e < best.energy) {
                best.energy = e;
                best.s = s;
                best.R = R;
            }
        }
    };
    for (int k = 0; k < 100000; ++k) tryRot(rng.random_rotation(3), 40, sLo, sHi);
    // Local refinement: shrinking random axis-angle perturbations of the best.
    double step = 0.1;
    for (int round = 0; round < 6; ++round) {
        const MatrixXd base = best.R;
        const double s0 = std::max(sLo, best.s - step), s1 = std::min(sHi, best.s + step);
        for (int k = 0; k < 600; ++k) {
            Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
            if (axis.norm() < 1e-12) continue;
            axis.normalize();
            const double ang = step * rng.uniform(-1.0, 1.0);
            const MatrixXd R =
                Eigen::AngleAxisd(ang, axis).toRotationMatrix() * base;
            tryRot(R, 40, s0, s1);
        }
        step *= 0.35;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Random feasible correspondences: convex combinations of random binary
// vertices (exactly feasible by total unimodularity).

inline VectorXd randomBinaryFeasible(int m, int n, int k, pomatch::Rng& rng) {
    std::vector<int> rows(m), cols(n);
    for (int i = 0; i < m; ++i) rows[i] = i;
    for (int j = 0; j < n; ++j) cols[j] = j;
    for (int i = m - 1; i > 0; --i) std::swap(rows[i], rows[rng.uniform_int(0, i)]);
    for (int j = n - 1; j > 0; --j) std::swap(cols[j], cols[rng.uniform_int(0, j)]);
    std::vector<std::pair<int, int>> pairs;
    for (int q = 0; q < k; ++q) pairs.emplace_back(rows[q], cols[q]);
    return pomatch::binary_from_pairs(pairs, m, n);
}

inline VectorXd randomFeasible(int m, int n, int k, pomatch::Rng& rng, int verts = 5) {
    VectorXd p = VectorXd::Zero(m * n);
    double wsum = 0.0;
    for (int v = 0; v < verts; ++v) {
        const double w = -std::log(1.0 - rng.uniform());
        p += w * randomBinaryFeasible(m, n, k, rng);
        wsum += w;
    }
    return p / wsum;
}

inline pomatch::PointSet randomPointSet(int count, int d, pomatch::Rng& rng,
                                        double span = 1.0) {
    MatrixXd pts(count, d);
    for (int i = 0; i < count; ++i)
        for (int c = 0; c < d; ++c) pts(i, c) = rng.uniform(-span, span);
    return pomatch::PointSet(std::move(pts));
}

// ---------------------------------------------------------------------------
// Barycentric coordinates w.r.t. an n_u-simplex given as columns (affinely
// independent). Unique solution of [V; 1^T] alpha = [u; 1].

inline VectorXd barycentric(const MatrixXd& vertices, const VectorXd& u) {
    const int nu = static_cast<int>(vertices.rows());
    MatrixXd A(nu + 1, vertices.cols());
    A.topRows(nu) = vertices;
    A.bottomRows(1).setOnes();
    VectorXd b(nu + 1);
    b.head(nu) = u;
    b[nu] = 1.0;
    return A.fullPivLu().solve(b);
}

// Exact simplex volume via the edge-matrix determinant.
inline double simplexVolume(const MatrixXd& vertices) {
    const int nu = static_cast<int>(vertices.rows());
    MatrixXd E(nu, nu);
    for (int j = 0; j < nu; ++j) E.col(j) = vertices.col(j) - vertices.col(nu);
    double fact = 1.0;
    for (int k = 2; k <= nu; ++k) fact *= k;
    return std::abs(E.determinant()) / fact;
}

}  // namespace oracles
