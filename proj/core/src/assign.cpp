#include "pomatch/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pomatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Jonker-Volgenant 1987 for dense square matrices: column reduction, reduction
// transfer, two augmenting-row-reduction passes, then shortest augmenting paths.
// Ties in the shortest-path column selection are broken toward the lowest
// column index so results are reproducible.
std::vector<int> lapjv(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<int> rowsol(n, -1), colsol(n, -1);
    std::vector<double> v(n, 0.0);

    // Column reduction, reverse column order.
    std::vector<int> matches(n, 0);
    for (int j = n - 1; j >= 0; --j) {
        double minv = cost(0, j);
        int imin = 0;
        for (int i = 1; i < n; ++i) {
            if (cost(i, j) < minv) {
                minv = cost(i, j);
                imin = i;
            }
        }
        v[j] = minv;
        if (++matches[imin] == 1) {
            rowsol[imin] = j;
            colsol[j] = imin;
        } else {
            colsol[j] = -1;
        }
    }

    // Reduction transfer from rows assigned exactly once.
    std::vector<int> freeRows(n);
    int numFree = 0;
    for (int i = 0; i < n; ++i) {
        if (matches[i] == 0) {
            freeRows[numFree++] = i;
        } else if (matches[i] == 1) {
            int j1 = rowsol[i];
            double minv = kInf;
            for (int j = 0; j < n; ++j)
                if (j != j1) minv = std::min(minv, cost(i, j) - v[j]);
            if (minv < kInf) v[j1] -= minv;
        }
    }

    // Augmenting row reduction, two passes.
    for (int pass = 0; pass < 2 && numFree > 0; ++pass) {
        int prevNumFree = numFree;
        numFree = 0;
        int k = 0;
        while (k < prevNumFree) {
            int i = freeRows[k];
            ++k;
            // First and second minima of the reduced cost in row i.
            double umin = cost(i, 0) - v[0];
            int j1 = 0;
            double usubmin = kInf;
            int j2 = -1;
            for (int j = 1; j < n; ++j) {
                double h = cost(i, j) - v[j];
                if (h < usubmin) {
                    if (h >= umin) {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        j2 = j1;
                        umin = h;
                        j1 = j;
                    }
                }
            }
            int i0 = colsol[j1];
            if (umin < usubmin) {
                v[j1] -= usubmin - umin;
            } else if (i0 >= 0 && j2 >= 0) {
                j1 = j2;
                i0 = colsol[j2];
            }
            rowsol[i] = j1;
            colsol[j1] = i;
            if (i0 >= 0) {
                if (umin < usubmin)
                    freeRows[--k] = i0;  // redo immediately with the bumped row
                else
                    freeRows[numFree++] = i0;
            }
        }
    }

    // Shortest augmenting path for each remaining free row.
    std::vector<double> d(n);
    std::vector<int> pred(n), collist(n);
    for (int f = 0; f < numFree; ++f) {
        int freeRow = freeRows[f];
        for (int j = 0; j < n; ++j) {
            d[j] = cost(freeRow, j) - v[j];
            pred[j] = freeRow;
            collist[j] = j;
        }
        int low = 0, up = 0, last = 0;
        int endOfPath = -1;
        double minv = 0.0;
        bool found = false;
        do {
            if (up == low) {
                last = low - 1;
                minv = d[collist[up++]];
                for (int k = up; k < n; ++k) {
                    int j = collist[k];
                    double h = d[j];
                    if (h <= minv) {
                        if (h < minv) {
                            up = low;
                            minv = h;
                        }
                        collist[k] = collist[up];
                        collist[up++] = j;
                    }
                }
                // Among the minimum columns prefer an unassigned one with the
                // lowest column index.
                int best = -1;
                for (int k = low; k < up; ++k) {
                    int j = collist[k];
                    if (colsol[j] < 0 && (best < 0 || j < best)) best = j;
                }
                if (best >= 0) {
                    endOfPath = best;
                    found = true;
                }
            }
            if (!found) {
                int j1 = collist[low];
                ++low;
                int i = colsol[j1];
                double h = cost(i, j1) - v[j1] - minv;
                for (int k = up; k < n; ++k) {
                    int j = collist[k];
                    double v2 = cost(i, j) - v[j] - h;
                    if (v2 < d[j]) {
                        pred[j] = i;
                        if (v2 == minv) {
                            if (colsol[j] < 0) {
                                endOfPath = j;
                                found = true;
                                break;
                            }
                            collist[k] = collist[up];
                            collist[up++] = j;
                        }
                        d[j] = v2;
                    }
                }
            }
        } while (!found);

        for (int k = 0; k <= last; ++k) {
            int j1 = collist[k];
            v[j1] += d[j1] - minv;
        }

        // Flip assignments along the alternating path.
        int i;
        do {
            i = pred[endOfPath];
            colsol[endOfPath] = i;
            int j1 = endOfPath;
            endOfPath = rowsol[i];
            rowsol[i] = j1;
        } while (i != freeRow);
    }
    return rowsol;
}

Assignment assignmentFromPairs(const Eigen::MatrixXd& cost,
                               std::vector<std::pair<int, int>> pairs) {
    Assignment a;
    a.pairs = std::move(pairs);
    a.value = 0.0;
    for (auto [i, j] : a.pairs) a.value += cost(i, j);
    return a;
}

}  // namespace

Assignment solve_lap(const Eigen::MatrixXd& cost) {
    if (cost.rows() == 0 || cost.rows() != cost.cols())
        throw input_error("solve_lap: cost matrix must be square and non-empty");
    if (!cost.allFinite()) throw input_error("solve_lap: cost matrix must be finite");
    auto rowsol = lapjv(cost);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(rowsol.size());
    for (int i = 0; i < static_cast<int>(rowsol.size()); ++i) pairs.emplace_back(i, rowsol[i]);
    return assignmentFromPairs(cost, std::move(pairs));
}

Assignment solve_k_lap(const AssignmentProblem& prob) {
    const int m = static_cast<int>(prob.cost.rows());
    const int n = static_cast<int>(prob.cost.cols());
    if (m == 0 || n == 0) throw input_error("solve_k_lap: empty cost matrix");
    if (!prob.cost.allFinite()) throw input_error("solve_k_lap: cost matrix must be finite");
    if (prob.k < 1 || prob.k > std::min(m, n))
        throw input_error("solve_k_lap: cardinality k out of range 1..min(m,n)");

    const int k = prob.k;
    const int N = m + n - k;
    // Forbidden dummy-dummy cells get a finite big-M; any assignment avoiding
    // them beats any assignment using one.
    const double bigM = (m + n) * (prob.cost.cwiseAbs().maxCoeff() + 1.0);
    Eigen::MatrixXd sq(N, N);
    sq.topLeftCorner(m, n) = prob.cost;
    if (N > n) sq.topRightCorner(m, N - n).setZero();
    if (N > m) sq.bottomLeftCorner(N - m, n).setZero();
    if (N > m && N > n) sq.bottomRightCorner(N - m, N - n).setConstant(bigM);

    auto rowsol = lapjv(sq);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(k);
    for (int i = 0; i < m; ++i)
        if (rowsol[i] < n) pairs.emplace_back(i, rowsol[i]);
    if (static_cast<int>(pairs.size()) != k)
        throw std::logic_error("solve_k_lap: dummy transformation produced wrong cardinality");
    return assignmentFromPairs(prob.cost, std::move(pairs));
}

Assignment maximize_k_lap(const AssignmentProblem& prob) {
    AssignmentProblem neg{-prob.cost, prob.k};
    Assignment a = solve_k_lap(neg);
    return assignmentFromPairs(prob.cost, std::move(a.pairs));
}

}  // namespace pomatch
