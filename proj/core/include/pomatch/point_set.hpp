// point_set.hpp - labeled point sets and the plain-text point file format.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "pomatch/types.hpp"

namespace pomatch {

// Ordered list of d-dimensional points (d in {2,3}), one row per point.
// `labels` keeps the provenance of each point (defaults to 0..N-1); synthetic
// generators use it to track prototype indices through occlusion and outliers.
struct PointSet {
    Eigen::MatrixXd pts;      // N x d
    std::vector<int> labels;  // size N

    PointSet() = default;
    explicit PointSet(Eigen::MatrixXd points);

    int size() const { return static_cast<int>(pts.rows()); }
    int dim() const { return static_cast<int>(pts.cols()); }

    Eigen::RowVectorXd centroid() const;
    // Largest pairwise distance; O(N^2).
    double diameter() const;
};

// One point per line, whitespace-separated decimals, '#' starts a comment,
// dimension inferred from the first data line. Values are printed with the
// shortest decimal representation that round-trips, so save/load is bit-exact.
PointSet load_point_file(const std::string& path);
void save_point_file(const PointSet& ps, const std::string& path);

// Parse from an already-read buffer (used by load_point_file and tests).
PointSet parse_point_text(const std::string& text, const std::string& originName = "<string>");
std::string format_point_text(const PointSet& ps);

}  // namespace pomatch
