#include "pomatch/reduced_energy.hpp"

#include <Eigen/QR>

namespace pomatch {

QrReduction qr_reduce(const Eigen::MatrixXd& stacked) {
    const Eigen::Index rows = stacked.rows();
    const Eigen::Index cols = stacked.cols();
    if (rows < cols)
        throw input_error("qr_reduce: stacked design has more columns (" +
                          std::to_string(cols) + ") than rows (" + std::to_string(rows) +
                          "); point sets too small for this transform family");

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
    QrReduction out;
    out.Q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    out.gamma = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();

    // Normalize signs so the diagonal of gamma is nonnegative.
    for (Eigen::Index k = 0; k < cols; ++k) {
        if (out.gamma(k, k) < 0.0) {
            out.gamma.row(k) = -out.gamma.row(k);
            out.Q.col(k) = -out.Q.col(k);
        }
    }

    const double scale = stacked.norm();
    for (Eigen::Index k = 0; k < cols; ++k) {
        if (std::abs(out.gamma(k, k)) <= 1e-12 * std::max(scale, 1e-300))
            throw input_error("qr_reduce: stacked design is rank deficient at column " +
                              std::to_string(k) + " (degenerate point configuration)");
    }
    return out;
}

}  // namespace pomatch
