// types.hpp - error categories and the recovered-transform type.
#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace pomatch {

// Malformed user input: bad files, out-of-range parameters, dimension mismatches.
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numeric precondition failed, e.g. an indefinite matrix reached a Cholesky
// solve. `detail` carries a diagnostic value such as a minimum-eigenvalue estimate.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg, double detail = 0.0)
        : std::runtime_error(msg), detail_(detail) {}
    double detail() const { return detail_; }

private:
    double detail_;
};

// Recovered spatial transform T(x) = linear * x + translation, together with the
// energy of the correspondence it was recovered from. For similarity transforms
// `scale` and `rotation` hold the decomposition linear = scale * rotation.
struct TransformEstimate {
    std::string kind;             // "similarity2d", "affine2d", "scaleTrans3d", "similarity"
    Eigen::VectorXd theta;        // family parameters (regularized families only)
    double scale = 1.0;
    Eigen::MatrixXd rotation;     // d x d proper rotation (empty when not applicable)
    Eigen::MatrixXd linear;       // d x d linear part, always set
    Eigen::VectorXd translation;  // d
    double energy = 0.0;

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return linear * x + translation; }
};

}  // namespace pomatch
