#include "pomatch/energy_sim.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include "pomatch/assign.hpp"

namespace pomatch {

namespace {

// tr(R H) = r^T W vec(H) for 2x2 H, r = [cos b, sin b].
inline Eigen::Vector2d wVec(const Eigen::Matrix2d& H) {
    return {H(0, 0) + H(1, 1), H(0, 1) - H(1, 0)};
}

inline Eigen::Matrix2d rotationFromUnit(const Eigen::Vector2d& r) {
    Eigen::Matrix2d R;
    R << r[0], -r[1], r[1], r[0];
    return R;
}

}  // namespace

Eigen::MatrixXd optimal_rotation(const Eigen::MatrixXd& G, bool* ambiguous) {
    const int d = static_cast<int>(G.rows());
    if (ambiguous) *ambiguous = false;
    const double normG = G.norm();
    if (!(normG > 1e-13)) return Eigen::MatrixXd::Identity(d, d);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G.transpose(),
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (ambiguous && svd.singularValues().minCoeff() < 1e-12 * normG) *ambiguous = true;
    const Eigen::MatrixXd& U = svd.matrixU();
    const Eigen::MatrixXd& V = svd.matrixV();
    Eigen::VectorXd diag = Eigen::VectorXd::Ones(d);
    diag[d - 1] = (U * V.transpose()).determinant() >= 0.0 ? 1.0 : -1.0;
    return U * diag.asDiagonal() * V.transpose();
}

ScaleMin min_scale_quadratic(double c2, double c1, const ScaleRange& range) {
    auto f = [&](double s) { return s * s * c2 - 2.0 * s * c1; };
    ScaleMin best{range.lo, f(range.lo)};
    auto consider = [&](double s) {
        double v = f(s);
        if (v < best.value) best = ScaleMin{s, v};
    };
    if (c2 > 0.0) {
        double st = c1 / c2;
        if (st > range.lo && st < range.hi) consider(st);
    }
    consider(range.hi);
    return best;
}

DesignMatricesSim build_design_sim(const PointSet& X, const PointSet& Y,
                                   bool specialized2d) {
    const int d = X.dim();
    if (d != Y.dim()) throw input_error("build_design_sim: dimension mismatch");
    if (d != 2 && d != 3) throw input_error("build_design_sim: d must be 2 or 3");
    if (specialized2d && d != 2)
        throw input_error("build_design_sim: the specialized form is 2D only");
    const int m = X.size(), n = Y.size();
    if (m < 1 || n < 1) throw input_error("build_design_sim: empty point set");

    const Eigen::Index mn = static_cast<Eigen::Index>(m) * n;
    DesignMatricesSim out;
    out.specialized2d = specialized2d;
    out.B.resize(specialized2d ? 2 : d * d, mn);
    out.C.resize(d, mn);
    out.D.resize(d, mn);
    out.a.resize(mn);

    for (int i = 0; i < m; ++i) {
        const auto xi = X.pts.row(i);
        for (int j = 0; j < n; ++j) {
            const auto yj = Y.pts.row(j);
            const Eigen::Index col = static_cast<Eigen::Index>(i) * n + j;
            if (specialized2d) {
                out.B(0, col) = xi[0] * yj[0] + xi[1] * yj[1];
                out.B(1, col) = xi[0] * yj[1] - xi[1] * yj[0];
            } else {
                for (int r = 0; r < d; ++r)
                    for (int s = 0; s < d; ++s) out.B(r * d + s, col) = xi[r] * yj[s];
            }
            out.C.col(col) = xi.transpose();
            out.D.col(col) = yj.transpose();
            out.a[col] = xi.squaredNorm();
        }
    }
    return out;
}

ReducedEnergySim::ReducedEnergySim(const PointSet& X, const PointSet& Y, int np,
                                   ScaleRange range, bool specialized2d)
    : range_(range) {
    if (!(range_.lo > 0.0) || !(range_.lo <= range_.hi))
        throw input_error("ReducedEnergySim: scale range must satisfy 0 < lo <= hi");
    m_ = X.size();
    n_ = Y.size();
    np_ = np;
    if (np_ < 1 || np_ > std::min(m_, n_))
        throw input_error("ReducedEnergySim: n_p out of range 1..min(m,n)");
    d_ = X.dim();
    design_ = build_design_sim(X, Y, specialized2d && d_ == 2);
    nB_ = static_cast<int>(design_.B.rows());
    xRows_ = X.pts;
    yRows_ = Y.pts;

    const Eigen::Index mn = static_cast<Eigen::Index>(m_) * n_;
    const int nu = nB_ + 2 * d_ + 1;
    Eigen::MatrixXd stacked(mn, nu);
    stacked << design_.B.transpose(), design_.C.transpose(), design_.D.transpose(),
        design_.a.transpose();
    auto qr = qr_reduce(stacked);
    Q_ = std::move(qr.Q);
    gamma_ = std::move(qr.gamma);

    ell_.resize(mn);
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < n_; ++j)
            ell_[cell_index(i, j, n_)] = Y.pts.row(j).squaredNorm();
}

ReducedEnergySim::Blocks ReducedEnergySim::split(const Eigen::VectorXd& gtu) const {
    Blocks b;
    b.wB = gtu.segment(0, nB_);
    b.wC = gtu.segment(nB_, d_);
    b.wD = gtu.segment(nB_ + d_, d_);
    b.wa = gtu[nB_ + 2 * d_];
    return b;
}

double ReducedEnergySim::inner_min(const Blocks& blk, Eigen::MatrixXd* rotOut,
                                   double* sOut) const {
    const double c2 = blk.wa - blk.wC.squaredNorm() / np_;
    double c1 = 0.0;
    Eigen::MatrixXd R;
    if (design_.specialized2d) {
        const Eigen::Matrix2d cross = blk.wC * blk.wD.transpose() / np_;
        const Eigen::Vector2d eta = blk.wB - wVec(cross);
        c1 = eta.norm();
        if (rotOut) R = c1 > 1e-13 ? rotationFromUnit(eta / c1)
                                   : Eigen::MatrixXd::Identity(2, 2);
    } else {
        Eigen::MatrixXd G(d_, d_);
        for (int r = 0; r < d_; ++r)
            for (int s = 0; s < d_; ++s) G(r, s) = blk.wB[r * d_ + s];
        G -= blk.wC * blk.wD.transpose() / np_;
        R = optimal_rotation(G);
        c1 = (R * G).trace();
    }
    ScaleMin sm = min_scale_quadratic(c2, c1, range_);
    if (rotOut) *rotOut = R;
    if (sOut) *sOut = sm.s;
    return sm.value;
}

double ReducedEnergySim::eval_Ec(const Eigen::VectorXd& u) const {
    Blocks blk = split(gamma_.transpose() * u);
    return -blk.wD.squaredNorm() / np_ + inner_min(blk, nullptr, nullptr);
}

TransformEstimate ReducedEnergySim::recover_transform(const Eigen::VectorXd& p) const {
    require_feasible(p, m_, n_, np_);
    // Blocks straight from p (identical to gamma^T Q^T p up to roundoff).
    Blocks blk;
    blk.wB = design_.B * p;
    blk.wC = design_.C * p;
    blk.wD = design_.D * p;
    blk.wa = design_.a.dot(p);

    Eigen::MatrixXd R;
    double s = 1.0;
    inner_min(blk, &R, &s);

    TransformEstimate est;
    est.kind = "similarity";
    est.scale = s;
    est.rotation = R;
    est.linear = s * R;
    est.translation = (blk.wD - s * R * blk.wC) / np_;
    est.energy = eval_E_unchecked(p);
    return est;
}

Eigen::VectorXd ReducedEnergySim::improve_correspondence(const Eigen::VectorXd& p) const {
    const TransformEstimate est = recover_transform(p);
    Eigen::MatrixXd cost(m_, n_);
    for (int i = 0; i < m_; ++i) {
        const Eigen::VectorXd ti = est.linear * xRows_.row(i).transpose() + est.translation;
        for (int j = 0; j < n_; ++j)
            cost(i, j) = (yRows_.row(j).transpose() - ti).squaredNorm();
    }
    Assignment a = solve_k_lap({cost, np_});
    return binary_from_pairs(a.pairs, m_, n_);
}

}  // namespace pomatch
