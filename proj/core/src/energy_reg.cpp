#include "pomatch/energy_reg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pomatch/assign.hpp"

namespace pomatch {

TransformFamilyReg TransformFamilyReg::make(RegFamilyKind kind) {
    TransformFamilyReg f;
    f.kind = kind;
    switch (kind) {
        case RegFamilyKind::Similarity2d:
            f.d = 2;
            f.n_theta = 2;
            f.theta0 = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
            break;
        case RegFamilyKind::Affine2d:
            f.d = 2;
            f.n_theta = 4;
            f.theta0 = (Eigen::VectorXd(4) << 1.0, 0.0, 0.0, 1.0).finished();
            break;
        case RegFamilyKind::ScaleTrans3d:
            f.d = 3;
            f.n_theta = 3;
            f.theta0 = Eigen::VectorXd::Ones(3);
            break;
    }
    return f;
}

Eigen::MatrixXd TransformFamilyReg::jacobian(const Eigen::RowVectorXd& x) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d, n_theta);
    switch (kind) {
        case RegFamilyKind::Similarity2d:
            J << x[0], -x[1], x[1], x[0];
            break;
        case RegFamilyKind::Affine2d:
            J << x[0], x[1], 0, 0, 0, 0, x[0], x[1];
            break;
        case RegFamilyKind::ScaleTrans3d:
            J(0, 0) = x[0];
            J(1, 1) = x[1];
            J(2, 2) = x[2];
            break;
    }
    return J;
}

Eigen::MatrixXd TransformFamilyReg::linear_matrix(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, d);
    switch (kind) {
        case RegFamilyKind::Similarity2d:
            L << theta[0], -theta[1], theta[1], theta[0];
            break;
        case RegFamilyKind::Affine2d:
            L << theta[0], theta[1], theta[2], theta[3];
            break;
        case RegFamilyKind::ScaleTrans3d:
            L.diagonal() = theta;
            break;
    }
    return L;
}

const char* TransformFamilyReg::name() const {
    switch (kind) {
        case RegFamilyKind::Similarity2d: return "similarity2d";
        case RegFamilyKind::Affine2d: return "affine2d";
        case RegFamilyKind::ScaleTrans3d: return "scaleTrans3d";
    }
    return "?";
}

namespace {

// Drop rows that are multiples of the all-ones row (their product with feasible
// p is a constant), merge rows equal to a kept row up to sign.
void compressRows(const Eigen::MatrixXd& full, Eigen::MatrixXd& kept,
                  std::vector<RowMapEntry>& map) {
    const Eigen::Index rows = full.rows();
    const Eigen::Index mn = full.cols();
    std::vector<Eigen::Index> keptRows;
    map.assign(rows, RowMapEntry{});
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = full.row(r);
        const double c = row.mean();
        const double norm = row.norm();
        const double resid = (row.array() - c).matrix().norm();
        if (resid <= 1e-9 * norm || norm == 0.0) {
            map[r] = RowMapEntry{true, -1, 1.0, c};
            continue;
        }
        bool merged = false;
        for (size_t k = 0; k < keptRows.size() && !merged; ++k) {
            const auto cand = full.row(keptRows[k]);
            if ((row - cand).norm() <= 1e-9 * norm)
                map[r] = RowMapEntry{false, static_cast<int>(k), 1.0, 0.0}, merged = true;
            else if ((row + cand).norm() <= 1e-9 * norm)
                map[r] = RowMapEntry{false, static_cast<int>(k), -1.0, 0.0}, merged = true;
        }
        if (!merged) {
            map[r] = RowMapEntry{false, static_cast<int>(keptRows.size()), 1.0, 0.0};
            keptRows.push_back(r);
        }
    }
    kept.resize(static_cast<Eigen::Index>(keptRows.size()), mn);
    for (size_t k = 0; k < keptRows.size(); ++k) kept.row(static_cast<Eigen::Index>(k)) = full.row(keptRows[k]);
}

}  // namespace

DesignMatricesReg build_design_reg(const PointSet& X, const PointSet& Y,
                                   const TransformFamilyReg& family, int np) {
    const int m = X.size(), n = Y.size();
    if (m < 1 || n < 1) throw input_error("build_design_reg: empty point set");
    if (X.dim() != family.d || Y.dim() != family.d)
        throw input_error("build_design_reg: point dimension does not match the family");
    if (np < 1 || np > std::min(m, n))
        throw input_error("build_design_reg: n_p out of range 1..min(m,n)");

    const int d = family.d, nt = family.n_theta;
    const Eigen::Index mn = static_cast<Eigen::Index>(m) * n;
    Eigen::MatrixXd Bfull(nt * nt, mn), Dfull(nt * d, mn);
    DesignMatricesReg out;
    out.C.resize(nt, mn);
    out.F.resize(d, mn);

    for (int i = 0; i < m; ++i) {
        const Eigen::MatrixXd Ji = family.jacobian(X.pts.row(i));
        const Eigen::MatrixXd JtJ = Ji.transpose() * Ji;    // nt x nt
        const Eigen::MatrixXd JiT = Ji.transpose();         // nt x d
        for (int j = 0; j < n; ++j) {
            const Eigen::Index col = static_cast<Eigen::Index>(i) * n + j;
            for (int r = 0; r < nt; ++r)
                for (int s = 0; s < nt; ++s) Bfull(r * nt + s, col) = JtJ(r, s);
            for (int r = 0; r < nt; ++r)
                for (int s = 0; s < d; ++s) Dfull(r * d + s, col) = JiT(r, s);
            out.C.col(col) = JiT * Y.pts.row(j).transpose();
            out.F.col(col) = Y.pts.row(j).transpose();
        }
    }

    compressRows(Bfull, out.B2, out.bMap);
    compressRows(Dfull, out.D2, out.dMap);
    return out;
}

ReducedEnergyReg::ReducedEnergyReg(const PointSet& X, const PointSet& Y,
                                   TransformFamilyReg family, int np)
    : family_(std::move(family)) {
    m_ = X.size();
    n_ = Y.size();
    np_ = np;
    xRows_ = X.pts;
    yRows_ = Y.pts;
    design_ = build_design_reg(X, Y, family_, np);
    nB2_ = static_cast<int>(design_.B2.rows());
    nD2_ = static_cast<int>(design_.D2.rows());

    const Eigen::Index mn = static_cast<Eigen::Index>(m_) * n_;
    const int nu = nB2_ + nD2_ + family_.n_theta + family_.d;
    Eigen::MatrixXd stacked(mn, nu);
    stacked << design_.B2.transpose(), design_.D2.transpose(), design_.C.transpose(),
        design_.F.transpose();
    auto qr = qr_reduce(stacked);
    Q_ = std::move(qr.Q);
    gamma_ = std::move(qr.gamma);

    ell_.resize(mn);
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < n_; ++j)
            ell_[cell_index(i, j, n_)] = Y.pts.row(j).squaredNorm();
}

ReducedEnergyReg::Blocks ReducedEnergyReg::split(const Eigen::VectorXd& gtu) const {
    Blocks b;
    const int nt = family_.n_theta, d = family_.d;
    b.wB2 = gtu.segment(0, nB2_);
    b.wD2 = gtu.segment(nB2_, nD2_);
    b.wC = gtu.segment(nB2_ + nD2_, nt);
    b.wF = gtu.segment(nB2_ + nD2_ + nt, d);
    return b;
}

Eigen::MatrixXd ReducedEnergyReg::matB(const Eigen::VectorXd& wB2) const {
    const int nt = family_.n_theta;
    Eigen::MatrixXd M(nt, nt);
    for (int r = 0; r < nt; ++r)
        for (int s = 0; s < nt; ++s) {
            const RowMapEntry& e = design_.bMap[r * nt + s];
            M(r, s) = e.isConstant ? e.constant * np_ : e.sign * wB2[e.keptIndex];
        }
    return M;
}

Eigen::MatrixXd ReducedEnergyReg::matD(const Eigen::VectorXd& wD2) const {
    const int nt = family_.n_theta, d = family_.d;
    Eigen::MatrixXd M(nt, d);
    for (int r = 0; r < nt; ++r)
        for (int s = 0; s < d; ++s) {
            const RowMapEntry& e = design_.dMap[r * d + s];
            M(r, s) = e.isConstant ? e.constant * np_ : e.sign * wD2[e.keptIndex];
        }
    return M;
}

Eigen::MatrixXd ReducedEnergyReg::build_A(const Eigen::VectorXd& u) const {
    const Eigen::VectorXd gtu = gamma_.transpose() * u;
    Blocks b = split(gtu);
    const Eigen::MatrixXd D = matD(b.wD2);
    return matB(b.wB2) - D * D.transpose() / np_;
}

Eigen::VectorXd ReducedEnergyReg::build_b(const Eigen::VectorXd& u) const {
    const Eigen::VectorXd gtu = gamma_.transpose() * u;
    Blocks b = split(gtu);
    return b.wC - matD(b.wD2) * b.wF / np_;
}

double ReducedEnergyReg::eval_Ec(const Eigen::VectorXd& u) const {
    const Eigen::VectorXd gtu = gamma_.transpose() * u;
    Blocks blk = split(gtu);
    const Eigen::MatrixXd D = matD(blk.wD2);
    const Eigen::MatrixXd A = matB(blk.wB2) - D * D.transpose() / np_;
    const Eigen::VectorXd bvec = blk.wC - D * blk.wF / np_;

    const int nt = family_.n_theta;
    Eigen::MatrixXd M = A + h_ * Eigen::MatrixXd::Identity(nt, nt);
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
        const double minEig = es.eigenvalues().minCoeff();
        throw numeric_error("eval_Ec: A(u)+H is not positive definite (min eigenvalue " +
                                std::to_string(minEig) + "); H was chosen too small",
                            minEig);
    }
    const Eigen::VectorXd rhs = bvec + h_ * family_.theta0;
    return -rhs.dot(llt.solve(rhs)) - blk.wF.squaredNorm() / np_;
}

double ReducedEnergyReg::choose_h(const std::vector<Eigen::VectorXd>& vertices) {
    double lambda0 = 0.0;
    for (const auto& v : vertices) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_A(v), Eigen::EigenvaluesOnly);
        lambda0 = std::min(lambda0, es.eigenvalues().minCoeff());
    }
    h_ = -lambda0 + kEpsilon0;
    return h_;
}

void ReducedEnergyReg::set_h(double h) { h_ = h; }

void ReducedEnergyReg::prepare_for_region(const std::vector<Eigen::VectorXd>& vertices) {
    choose_h(vertices);
}

TransformEstimate ReducedEnergyReg::recover_transform(const Eigen::VectorXd& p) const {
    require_feasible(p, m_, n_, np_);
    // Dense accumulation straight from p; cheap at recovery time and avoids any
    // dependence on the QR path.
    const int nt = family_.n_theta, d = family_.d;
    Eigen::MatrixXd sumJtJ = Eigen::MatrixXd::Zero(nt, nt);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nt, d);  // sum_i (P1)_i J(x_i)^T
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nt);     // sum_ij p_ij J(x_i)^T y_j
    Eigen::VectorXd yw = Eigen::VectorXd::Zero(d);     // sum_ij p_ij y_j
    for (int i = 0; i < m_; ++i) {
        double rowSum = 0.0;
        Eigen::VectorXd ywRow = Eigen::VectorXd::Zero(d);
        for (int j = 0; j < n_; ++j) {
            const double pij = p[cell_index(i, j, n_)];
            if (pij == 0.0) continue;
            rowSum += pij;
            ywRow += pij * yRows_.row(j).transpose();
        }
        const Eigen::MatrixXd JiT = family_.jacobian(xRows_.row(i)).transpose();
        sumJtJ += rowSum * (JiT * JiT.transpose()).eval();
        M += rowSum * JiT;
        c += JiT * ywRow;
        yw += ywRow;
    }
    const Eigen::MatrixXd A = sumJtJ - M * M.transpose() / np_;
    const Eigen::VectorXd b = c - M * yw / np_;

    Eigen::MatrixXd Areg = A + h_ * Eigen::MatrixXd::Identity(nt, nt);
    Eigen::LLT<Eigen::MatrixXd> llt(Areg);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Areg, Eigen::EigenvaluesOnly);
        throw numeric_error("recover_transform: A(P)+H not positive definite",
                            es.eigenvalues().minCoeff());
    }
    const Eigen::VectorXd theta = llt.solve(b + h_ * family_.theta0);

    TransformEstimate est;
    est.kind = family_.name();
    est.theta = theta;
    est.linear = family_.linear_matrix(theta);
    est.translation = (yw - M.transpose() * theta) / np_;
    if (family_.kind == RegFamilyKind::Similarity2d) {
        est.scale = theta.norm();
        if (est.scale > 0.0) est.rotation = est.linear / est.scale;
    }
    est.energy = eval_E_unchecked(p);
    return est;
}

Eigen::VectorXd ReducedEnergyReg::improve_correspondence(const Eigen::VectorXd& p) const {
    // Minimizing E over P at a fixed transform is a k-cardinality assignment on
    // the squared residuals.
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
