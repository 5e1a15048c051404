#include "pomatch/bnb.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include <Eigen/LU>

#include "pomatch/assign.hpp"
#include "pomatch/parallel.hpp"
#include "pomatch/simplex_lp.hpp"

namespace pomatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Supporting-plane construction for one orthant. Returns the simplex without
// E_c values (filled after prepare_for_region), or nullopt when the orthant is
// degenerate (delta <= 0).
std::optional<Simplex> orthantSimplex(const ReducedEnergy& energy,
                                      const Eigen::VectorXd& v0, uint32_t mask) {
    const int nu = energy.dim_u();
    const int m = energy.model_size(), n = energy.scene_size();
    Eigen::VectorXd h(nu);
    const double invSqrt = 1.0 / std::sqrt(static_cast<double>(nu));
    for (int j = 0; j < nu; ++j) h[j] = ((mask >> j) & 1u) ? invSqrt : -invSqrt;

    // max { h . (Q^T p - v0) | p feasible } is a k-cardinality assignment with
    // per-cell gain (Q h)_(i,j).
    const Eigen::VectorXd gain = energy.Q() * h;
    Assignment best = maximize_k_lap({cell_matrix(gain, m, n), energy.pair_count()});
    const double delta = best.value - h.dot(v0);
    if (!(delta > 0.0)) return std::nullopt;

    Simplex s;
    s.vertices.resize(nu, nu + 1);
    const double edge = delta * std::sqrt(static_cast<double>(nu));
    for (int j = 0; j < nu; ++j) {
        s.vertices.col(j) = v0;
        s.vertices(j, j) += ((mask >> j) & 1u) ? edge : -edge;
    }
    s.vertices.col(nu) = v0;
    s.depth = 0;
    return s;
}

std::vector<Simplex> buildRegion(ReducedEnergy& energy, int workers) {
    const int nu = energy.dim_u();
    if (nu > 20)
        throw input_error("initial_region: 2^n_u orthants with n_u = " +
                          std::to_string(nu) + " exceeds the enumeration guard (20)");
    const Eigen::VectorXd p0 =
        fuzziest_p(energy.model_size(), energy.scene_size(), energy.pair_count());
    const Eigen::VectorXd v0 = energy.Q().transpose() * p0;

    const uint32_t count = 1u << nu;
    std::vector<std::optional<Simplex>> slots(count);
    parallel_for(static_cast<int>(count), workers,
                 [&](int i) { slots[i] = orthantSimplex(energy, v0, static_cast<uint32_t>(i)); });

    std::vector<Simplex> region;
    std::vector<Eigen::VectorXd> vertices;
    vertices.push_back(v0);
    for (auto& slot : slots) {
        if (!slot) continue;
        for (int j = 0; j < nu; ++j) vertices.push_back(slot->vertices.col(j));
        region.push_back(std::move(*slot));
    }
    if (region.empty()) return region;

    energy.prepare_for_region(vertices);

    const double ecV0 = energy.eval_Ec(v0);
    parallel_for(static_cast<int>(region.size()), workers, [&](int i) {
        Simplex& s = region[i];
        s.ecValues.resize(nu + 1);
        for (int j = 0; j < nu; ++j) s.ecValues[j] = energy.eval_Ec(s.vertices.col(j));
        s.ecValues[nu] = ecV0;
    });
    return region;
}

}  // namespace

std::vector<Simplex> initial_region(ReducedEnergy& energy, int workers) {
    auto region = buildRegion(energy, workers);
    if (region.empty())
        throw input_error(
            "initial_region: every supporting-plane distance is zero; the feasible "
            "region is the single fuzziest correspondence");
    return region;
}

double choose_H(const std::vector<Eigen::VectorXd>& vertices, ReducedEnergyReg& energy) {
    return energy.choose_h(vertices);
}

BoundResult lower_bound_lp(const Simplex& s, const ReducedEnergy& energy) {
    const int nu = energy.dim_u();
    const int m = energy.model_size(), n = energy.scene_size();
    const Eigen::Index mn = static_cast<Eigen::Index>(m) * n;
    const Eigen::Index nvar = nu + 1 + mn;  // [alpha; p]

    LinearProgram lp;
    lp.c.resize(nvar);
    lp.c.head(nu + 1) = s.ecValues;
    lp.c.tail(mn) = energy.linear_cost();

    // sum_i alpha_i v_i = Q^T p ; sum alpha = 1 ; sum p = np.
    lp.Aeq = Eigen::MatrixXd::Zero(nu + 2, nvar);
    lp.beq = Eigen::VectorXd::Zero(nu + 2);
    lp.Aeq.topLeftCorner(nu, nu + 1) = s.vertices;
    lp.Aeq.block(0, nu + 1, nu, mn) = -energy.Q().transpose();
    lp.Aeq.row(nu).head(nu + 1).setOnes();
    lp.beq[nu] = 1.0;
    lp.Aeq.row(nu + 1).tail(mn).setOnes();
    lp.beq[nu + 1] = energy.pair_count();

    // Row and column sums of P at most one.
    lp.Aineq = Eigen::MatrixXd::Zero(m + n, nvar);
    lp.bineq = Eigen::VectorXd::Ones(m + n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) lp.Aineq(i, nu + 1 + cell_index(i, j, n)) = 1.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) lp.Aineq(m + j, nu + 1 + cell_index(i, j, n)) = 1.0;

    LpSolution sol = solve_dense_lp(lp);
    BoundResult out;
    if (sol.status == LpStatus::Infeasible) {
        out.feasible = false;
        out.bound = kInf;
        return out;
    }
    out.bound = sol.value;
    out.witness = sol.x.tail(mn);
    return out;
}

BoundResult lower_bound_fast(const Simplex& s, const ReducedEnergy& energy) {
    const int nu = energy.dim_u();
    const int m = energy.model_size(), n = energy.scene_size();

    const Eigen::VectorXd anchor = s.vertices.col(nu);
    const double ecAnchor = s.ecValues[nu];
    Eigen::MatrixXd edges = s.vertices.leftCols(nu).colwise() - anchor;
    Eigen::RowVectorXd ecDiff =
        (s.ecValues.head(nu).array() - ecAnchor).matrix().transpose();

    Eigen::FullPivLU<Eigen::MatrixXd> lu(edges.transpose());
    if (!lu.isInvertible())
        throw std::logic_error("lower_bound_fast: degenerate simplex edge matrix");
    const Eigen::VectorXd g = lu.solve(ecDiff.transpose());

    // min over Omega of g . (Q^T p - anchor) + E_c(anchor) + l . p.
    const Eigen::VectorXd cellCost = energy.Q() * g + energy.linear_cost();
    Assignment a = solve_k_lap({cell_matrix(cellCost, m, n), energy.pair_count()});

    BoundResult out;
    out.bound = a.value + ecAnchor - g.dot(anchor);
    out.witness = binary_from_pairs(a.pairs, m, n);
    return out;
}

std::pair<Simplex, Simplex> bisect(const Simplex& s, const ReducedEnergy& energy) {
    const int nv = static_cast<int>(s.vertices.cols());
    int ea = 0, eb = 1;
    double bestLen = -1.0;
    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b) {
            const double len = (s.vertices.col(a) - s.vertices.col(b)).squaredNorm();
            if (len > bestLen) {
                bestLen = len;
                ea = a;
                eb = b;
            }
        }
    const Eigen::VectorXd mid = 0.5 * (s.vertices.col(ea) + s.vertices.col(eb));
    const double ecMid = energy.eval_Ec(mid);

    std::pair<Simplex, Simplex> children{s, s};
    children.first.vertices.col(ea) = mid;
    children.first.ecValues[ea] = ecMid;
    children.second.vertices.col(eb) = mid;
    children.second.ecValues[eb] = ecMid;
    for (Simplex* c : {&children.first, &children.second}) {
        c->depth = s.depth + 1;
        c->lowerBound = 0.0;
        c->witness.resize(0);
    }
    return children;
}

namespace {

struct Incumbent {
    double e = kInf;
    Eigen::VectorXd p;

    void offer(double candE, const Eigen::VectorXd& candP) {
        if (candE < e) {
            e = candE;
            p = candP;
        }
    }
};

}  // namespace

BnBResult minimize(ReducedEnergy& energy, const BnBConfig& config) {
    if (config.epsilon < 0.0) throw input_error("minimize: epsilon must be nonnegative");
    if (config.maxDepth < 0) throw input_error("minimize: maxDepth must be nonnegative");
    if (config.workers < 1) throw input_error("minimize: workers must be at least 1");
    if (config.batchSize < 1) throw input_error("minimize: batchSize must be at least 1");

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsedMs = [&t0] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         t0)
            .count();
    };
    const int m = energy.model_size(), n = energy.scene_size(), np = energy.pair_count();

    BnBResult result;
    std::vector<Simplex> fresh = buildRegion(energy, config.workers);
    if (fresh.empty()) {
        // U is the single point Q^T p0; the fuzziest correspondence is the only
        // feasible one.
        const Eigen::VectorXd p0 = fuzziest_p(m, n, np);
        energy.prepare_for_region({energy.Q().transpose() * p0});
        result.bestP = p0;
        result.bestE = energy.eval_E_unchecked(p0);
        result.boundsHistory.emplace_back(result.bestE, result.bestE);
        result.certificate = Certificate::EpsOptimal;
        result.wallMs = elapsedMs();
        return result;
    }

    Incumbent incumbent;
    const bool useLp = config.scheme == BoundScheme::Lp;
    // Frontier ordered by (lower bound, insertion id): deterministic argmin and
    // range pruning.
    std::map<std::pair<double, long>, Simplex> frontier;
    long nextId = 0;
    bool depthDropped = false;
    Certificate cert = Certificate::EpsOptimal;

    // Alternation polish: strictly monotone in E, stops at a fixed point.
    auto polish = [&](Eigen::VectorXd p, double e) {
        for (int round = 0; round < 25; ++round) {
            const Eigen::VectorXd next = energy.improve_correspondence(p);
            const double ne = energy.eval_E_unchecked(next);
            if (ne >= e - 1e-12) break;
            p = next;
            e = ne;
        }
        incumbent.offer(e, p);
    };

    // Bound a wave of simplexes (parallel), update the incumbent (serial, in
    // index order), insert survivors.
    auto boundWave = [&](std::vector<Simplex>& wave) {
        std::vector<BoundResult> bounds(wave.size());
        parallel_for(static_cast<int>(wave.size()), config.workers, [&](int i) {
            bounds[i] =
                useLp ? lower_bound_lp(wave[i], energy) : lower_bound_fast(wave[i], energy);
        });
        for (size_t i = 0; i < wave.size(); ++i) {
            if (!bounds[i].feasible) continue;  // disjoint from U
            Simplex& s = wave[i];
            s.lowerBound = bounds[i].bound;
            s.witness = bounds[i].witness;
            const double we = energy.eval_E_unchecked(s.witness);
            incumbent.offer(we, s.witness);
            Eigen::VectorXd binaryCand = s.witness;
            double binaryE = we;
            if (useLp && !is_binary(s.witness)) {
                if (config.roundWitness) {
                    Assignment rounded = solve_k_lap({-cell_matrix(s.witness, m, n), np});
                    binaryCand = binary_from_pairs(rounded.pairs, m, n);
                    binaryE = energy.eval_E_unchecked(binaryCand);
                    incumbent.offer(binaryE, binaryCand);
                } else {
                    binaryCand.resize(0);
                }
            }
            if (config.polishWitness && binaryCand.size() > 0) polish(binaryCand, binaryE);
            s.witness.resize(0);  // keep the frontier small; the incumbent has a copy
            frontier.emplace(std::make_pair(s.lowerBound, nextId++), std::move(s));
        }
    };

    boundWave(fresh);

    for (;;) {
        ++result.iterations;
        // Prune everything that cannot beat the incumbent by more than epsilon.
        frontier.erase(frontier.lower_bound({incumbent.e - config.epsilon, -1L}),
                       frontier.end());

        const double globalLower =
            frontier.empty() ? incumbent.e - config.epsilon : frontier.begin()->first.first;
        result.boundsHistory.emplace_back(globalLower, incumbent.e);

        if (frontier.empty()) {
            cert = Certificate::EpsOptimal;
            break;
        }
        if (config.maxIterations > 0 && result.iterations >= config.maxIterations) {
            cert = Certificate::IterationCapped;
            break;
        }

        // Depth termination: stop once the most promising simplex has been
        // refined maxDepth times. The epsilon certificate (frontier emptied by
        // pruning) is checked first and wins on easy instances; when the depth
        // rule fires the solution is approximate, without a certificate.
        if (frontier.begin()->second.depth >= config.maxDepth) {
            depthDropped = true;
            cert = Certificate::DepthTerminated;
            break;
        }

        std::vector<Simplex> children;
        for (int b = 0; b < config.batchSize && !frontier.empty(); ++b) {
            if (frontier.begin()->second.depth >= config.maxDepth) break;
            Simplex chosen = std::move(frontier.begin()->second);
            frontier.erase(frontier.begin());
            ++result.simplexesExpanded;
            auto kids = bisect(chosen, energy);
            children.push_back(std::move(kids.first));
            children.push_back(std::move(kids.second));
        }
        boundWave(children);
    }

    result.bestP = incumbent.p;
    result.bestE = incumbent.e;
    result.certificate = cert;
    result.wallMs = elapsedMs();
    return result;
}

}  // namespace pomatch
