#include "pomatch/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include "pomatch/parallel.hpp"
#include "pomatch/rng.hpp"

namespace pomatch::synth {

namespace {

constexpr double kPi = std::numbers::pi;

void normalizeInPlace(PointSet& ps) {
    ps.pts.rowwise() -= ps.centroid();
    const double diam = ps.diameter();
    if (diam > 0.0) ps.pts /= diam;
}

// Closed fish-shaped curve: x = cos t - sin^2 t / sqrt 2, y = cos t sin t.
PointSet fishPrototype(int count) {
    Eigen::MatrixXd pts(count, 2);
    for (int i = 0; i < count; ++i) {
        const double t = 2.0 * kPi * i / count;
        pts(i, 0) = std::cos(t) - std::sin(t) * std::sin(t) / std::numbers::sqrt2;
        pts(i, 1) = std::cos(t) * std::sin(t);
    }
    return PointSet(std::move(pts));
}

// Glyph-like polyline: two bars and two diagonal strokes, sampled evenly by
// arc length.
PointSet glyphPrototype(int count) {
    struct Seg {
        Eigen::Vector2d a, b;
    };
    const std::vector<Seg> segs = {
        {{-0.55, 0.62}, {0.55, 0.62}},
        {{-0.85, 0.18}, {0.85, 0.18}},
        {{-0.04, 0.18}, {-0.72, -0.80}},
        {{0.04, 0.18}, {0.72, -0.80}},
    };
    double total = 0.0;
    for (const auto& s : segs) total += (s.b - s.a).norm();
    Eigen::MatrixXd pts(count, 2);
    int written = 0;
    double lenBefore = 0.0;
    for (size_t k = 0; k < segs.size(); ++k) {
        const double len = (segs[k].b - segs[k].a).norm();
        int quota = (k + 1 == segs.size())
                        ? count - written
                        : static_cast<int>(std::round(count * (lenBefore + len) / total)) -
                              written;
        for (int q = 0; q < quota; ++q) {
            const double t = (q + 0.5) / quota;
            pts.row(written++) = (segs[k].a + t * (segs[k].b - segs[k].a)).transpose();
        }
        lenBefore += len;
    }
    return PointSet(std::move(pts));
}

// Superellipsoid composite vaguely shaped like a standing quadruped: a body, a
// head and four legs, each sampled on a deterministic golden-angle spiral.
void sampleEllipsoid(Eigen::MatrixXd& pts, int& written, int quota,
                     const Eigen::Vector3d& center, const Eigen::Vector3d& radii,
                     double exponent) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int q = 0; q < quota; ++q) {
        const double z = 1.0 - 2.0 * (q + 0.5) / quota;  // [-1,1]
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * q;
        Eigen::Vector3d unit(r * std::cos(phi), r * std::sin(phi), z);
        // Superellipsoid rounding: push coordinates toward the exponent profile.
        for (int c = 0; c < 3; ++c) {
            const double u = unit[c];
            unit[c] = std::copysign(std::pow(std::abs(u), exponent), u);
        }
        pts.row(written++) = (center + radii.cwiseProduct(unit)).transpose();
    }
}

PointSet quadrupedPrototype(int count) {
    Eigen::MatrixXd pts(count, 3);
    int written = 0;
    const int body = count / 2;
    const int head = count / 10;
    const int perLeg = (count - body - head) / 4;
    const int rest = count - body - head - 3 * perLeg;  // last leg absorbs rounding
    sampleEllipsoid(pts, written, body, {0.0, 0.0, 0.35}, {0.95, 0.35, 0.30}, 0.8);
    sampleEllipsoid(pts, written, head, {1.05, 0.0, 0.72}, {0.28, 0.18, 0.22}, 1.0);
    const double legZ = -0.12;
    sampleEllipsoid(pts, written, perLeg, {0.70, 0.22, legZ}, {0.10, 0.10, 0.42}, 1.2);
    sampleEllipsoid(pts, written, perLeg, {0.70, -0.22, legZ}, {0.10, 0.10, 0.42}, 1.2);
    sampleEllipsoid(pts, written, perLeg, {-0.70, 0.22, legZ}, {0.10, 0.10, 0.42}, 1.2);
    sampleEllipsoid(pts, written, rest, {-0.70, -0.22, legZ}, {0.10, 0.10, 0.42}, 1.2);
    return PointSet(std::move(pts));
}

}  // namespace

PointSet make_prototype(const std::string& shape, int count) {
    if (count < 10) throw input_error("make_prototype: count must be at least 10");
    if (shape.find('/') != std::string::npos ||
        (shape.size() > 4 && shape.substr(shape.size() - 4) == ".pts")) {
        PointSet file = load_point_file(shape);
        if (file.size() < count)
            throw input_error("make_prototype: file '" + shape + "' has only " +
                              std::to_string(file.size()) + " points, need " +
                              std::to_string(count));
        // Even subsample, no renormalization.
        Eigen::MatrixXd pts(count, file.dim());
        for (int i = 0; i < count; ++i)
            pts.row(i) = file.pts.row(static_cast<int>(
                static_cast<long>(i) * file.size() / count));
        return PointSet(std::move(pts));
    }
    PointSet ps;
    if (shape == "fish") ps = fishPrototype(count);
    else if (shape == "glyph") ps = glyphPrototype(count);
    else if (shape == "quadruped") ps = quadrupedPrototype(count);
    else throw input_error("make_prototype: unknown shape '" + shape + "'");
    normalizeInPlace(ps);
    return ps;
}

PointSet deform(const PointSet& ps, double magnitude, uint64_t seed) {
    if (magnitude == 0.0) return ps;
    if (magnitude < 0.0) throw input_error("deform: magnitude must be nonnegative");
    const int d = ps.dim();
    const double diam = ps.diameter();
    Rng rng(seed);

    constexpr int kCenters = 5;
    Eigen::MatrixXd centers(kCenters, d), coeffs(kCenters, d);
    Eigen::RowVectorXd lo = ps.pts.colwise().minCoeff();
    Eigen::RowVectorXd hi = ps.pts.colwise().maxCoeff();
    for (int c = 0; c < kCenters; ++c)
        for (int k = 0; k < d; ++k) centers(c, k) = rng.uniform(lo[k], hi[k]);
    for (int c = 0; c < kCenters; ++c)
        for (int k = 0; k < d; ++k) coeffs(c, k) = rng.normal();

    const double sigma = 0.5 * diam;
    Eigen::MatrixXd disp = Eigen::MatrixXd::Zero(ps.size(), d);
    for (int i = 0; i < ps.size(); ++i)
        for (int c = 0; c < kCenters; ++c) {
            const double r2 = (ps.pts.row(i) - centers.row(c)).squaredNorm();
            disp.row(i) += std::exp(-r2 / (2.0 * sigma * sigma)) * coeffs.row(c);
        }
    const double meanDisp = disp.rowwise().norm().mean();
    if (meanDisp == 0.0) return ps;
    PointSet out = ps;
    out.pts += (magnitude * diam / meanDisp) * disp;
    return out;
}

std::pair<PointSet, std::vector<int>> add_outliers(const PointSet& ps, double ratio,
                                                   Side side, uint64_t seed,
                                                   double stdFraction,
                                                   double offsetFraction) {
    if (ratio < 0.0 || ratio >= 1.0) throw input_error("add_outliers: ratio must be in [0,1)");
    std::vector<int> map(ps.size());
    for (int i = 0; i < ps.size(); ++i) map[i] = i;
    if (ratio == 0.0) return {ps, map};

    const int nOut = static_cast<int>(std::ceil(ratio * ps.size()));
    const double diam = ps.diameter();
    Eigen::RowVectorXd center = ps.centroid();
    center[0] += (side == Side::Left ? -1.0 : 1.0) * offsetFraction * diam;

    Rng rng(seed);
    PointSet out;
    out.pts.resize(ps.size() + nOut, ps.dim());
    out.pts.topRows(ps.size()) = ps.pts;
    out.labels = ps.labels;
    for (int q = 0; q < nOut; ++q) {
        for (int k = 0; k < ps.dim(); ++k)
            out.pts(ps.size() + q, k) = center[k] + stdFraction * diam * rng.normal();
        out.labels.push_back(-1);  // outliers carry no prototype label
    }
    return {std::move(out), std::move(map)};
}

std::vector<int> nearest_neighbor_tour(const PointSet& ps, int start) {
    const int n = ps.size();
    std::vector<int> tour;
    tour.reserve(n);
    std::vector<char> used(n, 0);
    int cur = start;
    tour.push_back(cur);
    used[cur] = 1;
    for (int step = 1; step < n; ++step) {
        int best = -1;
        double bestD = 0.0;
        for (int j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double dist = (ps.pts.row(cur) - ps.pts.row(j)).squaredNorm();
            if (best < 0 || dist < bestD) {
                best = j;
                bestD = dist;
            }
        }
        tour.push_back(best);
        used[best] = 1;
        cur = best;
    }
    return tour;
}

double tour_length(const PointSet& ps, const std::vector<int>& tour) {
    double len = 0.0;
    for (size_t k = 0; k < tour.size(); ++k) {
        const int a = tour[k];
        const int b = tour[(k + 1) % tour.size()];
        len += (ps.pts.row(a) - ps.pts.row(b)).norm();
    }
    return len;
}

int two_opt(const PointSet& ps, std::vector<int>& tour, int maxSwaps) {
    const int n = static_cast<int>(tour.size());
    if (n < 4) return 0;
    auto dist = [&](int a, int b) { return (ps.pts.row(a) - ps.pts.row(b)).norm(); };
    int swaps = 0;
    bool improved = true;
    while (improved && swaps < maxSwaps) {
        improved = false;
        for (int i = 0; i < n - 1 && swaps < maxSwaps; ++i) {
            for (int j = i + 2; j < n && swaps < maxSwaps; ++j) {
                if (i == 0 && j == n - 1) continue;  // same edge
                const int a = tour[i], b = tour[i + 1];
                const int c = tour[j], e = tour[(j + 1) % n];
                if (dist(a, c) + dist(b, e) < dist(a, b) + dist(c, e) - 1e-12) {
                    std::reverse(tour.begin() + i + 1, tour.begin() + j + 1);
                    ++swaps;
                    improved = true;
                }
            }
        }
    }
    return swaps;
}

std::pair<PointSet, std::vector<int>> occlude(const PointSet& ps, double fraction,
                                              uint64_t seed) {
    if (fraction >= 1.0) throw input_error("occlude: fraction must be below 1");
    if (fraction < 0.0) throw input_error("occlude: fraction must be nonnegative");
    std::vector<int> keep(ps.size());
    for (int i = 0; i < ps.size(); ++i) keep[i] = i;
    if (fraction == 0.0) return {ps, keep};

    Rng rng(seed);
    std::vector<int> tour = nearest_neighbor_tour(ps, rng.uniform_int(0, ps.size() - 1));
    two_opt(ps, tour);

    const int nKeep = static_cast<int>(std::ceil((1.0 - fraction) * ps.size()));
    const int start = rng.uniform_int(0, ps.size() - 1);
    keep.clear();
    for (int k = 0; k < nKeep; ++k) keep.push_back(tour[(start + k) % ps.size()]);
    std::sort(keep.begin(), keep.end());

    PointSet out;
    out.pts.resize(nKeep, ps.dim());
    out.labels.resize(nKeep);
    for (int k = 0; k < nKeep; ++k) {
        out.pts.row(k) = ps.pts.row(keep[k]);
        out.labels[k] = ps.labels.empty() ? keep[k] : ps.labels[keep[k]];
    }
    return {std::move(out), std::move(keep)};
}

double match_error(const TransformEstimate& estimate, const GroundTruth& gt,
                   const PointSet& model, const PointSet& scene) {
    if (gt.pairs.empty()) throw input_error("match_error: no ground-truth pairs");
    double sum = 0.0;
    for (auto [i, j] : gt.pairs)
        sum += (estimate.apply(model.pts.row(i).transpose()) -
                scene.pts.row(j).transpose())
                   .norm();
    return sum / static_cast<double>(gt.pairs.size());
}

MatchInstance make_instance(const TrialSpec& spec) {
    if (spec.outlierRatio < 0.0 || spec.outlierRatio >= 1.0)
        throw input_error("TrialSpec: outlierRatio must be in [0,1)");
    if (spec.occlusionFraction < 0.0 || spec.occlusionFraction >= 1.0)
        throw input_error("TrialSpec: occlusionFraction must be in [0,1)");

    const PointSet proto = make_prototype(spec.shape, spec.count);
    if (proto.dim() != spec.d)
        throw input_error("TrialSpec: shape '" + spec.shape + "' is " +
                          std::to_string(proto.dim()) + "-dimensional, spec says d=" +
                          std::to_string(spec.d));
    Rng root(spec.seed);

    // Each stage gets an independent stream so the trial is reproducible.
    auto [modelCore, keepM] = occlude(proto, spec.occlusionFraction,
                                      splitmix64(spec.seed ^ 0x10));
    auto [sceneCore, keepS] = occlude(proto, spec.occlusionFraction,
                                      splitmix64(spec.seed ^ 0x20));

    // Ground-truth similarity applied to the model side.
    Rng gtRng = root.fork(0x30);
    const double s0 = gtRng.uniform(spec.gtScale.lo, spec.gtScale.hi);
    Eigen::MatrixXd R0 = spec.randomRotation
                             ? gtRng.random_rotation(spec.d)
                             : Eigen::MatrixXd::Identity(spec.d, spec.d);
    Eigen::VectorXd t0(spec.d);
    for (int k = 0; k < spec.d; ++k) t0[k] = gtRng.uniform(-0.5, 0.5);

    PointSet model = modelCore;
    model.pts = (s0 * (R0 * modelCore.pts.transpose())).transpose();
    model.pts.rowwise() += t0.transpose();

    // Scene side keeps the prototype frame but is warped.
    PointSet scene = deform(sceneCore, spec.deformation, splitmix64(spec.seed ^ 0x40));

    auto [modelFull, mapM] = add_outliers(model, spec.outlierRatio, Side::Left,
                                          splitmix64(spec.seed ^ 0x50));
    auto [sceneFull, mapS] = add_outliers(scene, spec.outlierRatio, Side::Right,
                                          splitmix64(spec.seed ^ 0x60));

    MatchInstance inst;
    inst.model = std::move(modelFull);
    inst.scene = std::move(sceneFull);

    // Prototype indices surviving on both sides become ground-truth pairs.
    std::vector<int> posInScene(proto.size(), -1);
    for (size_t k = 0; k < keepS.size(); ++k) posInScene[keepS[k]] = static_cast<int>(k);
    for (size_t k = 0; k < keepM.size(); ++k) {
        const int scenePos = posInScene[keepM[k]];
        if (scenePos >= 0)
            inst.gt.pairs.emplace_back(mapM[static_cast<int>(k)], mapS[scenePos]);
    }
    inst.gt.transform.kind = "similarity";
    inst.gt.transform.scale = s0;
    inst.gt.transform.rotation = R0;
    inst.gt.transform.linear = s0 * R0;
    inst.gt.transform.translation = t0;
    inst.gt.diameter = proto.diameter();
    return inst;
}

std::vector<TrialRecord> run_trials(const std::vector<TrialSpec>& specs,
                                    const MatcherConfig& config, int trialWorkers) {
    std::vector<TrialRecord> records(specs.size());
    parallel_for(static_cast<int>(specs.size()), trialWorkers, [&](int t) {
        const TrialSpec& spec = specs[t];
        MatchInstance inst = make_instance(spec);
        const int gtCount = static_cast<int>(inst.gt.pairs.size());
        if (gtCount == 0) throw input_error("run_trials: trial has no ground-truth inliers");

        MatchConfig mc;
        mc.mode = config.mode;
        mc.np = config.npAbsolute > 0
                    ? config.npAbsolute
                    : std::max(1, static_cast<int>(std::lround(config.npFraction * gtCount)));
        mc.np = std::min(mc.np, std::min(inst.model.size(), inst.scene.size()));
        // The ground-truth scale s0 was applied to the model, so mapping the
        // model onto the scene needs 1/s0: give the matcher the inverted range.
        mc.scaleRange = ScaleRange{1.0 / spec.gtScale.hi, 1.0 / spec.gtScale.lo};
        mc.bnb.scheme = config.scheme;
        mc.bnb.epsilon = config.epsilon;
        mc.bnb.maxDepth = config.maxDepth;
        mc.bnb.workers = trialWorkers > 1 ? 1 : config.workers;

        MatchResult res = match_point_sets(inst.model, inst.scene, mc);

        TrialRecord& rec = records[t];
        rec.seed = spec.seed;
        rec.shape = spec.shape;
        rec.d = spec.d;
        rec.m = inst.model.size();
        rec.n = inst.scene.size();
        rec.np = mc.np;
        rec.ratio = spec.outlierRatio;
        rec.fraction = spec.occlusionFraction;
        rec.scheme = config.scheme == BoundScheme::Lp ? "lp" : "fast";
        rec.error = match_error(res.transform, inst.gt, inst.model, inst.scene);
        rec.energy = res.energy;
        rec.iterations = res.bnb.iterations;
        rec.wallMs = res.bnb.wallMs;
        rec.boundsHistory = res.bnb.boundsHistory;
    });
    return records;
}

void write_trial_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << "seed,shape,d,m,n,n_p,ratio,fraction,scheme,error,energy,iterations,wall_ms\n";
    char buf[64];
    auto num = [&buf](double v) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        (void)ec;
        return std::string(buf, p);
    };
    for (const auto& r : records) {
        out << r.seed << ',' << r.shape << ',' << r.d << ',' << r.m << ',' << r.n << ','
            << r.np << ',' << num(r.ratio) << ',' << num(r.fraction) << ',' << r.scheme
            << ',' << num(r.error) << ',' << num(r.energy) << ',' << r.iterations << ','
            << num(r.wallMs) << '\n';
    }
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw input_error("mean of empty list");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw input_error("median of empty list");
    std::sort(xs.begin(), xs.end());
    const size_t mid = xs.size() / 2;
    return xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

}  // namespace pomatch::synth
