#include "pomatch/point_set.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pomatch {

PointSet::PointSet(Eigen::MatrixXd points) : pts(std::move(points)) {
    labels.resize(pts.rows());
    std::iota(labels.begin(), labels.end(), 0);
}

Eigen::RowVectorXd PointSet::centroid() const {
    if (pts.rows() == 0) throw input_error("centroid of empty point set");
    return pts.colwise().mean();
}

double PointSet::diameter() const {
    double best = 0.0;
    for (int i = 0; i < pts.rows(); ++i)
        for (int j = i + 1; j < pts.rows(); ++j)
            best = std::max(best, (pts.row(i) - pts.row(j)).norm());
    return best;
}

PointSet parse_point_text(const std::string& text, const std::string& originName) {
    std::vector<std::vector<double>> rows;
    int dim = -1;
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> vals;
        std::string tok;
        while (ls >> tok) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || p != tok.data() + tok.size())
                throw input_error(originName + ":" + std::to_string(lineNo) +
                                  ": cannot parse '" + tok + "' as a number");
            vals.push_back(v);
        }
        if (vals.empty()) continue;
        if (dim < 0) {
            dim = static_cast<int>(vals.size());
            if (dim != 2 && dim != 3)
                throw input_error(originName + ":" + std::to_string(lineNo) +
                                  ": points must be 2- or 3-dimensional, got " +
                                  std::to_string(dim) + " values");
        } else if (static_cast<int>(vals.size()) != dim) {
            throw input_error(originName + ":" + std::to_string(lineNo) + ": expected " +
                              std::to_string(dim) + " values, got " +
                              std::to_string(vals.size()));
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw input_error(originName + ": no points found");
    Eigen::MatrixXd m(rows.size(), dim);
    for (size_t i = 0; i < rows.size(); ++i)
        for (int c = 0; c < dim; ++c) m(static_cast<int>(i), c) = rows[i][c];
    return PointSet(std::move(m));
}

std::string format_point_text(const PointSet& ps) {
    std::string out;
    char buf[64];
    for (int i = 0; i < ps.size(); ++i) {
        for (int c = 0; c < ps.dim(); ++c) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), ps.pts(i, c));
            (void)ec;
            if (c) out += ' ';
            out.append(buf, p);
        }
        out += '\n';
    }
    return out;
}

PointSet load_point_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open point file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_point_text(ss.str(), path);
}

void save_point_file(const PointSet& ps, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw input_error("cannot write point file '" + path + "'");
    f << format_point_text(ps);
}

}  // namespace pomatch
