#include "sgae/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>
#include <json.hpp>

#include "sgae/error.hpp"
#include "sgae/io.hpp"

namespace sgae {

using nlohmann::json;

namespace {

using EMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EMatrix to_eigen(const Matrix& m) {
    return Eigen::Map<const EMatrix>(m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

Matrix from_eigen(const EMatrix& e) {
    Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    Eigen::Map<EMatrix>(m.data(), e.rows(), e.cols()) = e;
    return m;
}

}  // namespace

Alignment procrustes_align(const Matrix& source, const Matrix& target) {
    if (source.rows() != target.rows() || source.cols() != target.cols())
        throw Error(ErrorKind::InvalidArgument, "procrustes: source and target must have the same shape");
    if (source.cols() == 0) throw Error(ErrorKind::InvalidArgument, "procrustes: empty embedding dimension");
    const EMatrix s = to_eigen(source);
    const EMatrix t = to_eigen(target);
    const EMatrix m = s.transpose() * t;
    Eigen::JacobiSVD<EMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const EMatrix r = svd.matrixU() * svd.matrixV().transpose();

    Alignment a;
    a.rotation = from_eigen(r);
    a.residual = (s * r - t).norm();
    a.unaligned_residual = (s - t).norm();
    a.underdetermined = source.rows() < source.cols();
    return a;
}

void EmbeddingSeries::validate() const {
    if (periods.empty()) throw Error(ErrorKind::InvalidArgument, "embedding series: no periods");
    const std::size_t d = periods.front().z.cols();
    for (const auto& p : periods) {
        if (p.z.rows() != p.node_names.size())
            throw Error(ErrorKind::Format, "embedding series: period " + p.label + " has mismatched node names");
        if (p.z.cols() != d)
            throw Error(ErrorKind::Format, "embedding series: period " + p.label + " has a different embedding width");
        std::unordered_set<std::string> seen;
        for (const auto& n : p.node_names)
            if (!seen.insert(n).second)
                throw Error(ErrorKind::Format, "embedding series: duplicate node " + n + " in period " + p.label);
    }
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorKind::InvalidArgument, "pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    // Cosines of a static node differ from 1 only by rounding.
    if (std::sqrt(sxx) <= 1e-12 || std::sqrt(syy) <= 1e-12) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

DriftAnalysis analyze_drift(const EmbeddingSeries& series) {
    series.validate();
    const auto& first = series.periods.front();
    const std::size_t d = first.z.cols();
    std::vector<std::unordered_map<std::string, std::size_t>> index(series.periods.size());
    for (std::size_t p = 0; p < series.periods.size(); ++p)
        for (std::size_t i = 0; i < series.periods[p].node_names.size(); ++i)
            index[p].emplace(series.periods[p].node_names[i], i);

    DriftAnalysis out;
    for (std::size_t p = 0; p < series.periods.size(); ++p) {
        const auto& period = series.periods[p];
        std::vector<std::pair<std::size_t, std::size_t>> shared;  // (row in period, row in first)
        for (std::size_t i = 0; i < period.node_names.size(); ++i) {
            const auto it = index[0].find(period.node_names[i]);
            if (it != index[0].end()) shared.emplace_back(i, it->second);
        }
        if (shared.empty())
            throw Error(ErrorKind::InvalidArgument, "dynamics: period " + period.label + " shares no nodes with the first period");
        Matrix src(shared.size(), d), tgt(shared.size(), d);
        for (std::size_t k = 0; k < shared.size(); ++k)
            for (std::size_t c = 0; c < d; ++c) {
                src(k, c) = period.z(shared[k].first, c);
                tgt(k, c) = first.z(shared[k].second, c);
            }
        Alignment a = procrustes_align(src, tgt);
        if (a.underdetermined)
            out.notices.push_back("period " + period.label + ": " + std::to_string(shared.size()) +
                                  " shared nodes for embedding dimension " + std::to_string(d) +
                                  "; alignment is underdetermined");
        out.alignments.push_back(std::move(a));
    }

    for (std::size_t i = 0; i < first.node_names.size(); ++i) {
        const std::string& name = first.node_names[i];
        DriftSeries s;
        s.node = name;
        for (std::size_t p = 0; p < series.periods.size(); ++p)
            if (index[p].count(name)) s.periods.push_back(p);
        if (s.periods.size() < 3) {
            out.notices.push_back("node " + name + ": present in fewer than 3 periods; skipped");
            continue;
        }
        const auto z0 = first.z.row(i);
        const double n0 = norm2(z0);
        bool zero = n0 == 0.0;
        std::vector<double> aligned(d);
        for (std::size_t p : s.periods) {
            if (zero) break;
            const auto zt = series.periods[p].z.row(index[p].at(name));
            const Matrix& r = out.alignments[p].rotation;
            std::fill(aligned.begin(), aligned.end(), 0.0);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) aligned[b] += zt[a] * r(a, b);
            const double nt = norm2(aligned);
            if (nt == 0.0) {
                zero = true;
                break;
            }
            s.cosines.push_back(dot(z0, aligned) / (n0 * nt));
        }
        if (zero) {
            out.notices.push_back("node " + name + ": zero-norm embedding; cosine undefined, skipped");
            continue;
        }
        std::vector<double> xs(s.periods.begin(), s.periods.end());
        s.r = pearson(xs, s.cosines);
        if (!s.r) out.notices.push_back("node " + name + ": constant cosine series; r undefined");
        out.series.push_back(std::move(s));
    }
    return out;
}

DriftSeries drift_series(const EmbeddingSeries& series, const std::string& node) {
    DriftAnalysis a = analyze_drift(series);
    for (auto& s : a.series)
        if (s.node == node) return std::move(s);
    throw Error(ErrorKind::NotFound, "dynamics: node " + node + " has no drift series");
}

std::vector<DriftSeries> drift_ranking(const DriftAnalysis& analysis) {
    std::vector<DriftSeries> out;
    for (const auto& s : analysis.series)
        if (s.r) out.push_back(s);
    std::stable_sort(out.begin(), out.end(), [](const DriftSeries& a, const DriftSeries& b) {
        if (*a.r != *b.r) return *a.r < *b.r;
        return a.node < b.node;
    });
    return out;
}

std::string drift_tsv(const DriftAnalysis& analysis, const EmbeddingSeries& series) {
    std::string out = "node\tperiod\tcosine\n";
    for (const auto& s : analysis.series)
        for (std::size_t k = 0; k < s.periods.size(); ++k)
            out += s.node + '\t' + series.periods[s.periods[k]].label + '\t' + io::format_double(s.cosines[k]) + '\n';
    return out;
}

std::string drift_ranking_json(const DriftAnalysis& analysis) {
    json ranking = json::array();
    for (const auto& s : drift_ranking(analysis)) ranking.push_back({{"node", s.node}, {"r", *s.r}});
    json undefined = json::array();
    for (const auto& s : analysis.series)
        if (!s.r) undefined.push_back(s.node);
    json residuals = json::array();
    for (const auto& a : analysis.alignments)
        residuals.push_back({{"residual", a.residual},
                             {"unaligned_residual", a.unaligned_residual},
                             {"underdetermined", a.underdetermined}});
    json doc = {{"ranking", ranking},
                {"r_undefined", undefined},
                {"alignments", residuals},
                {"notices", analysis.notices}};
    return doc.dump(2) + "\n";
}

}  // namespace sgae
