#include "sgae/features.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sgae/error.hpp"
#include "sgae/io.hpp"

namespace sgae {

using nlohmann::json;

const char* to_string(SignalKind k) noexcept {
    switch (k) {
        case SignalKind::Agenda: return "agenda";
        case SignalKind::Framing: return "framing";
        case SignalKind::Mixed: return "mixed";
    }
    return "unknown";
}

void FeatureBundle::validate() const {
    const auto v = node_names.size();
    const auto c = concepts.size();
    if (counts.rows() != v || counts.cols() != c)
        throw Error(ErrorKind::Format, "features: counts shape does not match nodes x concepts");
    for (double x : counts.values())
        if (!(x >= 0.0) || std::floor(x) != x || !std::isfinite(x))
            throw Error(ErrorKind::Format, "features: counts must be non-negative integers");
    for (std::size_t k = 0; k < kFoundations; ++k) {
        if (framing[k].rows() != v || framing[k].cols() != c)
            throw Error(ErrorKind::Format, "features: framing_" + std::to_string(k) + " shape mismatch");
        for (double x : framing[k].values())
            if (!(x >= -1.0 && x <= 1.0))
                throw Error(ErrorKind::Format, "features: framing_" + std::to_string(k) + " value outside [-1, 1]");
    }
}

MixtureParams MixtureParams::zeros(std::size_t concepts) {
    return {Matrix(concepts, kFoundations), std::vector<double>(concepts, 0.0)};
}

std::array<double, kFoundations> MixtureParams::beta(std::size_t c) const {
    std::array<double, kFoundations> b{};
    const auto row = beta_logits.row(c);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < kFoundations; ++k) sum += b[k] = std::exp(row[k] - mx);
    for (auto& x : b) x /= sum;
    return b;
}

double MixtureParams::gamma(std::size_t c) const {
    const double z = gamma_logits[c];
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Matrix agenda_matrix(const Matrix& counts) {
    Matrix a(counts.rows(), counts.cols());
    for (std::size_t v = 0; v < counts.rows(); ++v) {
        double total = 0.0;
        for (double x : counts.row(v)) total += x;
        if (total <= 0.0) continue;
        for (std::size_t c = 0; c < counts.cols(); ++c) a(v, c) = counts(v, c) / total;
    }
    return a;
}

Matrix framing_scalar(const std::array<Matrix, kFoundations>& framing, const MixtureParams& params) {
    const auto rows = framing[0].rows();
    const auto cols = framing[0].cols();
    if (params.concept_count() != cols) throw Error(ErrorKind::InvalidArgument, "framing_scalar: concept count mismatch");
    Matrix f(rows, cols);
    for (std::size_t c = 0; c < cols; ++c) {
        const auto beta = params.beta(c);
        for (std::size_t v = 0; v < rows; ++v) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kFoundations; ++k) acc += beta[k] * framing[k](v, c);
            f(v, c) = acc;
        }
    }
    return f;
}

namespace {

void standardize_columns(Matrix& m) {
    const double n = static_cast<double>(m.rows());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t v = 0; v < m.rows(); ++v) mean += m(v, c);
        mean /= n;
        double var = 0.0;
        for (std::size_t v = 0; v < m.rows(); ++v) var += (m(v, c) - mean) * (m(v, c) - mean);
        var /= n;
        const double inv = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
        for (std::size_t v = 0; v < m.rows(); ++v) m(v, c) = (m(v, c) - mean) * inv;
    }
}

}  // namespace

FeatureInputs prepare_inputs(const FeatureBundle& bundle, bool standardize) {
    FeatureInputs in{agenda_matrix(bundle.counts), bundle.framing};
    if (standardize) {
        standardize_columns(in.agenda);
        for (auto& s : in.framing) standardize_columns(s);
    }
    return in;
}

FeatureMatrix mixture_features(const FeatureInputs& in, const MixtureParams& params, SignalKind kind) {
    if (params.concept_count() != in.concept_count())
        throw Error(ErrorKind::InvalidArgument, "mixture_features: concept count mismatch");
    if (kind == SignalKind::Agenda) return {in.agenda, kind};
    Matrix f = framing_scalar(in.framing, params);
    if (kind == SignalKind::Framing) return {std::move(f), kind};
    for (std::size_t c = 0; c < in.concept_count(); ++c) {
        const double g = params.gamma(c);
        for (std::size_t v = 0; v < in.node_count(); ++v) f(v, c) = g * in.agenda(v, c) + (1.0 - g) * f(v, c);
    }
    return {std::move(f), kind};
}

FeatureMatrix mixture_features(const FeatureBundle& bundle, const MixtureParams& params, SignalKind kind) {
    return mixture_features(prepare_inputs(bundle), params, kind);
}

MixtureGradients mixture_backward(const FeatureInputs& in, const MixtureParams& params, const Matrix& grad_psi,
                                  SignalKind kind) {
    const auto nc = in.concept_count();
    const auto nv = in.node_count();
    MixtureGradients out{Matrix(nc, kFoundations), std::vector<double>(nc, 0.0)};
    if (kind == SignalKind::Agenda) return out;
    for (std::size_t c = 0; c < nc; ++c) {
        const auto beta = params.beta(c);
        const double g = kind == SignalKind::Mixed ? params.gamma(c) : 0.0;
        double dgamma = 0.0;
        std::array<double, kFoundations> dbeta{};
        for (std::size_t v = 0; v < nv; ++v) {
            const double gp = grad_psi(v, c);
            if (gp == 0.0) continue;
            double f = 0.0;
            for (std::size_t k = 0; k < kFoundations; ++k) f += beta[k] * in.framing[k](v, c);
            dgamma += gp * (in.agenda(v, c) - f);
            for (std::size_t k = 0; k < kFoundations; ++k) dbeta[k] += gp * (in.framing[k](v, c) - f);
        }
        if (kind == SignalKind::Mixed) out.gamma_logits[c] = g * (1.0 - g) * dgamma;
        for (std::size_t k = 0; k < kFoundations; ++k) out.beta_logits(c, k) = (1.0 - g) * beta[k] * dbeta[k];
    }
    return out;
}

namespace {

std::vector<std::string> string_array(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_array())
        throw Error(ErrorKind::Format, std::string("manifest: '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& x : doc[key]) {
        if (!x.is_string()) throw Error(ErrorKind::Format, std::string("manifest: '") + key + "' entries must be strings");
        out.push_back(x.get<std::string>());
    }
    return out;
}

}  // namespace

FeatureBundle load_feature_dir(const std::filesystem::path& dir) {
    json manifest;
    try {
        manifest = json::parse(io::read_text(dir / "manifest.json"));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Format, std::string("manifest: ") + e.what());
    }
    if (!manifest.is_object()) throw Error(ErrorKind::Format, "manifest: expected object");
    FeatureBundle b;
    b.node_names = string_array(manifest, "nodes");
    b.concepts = string_array(manifest, "concepts");
    const auto foundations = string_array(manifest, "foundations");
    if (foundations.size() != kFoundations ||
        !std::equal(foundations.begin(), foundations.end(), foundation_names().begin()))
        throw Error(ErrorKind::Format, "manifest: 'foundations' must list the five moral foundations in canonical order");
    b.counts = io::parse_tsv_matrix(io::read_text(dir / "counts.tsv"), "counts.tsv");
    if (b.counts.empty()) b.counts = Matrix(b.node_names.size(), b.concepts.size());
    for (std::size_t k = 0; k < kFoundations; ++k) {
        const auto name = "framing_" + std::to_string(k) + ".tsv";
        b.framing[k] = io::parse_tsv_matrix(io::read_text(dir / name), name);
        if (b.framing[k].empty()) b.framing[k] = Matrix(b.node_names.size(), b.concepts.size());
    }
    b.validate();
    return b;
}

std::vector<std::pair<std::string, std::string>> feature_dir_files(const FeatureBundle& bundle) {
    bundle.validate();
    json manifest;
    manifest["nodes"] = bundle.node_names;
    manifest["concepts"] = bundle.concepts;
    manifest["foundations"] = foundation_names();
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("manifest.json", manifest.dump(2) + "\n");
    files.emplace_back("counts.tsv", io::format_tsv_matrix(bundle.counts));
    for (std::size_t k = 0; k < kFoundations; ++k)
        files.emplace_back("framing_" + std::to_string(k) + ".tsv", io::format_tsv_matrix(bundle.framing[k]));
    return files;
}

}  // namespace sgae
