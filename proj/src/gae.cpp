#include "sgae/gae.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sgae/error.hpp"
#include "sgae/io.hpp"
#include "sgae/kernels.hpp"
#include "sgae/rng.hpp"

namespace sgae {

using nlohmann::json;

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& x : m.values()) x = rng.uniform(-limit, limit);
    return m;
}

Matrix propagate(const NormalizedAdjacency& adj, const Matrix& x, Propagation p) {
    if (p == Propagation::Identity || adj.identity) return x;
    return matmul(adj.matrix, x);
}

std::size_t stamp_of(const NormalizedAdjacency& adj, const Matrix& psi, const ModelParams& params, Propagation p) {
    std::size_t h = fingerprint(psi, adj.size() * 31 + adj.source_edges * 7 + (p == Propagation::Identity));
    h = fingerprint(params.w0, h);
    return fingerprint(params.w1, h);
}

void require_finite(const Matrix& m, const char* name) {
    if (!m.all_finite()) throw Error(ErrorKind::InvalidArgument, std::string("encode: non-finite entries in ") + name);
}

}  // namespace

ModelParams init_params(const ModelDims& dims, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x5eed));
    ModelParams p;
    p.w0 = glorot(dims.concepts, dims.hidden1, rng);
    p.w1 = glorot(dims.hidden1, dims.hidden2, rng);
    p.mixture = MixtureParams::zeros(dims.concepts);
    return p;
}

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

ForwardCache encode(const NormalizedAdjacency& adj, const Matrix& psi, const ModelParams& params,
                    Propagation propagation) {
    require_finite(psi, "psi");
    require_finite(params.w0, "w0");
    require_finite(params.w1, "w1");
    if (psi.rows() != adj.size()) throw Error(ErrorKind::InvalidArgument, "encode: psi rows != node count");
    if (psi.cols() != params.w0.rows()) throw Error(ErrorKind::InvalidArgument, "encode: psi cols != w0 rows");
    if (params.w0.cols() != params.w1.rows()) throw Error(ErrorKind::InvalidArgument, "encode: w0 cols != w1 rows");

    ForwardCache c;
    c.propagation = adj.identity ? Propagation::Identity : propagation;
    c.psi = psi;
    c.m_psi = propagate(adj, psi, c.propagation);
    c.pre1 = matmul(c.m_psi, params.w0);
    c.h1 = Matrix(c.pre1.rows(), c.pre1.cols());
    kernels::active().relu(c.pre1.data(), c.h1.data(), c.pre1.size());
    c.m_h1 = propagate(adj, c.h1, c.propagation);
    c.z = matmul(c.m_h1, params.w1);
    c.stamp = stamp_of(adj, psi, params, c.propagation);
    return c;
}

ForwardCache forward(const NormalizedAdjacency& adj, const FeatureInputs& inputs, const ModelParams& params,
                     SignalKind kind, Propagation propagation) {
    return encode(adj, mixture_features(inputs, params.mixture, kind).psi, params, propagation);
}

std::vector<double> pair_logits(const Matrix& z, std::span<const Edge> pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& e : pairs) {
        if (e.u >= z.rows() || e.v >= z.rows()) throw Error(ErrorKind::InvalidArgument, "decode: node index out of range");
        out.push_back(dot(z.row(e.u), z.row(e.v)));
    }
    return out;
}

std::vector<double> decode_pairs(const Matrix& z, std::span<const Edge> pairs) {
    auto s = pair_logits(z, pairs);
    for (double& x : s) x = logistic(x);
    return s;
}

double bce_loss(std::span<const double> scores, std::span<const double> labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorKind::InvalidArgument, "bce_loss: " + std::to_string(scores.size()) + " scores vs " +
                                                    std::to_string(labels.size()) + " labels");
    if (scores.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double p = std::clamp(scores[i], kProbClamp, 1.0 - kProbClamp);
        total -= labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p);
    }
    return total / static_cast<double>(scores.size());
}

double Gradients::squared_norm() const {
    double s = 0.0;
    for (const Matrix* m : {&w0, &w1, &beta_logits})
        for (double x : m->values()) s += x * x;
    for (double x : gamma_logits) s += x * x;
    return s;
}

Gradients backward(const ForwardCache& cache, std::span<const Edge> pairs, std::span<const double> labels,
                   const NormalizedAdjacency& adj, const FeatureInputs& inputs, const ModelParams& params,
                   SignalKind kind) {
    if (pairs.size() != labels.size()) throw Error(ErrorKind::InvalidArgument, "backward: pairs/labels length mismatch");
    if (cache.stamp != stamp_of(adj, cache.psi, params, cache.propagation) || cache.z.rows() != adj.size())
        throw Error(ErrorKind::InvalidArgument, "backward: stale forward cache");

    const auto& k = kernels::active();
    const Matrix& z = cache.z;
    Matrix grad_z(z.rows(), z.cols());
    const double inv_n = pairs.empty() ? 0.0 : 1.0 / static_cast<double>(pairs.size());
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        const auto& e = pairs[t];
        const double p = logistic(k.dot(z.row(e.u).data(), z.row(e.v).data(), z.cols()));
        // Clamped region has zero derivative.
        if (!(p > kProbClamp && p < 1.0 - kProbClamp)) continue;
        const double gs = (p - labels[t]) * inv_n;
        k.axpy(gs, z.row(e.v).data(), grad_z.row(e.u).data(), z.cols());
        k.axpy(gs, z.row(e.u).data(), grad_z.row(e.v).data(), z.cols());
    }

    Gradients g;
    g.w1 = matmul_tn(cache.m_h1, grad_z);
    Matrix grad_h1 = propagate(adj, matmul_nt(grad_z, params.w1), cache.propagation);
    k.relu_mask(cache.pre1.data(), grad_h1.data(), grad_h1.size());
    g.w0 = matmul_tn(cache.m_psi, grad_h1);
    const Matrix grad_psi = propagate(adj, matmul_nt(grad_h1, params.w0), cache.propagation);
    auto mix = mixture_backward(inputs, params.mixture, grad_psi, kind);
    g.beta_logits = std::move(mix.beta_logits);
    g.gamma_logits = std::move(mix.gamma_logits);
    return g;
}

namespace {

json matrix_entry(const std::string& file, const Matrix& m) {
    return {{"file", file}, {"rows", m.rows()}, {"cols", m.cols()}};
}

Matrix read_matrix(const std::filesystem::path& dir, const json& manifest, const char* key) {
    if (!manifest.contains("matrices") || !manifest["matrices"].contains(key))
        throw Error(ErrorKind::Format, std::string("checkpoint: missing matrix '") + key + "'");
    const auto& e = manifest["matrices"][key];
    try {
        return io::from_blob(io::read_text(dir / e.at("file").get<std::string>()), e.at("rows").get<std::size_t>(),
                             e.at("cols").get<std::size_t>(), key);
    } catch (const json::exception& ex) {
        throw Error(ErrorKind::Format, std::string("checkpoint: bad entry for '") + key + "': " + ex.what());
    }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> checkpoint_files(const Checkpoint& ckpt) {
    const auto& p = ckpt.params;
    Matrix gamma(p.mixture.gamma_logits.size(), 1);
    for (std::size_t i = 0; i < gamma.rows(); ++i) gamma(i, 0) = p.mixture.gamma_logits[i];

    json manifest;
    manifest["format"] = "sgae-checkpoint";
    manifest["version"] = 1;
    manifest["seed"] = ckpt.seed;
    manifest["epochs"] = ckpt.epochs;
    manifest["variant"] = ckpt.variant;
    manifest["standardize"] = ckpt.standardize;
    manifest["dims"] = {{"concepts", p.w0.rows()}, {"hidden1", p.w0.cols()}, {"hidden2", p.w1.cols()}};
    manifest["nodes"] = ckpt.node_names;
    manifest["concepts"] = ckpt.concepts;
    manifest["matrices"] = {{"w0", matrix_entry("w0.bin", p.w0)},
                            {"w1", matrix_entry("w1.bin", p.w1)},
                            {"beta_logits", matrix_entry("beta_logits.bin", p.mixture.beta_logits)},
                            {"gamma_logits", matrix_entry("gamma_logits.bin", gamma)},
                            {"z", matrix_entry("z.bin", ckpt.z)}};
    return {{"manifest.json", manifest.dump(2) + "\n"},
            {"w0.bin", io::to_blob(p.w0)},
            {"w1.bin", io::to_blob(p.w1)},
            {"beta_logits.bin", io::to_blob(p.mixture.beta_logits)},
            {"gamma_logits.bin", io::to_blob(gamma)},
            {"z.bin", io::to_blob(ckpt.z)}};
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    json manifest;
    try {
        manifest = json::parse(io::read_text(dir / "manifest.json"));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Format, std::string("checkpoint manifest: ") + e.what());
    }
    if (!manifest.is_object() || manifest.value("format", "") != "sgae-checkpoint")
        throw Error(ErrorKind::Format, "checkpoint: not an sgae checkpoint manifest");
    Checkpoint c;
    try {
        c.seed = manifest.at("seed").get<std::uint64_t>();
        c.epochs = manifest.at("epochs").get<std::size_t>();
        c.variant = manifest.at("variant").get<std::string>();
        c.standardize = manifest.value("standardize", false);
        c.node_names = manifest.at("nodes").get<std::vector<std::string>>();
        c.concepts = manifest.at("concepts").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, std::string("checkpoint manifest: ") + e.what());
    }
    c.params.w0 = read_matrix(dir, manifest, "w0");
    c.params.w1 = read_matrix(dir, manifest, "w1");
    c.params.mixture.beta_logits = read_matrix(dir, manifest, "beta_logits");
    const Matrix gamma = read_matrix(dir, manifest, "gamma_logits");
    c.params.mixture.gamma_logits.assign(gamma.values().begin(), gamma.values().end());
    c.z = read_matrix(dir, manifest, "z");
    if (c.params.w0.cols() != c.params.w1.rows() || c.params.w0.rows() != c.concepts.size() ||
        c.params.mixture.beta_logits.rows() != c.concepts.size() || c.params.mixture.beta_logits.cols() != kFoundations ||
        c.params.mixture.gamma_logits.size() != c.concepts.size() || c.z.rows() != c.node_names.size())
        throw Error(ErrorKind::Format, "checkpoint: inconsistent matrix shapes");
    return c;
}

}  // namespace sgae
