#include "sgae/train.hpp"

#include <cmath>
#include <sstream>

#include "sgae/error.hpp"
#include "sgae/io.hpp"
#include "sgae/kernels.hpp"
#include "sgae/rng.hpp"

namespace sgae {

const char* to_string(Variant v) noexcept {
    switch (v) {
        case Variant::AF_SGAE: return "AF-SGAE";
        case Variant::A_SGAE: return "A-SGAE";
        case Variant::F_SGAE: return "F-SGAE";
        case Variant::AF_SLAE: return "AF-SLAE";
    }
    return "unknown";
}

Variant parse_variant(const std::string& s) {
    for (Variant v : {Variant::AF_SGAE, Variant::A_SGAE, Variant::F_SGAE, Variant::AF_SLAE})
        if (s == to_string(v)) return v;
    throw Error(ErrorKind::InvalidArgument, "unknown variant '" + s + "' (expected AF-SGAE, A-SGAE, F-SGAE or AF-SLAE)");
}

SignalKind signal_kind(Variant v) noexcept {
    switch (v) {
        case Variant::A_SGAE: return SignalKind::Agenda;
        case Variant::F_SGAE: return SignalKind::Framing;
        default: return SignalKind::Mixed;
    }
}

Propagation propagation(Variant v) noexcept {
    return v == Variant::AF_SLAE ? Propagation::Identity : Propagation::Graph;
}

NormalizedAdjacency training_adjacency(const Graph& graph, const EdgeSplit& split, Variant variant) {
    if (variant == Variant::AF_SLAE) return NormalizedAdjacency::make_identity(graph.node_count());
    return normalized_adjacency(graph.with_edges(split.train_edges));
}

namespace {

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

void validate_inputs(const Graph& graph, const FeatureBundle& features, const TrainConfig& config) {
    if (features.node_count() != graph.node_count())
        throw Error(ErrorKind::InvalidArgument, "train: feature rows (" + std::to_string(features.node_count()) +
                                                    ") != graph nodes (" + std::to_string(graph.node_count()) + ")");
    if (features.node_names != graph.node_names())
        throw Error(ErrorKind::InvalidArgument, "train: feature node order differs from graph node order");
    if (!(config.lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "train: lambda must be >= 0");
    if (!(config.learning_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "train: learning rate must be > 0");
    if (config.epochs == 0) throw Error(ErrorKind::InvalidArgument, "train: epochs must be >= 1");
    if (config.full_reconstruction && graph.node_count() > kFullReconstructionLimit)
        throw Error(ErrorKind::InvalidArgument, "train: full reconstruction is limited to " +
                                                    std::to_string(kFullReconstructionLimit) + " nodes");
}

// Pairs and labels used for one epoch's prediction loss.
void epoch_pairs(const Graph& graph, const EdgeSplit& split, const EdgeSet& held_out, const TrainConfig& config,
                 std::size_t epoch, std::vector<Edge>& pairs, std::vector<double>& labels) {
    pairs.clear();
    labels.clear();
    if (config.full_reconstruction) {
        EdgeSet train(split.train_edges.begin(), split.train_edges.end());
        const auto n = static_cast<NodeId>(graph.node_count());
        for (NodeId i = 0; i < n; ++i)
            for (NodeId j = i + 1; j < n; ++j) {
                const Edge e(i, j);
                if (held_out.contains(e)) continue;
                pairs.push_back(e);
                labels.push_back(train.contains(e) ? 1.0 : 0.0);
            }
        return;
    }
    pairs = split.train_edges;
    labels.assign(pairs.size(), 1.0);
    const auto negatives =
        sample_negatives(graph, split.train_edges.size(), mix_seed(config.seed, 0x1000 + epoch), held_out);
    pairs.insert(pairs.end(), negatives.begin(), negatives.end());
    labels.resize(pairs.size(), 0.0);
}

void adam_update(std::span<double> w, AdamState& s, std::span<const double> g, const TrainConfig& cfg, std::size_t t,
                 double* denom) {
    const double bc1 = 1.0 - std::pow(cfg.adam.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.adam.beta2, static_cast<double>(t));
    kernels::active().adam_step(w.data(), s.m.data(), s.v.data(), g.data(), w.size(), cfg.learning_rate,
                                cfg.adam.beta1, cfg.adam.beta2, bc1, bc2, cfg.adam.eps, denom);
}

void sgd_update(std::span<double> w, std::span<const double> g, double lr) {
    kernels::active().axpy(-lr, g.data(), w.data(), w.size());
}

}  // namespace

TrainedModel train(const Graph& graph, const FeatureBundle& features, const EdgeSplit& split,
                   const TrainConfig& config, const EpochObserver& observer) {
    validate_inputs(graph, features, config);
    const SignalKind kind = signal_kind(config.variant);
    const Propagation prop = propagation(config.variant);
    const NormalizedAdjacency adj = training_adjacency(graph, split, config.variant);
    const FeatureInputs inputs = prepare_inputs(features, config.standardize);
    const EdgeSet held_out = split.held_out_pairs();

    TrainedModel model;
    model.config = config;
    model.params = init_params({features.concept_count(), config.hidden1, config.hidden2}, config.seed);
    ModelParams& p = model.params;

    AdamState s_w0(p.w0.size()), s_w1(p.w1.size()), s_beta(p.mixture.beta_logits.size()),
        s_gamma(p.mixture.gamma_logits.size());
    std::vector<double> denom(p.w0.size(), 1.0);
    const bool train_beta = kind != SignalKind::Agenda;
    const bool train_gamma = kind == SignalKind::Mixed;
    const double threshold = config.learning_rate * config.lambda;

    ForwardCache cache = forward(adj, inputs, p, kind, prop);
    std::vector<Edge> pairs;
    std::vector<double> labels;
    model.history.reserve(config.epochs);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        epoch_pairs(graph, split, held_out, config, epoch, pairs, labels);
        const auto scores = decode_pairs(cache.z, pairs);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss_pred = bce_loss(scores, labels);
        rec.loss_reg = group_lasso_penalty(p.w0);
        rec.loss_total = rec.loss_pred + config.lambda * rec.loss_reg;
        if (!std::isfinite(rec.loss_total))
            throw Error(ErrorKind::Numerical, "train: non-finite loss at epoch " + std::to_string(epoch));

        const Gradients g = backward(cache, pairs, labels, adj, inputs, p, kind);

        if (config.optimizer == OptimizerMode::Adam) {
            adam_update(p.w0.values(), s_w0, g.w0.values(), config, epoch, denom.data());
            adam_update(p.w1.values(), s_w1, g.w1.values(), config, epoch, nullptr);
            if (train_beta)
                adam_update(p.mixture.beta_logits.values(), s_beta, g.beta_logits.values(), config, epoch, nullptr);
            if (train_gamma) adam_update(p.mixture.gamma_logits, s_gamma, g.gamma_logits, config, epoch, nullptr);
        } else {
            sgd_update(p.w0.values(), g.w0.values(), config.learning_rate);
            sgd_update(p.w1.values(), g.w1.values(), config.learning_rate);
            if (train_beta) sgd_update(p.mixture.beta_logits.values(), g.beta_logits.values(), config.learning_rate);
            if (train_gamma) sgd_update(p.mixture.gamma_logits, g.gamma_logits, config.learning_rate);
        }

        if (threshold > 0.0) {
            const std::size_t h = p.w0.cols();
            for (std::size_t j = 0; j < p.w0.rows(); ++j)
                prox_group_row(p.w0.row(j), threshold, std::span<const double>(denom.data() + j * h, h),
                               config.prox_newton);
        }

        cache = forward(adj, inputs, p, kind, prop);
        if (!cache.z.all_finite())
            throw Error(ErrorKind::Numerical, "train: non-finite embeddings at epoch " + std::to_string(epoch));
        const Metrics dev = evaluate_pairs(cache.z, split.dev_edges, split.dev_negatives);
        rec.dev_auc = dev.auc;
        rec.dev_ap = dev.ap;
        rec.n_active = active_rows(p.w0, config.zero_row_tol).size();
        model.history.push_back(rec);
        if (observer) observer(rec, p, cache);
    }
    model.active_concepts = active_rows(p.w0, config.zero_row_tol);
    return model;
}

Matrix embed(const Graph& graph, const FeatureBundle& features, const EdgeSplit& split, const ModelParams& params,
             const TrainConfig& config) {
    const NormalizedAdjacency adj = training_adjacency(graph, split, config.variant);
    const FeatureInputs inputs = prepare_inputs(features, config.standardize);
    return forward(adj, inputs, params, signal_kind(config.variant), propagation(config.variant)).z;
}

Metrics evaluate(const TrainedModel& model, SplitPart part, const FeatureBundle& features, const Graph& graph,
                 const EdgeSplit& split) {
    const Matrix z = embed(graph, features, split, model.params, model.config);
    if (part == SplitPart::Dev) return evaluate_pairs(z, split.dev_edges, split.dev_negatives);
    return evaluate_pairs(z, split.test_edges, split.test_negatives);
}

std::string history_tsv(const std::vector<EpochRecord>& history) {
    std::string out = "epoch\tloss_pred\tloss_reg\tloss_total\tdev_auc\tdev_ap\tn_active\n";
    for (const auto& r : history) {
        out += std::to_string(r.epoch) + '\t' + io::format_double(r.loss_pred) + '\t' + io::format_double(r.loss_reg) +
               '\t' + io::format_double(r.loss_total) + '\t' + io::format_double(r.dev_auc) + '\t' +
               io::format_double(r.dev_ap) + '\t' + std::to_string(r.n_active) + '\n';
    }
    return out;
}

}  // namespace sgae
