#pragma once

// Sparse graph auto-encoder training: Adam on the prediction loss followed by
// a proximal group-lasso step on the rows of W0, grid search under a hard cap
// on the number of surviving concepts, and the post-hoc sparsity report.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sgae/features.hpp"
#include "sgae/gae.hpp"
#include "sgae/graph.hpp"
#include "sgae/metrics.hpp"
#include "sgae/prox.hpp"

namespace sgae {

enum class Variant {
    AF_SGAE,  // agenda + framing mixture, graph convolutions
    A_SGAE,   // agenda only
    F_SGAE,   // framing only
    AF_SLAE,  // mixture, propagation replaced by identity
};

const char* to_string(Variant v) noexcept;
Variant parse_variant(const std::string& s);
SignalKind signal_kind(Variant v) noexcept;
Propagation propagation(Variant v) noexcept;

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Sgd exists as a test hook: the prox metric becomes uniform and the step
// reduces to closed-form block soft-thresholding.
enum class OptimizerMode { Adam, Sgd };

struct TrainConfig {
    std::size_t epochs = 200;
    double learning_rate = 1e-3;
    double lambda = 1e-3;
    std::size_t theta = 150;
    Variant variant = Variant::AF_SGAE;
    std::uint64_t seed = 0;
    AdamOptions adam;
    NewtonOptions prox_newton;
    double zero_row_tol = 1e-12;
    std::size_t hidden1 = 100;
    std::size_t hidden2 = 10;
    OptimizerMode optimizer = OptimizerMode::Adam;
    bool standardize = false;
    // Loss over every non-held-out pair instead of edges plus sampled
    // negatives. Only allowed for graphs up to kFullReconstructionLimit nodes.
    bool full_reconstruction = false;
};

inline constexpr std::size_t kFullReconstructionLimit = 200;

inline const std::vector<double>& default_rate_grid() {
    static const std::vector<double> g{1e-4, 3e-4, 1e-3, 3e-3};
    return g;
}

struct EpochRecord {
    std::size_t epoch = 0;
    // Losses of the parameters entering this epoch's update.
    double loss_pred = 0.0;
    double loss_reg = 0.0;
    double loss_total = 0.0;
    // Dev metrics and concept count of the parameters leaving the update.
    double dev_auc = 0.0;
    double dev_ap = 0.0;
    std::size_t n_active = 0;
};

struct TrainedModel {
    ModelParams params;
    std::vector<EpochRecord> history;
    std::vector<std::size_t> active_concepts;  // C*
    TrainConfig config;
};

// Called after every epoch with the updated parameters and their forward pass.
using EpochObserver = std::function<void(const EpochRecord&, const ModelParams&, const ForwardCache&)>;

TrainedModel train(const Graph& graph, const FeatureBundle& features, const EdgeSplit& split,
                   const TrainConfig& config, const EpochObserver& observer = {});

// Encoder input graph: the training edges only, or identity for AF_SLAE.
NormalizedAdjacency training_adjacency(const Graph& graph, const EdgeSplit& split, Variant variant);

// Embeddings of a trained model on the training graph.
Matrix embed(const Graph& graph, const FeatureBundle& features, const EdgeSplit& split, const ModelParams& params,
             const TrainConfig& config);

enum class SplitPart { Dev, Test };

Metrics evaluate(const TrainedModel& model, SplitPart part, const FeatureBundle& features, const Graph& graph,
                 const EdgeSplit& split);

struct SweepGrid {
    // Checkpoint epochs; empty means every epoch 1..max_epochs.
    std::vector<std::size_t> epochs;
    std::size_t max_epochs = 1000;
    std::vector<double> learning_rates = default_rate_grid();
    std::vector<double> lambdas = default_rate_grid();

    bool is_checkpoint(std::size_t epoch) const;
    std::size_t last_epoch() const;
};

struct SweepCell {
    double learning_rate = 0.0;
    double lambda = 0.0;
    std::vector<EpochRecord> history;
    bool diverged = false;
    std::string failure;
    // Best admissible checkpoint of this cell, if any.
    std::optional<std::size_t> best_epoch;
    Metrics dev;
    Metrics test;
    std::size_t n_active = 0;
    ModelParams best_params;
    std::size_t min_active = std::numeric_limits<std::size_t>::max();
};

struct SweepResult {
    TrainedModel best;
    std::size_t best_cell = 0;
    std::size_t theta = 0;
    std::vector<SweepCell> cells;
};

// Trains one run per (learning rate, lambda) and considers every checkpoint
// epoch of it. Keeps checkpoints with |C*| <= theta and returns the one with
// the best dev AUC; ties go to smaller |C*|, then smaller lambda, then smaller
// learning rate, then earlier epoch. Throws Infeasible if nothing qualifies.
SweepResult sweep(const Graph& graph, const FeatureBundle& features, const EdgeSplit& split, const TrainConfig& base,
                  const SweepGrid& grid, std::size_t theta, std::size_t jobs = 1);

inline constexpr std::size_t kUnboundedTheta = std::numeric_limits<std::size_t>::max();

// Best dev AUC over all recorded checkpoints with |C*| <= theta; nullopt if none.
std::optional<double> best_dev_auc_under(const std::vector<SweepCell>& cells, const SweepGrid& grid, std::size_t theta);

enum class GammaClass { Agenda, Framing, Mixed };
const char* to_string(GammaClass g) noexcept;

inline constexpr double kGammaLow = 0.01;
inline constexpr double kGammaHigh = 0.99;

struct ConceptReport {
    std::size_t index = 0;
    std::string name;
    double row_norm = 0.0;
    double gamma = 0.0;
    GammaClass gamma_class = GammaClass::Mixed;
    std::array<double, kFoundations> beta{};
    std::array<double, kFoundations> beta_sorted{};  // descending, for rank plots
    std::size_t dominant = 0;                        // argmax beta
};

struct FramingStrength {
    std::size_t node = 0;
    std::size_t concept_index = 0;
    std::size_t foundation = 0;
    double value = 0.0;  // |s_k(v, c)| for the dominant foundation
};

struct SparsityReport {
    Variant variant = Variant::AF_SGAE;
    std::vector<ConceptReport> concepts;  // exactly C*, in concept index order
    std::array<std::size_t, kFoundations> dominant_counts{};
    std::array<double, kFoundations> dominant_percent{};
    std::array<std::size_t, 3> gamma_classes{};  // agenda, framing, mixed
    std::array<std::size_t, 10> gamma_histogram{};
    std::vector<FramingStrength> framing_strengths;
};

// Concepts are reported in index order; the report never ranks concepts by
// their mixed signal values, which are not comparable across concepts.
SparsityReport analyze(const TrainedModel& model, const FeatureBundle& features);

std::string report_to_json(const SparsityReport& r);
std::string gamma_tsv(const SparsityReport& r);
std::string beta_rank_tsv(const SparsityReport& r);
std::string framing_strength_tsv(const SparsityReport& r, const FeatureBundle& features);

std::string history_tsv(const std::vector<EpochRecord>& history);

}  // namespace sgae
