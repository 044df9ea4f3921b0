#pragma once

// Two-layer graph-convolutional encoder with an inner-product decoder.
//
//   H1 = ReLU(M Psi W0),   Z = M H1 W1,   p(i, j) = logistic(z_i . z_j)
//
// M is the symmetric normalized adjacency with self-loops, or the identity
// for the linear (no message passing) baseline.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sgae/features.hpp"
#include "sgae/graph.hpp"
#include "sgae/matrix.hpp"

namespace sgae {

struct ModelDims {
    std::size_t concepts = 0;
    std::size_t hidden1 = 100;
    std::size_t hidden2 = 10;
};

struct ModelParams {
    Matrix w0;  // C x h1; rows are the group-lasso groups
    Matrix w1;  // h1 x h2
    MixtureParams mixture;

    ModelDims dims() const { return {w0.rows(), w0.cols(), w1.cols()}; }
};

// Glorot-uniform weights, zero mixture logits.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

enum class Propagation { Graph, Identity };

struct ForwardCache {
    Matrix psi;      // V x C
    Matrix m_psi;    // M Psi
    Matrix pre1;     // M Psi W0
    Matrix h1;       // ReLU(pre1)
    Matrix m_h1;     // M H1
    Matrix z;        // V x h2
    Propagation propagation = Propagation::Graph;
    std::size_t stamp = 0;  // fingerprint of (adjacency, psi, w0, w1)
};

ForwardCache encode(const NormalizedAdjacency& adj, const Matrix& psi, const ModelParams& params,
                    Propagation propagation = Propagation::Graph);

std::vector<double> pair_logits(const Matrix& z, std::span<const Edge> pairs);
// logistic(z_i . z_j)
std::vector<double> decode_pairs(const Matrix& z, std::span<const Edge> pairs);

double logistic(double x);

inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(std::span<const double> scores, std::span<const double> labels);

struct Gradients {
    Matrix w0;
    Matrix w1;
    Matrix beta_logits;
    std::vector<double> gamma_logits;

    double squared_norm() const;
};

// Exact gradient of the mean clamped BCE over `pairs` with respect to every
// trainable parameter, including the path through Psi into the mixture logits.
// Throws InvalidArgument if `cache` was not produced from these inputs.
Gradients backward(const ForwardCache& cache, std::span<const Edge> pairs, std::span<const double> labels,
                   const NormalizedAdjacency& adj, const FeatureInputs& inputs, const ModelParams& params,
                   SignalKind kind);

// Convenience: Psi from inputs and the mixture, then encode.
ForwardCache forward(const NormalizedAdjacency& adj, const FeatureInputs& inputs, const ModelParams& params,
                     SignalKind kind, Propagation propagation);

// Checkpoint directory: manifest.json plus row-major float64 blobs
// (w0.bin, w1.bin, beta_logits.bin, gamma_logits.bin, z.bin).
struct Checkpoint {
    ModelParams params;
    Matrix z;                         // embeddings of `node_names`
    std::vector<std::string> node_names;
    std::vector<std::string> concepts;
    std::string variant;
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    bool standardize = false;
};

std::vector<std::pair<std::string, std::string>> checkpoint_files(const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace sgae
