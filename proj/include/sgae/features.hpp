#pragma once

// Concept signal matrix: per-node agenda frequencies and moral-foundation
// framing projections, mixed per concept by learnable simplex weights.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "sgae/matrix.hpp"

namespace sgae {

inline constexpr std::size_t kFoundations = 5;

inline const std::array<std::string, kFoundations>& foundation_names() {
    static const std::array<std::string, kFoundations> names{
        "care/harm", "fairness/cheating", "loyalty/betrayal", "authority/subversion", "sanctity/degradation"};
    return names;
}

struct FeatureBundle {
    std::vector<std::string> node_names;
    std::vector<std::string> concepts;
    Matrix counts;                            // V x C, non-negative integers
    std::array<Matrix, kFoundations> framing; // each V x C, entries in [-1, 1]

    std::size_t node_count() const noexcept { return node_names.size(); }
    std::size_t concept_count() const noexcept { return concepts.size(); }

    // Throws Format on shape mismatch, non-integral or negative counts,
    // or framing values outside [-1, 1].
    void validate() const;
};

// Unconstrained logits; beta = softmax(beta_logits[c]), gamma = logistic(gamma_logits[c]).
struct MixtureParams {
    Matrix beta_logits;               // C x 5
    std::vector<double> gamma_logits; // C

    static MixtureParams zeros(std::size_t concepts);

    std::size_t concept_count() const noexcept { return gamma_logits.size(); }
    std::array<double, kFoundations> beta(std::size_t c) const;
    double gamma(std::size_t c) const;
};

enum class SignalKind { Agenda, Framing, Mixed };

const char* to_string(SignalKind k) noexcept;

struct FeatureMatrix {
    Matrix psi;  // V x C
    SignalKind provenance = SignalKind::Mixed;
};

// Inputs precomputed once per bundle: relative frequencies and framing tensor,
// optionally rescaled per column.
struct FeatureInputs {
    Matrix agenda;                            // V x C
    std::array<Matrix, kFoundations> framing; // V x C each

    std::size_t node_count() const noexcept { return agenda.rows(); }
    std::size_t concept_count() const noexcept { return agenda.cols(); }
};

// a(v, c) = n(v, c) / sum_k n(v, k); all-zero rows stay zero.
Matrix agenda_matrix(const Matrix& counts);

// f(v, c) = sum_k beta_k(c) s_k(v, c)
Matrix framing_scalar(const std::array<Matrix, kFoundations>& framing, const MixtureParams& params);

// Builds agenda/framing inputs. With `standardize`, each column of the agenda
// matrix and of every framing matrix is centred and scaled to unit variance.
FeatureInputs prepare_inputs(const FeatureBundle& bundle, bool standardize = false);

// Psi for the given signal kind:
//   Agenda  -> a,  Framing -> f,  Mixed -> gamma * a + (1 - gamma) * f.
FeatureMatrix mixture_features(const FeatureInputs& in, const MixtureParams& params,
                               SignalKind kind = SignalKind::Mixed);
FeatureMatrix mixture_features(const FeatureBundle& bundle, const MixtureParams& params,
                               SignalKind kind = SignalKind::Mixed);

struct MixtureGradients {
    Matrix beta_logits;               // C x 5
    std::vector<double> gamma_logits; // C
};

// Pulls dL/dPsi back onto the mixture logits. Uses
//   du/dgamma_logit  = gamma (1 - gamma) (a - f)
//   du/dbeta_logit_k = (1 - gamma) beta_k (s_k - f)
// with gamma pinned to 0 for Framing and no mixture dependence for Agenda.
MixtureGradients mixture_backward(const FeatureInputs& in, const MixtureParams& params, const Matrix& grad_psi,
                                  SignalKind kind = SignalKind::Mixed);

// Feature directory: manifest.json, counts.tsv, framing_0.tsv .. framing_4.tsv
FeatureBundle load_feature_dir(const std::filesystem::path& dir);
// Relative paths -> file contents, ready for io::OutputSet.
std::vector<std::pair<std::string, std::string>> feature_dir_files(const FeatureBundle& bundle);

}  // namespace sgae
