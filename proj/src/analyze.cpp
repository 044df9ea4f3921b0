#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sgae/io.hpp"
#include "sgae/train.hpp"

namespace sgae {

using nlohmann::json;

const char* to_string(GammaClass g) noexcept {
    switch (g) {
        case GammaClass::Agenda: return "agenda";
        case GammaClass::Framing: return "framing";
        case GammaClass::Mixed: return "mixed";
    }
    return "unknown";
}

SparsityReport analyze(const TrainedModel& model, const FeatureBundle& features) {
    SparsityReport r;
    r.variant = model.config.variant;
    const auto& mix = model.params.mixture;
    const SignalKind kind = signal_kind(model.config.variant);
    const auto active = active_rows(model.params.w0, model.config.zero_row_tol);

    for (std::size_t c : active) {
        ConceptReport cr;
        cr.index = c;
        cr.name = c < features.concepts.size() ? features.concepts[c] : std::to_string(c);
        cr.row_norm = norm2(model.params.w0.row(c));
        switch (kind) {
            case SignalKind::Agenda: cr.gamma = 1.0; break;
            case SignalKind::Framing: cr.gamma = 0.0; break;
            case SignalKind::Mixed: cr.gamma = mix.gamma(c); break;
        }
        cr.gamma_class = cr.gamma >= kGammaHigh  ? GammaClass::Agenda
                         : cr.gamma <= kGammaLow ? GammaClass::Framing
                                                 : GammaClass::Mixed;
        cr.beta = mix.beta(c);
        cr.beta_sorted = cr.beta;
        std::sort(cr.beta_sorted.begin(), cr.beta_sorted.end(), std::greater<>());
        cr.dominant = static_cast<std::size_t>(std::max_element(cr.beta.begin(), cr.beta.end()) - cr.beta.begin());

        ++r.dominant_counts[cr.dominant];
        ++r.gamma_classes[static_cast<std::size_t>(cr.gamma_class)];
        ++r.gamma_histogram[std::min<std::size_t>(9, static_cast<std::size_t>(cr.gamma * 10.0))];
        for (std::size_t v = 0; v < features.node_count(); ++v)
            r.framing_strengths.push_back({v, c, cr.dominant, std::abs(features.framing[cr.dominant](v, c))});
        r.concepts.push_back(std::move(cr));
    }
    if (!r.concepts.empty())
        for (std::size_t k = 0; k < kFoundations; ++k)
            r.dominant_percent[k] = 100.0 * static_cast<double>(r.dominant_counts[k]) / static_cast<double>(r.concepts.size());
    return r;
}

std::string report_to_json(const SparsityReport& r) {
    json doc;
    doc["variant"] = to_string(r.variant);
    doc["n_active"] = r.concepts.size();
    json concepts = json::array();
    for (const auto& c : r.concepts) {
        concepts.push_back({{"index", c.index},
                            {"name", c.name},
                            {"row_norm", c.row_norm},
                            {"gamma", c.gamma},
                            {"gamma_class", to_string(c.gamma_class)},
                            {"beta", c.beta},
                            {"beta_sorted", c.beta_sorted},
                            {"dominant_foundation", foundation_names()[c.dominant]}});
    }
    doc["concepts"] = concepts;
    json tally = json::object();
    for (std::size_t k = 0; k < kFoundations; ++k)
        tally[foundation_names()[k]] = {{"count", r.dominant_counts[k]}, {"percent", r.dominant_percent[k]}};
    doc["dominant_foundations"] = tally;
    doc["gamma_classes"] = {{"agenda", r.gamma_classes[0]}, {"framing", r.gamma_classes[1]}, {"mixed", r.gamma_classes[2]}};
    doc["gamma_histogram"] = r.gamma_histogram;
    doc["gamma_thresholds"] = {kGammaLow, kGammaHigh};
    return doc.dump(2) + "\n";
}

std::string gamma_tsv(const SparsityReport& r) {
    std::string out = "concept\tgamma\tclass\n";
    for (const auto& c : r.concepts)
        out += c.name + '\t' + io::format_double(c.gamma) + '\t' + to_string(c.gamma_class) + '\n';
    return out;
}

std::string beta_rank_tsv(const SparsityReport& r) {
    std::string out = "concept\trank\tbeta\n";
    for (const auto& c : r.concepts)
        for (std::size_t k = 0; k < kFoundations; ++k)
            out += c.name + '\t' + std::to_string(k + 1) + '\t' + io::format_double(c.beta_sorted[k]) + '\n';
    return out;
}

std::string framing_strength_tsv(const SparsityReport& r, const FeatureBundle& features) {
    std::string out = "node\tconcept\tfoundation\tstrength\n";
    for (const auto& s : r.framing_strengths)
        out += features.node_names[s.node] + '\t' + features.concepts[s.concept_index] + '\t' +
               foundation_names()[s.foundation] + '\t' + io::format_double(s.value) + '\n';
    return out;
}

}  // namespace sgae
