#include "sgae/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "sgae/error.hpp"
#include "sgae/rng.hpp"

namespace sgae {

using nlohmann::json;

void PlantedConfig::validate() const {
    if (n_nodes < 2) throw Error(ErrorKind::InvalidArgument, "synth: need at least 2 nodes");
    if (n_blocks < 1 || n_blocks > n_nodes) throw Error(ErrorKind::InvalidArgument, "synth: n_blocks must be in [1, n_nodes]");
    if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "synth: probabilities must lie in [0, 1]");
    if (!(p_in > p_out)) throw Error(ErrorKind::InvalidArgument, "synth: p_in must exceed p_out");
    if (n_concepts == 0) throw Error(ErrorKind::InvalidArgument, "synth: need at least one concept");
    if (n_informative > n_concepts) throw Error(ErrorKind::InvalidArgument, "synth: n_informative exceeds n_concepts");
    if (!kinds.empty() && kinds.size() != n_informative)
        throw Error(ErrorKind::InvalidArgument, "synth: kinds must have one entry per informative concept");
    for (const auto& k : kinds)
        if (k.foundation >= kFoundations) throw Error(ErrorKind::InvalidArgument, "synth: foundation index out of range");
    if (!(noise_std >= 0.0) || !(base_count > 0.0) || !(agenda_lift > 0.0))
        throw Error(ErrorKind::InvalidArgument, "synth: noise_std >= 0, base_count > 0 and agenda_lift > 0 required");
}

PlantedConfig two_clique_toy(std::uint64_t seed) {
    PlantedConfig c;
    c.n_nodes = 8;
    c.n_blocks = 2;
    c.p_in = 1.0;
    c.p_out = 0.0;
    c.n_concepts = 10;
    c.n_informative = 1;
    c.kinds = {{SignalKind::Framing, 0}};
    c.noise_std = 0.1;
    c.framing_shift = 0.6;
    c.seed = seed;
    return c;
}

namespace {

std::vector<PlantedKind> default_kinds(std::size_t n) {
    std::vector<PlantedKind> out;
    const SignalKind cycle[3] = {SignalKind::Agenda, SignalKind::Framing, SignalKind::Mixed};
    for (std::size_t q = 0; q < n; ++q) out.push_back({cycle[q % 3], q % kFoundations});
    return out;
}

std::string padded(const char* prefix, std::size_t i, std::size_t n) {
    const int width = static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size());
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
    return buf;
}

}  // namespace

PlantedData generate_planted(const PlantedConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_nodes;
    PlantedData out;
    auto& truth = out.truth;
    truth.block.resize(n);
    for (std::size_t v = 0; v < n; ++v) truth.block[v] = v * cfg.n_blocks / n;

    std::vector<std::string> names;
    for (std::size_t v = 0; v < n; ++v) names.push_back(padded("n", v, n));

    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 10 && !ok; ++attempt) {
        Rng rng(mix_seed(cfg.seed, 100 + attempt));
        std::vector<std::pair<NodeId, NodeId>> pairs;
        for (NodeId i = 0; i < n; ++i)
            for (NodeId j = i + 1; j < n; ++j)
                if (rng.bernoulli(truth.block[i] == truth.block[j] ? cfg.p_in : cfg.p_out)) pairs.emplace_back(i, j);
        if (pairs.empty()) continue;
        out.graph = Graph(names, pairs);
        ok = true;
    }
    if (!ok) throw Error(ErrorKind::Infeasible, "synth: generated graph had no edges in 10 attempts");

    Rng rng(mix_seed(cfg.seed, 7));
    std::vector<std::size_t> all(cfg.n_concepts);
    for (std::size_t c = 0; c < all.size(); ++c) all[c] = c;
    rng.shuffle(all);
    truth.informative.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cfg.n_informative));
    std::sort(truth.informative.begin(), truth.informative.end());
    truth.kinds = cfg.kinds.empty() ? default_kinds(cfg.n_informative) : cfg.kinds;
    truth.favoured.assign(cfg.n_informative, std::vector<bool>(cfg.n_blocks, false));
    for (std::size_t q = 0; q < cfg.n_informative; ++q) truth.favoured[q][q % cfg.n_blocks] = true;

    // Per concept: index into truth.informative or -1.
    std::vector<long> role(cfg.n_concepts, -1);
    for (std::size_t q = 0; q < truth.informative.size(); ++q) role[truth.informative[q]] = static_cast<long>(q);

    FeatureBundle& f = out.features;
    f.node_names = names;
    for (std::size_t c = 0; c < cfg.n_concepts; ++c) f.concepts.push_back(padded("c", c, cfg.n_concepts));
    f.counts = Matrix(n, cfg.n_concepts);
    for (auto& s : f.framing) s = Matrix(n, cfg.n_concepts);

    const double jitter_shift = -0.5 * cfg.noise_std * cfg.noise_std;
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t c = 0; c < cfg.n_concepts; ++c) {
            const long q = role[c];
            const bool fav = q >= 0 && truth.favoured[static_cast<std::size_t>(q)][truth.block[v]];
            const PlantedKind* kind = q >= 0 ? &truth.kinds[static_cast<std::size_t>(q)] : nullptr;

            double mean = cfg.base_count * std::exp(cfg.noise_std * rng.normal() + jitter_shift);
            if (kind && kind->kind != SignalKind::Framing && fav) mean *= cfg.agenda_lift;
            f.counts(v, c) = static_cast<double>(rng.poisson(mean));

            for (std::size_t k = 0; k < kFoundations; ++k) {
                double s = cfg.noise_std * rng.normal();
                if (kind && kind->kind != SignalKind::Agenda && kind->foundation == k)
                    s += fav ? cfg.framing_shift : -cfg.framing_shift;
                f.framing[k](v, c) = std::clamp(s, -1.0, 1.0);
            }
        }
    }
    return out;
}

RecoveryMetrics recovery_metrics(const std::vector<std::size_t>& selected, const PlantedTruth& truth) {
    std::size_t hits = 0;
    for (std::size_t c : selected)
        if (std::binary_search(truth.informative.begin(), truth.informative.end(), c)) ++hits;
    RecoveryMetrics m;
    if (!selected.empty()) m.precision = static_cast<double>(hits) / static_cast<double>(selected.size());
    m.recall = truth.informative.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth.informative.size());
    return m;
}

std::string truth_to_json(const PlantedTruth& truth) {
    json doc;
    doc["block"] = truth.block;
    json inf = json::array();
    for (std::size_t q = 0; q < truth.informative.size(); ++q) {
        std::vector<std::size_t> fav;
        for (std::size_t b = 0; b < truth.favoured[q].size(); ++b)
            if (truth.favoured[q][b]) fav.push_back(b);
        inf.push_back({{"concept", truth.informative[q]},
                       {"kind", to_string(truth.kinds[q].kind)},
                       {"foundation", truth.kinds[q].foundation},
                       {"favoured_blocks", fav}});
    }
    doc["informative"] = inf;
    return doc.dump(2) + "\n";
}

namespace {

SignalKind parse_kind(const std::string& s) {
    for (SignalKind k : {SignalKind::Agenda, SignalKind::Framing, SignalKind::Mixed})
        if (s == to_string(k)) return k;
    throw Error(ErrorKind::Format, "synth config: unknown signal kind '" + s + "'");
}

}  // namespace

std::string planted_config_to_json(const PlantedConfig& cfg) {
    json kinds = json::array();
    for (const auto& k : cfg.kinds) kinds.push_back({{"kind", to_string(k.kind)}, {"foundation", k.foundation}});
    json doc = {{"n_nodes", cfg.n_nodes},         {"n_blocks", cfg.n_blocks},
                {"p_in", cfg.p_in},               {"p_out", cfg.p_out},
                {"n_concepts", cfg.n_concepts},   {"n_informative", cfg.n_informative},
                {"kinds", kinds},                 {"noise_std", cfg.noise_std},
                {"base_count", cfg.base_count},   {"agenda_lift", cfg.agenda_lift},
                {"framing_shift", cfg.framing_shift}, {"seed", cfg.seed}};
    return doc.dump(2) + "\n";
}

PlantedConfig planted_config_from_json(const std::string& text, PlantedConfig cfg) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Format, std::string("synth config: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::Format, "synth config: expected object");
    try {
        for (const auto& [key, val] : doc.items()) {
            if (key == "n_nodes") cfg.n_nodes = val.get<std::size_t>();
            else if (key == "n_blocks") cfg.n_blocks = val.get<std::size_t>();
            else if (key == "p_in") cfg.p_in = val.get<double>();
            else if (key == "p_out") cfg.p_out = val.get<double>();
            else if (key == "n_concepts") cfg.n_concepts = val.get<std::size_t>();
            else if (key == "n_informative") cfg.n_informative = val.get<std::size_t>();
            else if (key == "noise_std") cfg.noise_std = val.get<double>();
            else if (key == "base_count") cfg.base_count = val.get<double>();
            else if (key == "agenda_lift") cfg.agenda_lift = val.get<double>();
            else if (key == "framing_shift") cfg.framing_shift = val.get<double>();
            else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
            else if (key == "kinds") {
                cfg.kinds.clear();
                for (const auto& k : val)
                    cfg.kinds.push_back({parse_kind(k.at("kind").get<std::string>()), k.value("foundation", std::size_t{0})});
            } else
                throw Error(ErrorKind::Format, "synth config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, std::string("synth config: ") + e.what());
    }
    return cfg;
}

}  // namespace sgae
