#include "sgae/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgae/backbone.hpp"
#include "sgae/dynamics.hpp"
#include "sgae/gae.hpp"
#include "sgae/io.hpp"
#include "sgae/synth.hpp"
#include "sgae/train.hpp"

namespace sgae::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return kExitUsage;
        case ErrorKind::NotFound: return kExitNotFound;
        case ErrorKind::Format: return kExitFormat;
        case ErrorKind::Infeasible: return kExitInfeasible;
        case ErrorKind::Numerical: return kExitNumerical;
    }
    return kExitOther;
}

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string config;
    int verbose = 0;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Random seed (default 0)");
    sub->add_option("--out,-o", c.out, "Output directory (default $SGAE_OUTPUT_ROOT/<command>)");
    sub->add_option("--config", c.config, "JSON config file; flags override it");
    sub->add_flag("-v,--verbose", c.verbose, "List written files on stderr");
}

fs::path output_dir(const Common& c, const std::string& command) {
    if (!c.out.empty()) return c.out;
    const char* root = std::getenv(kOutputRootEnv);
    return fs::path(root && *root ? root : ".") / command;
}

json parse_json_file(const fs::path& path) {
    try {
        return json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Format, path.string() + ": " + e.what());
    }
}

json metrics_json(const Metrics& m) { return {{"auc", m.auc}, {"ap", m.ap}, {"n_pos", m.n_pos}, {"n_neg", m.n_neg}}; }

std::vector<std::string> concept_names(const FeatureBundle& f, const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    for (std::size_t i : idx) out.push_back(f.concepts[i]);
    return out;
}

// ---------------------------------------------------------------- settings

struct RunSettings {
    TrainConfig train;
    SweepGrid grid;
    std::size_t jobs = 1;
};

void apply_config(const json& doc, RunSettings& s) {
    if (!doc.is_object()) throw Error(ErrorKind::Format, "config: expected a JSON object");
    auto& t = s.train;
    try {
        for (const auto& [key, v] : doc.items()) {
            if (key == "epochs") t.epochs = v.get<std::size_t>();
            else if (key == "learning_rate") t.learning_rate = v.get<double>();
            else if (key == "lambda") t.lambda = v.get<double>();
            else if (key == "theta") t.theta = v.get<std::size_t>();
            else if (key == "variant") t.variant = parse_variant(v.get<std::string>());
            else if (key == "seed") t.seed = v.get<std::uint64_t>();
            else if (key == "hidden1") t.hidden1 = v.get<std::size_t>();
            else if (key == "hidden2") t.hidden2 = v.get<std::size_t>();
            else if (key == "standardize") t.standardize = v.get<bool>();
            else if (key == "full_reconstruction") t.full_reconstruction = v.get<bool>();
            else if (key == "zero_row_tol") t.zero_row_tol = v.get<double>();
            else if (key == "adam_beta1") t.adam.beta1 = v.get<double>();
            else if (key == "adam_beta2") t.adam.beta2 = v.get<double>();
            else if (key == "adam_eps") t.adam.eps = v.get<double>();
            else if (key == "prox_max_iter") t.prox_newton.max_iter = v.get<std::size_t>();
            else if (key == "prox_tol") t.prox_newton.tol = v.get<double>();
            else if (key == "optimizer") {
                const auto name = v.get<std::string>();
                if (name == "adam") t.optimizer = OptimizerMode::Adam;
                else if (name == "sgd") t.optimizer = OptimizerMode::Sgd;
                else throw Error(ErrorKind::Format, "config: optimizer must be \"adam\" or \"sgd\"");
            } else if (key == "learning_rates") s.grid.learning_rates = v.get<std::vector<double>>();
            else if (key == "lambdas") s.grid.lambdas = v.get<std::vector<double>>();
            else if (key == "max_epochs") s.grid.max_epochs = v.get<std::size_t>();
            else if (key == "checkpoint_epochs") s.grid.epochs = v.get<std::vector<std::size_t>>();
            else if (key == "jobs") s.jobs = v.get<std::size_t>();
            else throw Error(ErrorKind::Format, "config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, std::string("config: ") + e.what());
    }
}

json config_json(const TrainConfig& t) {
    return {{"epochs", t.epochs},
            {"learning_rate", t.learning_rate},
            {"lambda", t.lambda},
            {"theta", t.theta},
            {"variant", to_string(t.variant)},
            {"seed", t.seed},
            {"hidden1", t.hidden1},
            {"hidden2", t.hidden2},
            {"standardize", t.standardize},
            {"full_reconstruction", t.full_reconstruction},
            {"zero_row_tol", t.zero_row_tol},
            {"optimizer", t.optimizer == OptimizerMode::Adam ? "adam" : "sgd"},
            {"adam_beta1", t.adam.beta1},
            {"adam_beta2", t.adam.beta2},
            {"adam_eps", t.adam.eps},
            {"prox_max_iter", t.prox_newton.max_iter},
            {"prox_tol", t.prox_newton.tol}};
}

struct TrainFlags {
    std::string graph, features, split;
    std::optional<std::size_t> epochs, hidden1, hidden2, theta, max_epochs, jobs;
    std::optional<double> lr, lambda;
    std::optional<std::string> variant;
    std::optional<bool> standardize, full_reconstruction;
    std::vector<double> lrs, lambdas;
    std::vector<std::size_t> checkpoint_epochs;
};

void add_data_options(CLI::App* sub, TrainFlags& f) {
    sub->add_option("--graph", f.graph, "Graph JSON")->required();
    sub->add_option("--features", f.features, "Feature directory")->required();
    sub->add_option("--split", f.split, "Edge split JSON")->required();
}

void add_model_options(CLI::App* sub, TrainFlags& f) {
    sub->add_option("--variant", f.variant, "AF-SGAE, A-SGAE, F-SGAE or AF-SLAE");
    sub->add_option("--hidden1", f.hidden1, "First hidden layer width");
    sub->add_option("--hidden2", f.hidden2, "Embedding width");
    sub->add_flag("--standardize,!--no-standardize", f.standardize, "Standardize feature columns");
    sub->add_flag("--full-reconstruction", f.full_reconstruction, "Loss over all non-held-out pairs");
}

RunSettings settings(const Common& c, const TrainFlags& f) {
    RunSettings s;
    if (!c.config.empty()) apply_config(parse_json_file(c.config), s);
    auto& t = s.train;
    if (c.seed) t.seed = *c.seed;
    if (f.epochs) t.epochs = *f.epochs;
    if (f.lr) t.learning_rate = *f.lr;
    if (f.lambda) t.lambda = *f.lambda;
    if (f.variant) t.variant = parse_variant(*f.variant);
    if (f.hidden1) t.hidden1 = *f.hidden1;
    if (f.hidden2) t.hidden2 = *f.hidden2;
    if (f.standardize) t.standardize = *f.standardize;
    if (f.full_reconstruction) t.full_reconstruction = *f.full_reconstruction;
    if (f.theta) t.theta = *f.theta;
    if (f.max_epochs) s.grid.max_epochs = *f.max_epochs;
    if (f.jobs) s.jobs = *f.jobs;
    if (!f.lrs.empty()) s.grid.learning_rates = f.lrs;
    if (!f.lambdas.empty()) s.grid.lambdas = f.lambdas;
    if (!f.checkpoint_epochs.empty()) s.grid.epochs = f.checkpoint_epochs;
    return s;
}

struct Inputs {
    Graph graph;
    FeatureBundle features;
    EdgeSplit split;
};

Inputs load_inputs(const TrainFlags& f) {
    Inputs in;
    in.graph = load_graph(f.graph);
    in.features = load_feature_dir(f.features);
    if (in.features.node_names != in.graph.node_names())
        throw Error(ErrorKind::Format, "feature directory nodes do not match the graph's nodes (names and order)");
    in.split = load_split(f.split, in.graph.node_count());
    validate_split(in.graph, in.split);
    return in;
}

void add_checkpoint(io::OutputSet& out, const fs::path& dir, const ModelParams& params, const Matrix& z,
                    const Inputs& in, const TrainConfig& cfg, std::size_t epochs) {
    Checkpoint ck;
    ck.params = params;
    ck.z = z;
    ck.node_names = in.graph.node_names();
    ck.concepts = in.features.concepts;
    ck.variant = to_string(cfg.variant);
    ck.seed = cfg.seed;
    ck.epochs = epochs;
    ck.standardize = cfg.standardize;
    for (auto& [rel, text] : checkpoint_files(ck)) out.add(dir / rel, std::move(text));
}

std::vector<double> parse_ratios(const std::vector<double>& r) {
    if (r.size() != 3) throw Error(ErrorKind::InvalidArgument, "--ratios expects three values");
    return r;
}

TrainedModel model_from_checkpoint(const Checkpoint& ck) {
    TrainedModel m;
    m.params = ck.params;
    m.config.variant = parse_variant(ck.variant);
    m.config.seed = ck.seed;
    m.config.epochs = ck.epochs;
    m.config.standardize = ck.standardize;
    m.config.hidden1 = ck.params.w0.cols();
    m.config.hidden2 = ck.params.w1.cols();
    m.active_concepts = active_rows(ck.params.w0, m.config.zero_row_tol);
    return m;
}

std::string cells_tsv(const SweepResult& r) {
    std::string out = "learning_rate\tlambda\tdiverged\tbest_epoch\tdev_auc\tdev_ap\ttest_auc\ttest_ap\tn_active\tmin_active\n";
    for (const auto& c : r.cells) {
        out += io::format_double(c.learning_rate) + '\t' + io::format_double(c.lambda) + '\t' +
               (c.diverged ? "1" : "0") + '\t';
        if (c.best_epoch) {
            out += std::to_string(*c.best_epoch) + '\t' + io::format_double(c.dev.auc) + '\t' +
                   io::format_double(c.dev.ap) + '\t' + io::format_double(c.test.auc) + '\t' +
                   io::format_double(c.test.ap) + '\t' + std::to_string(c.n_active);
        } else {
            out += "NA\tNA\tNA\tNA\tNA\tNA";
        }
        out += '\t' + (c.min_active == std::numeric_limits<std::size_t>::max() ? std::string("NA")
                                                                               : std::to_string(c.min_active));
        out += '\n';
    }
    return out;
}

std::string histories_tsv(const SweepResult& r, const SweepGrid& grid) {
    std::string out = "learning_rate\tlambda\tepoch\tcheckpoint\tloss_total\tdev_auc\tdev_ap\tn_active\n";
    for (const auto& c : r.cells)
        for (const auto& h : c.history)
            out += io::format_double(c.learning_rate) + '\t' + io::format_double(c.lambda) + '\t' +
                   std::to_string(h.epoch) + '\t' + (grid.is_checkpoint(h.epoch) ? "1" : "0") + '\t' +
                   io::format_double(h.loss_total) + '\t' + io::format_double(h.dev_auc) + '\t' +
                   io::format_double(h.dev_ap) + '\t' + std::to_string(h.n_active) + '\n';
    return out;
}

// ---------------------------------------------------------------- tables

using Table = std::vector<std::vector<std::string>>;

Table read_table(const fs::path& path, std::vector<std::string>& header) {
    std::istringstream in(io::read_text(path));
    std::string line;
    Table rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1)
            fields.push_back(line.substr(start, tab - start));
        fields.push_back(line.substr(start));
        if (first) {
            header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != header.size())
                throw Error(ErrorKind::Format, path.string() + ": ragged row");
            rows.push_back(std::move(fields));
        }
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const fs::path& path) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::Format, path.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
}

double to_double(const std::string& s, const fs::path& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Format, path.string() + ": bad number '" + s + "'");
    }
}

// ---------------------------------------------------------------- commands

json cmd_synth(const Common& c, bool toy, const PlantedConfig& flags, const std::vector<std::string>& set,
               const std::vector<double>& ratios, io::OutputSet& out) {
    PlantedConfig cfg = toy ? two_clique_toy() : PlantedConfig{};
    if (!c.config.empty()) cfg = planted_config_from_json(io::read_text(c.config), cfg);
    auto is_set = [&](const char* name) { return std::find(set.begin(), set.end(), name) != set.end(); };
    if (is_set("nodes")) cfg.n_nodes = flags.n_nodes;
    if (is_set("blocks")) cfg.n_blocks = flags.n_blocks;
    if (is_set("p_in")) cfg.p_in = flags.p_in;
    if (is_set("p_out")) cfg.p_out = flags.p_out;
    if (is_set("concepts")) cfg.n_concepts = flags.n_concepts;
    if (is_set("informative")) cfg.n_informative = flags.n_informative;
    if (is_set("noise_std")) cfg.noise_std = flags.noise_std;
    if (is_set("framing_shift")) cfg.framing_shift = flags.framing_shift;
    if (is_set("agenda_lift")) cfg.agenda_lift = flags.agenda_lift;
    if (c.seed) cfg.seed = *c.seed;

    const PlantedData data = generate_planted(cfg);
    out.add("graph.json", graph_to_json(data.graph));
    for (auto& [rel, text] : feature_dir_files(data.features)) out.add(fs::path("features") / rel, std::move(text));
    out.add("truth.json", truth_to_json(data.truth));
    out.add("synth_config.json", planted_config_to_json(cfg));
    if (!ratios.empty()) {
        const auto r = parse_ratios(ratios);
        out.add("split.json", split_to_json(split_edges(data.graph, {r[0], r[1], r[2]}, cfg.seed)));
    }
    return {{"seed", cfg.seed}, {"nodes", data.graph.node_count()}, {"edges", data.graph.edge_count()}};
}

json cmd_split(const Common& c, const std::string& graph_path, const std::vector<double>& ratios,
               io::OutputSet& out) {
    const Graph g = load_graph(graph_path);
    const auto r = parse_ratios(ratios);
    const std::uint64_t seed = c.seed.value_or(0);
    const EdgeSplit s = split_edges(g, {r[0], r[1], r[2]}, seed);
    out.add("split.json", split_to_json(s));
    return {{"seed", seed},
            {"train", s.train_edges.size()},
            {"dev", s.dev_edges.size()},
            {"test", s.test_edges.size()}};
}

json cmd_train(const Common& c, const TrainFlags& f, io::OutputSet& out) {
    const RunSettings s = settings(c, f);
    const Inputs in = load_inputs(f);
    const TrainedModel model = train(in.graph, in.features, in.split, s.train);
    const Matrix z = embed(in.graph, in.features, in.split, model.params, s.train);
    const Metrics dev = evaluate_pairs(z, in.split.dev_edges, in.split.dev_negatives);
    const Metrics test = evaluate_pairs(z, in.split.test_edges, in.split.test_negatives);
    add_checkpoint(out, "checkpoint", model.params, z, in, s.train, s.train.epochs);
    out.add("history.tsv", history_tsv(model.history));
    json report = {{"seed", s.train.seed},
                   {"config", config_json(s.train)},
                   {"dev", metrics_json(dev)},
                   {"test", metrics_json(test)},
                   {"n_active", model.active_concepts.size()},
                   {"active_concepts", concept_names(in.features, model.active_concepts)}};
    out.add("train_report.json", report.dump(2) + "\n");
    return {{"seed", s.train.seed}, {"dev_auc", dev.auc}, {"test_auc", test.auc}, {"n_active", model.active_concepts.size()}};
}

json cmd_sweep(const Common& c, const TrainFlags& f, io::OutputSet& out) {
    const RunSettings s = settings(c, f);
    const Inputs in = load_inputs(f);
    const SweepResult r = sweep(in.graph, in.features, in.split, s.train, s.grid, s.train.theta, s.jobs);
    const auto& best = r.cells[r.best_cell];
    const Matrix z = embed(in.graph, in.features, in.split, r.best.params, r.best.config);
    add_checkpoint(out, "checkpoint", r.best.params, z, in, r.best.config, *best.best_epoch);
    out.add("history.tsv", history_tsv(r.best.history));
    out.add("histories.tsv", histories_tsv(r, s.grid));
    out.add("cells.tsv", cells_tsv(r));
    json report = {{"seed", s.train.seed},
                   {"theta", r.theta},
                   {"base_config", config_json(s.train)},
                   {"grid",
                    {{"learning_rates", s.grid.learning_rates},
                     {"lambdas", s.grid.lambdas},
                     {"max_epochs", s.grid.last_epoch()},
                     {"checkpoint_epochs", s.grid.epochs}}},
                   {"best",
                    {{"learning_rate", best.learning_rate},
                     {"lambda", best.lambda},
                     {"epoch", *best.best_epoch},
                     {"dev", metrics_json(best.dev)},
                     {"test", metrics_json(best.test)},
                     {"n_active", r.best.active_concepts.size()},
                     {"active_concepts", concept_names(in.features, r.best.active_concepts)}}},
                   {"diverged_cells", std::count_if(r.cells.begin(), r.cells.end(), [](const SweepCell& x) { return x.diverged; })}};
    out.add("sweep_report.json", report.dump(2) + "\n");
    return {{"seed", s.train.seed}, {"theta", r.theta}, {"dev_auc", best.dev.auc}, {"test_auc", best.test.auc},
            {"n_active", r.best.active_concepts.size()}};
}

json cmd_eval(const Common& c, const TrainFlags& f, const std::vector<std::string>& checkpoints, io::OutputSet& out) {
    const Inputs in = load_inputs(f);
    struct Row {
        std::string checkpoint;
        std::string variant;
        std::uint64_t seed;
        Metrics dev, test;
        std::size_t n_active;
    };
    std::vector<Row> rows;
    for (const auto& path : checkpoints) {
        const Checkpoint ck = load_checkpoint(path);
        if (ck.node_names != in.graph.node_names())
            throw Error(ErrorKind::Format, "checkpoint " + path + ": nodes do not match the graph");
        if (ck.concepts != in.features.concepts)
            throw Error(ErrorKind::Format, "checkpoint " + path + ": concepts do not match the feature directory");
        const TrainedModel m = model_from_checkpoint(ck);
        rows.push_back({path, ck.variant, ck.seed, evaluate(m, SplitPart::Dev, in.features, in.graph, in.split),
                        evaluate(m, SplitPart::Test, in.features, in.graph, in.split), m.active_concepts.size()});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.dev.auc > b.dev.auc; });
    json board = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i)
        board.push_back({{"rank", i + 1},
                         {"checkpoint", rows[i].checkpoint},
                         {"variant", rows[i].variant},
                         {"seed", rows[i].seed},
                         {"n_active", rows[i].n_active},
                         {"dev", metrics_json(rows[i].dev)},
                         {"test", metrics_json(rows[i].test)}});
    const std::uint64_t seed = c.seed.value_or(0);
    out.add("leaderboard.json", json{{"seed", seed}, {"entries", board}}.dump(2) + "\n");
    return {{"seed", seed}, {"entries", rows.size()}, {"best_dev_auc", rows.front().dev.auc}};
}

json cmd_analyze(const Common& c, const std::string& checkpoint, const std::string& features, io::OutputSet& out) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const FeatureBundle f = load_feature_dir(features);
    if (ck.concepts != f.concepts) throw Error(ErrorKind::Format, "checkpoint concepts do not match the feature directory");
    if (ck.node_names != f.node_names) throw Error(ErrorKind::Format, "checkpoint nodes do not match the feature directory");
    const TrainedModel m = model_from_checkpoint(ck);
    const SparsityReport r = analyze(m, f);
    json doc = json::parse(report_to_json(r));
    doc["seed"] = ck.seed;
    out.add("report.json", doc.dump(2) + "\n");
    out.add("gamma.tsv", gamma_tsv(r));
    out.add("beta_rank.tsv", beta_rank_tsv(r));
    out.add("framing_strength.tsv", framing_strength_tsv(r, f));
    (void)c;
    return {{"seed", ck.seed}, {"n_active", r.concepts.size()}};
}

json cmd_backbone(const Common& c, const std::string& weights, const std::string& activity, double min_comments,
                  std::vector<double> deltas, std::size_t shuffles, std::size_t jobs, io::OutputSet& out) {
    if (weights.empty() == activity.empty())
        throw Error(ErrorKind::InvalidArgument, "backbone: give exactly one of --weights or --activity");
    WeightedNetwork w;
    if (!weights.empty()) {
        w = parse_weighted_tsv(io::read_text(weights));
    } else {
        const auto records = parse_activity_tsv(io::read_text(activity));
        w = cooccurrence_weights(records, min_comments);
    }
    if (deltas.empty()) deltas = default_deltas();
    const std::uint64_t seed = c.seed.value_or(0);
    const BackboneReport r = backbone(w, deltas);
    json report = json::parse(backbone_report_to_json(r));
    report["seed"] = seed;
    out.add("graph.json", graph_to_json(r.graph));
    out.add("backbone_report.json", report.dump(2) + "\n");
    json summary = {{"seed", seed}, {"delta", r.delta_used}, {"nodes", r.graph.node_count()}, {"edges", r.graph.edge_count()}};
    if (shuffles > 0) {
        const ModularityResult m = degree_preserving_null(r.graph, shuffles, seed, jobs);
        json mod = json::parse(modularity_to_json(m, r.graph));
        mod["seed"] = seed;
        mod["shuffles"] = shuffles;
        out.add("modularity.json", mod.dump(2) + "\n");
        summary["q"] = m.q;
        summary["z_score"] = m.z_defined ? json(m.z_score) : json(nullptr);
    }
    return summary;
}

json cmd_dynamics(const Common& c, const std::vector<std::string>& checkpoints, std::vector<std::string> labels,
                  io::OutputSet& out) {
    if (checkpoints.empty()) throw Error(ErrorKind::InvalidArgument, "dynamics: at least one --checkpoint is required");
    if (labels.empty())
        for (std::size_t i = 0; i < checkpoints.size(); ++i) labels.push_back(std::to_string(i));
    if (labels.size() != checkpoints.size())
        throw Error(ErrorKind::InvalidArgument, "dynamics: --labels must match the number of checkpoints");
    EmbeddingSeries series;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        Checkpoint ck = load_checkpoint(checkpoints[i]);
        series.periods.push_back({labels[i], std::move(ck.node_names), std::move(ck.z)});
    }
    const DriftAnalysis a = analyze_drift(series);
    out.add("drift.tsv", drift_tsv(a, series));
    json ranking = json::parse(drift_ranking_json(a));
    const std::uint64_t seed = c.seed.value_or(0);
    ranking["seed"] = seed;
    ranking["periods"] = labels;
    out.add("drift_ranking.json", ranking.dump(2) + "\n");
    return {{"seed", seed}, {"periods", labels.size()}, {"nodes", a.series.size()}};
}

json cmd_plot_data(const Common& c, const std::string& kind, const std::string& input, std::size_t top,
                   io::OutputSet& out) {
    const std::uint64_t seed = c.seed.value_or(0);
    const fs::path in(input);
    if (kind == "threshold") {
        const fs::path path = in / "histories.tsv";
        std::vector<std::string> header;
        const Table rows = read_table(path, header);
        const std::size_t ci = column(header, "checkpoint", path), ai = column(header, "dev_auc", path),
                          ni = column(header, "n_active", path);
        std::size_t max_active = 0;
        std::vector<std::pair<std::size_t, double>> points;
        for (const auto& r : rows) {
            if (r[ci] != "1") continue;
            const auto n = static_cast<std::size_t>(to_double(r[ni], path));
            points.emplace_back(n, to_double(r[ai], path));
            max_active = std::max(max_active, n);
        }
        std::string tsv = "theta\tbest_dev_auc\n";
        for (std::size_t theta = 0; theta <= max_active; ++theta) {
            std::optional<double> best;
            for (const auto& [n, auc] : points)
                if (n <= theta && (!best || auc > *best)) best = auc;
            tsv += std::to_string(theta) + '\t' + (best ? io::format_double(*best) : std::string("NA")) + '\n';
        }
        out.add("threshold.tsv", tsv);
    } else if (kind == "beta-rank" || kind == "gamma") {
        const json report = parse_json_file(in);
        if (!report.contains("concepts")) throw Error(ErrorKind::Format, input + ": not an analysis report");
        if (kind == "beta-rank") {
            std::array<double, kFoundations> sum{};
            std::size_t n = 0;
            std::string rows = "concept\trank\tbeta\n";
            for (const auto& cr : report["concepts"]) {
                const auto b = cr.at("beta_sorted").get<std::vector<double>>();
                for (std::size_t k = 0; k < kFoundations && k < b.size(); ++k) {
                    sum[k] += b[k];
                    rows += cr.at("name").get<std::string>() + '\t' + std::to_string(k + 1) + '\t' + io::format_double(b[k]) + '\n';
                }
                ++n;
            }
            std::string mean = "rank\tmean_beta\n";
            for (std::size_t k = 0; k < kFoundations; ++k)
                mean += std::to_string(k + 1) + '\t' + io::format_double(n ? sum[k] / static_cast<double>(n) : 0.0) + '\n';
            out.add("beta_rank.tsv", rows);
            out.add("beta_rank_mean.tsv", mean);
        } else {
            const auto hist = report.at("gamma_histogram").get<std::vector<std::size_t>>();
            std::string tsv = "bin_low\tbin_high\tcount\n";
            for (std::size_t b = 0; b < hist.size(); ++b)
                tsv += io::format_double(b / 10.0) + '\t' + io::format_double((b + 1) / 10.0) + '\t' + std::to_string(hist[b]) + '\n';
            out.add("gamma_hist.tsv", tsv);
        }
    } else if (kind == "drift") {
        const json ranking = parse_json_file(in / "drift_ranking.json");
        std::vector<std::string> header;
        const fs::path path = in / "drift.tsv";
        const Table rows = read_table(path, header);
        const std::size_t ni = column(header, "node", path), pi = column(header, "period", path),
                          ci = column(header, "cosine", path);
        std::string tsv = "node\tperiod\tcosine\tr\n";
        std::size_t taken = 0;
        for (const auto& entry : ranking.at("ranking")) {
            if (taken++ >= top) break;
            const auto node = entry.at("node").get<std::string>();
            for (const auto& r : rows)
                if (r[ni] == node) tsv += node + '\t' + r[pi] + '\t' + r[ci] + '\t' + io::format_double(entry.at("r").get<double>()) + '\n';
        }
        out.add("drift_top.tsv", tsv);
    } else {
        throw Error(ErrorKind::InvalidArgument, "plot-data: unknown kind '" + kind + "' (threshold, beta-rank, gamma, drift)");
    }
    return {{"seed", seed}, {"kind", kind}};
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse graph auto-encoders for concept-level polarization analysis", "sgae"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "sgae 1.0.0");

    // synth
    Common c_synth;
    bool toy = false;
    PlantedConfig pf;
    std::vector<double> synth_ratios;
    auto* synth = app.add_subcommand("synth", "Generate a planted-polarization graph and feature directory");
    add_common(synth, c_synth);
    synth->add_flag("--toy", toy, "Two 4-cliques with one block-aligned framing concept");
    synth->add_option("--nodes", pf.n_nodes);
    synth->add_option("--blocks", pf.n_blocks);
    synth->add_option("--p-in", pf.p_in);
    synth->add_option("--p-out", pf.p_out);
    synth->add_option("--concepts", pf.n_concepts);
    synth->add_option("--informative", pf.n_informative);
    synth->add_option("--noise-std", pf.noise_std);
    synth->add_option("--framing-shift", pf.framing_shift);
    synth->add_option("--agenda-lift", pf.agenda_lift);
    synth->add_option("--split-ratios", synth_ratios, "Also write split.json with these train/dev/test ratios")
        ->expected(3);

    // split
    Common c_split;
    std::string split_graph;
    std::vector<double> ratios{0.6, 0.2, 0.2};
    auto* split = app.add_subcommand("split", "Split edges into train/dev/test with frozen negatives");
    add_common(split, c_split);
    split->add_option("--graph", split_graph, "Graph JSON")->required();
    split->add_option("--ratios", ratios, "Train, dev and test fractions")->expected(3);

    // train
    Common c_train;
    TrainFlags f_train;
    auto* trn = app.add_subcommand("train", "Train one model");
    add_common(trn, c_train);
    add_data_options(trn, f_train);
    add_model_options(trn, f_train);
    trn->add_option("--epochs", f_train.epochs);
    trn->add_option("--lr", f_train.lr);
    trn->add_option("--lambda", f_train.lambda);

    // sweep
    Common c_sweep;
    TrainFlags f_sweep;
    auto* swp = app.add_subcommand("sweep", "Grid search under a cap on surviving concepts");
    add_common(swp, c_sweep);
    add_data_options(swp, f_sweep);
    add_model_options(swp, f_sweep);
    swp->add_option("--theta", f_sweep.theta, "Maximum number of surviving concepts (default 150)");
    swp->add_option("--max-epochs", f_sweep.max_epochs, "Consider every epoch up to this (default 1000)");
    swp->add_option("--checkpoint-epochs", f_sweep.checkpoint_epochs, "Consider only these epochs");
    swp->add_option("--lrs", f_sweep.lrs, "Learning-rate grid");
    swp->add_option("--lambdas", f_sweep.lambdas, "Regularization grid");
    swp->add_option("--jobs", f_sweep.jobs, "Parallel grid cells");

    // eval
    Common c_eval;
    TrainFlags f_eval;
    std::vector<std::string> eval_ckpts;
    auto* evl = app.add_subcommand("eval", "Score checkpoints on dev and test pairs");
    add_common(evl, c_eval);
    add_data_options(evl, f_eval);
    evl->add_option("--checkpoint", eval_ckpts, "Checkpoint directories")->required();

    // analyze
    Common c_an;
    std::string an_ckpt, an_features;
    auto* ana = app.add_subcommand("analyze", "Report surviving concepts and their mixture weights");
    add_common(ana, c_an);
    ana->add_option("--checkpoint", an_ckpt)->required();
    ana->add_option("--features", an_features)->required();

    // backbone
    Common c_bb;
    std::string bb_weights, bb_activity;
    double min_comments = 10.0;
    std::vector<double> deltas;
    std::size_t shuffles = 100, bb_jobs = 1;
    auto* bb = app.add_subcommand("backbone", "Backbone a weighted network and score its modularity");
    add_common(bb, c_bb);
    bb->add_option("--weights", bb_weights, "TSV: node_i, node_j, weight");
    bb->add_option("--activity", bb_activity, "TSV: user, node, comments");
    bb->add_option("--min-comments", min_comments, "Per-node comment threshold for co-participation");
    bb->add_option("--deltas", deltas, "Candidate significance thresholds (ascending)");
    bb->add_option("--shuffles", shuffles, "Degree-preserving null graphs (0 disables)");
    bb->add_option("--jobs", bb_jobs, "Parallel null replicas");

    // dynamics
    Common c_dyn;
    std::vector<std::string> dyn_ckpts, dyn_labels;
    auto* dyn = app.add_subcommand("dynamics", "Align per-period embeddings and rank nodes by drift");
    add_common(dyn, c_dyn);
    dyn->add_option("--checkpoint", dyn_ckpts, "Checkpoint directories in period order")->required();
    dyn->add_option("--labels", dyn_labels, "Period labels");

    // plot-data
    Common c_pd;
    std::string pd_kind, pd_input;
    std::size_t pd_top = 3;
    auto* pd = app.add_subcommand("plot-data", "Emit plot-ready TSV series");
    add_common(pd, c_pd);
    pd->add_option("--kind", pd_kind, "threshold, beta-rank, gamma or drift")->required();
    pd->add_option("--input", pd_input, "Sweep directory, report.json or dynamics directory")->required();
    pd->add_option("--top", pd_top, "Nodes for the drift series");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        print_error(err, "usage", e.what(), kExitUsage);
        return kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    const Common* common = name == "synth"      ? &c_synth
                           : name == "split"    ? &c_split
                           : name == "train"    ? &c_train
                           : name == "sweep"    ? &c_sweep
                           : name == "eval"     ? &c_eval
                           : name == "analyze"  ? &c_an
                           : name == "backbone" ? &c_bb
                           : name == "dynamics" ? &c_dyn
                                                : &c_pd;
    try {
        io::OutputSet outputs(output_dir(*common, name));
        json summary;
        if (name == "synth") {
            std::vector<std::string> set;
            for (const char* opt : {"nodes", "blocks", "p_in", "p_out", "concepts", "informative", "noise_std",
                                    "framing_shift", "agenda_lift"}) {
                std::string flag = std::string("--") + opt;
                std::replace(flag.begin(), flag.end(), '_', '-');
                if (synth->count(flag) > 0) set.push_back(opt);
            }
            summary = cmd_synth(c_synth, toy, pf, set, synth_ratios, outputs);
        } else if (name == "split") {
            summary = cmd_split(c_split, split_graph, ratios, outputs);
        } else if (name == "train") {
            summary = cmd_train(c_train, f_train, outputs);
        } else if (name == "sweep") {
            summary = cmd_sweep(c_sweep, f_sweep, outputs);
        } else if (name == "eval") {
            summary = cmd_eval(c_eval, f_eval, eval_ckpts, outputs);
        } else if (name == "analyze") {
            summary = cmd_analyze(c_an, an_ckpt, an_features, outputs);
        } else if (name == "backbone") {
            summary = cmd_backbone(c_bb, bb_weights, bb_activity, min_comments, deltas, shuffles, bb_jobs, outputs);
        } else if (name == "dynamics") {
            summary = cmd_dynamics(c_dyn, dyn_ckpts, dyn_labels, outputs);
        } else {
            summary = cmd_plot_data(c_pd, pd_kind, pd_input, pd_top, outputs);
        }
        outputs.commit();
        json files = json::array();
        for (const auto& p : outputs.files()) {
            files.push_back(p.string());
            if (common->verbose) err << "wrote " << p.string() << '\n';
        }
        summary["command"] = name;
        summary["out"] = outputs.root().string();
        summary["files"] = files;
        out << summary.dump() << '\n';
        return kExitOk;
    } catch (const Error& e) {
        const int code = exit_code(e.kind());
        print_error(err, to_string(e.kind()), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        print_error(err, "internal", e.what(), kExitOther);
        return kExitOther;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace sgae::cli
