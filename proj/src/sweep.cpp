#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <tuple>

#include "sgae/error.hpp"
#include "sgae/train.hpp"

namespace sgae {

bool SweepGrid::is_checkpoint(std::size_t epoch) const {
    if (epochs.empty()) return epoch >= 1 && epoch <= max_epochs;
    return std::find(epochs.begin(), epochs.end(), epoch) != epochs.end();
}

std::size_t SweepGrid::last_epoch() const {
    if (epochs.empty()) return max_epochs;
    return *std::max_element(epochs.begin(), epochs.end());
}

namespace {

void run_cell(const Graph& graph, const FeatureBundle& features, const EdgeSplit& split, const TrainConfig& base,
              const SweepGrid& grid, std::size_t theta, SweepCell& cell) {
    TrainConfig cfg = base;
    cfg.learning_rate = cell.learning_rate;
    cfg.lambda = cell.lambda;
    cfg.epochs = grid.last_epoch();
    double best_auc = -1.0;
    auto observer = [&](const EpochRecord& rec, const ModelParams& params, const ForwardCache& cache) {
        cell.history.push_back(rec);
        if (!grid.is_checkpoint(rec.epoch)) return;
        cell.min_active = std::min(cell.min_active, rec.n_active);
        if (rec.n_active > theta) return;
        const bool better =
            !cell.best_epoch || rec.dev_auc > best_auc || (rec.dev_auc == best_auc && rec.n_active < cell.n_active);
        if (!better) return;
        best_auc = rec.dev_auc;
        cell.best_epoch = rec.epoch;
        cell.n_active = rec.n_active;
        cell.best_params = params;
        cell.dev = evaluate_pairs(cache.z, split.dev_edges, split.dev_negatives);
        cell.test = evaluate_pairs(cache.z, split.test_edges, split.test_negatives);
    };
    try {
        train(graph, features, split, cfg, observer);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numerical) throw;
        cell.diverged = true;
        cell.failure = e.what();
    }
}

}  // namespace

SweepResult sweep(const Graph& graph, const FeatureBundle& features, const EdgeSplit& split, const TrainConfig& base,
                  const SweepGrid& grid, std::size_t theta, std::size_t jobs) {
    if (grid.learning_rates.empty() || grid.lambdas.empty() || grid.last_epoch() == 0)
        throw Error(ErrorKind::InvalidArgument, "sweep: grids must be non-empty");

    SweepResult result;
    result.theta = theta;
    for (double lr : grid.learning_rates)
        for (double lam : grid.lambdas) {
            SweepCell c;
            c.learning_rate = lr;
            c.lambda = lam;
            result.cells.push_back(std::move(c));
        }

    // Each cell is an independent single-threaded job writing only its own slot.
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(result.cells.size());
    auto worker = [&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++) {
            try {
                run_cell(graph, features, split, base, grid, theta, result.cells[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, result.cells.size());
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::optional<std::size_t> best;
    auto key = [&](std::size_t i) {
        const auto& c = result.cells[i];
        return std::make_tuple(-c.dev.auc, c.n_active, c.lambda, c.learning_rate, *c.best_epoch);
    };
    std::size_t closest = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& c = result.cells[i];
        closest = std::min(closest, c.min_active);
        if (!c.best_epoch) continue;
        if (!best || key(i) < key(*best)) best = i;
    }
    if (!best) {
        std::string msg = "sweep: no model satisfies |C*| <= " + std::to_string(theta);
        if (closest != std::numeric_limits<std::size_t>::max())
            msg += "; closest |C*| reached was " + std::to_string(closest);
        throw Error(ErrorKind::Infeasible, msg);
    }
    result.best_cell = *best;
    const auto& c = result.cells[*best];
    result.best.params = c.best_params;
    result.best.config = base;
    result.best.config.learning_rate = c.learning_rate;
    result.best.config.lambda = c.lambda;
    result.best.config.epochs = *c.best_epoch;
    result.best.config.theta = theta;
    result.best.history.assign(c.history.begin(), c.history.begin() + static_cast<std::ptrdiff_t>(*c.best_epoch));
    result.best.active_concepts = active_rows(c.best_params.w0, base.zero_row_tol);
    return result;
}

std::optional<double> best_dev_auc_under(const std::vector<SweepCell>& cells, const SweepGrid& grid,
                                         std::size_t theta) {
    std::optional<double> best;
    for (const auto& c : cells)
        for (const auto& r : c.history)
            if (grid.is_checkpoint(r.epoch) && r.n_active <= theta && (!best || r.dev_auc > *best)) best = r.dev_auc;
    return best;
}

}  // namespace sgae
