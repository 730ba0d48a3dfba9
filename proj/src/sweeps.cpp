#include "finality/sweeps.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "finality/error.hpp"
#include "finality/parallel.hpp"

namespace finality::sweeps {
namespace {

void require_grid(const std::vector<double>& grid, const char* what, bool allow_zero) {
    if (grid.empty()) throw InvalidArgument(std::string(what) + " grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        if (!std::isfinite(x) || x < 0.0 || (x == 0.0 && !allow_zero))
            throw InvalidArgument(std::string(what) + " grid has a non-positive or non-finite entry");
        if (i > 0 && !(grid[i - 1] < x))
            throw InvalidArgument(std::string(what) + " grid must be strictly increasing");
    }
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n == 0)
        throw InvalidArgument("log grid needs 0 < lo <= hi and at least one point");
    if (n == 1) return {lo};
    std::vector<double> grid(n);
    const double a = std::log10(lo);
    const double step = (std::log10(hi) - a) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) grid[i] = std::pow(10.0, a + step * static_cast<double>(i));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

void validate(const SweepSpec& spec) {
    require_grid(spec.values, "value", /*allow_zero=*/true);
    require_grid(spec.delays, "delay", /*allow_zero=*/spec.source == Source::PoolModel);
    finality::validate(spec.risk);
    if (spec.d_max == 0) throw InvalidArgument("d_max must be >= 1");
}

std::vector<Column> switch_histogram_columns() {
    return {{"delay", ColumnKind::Real},
            {"switch_depth", ColumnKind::Integer},
            {"count", ColumnKind::Integer},
            {"trials", ColumnKind::Integer},
            {"count_per_trial", ColumnKind::Real}};
}

std::vector<Column> revocation_columns() {
    return {{"delay", ColumnKind::Real}, {"depth", ColumnKind::Integer}, {"p_rev", ColumnKind::Real}};
}

std::vector<Column> depth_value_columns() {
    return {{"delay", ColumnKind::Real},
            {"value", ColumnKind::Real},
            {"min_depth", ColumnKind::Integer},
            {"satisfied", ColumnKind::Integer}};
}

Table switch_histogram_table(std::span<const sim::SimConfig> configs) {
    std::vector<sim::SwitchHistogram> histograms;
    histograms.reserve(configs.size());
    for (const auto& config : configs) histograms.push_back(sim::run_simulation(config));
    return switch_histogram_table(histograms);
}

Table switch_histogram_table(std::span<const sim::SwitchHistogram> histograms) {
    Table table(switch_histogram_columns());
    for (const auto& h : histograms) {
        const auto delay = static_cast<double>(h.config.delay.rounds);
        const auto trials = static_cast<std::int64_t>(h.trials());
        for (const auto& [depth, count] : h.counts) {
            const double per_trial = trials > 0 ? static_cast<double>(count) / static_cast<double>(trials) : 0.0;
            table.add_row({delay, static_cast<std::int64_t>(depth), static_cast<std::int64_t>(count),
                           trials, per_trial});
        }
    }
    table.sort_rows(2);
    return table;
}

Table revocation_table(std::span<const RevocationCurve> curves) {
    Table table(revocation_columns());
    for (const auto& curve : curves) {
        const auto probabilities = curve.probabilities();
        for (std::size_t i = 0; i < probabilities.size(); ++i)
            table.add_row({curve.delay(), static_cast<std::int64_t>(i + 1), probabilities[i]});
    }
    table.sort_rows(2);
    return table;
}

CurveProvider simulated_curves(sim::SimConfig base) {
    struct Cache {
        std::mutex mutex;
        std::map<std::uint32_t, RevocationCurve> curves;
    };
    auto cache = std::make_shared<Cache>();
    return [base, cache](double delay) {
        if (!(delay >= 1.0) || delay != std::floor(delay) || delay > 1e6)
            throw InvalidArgument("simulated delay must be a whole number of rounds >= 1");
        const auto rounds = static_cast<std::uint32_t>(delay);
        {
            std::lock_guard lock(cache->mutex);
            if (auto it = cache->curves.find(rounds); it != cache->curves.end()) return it->second;
        }
        sim::SimConfig config = base;
        config.delay.rounds = rounds;
        RevocationCurve curve = sim::estimate_revocation_curve(sim::run_simulation(config));
        std::lock_guard lock(cache->mutex);
        return cache->curves.emplace(rounds, std::move(curve)).first->second;
    };
}

CurveProvider pool_curves(pools::PoolTable table, double block_interval, unsigned stored_depth) {
    return [table = std::move(table), block_interval, stored_depth](double delay) {
        if (delay > pools::kMaxDelaySeconds)
            throw InvalidArgument("network delay above " + std::to_string(pools::kMaxDelaySeconds) + " s");
        const double p1 = pools::depth_one_revocation(pools::make_model(table, delay, block_interval));
        return pools::geometric_curve(p1, stored_depth, delay);
    };
}

Table depth_value_table(const SweepSpec& spec, const CurveProvider& curves) {
    validate(spec);
    const LossModel model = calibrate(spec.risk);

    std::vector<RevocationCurve> per_delay;
    per_delay.reserve(spec.delays.size());
    for (double delay : spec.delays) per_delay.push_back(curves(delay));

    // Each (delay, value) point is independent; results land in fixed slots.
    const std::size_t nv = spec.values.size();
    std::vector<Row> rows(per_delay.size() * nv);
    parallel_for(rows.size(), [&](std::size_t k) {
        const auto& curve = per_delay[k / nv];
        const double value = spec.values[k % nv];
        const auto depth = try_min_confirmation_depth(value, curve, model, spec.d_max);
        const unsigned searched = curve.extensible() ? spec.d_max : std::min(spec.d_max, curve.max_depth());
        rows[k] = Row{spec.delays[k / nv], value, static_cast<std::int64_t>(depth ? *depth : searched),
                      static_cast<std::int64_t>(depth ? 1 : 0)};
    });

    Table table(depth_value_columns());
    for (auto& row : rows) table.add_row(std::move(row));
    table.sort_rows(2);
    return table;
}

}  // namespace finality::sweeps
