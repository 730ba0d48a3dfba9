#pragma once

#include <functional>
#include <span>
#include <vector>

#include "finality/chain_sim.hpp"
#include "finality/pool_model.hpp"
#include "finality/risk_model.hpp"
#include "finality/table.hpp"

namespace finality::sweeps {

enum class Source { Simulated, PoolModel };

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

struct SweepSpec {
    std::vector<double> values = log_grid(0.01, 10000.0, 200);
    /// Rounds for the simulated source, seconds for the pool model.
    std::vector<double> delays;
    Source source = Source::Simulated;
    RiskParams risk;
    unsigned d_max = pools::kDepthHardCap;
};

void validate(const SweepSpec& spec);

/// Schemas of the emitted CSV files.
std::vector<Column> switch_histogram_columns();  // delay,switch_depth,count,trials,count_per_trial
std::vector<Column> revocation_columns();        // delay,depth,p_rev
std::vector<Column> depth_value_columns();       // delay,value,min_depth,satisfied

/// Runs one simulation per config and tabulates its switch-depth counts.
Table switch_histogram_table(std::span<const sim::SimConfig> configs);
Table switch_histogram_table(std::span<const sim::SwitchHistogram> histograms);

/// One row per (curve, depth) for depths 1..max_depth of each curve.
Table revocation_table(std::span<const RevocationCurve> curves);

/// Maps a delay to its revocation curve.
using CurveProvider = std::function<RevocationCurve(double delay)>;

/// Simulated curves; `base` supplies everything but the delay, which must be
/// a whole number of rounds. Each delay is simulated once and cached.
CurveProvider simulated_curves(sim::SimConfig base);

/// Geometric pool-model curves stored to `stored_depth`, extensible beyond.
CurveProvider pool_curves(pools::PoolTable table, double block_interval = pools::kBitcoinBlockInterval,
                          unsigned stored_depth = 10);

/// Rows (delay, value, min_depth, satisfied). Unsatisfiable points carry
/// satisfied = 0 and min_depth = the deepest depth searched.
Table depth_value_table(const SweepSpec& spec, const CurveProvider& curves);

}  // namespace finality::sweeps
