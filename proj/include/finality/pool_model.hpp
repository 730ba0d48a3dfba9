#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "finality/risk_model.hpp"

namespace finality::pools {

inline constexpr double kBitcoinBlockInterval = 600.0;
inline constexpr double kMaxDelaySeconds = 3600.0;
inline constexpr unsigned kDepthHardCap = 10000;

struct PoolEntry {
    std::string name;
    std::uint64_t blocks = 0;
};

/// Blocks mined per pool over a sampling window.
struct PoolTable {
    std::vector<PoolEntry> entries;
    std::uint64_t window = 0;

    /// blocks / window per entry, in table order.
    std::vector<double> shares() const;
};

/// Parses `pool,blocks` CSV. Lines starting with '#' are comments.
/// Throws MalformedRow, EmptyTable or DuplicatePool.
PoolTable parse_pool_table(std::string_view text);

PoolTable load_pool_table(const std::filesystem::path& path);

/// Blocks per pool over the most recent 1,000 Bitcoin blocks, in `pool,blocks` form.
std::string_view table1_csv();

/// Pool hash shares together with the propagation delay and block interval.
struct EmpiricalModel {
    std::vector<double> shares;
    double delay = 0.0;
    double block_interval = kBitcoinBlockInterval;
};

/// Shares from the table (pools with zero blocks dropped).
EmpiricalModel make_model(const PoolTable& table, double delay,
                          double block_interval = kBitcoinBlockInterval);

void validate(const EmpiricalModel& model);

/// Probability that, after some pool finds a block, a different pool finds a
/// competing block before the first one has propagated:
///
///   P1 = sum_i p_i * (1 - exp(-(1 - p_i) * delay / block_interval))
///
/// Block discovery is a Poisson process of rate 1/block_interval split by share.
double depth_one_revocation(const EmpiricalModel& model);

/// P_rev(d) = p1^d for d = 1..d_max; the curve extends analytically past d_max.
RevocationCurve geometric_curve(double p1, unsigned d_max, double delay = 0.0);

/// Minimum confirmation depth for value `v` under the pool model at `delay`
/// seconds. Searches up to kDepthHardCap; throws NoDepthSatisfies beyond it.
unsigned empirical_depth_rule(const PoolTable& table, double delay, double value,
                              const LossModel& model,
                              double block_interval = kBitcoinBlockInterval);

}  // namespace finality::pools
