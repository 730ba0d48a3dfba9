#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "finality/risk_model.hpp"
#include "finality/rng.hpp"

namespace finality::sim {

using BlockId = std::uint32_t;
using Round = std::uint32_t;

inline constexpr BlockId kGenesis = 0;
inline constexpr BlockId kNoParent = std::numeric_limits<BlockId>::max();
inline constexpr std::uint32_t kNoMiner = std::numeric_limits<std::uint32_t>::max();

enum class DelayMode { Fixed, Uniform };

/// Message delay in rounds: exactly `rounds` (Fixed) or uniform over [1, rounds].
struct DelayModel {
    DelayMode mode = DelayMode::Fixed;
    std::uint32_t rounds = 1;
};

struct SimConfig {
    std::uint32_t n_miners = 100;
    std::uint32_t rounds = 1000;
    std::uint32_t trials = 10;
    DelayModel delay;
    /// Per-miner per-round mining probability; unset means 1 / n_miners.
    std::optional<double> mine_prob;
    std::uint64_t seed = 0;

    double mining_probability() const {
        return mine_prob ? *mine_prob : 1.0 / static_cast<double>(n_miners);
    }
};

void validate(const SimConfig& config);

struct Block {
    BlockId id = kGenesis;
    BlockId parent = kNoParent;
    std::uint32_t height = 0;
    std::uint32_t miner = kNoMiner;
    Round round_mined = 0;
};

/// All blocks mined during one trial. Ids are dense indices; id 0 is genesis.
class BlockTree {
public:
    BlockTree() { blocks_.push_back(Block{}); }

    BlockId add(BlockId parent, std::uint32_t miner, Round round);

    const Block& operator[](BlockId id) const { return blocks_[id]; }
    const Block& at(BlockId id) const;
    bool contains(BlockId id) const noexcept { return id < blocks_.size(); }
    std::size_t size() const noexcept { return blocks_.size(); }

private:
    std::vector<Block> blocks_;
};

/// One miner's local view: which blocks it holds and when each arrived.
struct MinerState {
    static constexpr std::int64_t kUnknown = -1;

    /// Receipt round per block id, kUnknown if not held.
    std::vector<std::int64_t> receipt;
    BlockId tip = kGenesis;

    bool knows(BlockId id) const noexcept {
        return id < receipt.size() && receipt[id] != kUnknown;
    }
    std::int64_t receipt_round(BlockId id) const noexcept {
        return id < receipt.size() ? receipt[id] : kUnknown;
    }
};

/// A miner abandoning part of its main chain for a longer prong.
struct SwitchRecord {
    Round round = 0;
    std::uint32_t miner = 0;
    std::uint32_t depth = 0;
    BlockId old_tip = kGenesis;
    BlockId new_tip = kGenesis;

    bool operator==(const SwitchRecord&) const = default;
};

struct DepthObservation {
    std::uint64_t reached = 0;
    std::uint64_t revoked = 0;

    bool operator==(const DepthObservation&) const = default;
};

/// Switch-depth counts plus per-depth confirmation observations.
///
/// `observations[d].reached` counts (miner, block) pairs whose block stood at
/// confirmation depth >= d on that miner's main chain at some round;
/// `revoked` counts those first abandoned at a depth >= d. Depth is inclusive:
/// a block at the tip has depth 1, so a switch of depth s revokes depths 1..s.
struct SwitchHistogram {
    std::map<std::uint32_t, std::uint64_t> counts;
    std::map<std::uint32_t, DepthObservation> observations;
    std::vector<std::map<std::uint32_t, std::uint64_t>> per_trial_counts;
    SimConfig config;

    std::uint32_t trials() const noexcept { return static_cast<std::uint32_t>(per_trial_counts.size()); }
    std::uint64_t total_switches() const;
    /// Number of (miner, block) pairs first revoked at exactly `depth`.
    std::uint64_t revoked_exactly(std::uint32_t depth) const;

    /// Summation merge; per-trial subtotals are appended in argument order.
    void merge(const SwitchHistogram& other);

    bool operator==(const SwitchHistogram&) const;
};

/// Mining and delay decisions for a trial. Replaceable for scripted traces.
class EventSource {
public:
    virtual ~EventSource() = default;
    virtual bool mines(Round round, std::uint32_t miner) = 0;
    virtual std::uint32_t delay(Round round, std::uint32_t sender, std::uint32_t recipient) = 0;
};

/// Bernoulli mining and the configured delay model, drawn from one TrialRng.
/// Draw order per round: for each miner in index order, one mining draw; if it
/// mines and the delay model is uniform, one delay draw per other miner in
/// index order.
class RandomEvents final : public EventSource {
public:
    RandomEvents(const SimConfig& config, std::uint64_t trial);

    bool mines(Round round, std::uint32_t miner) override;
    std::uint32_t delay(Round round, std::uint32_t sender, std::uint32_t recipient) override;

private:
    TrialRng rng_;
    double mine_prob_;
    DelayModel delay_;
};

/// State of one trial: the shared block tree, every miner's local view,
/// in-flight messages, and revocation bookkeeping.
class SimState {
public:
    /// Fresh state with all miners at genesis and a RandomEvents source for `trial`.
    SimState(const SimConfig& config, std::uint64_t trial);
    SimState(const SimConfig& config, std::unique_ptr<EventSource> events);

    /// Runs one round: deliver due messages, re-select tips, mine and broadcast.
    std::vector<SwitchRecord> step_round();

    Round round() const noexcept { return round_; }
    bool finished() const noexcept { return round_ >= config_.rounds; }
    const SimConfig& config() const noexcept { return config_; }
    const BlockTree& tree() const noexcept { return tree_; }
    std::span<const MinerState> miners() const noexcept { return miners_; }

    /// Blocks on `miner`'s main chain from genesis to tip.
    std::vector<BlockId> main_chain(std::uint32_t miner) const;

    /// Histogram for the rounds run so far (single trial).
    SwitchHistogram histogram() const;

private:
    struct Message {
        std::uint32_t recipient;
        BlockId block;
    };

    struct Ledger {
        std::vector<std::uint32_t> max_depth;
        std::vector<std::uint32_t> revoked_depth;
    };

    void connect(std::uint32_t miner, BlockId block, std::vector<BlockId>& fresh);
    void abandon(std::uint32_t miner, BlockId old_tip, BlockId fork_point);

    SimConfig config_;
    std::unique_ptr<EventSource> events_;
    BlockTree tree_;
    std::vector<MinerState> miners_;
    std::vector<Ledger> ledgers_;
    std::vector<std::vector<BlockId>> orphans_;
    std::vector<std::vector<Message>> inflight_;
    std::map<std::uint32_t, std::uint64_t> counts_;
    Round round_ = 0;
};

/// From-scratch tip choice: maximal height, then earliest local receipt, then lowest id.
BlockId select_tip(const BlockTree& tree, const MinerState& miner);

/// Number of blocks from `old_tip` back to (excluding) the lowest common
/// ancestor with `new_tip`; 0 iff `new_tip` descends from `old_tip`.
std::uint32_t switch_depth(BlockId old_tip, BlockId new_tip, const BlockTree& tree);

/// Lowest common ancestor of two blocks.
BlockId common_ancestor(BlockId a, BlockId b, const BlockTree& tree);

/// Runs one full trial.
SwitchHistogram run_trial(const SimConfig& config, std::uint64_t trial);

/// Runs `config.trials` independent trials in parallel and merges them in trial order.
SwitchHistogram run_simulation(const SimConfig& config);

/// P_rev(d) = revoked(d) / reached(d), then a running minimum from shallow to deep.
RevocationCurve estimate_revocation_curve(const SwitchHistogram& hist);

}  // namespace finality::sim
