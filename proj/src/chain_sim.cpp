#include "finality/chain_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "finality/error.hpp"
#include "finality/parallel.hpp"

namespace finality::sim {

void validate(const SimConfig& config) {
    if (config.n_miners == 0) throw InvalidArgument("n_miners must be >= 1");
    if (config.rounds == 0) throw InvalidArgument("rounds must be >= 1");
    if (config.trials == 0) throw InvalidArgument("trials must be >= 1");
    if (config.delay.rounds == 0) throw InvalidArgument("delay must be >= 1 round");
    const double p = config.mining_probability();
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("mine_prob must lie in [0, 1]");
}

BlockId BlockTree::add(BlockId parent, std::uint32_t miner, Round round) {
    const Block& p = at(parent);
    const auto id = static_cast<BlockId>(blocks_.size());
    blocks_.push_back(Block{id, parent, p.height + 1, miner, round});
    return id;
}

const Block& BlockTree::at(BlockId id) const {
    if (!contains(id)) throw StructuralFault("unknown block id " + std::to_string(id));
    return blocks_[id];
}

std::uint64_t SwitchHistogram::total_switches() const {
    std::uint64_t total = 0;
    for (const auto& [depth, n] : counts) total += n;
    return total;
}

std::uint64_t SwitchHistogram::revoked_exactly(std::uint32_t depth) const {
    const auto it = observations.find(depth);
    if (it == observations.end()) return 0;
    const auto next = observations.find(depth + 1);
    return it->second.revoked - (next == observations.end() ? 0 : next->second.revoked);
}

void SwitchHistogram::merge(const SwitchHistogram& other) {
    for (const auto& [depth, n] : other.counts) counts[depth] += n;
    for (const auto& [depth, obs] : other.observations) {
        auto& mine = observations[depth];
        mine.reached += obs.reached;
        mine.revoked += obs.revoked;
    }
    per_trial_counts.insert(per_trial_counts.end(), other.per_trial_counts.begin(),
                            other.per_trial_counts.end());
}

bool SwitchHistogram::operator==(const SwitchHistogram& other) const {
    return counts == other.counts && observations == other.observations &&
           per_trial_counts == other.per_trial_counts;
}

RandomEvents::RandomEvents(const SimConfig& config, std::uint64_t trial)
    : rng_(config.seed, trial), mine_prob_(config.mining_probability()), delay_(config.delay) {}

bool RandomEvents::mines(Round, std::uint32_t) { return rng_.bernoulli(mine_prob_); }

std::uint32_t RandomEvents::delay(Round, std::uint32_t, std::uint32_t) {
    if (delay_.mode == DelayMode::Fixed) return delay_.rounds;
    return static_cast<std::uint32_t>(rng_.uniform_int(1, delay_.rounds));
}

SimState::SimState(const SimConfig& config, std::uint64_t trial)
    : SimState(config, std::make_unique<RandomEvents>(config, trial)) {}

SimState::SimState(const SimConfig& config, std::unique_ptr<EventSource> events)
    : config_(config), events_(std::move(events)) {
    validate(config_);
    miners_.resize(config_.n_miners);
    for (auto& m : miners_) m.receipt.assign(1, 0);  // genesis known from round 0
    ledgers_.resize(config_.n_miners);
    orphans_.resize(config_.n_miners);
    inflight_.resize(static_cast<std::size_t>(config_.delay.rounds) + 1);
}

void SimState::connect(std::uint32_t miner, BlockId block, std::vector<BlockId>& fresh) {
    MinerState& m = miners_[miner];
    if (!m.knows(tree_[block].parent)) {
        orphans_[miner].push_back(block);
        return;
    }
    std::vector<BlockId> work{block};
    while (!work.empty()) {
        const BlockId b = work.back();
        work.pop_back();
        if (m.receipt.size() <= b) m.receipt.resize(tree_.size(), MinerState::kUnknown);
        m.receipt[b] = round_;
        fresh.push_back(b);
        auto& pending = orphans_[miner];
        for (auto it = pending.begin(); it != pending.end();) {
            if (tree_[*it].parent == b) {
                work.push_back(*it);
                it = pending.erase(it);
            } else {
                ++it;
            }
        }
    }
}

void SimState::abandon(std::uint32_t miner, BlockId old_tip, BlockId fork_point) {
    Ledger& ledger = ledgers_[miner];
    if (ledger.max_depth.size() < tree_.size()) {
        ledger.max_depth.resize(tree_.size(), 0);
        ledger.revoked_depth.resize(tree_.size(), 0);
    }
    const std::uint32_t top = tree_[old_tip].height;
    for (BlockId b = old_tip; b != fork_point; b = tree_[b].parent) {
        const std::uint32_t depth = top - tree_[b].height + 1;
        ledger.max_depth[b] = std::max(ledger.max_depth[b], depth);
        if (ledger.revoked_depth[b] == 0) ledger.revoked_depth[b] = depth;
    }
}

std::vector<SwitchRecord> SimState::step_round() {
    if (finished()) throw InvalidArgument("simulation already ran all configured rounds");

    std::vector<SwitchRecord> records;
    const std::size_t ring = inflight_.size();
    std::vector<Message> due;
    due.swap(inflight_[round_ % ring]);

    std::vector<std::vector<BlockId>> fresh(miners_.size());
    for (const Message& msg : due) connect(msg.recipient, msg.block, fresh[msg.recipient]);

    for (std::uint32_t i = 0; i < miners_.size(); ++i) {
        if (fresh[i].empty()) continue;
        MinerState& m = miners_[i];
        // Blocks already held arrived in earlier rounds, so the current tip
        // beats any fresh block of equal height.
        BlockId best = m.tip;
        for (BlockId b : fresh[i]) {
            const auto hb = tree_[b].height;
            const auto hbest = tree_[best].height;
            if (hb > hbest || (hb == hbest && m.receipt[b] == m.receipt[best] && b < best)) best = b;
        }
        if (best == m.tip) continue;
        const BlockId fork_point = common_ancestor(m.tip, best, tree_);
        if (fork_point != m.tip) {
            const std::uint32_t depth = tree_[m.tip].height - tree_[fork_point].height;
            records.push_back(SwitchRecord{round_, i, depth, m.tip, best});
            ++counts_[depth];
            abandon(i, m.tip, fork_point);
        }
        m.tip = best;
    }

    const auto last = static_cast<std::uint32_t>(miners_.size());
    for (std::uint32_t i = 0; i < last; ++i) {
        if (!events_->mines(round_, i)) continue;
        MinerState& m = miners_[i];
        const BlockId id = tree_.add(m.tip, i, round_);
        m.receipt.resize(tree_.size(), MinerState::kUnknown);
        m.receipt[id] = round_;
        m.tip = id;
        for (std::uint32_t j = 0; j < last; ++j) {
            if (j == i) continue;
            const std::uint32_t d = events_->delay(round_, i, j);
            if (d == 0 || d >= ring)
                throw InvalidArgument("message delay " + std::to_string(d) +
                                      " outside [1, " + std::to_string(ring - 1) + "]");
            inflight_[(round_ + d) % ring].push_back(Message{j, id});
        }
    }

    ++round_;
    return records;
}

std::vector<BlockId> SimState::main_chain(std::uint32_t miner) const {
    std::vector<BlockId> chain;
    for (BlockId b = miners_.at(miner).tip; b != kNoParent; b = tree_[b].parent) chain.push_back(b);
    std::reverse(chain.begin(), chain.end());
    return chain;
}

SwitchHistogram SimState::histogram() const {
    SwitchHistogram h;
    h.config = config_;
    h.counts = counts_;
    h.per_trial_counts.push_back(counts_);

    std::map<std::uint32_t, std::uint64_t> reached_exact;
    std::map<std::uint32_t, std::uint64_t> revoked_exact;
    for (std::uint32_t i = 0; i < miners_.size(); ++i) {
        std::vector<std::uint32_t> max_depth = ledgers_[i].max_depth;
        std::vector<std::uint32_t> revoked = ledgers_[i].revoked_depth;
        max_depth.resize(tree_.size(), 0);
        revoked.resize(tree_.size(), 0);

        // Blocks still on the main chain: their current depth is their deepest.
        const BlockId tip = miners_[i].tip;
        const std::uint32_t top = tree_[tip].height;
        for (BlockId b = tip; b != kGenesis; b = tree_[b].parent)
            max_depth[b] = std::max(max_depth[b], top - tree_[b].height + 1);

        for (BlockId b = 1; b < tree_.size(); ++b) {
            if (max_depth[b] > 0) ++reached_exact[max_depth[b]];
            if (revoked[b] > 0) ++revoked_exact[revoked[b]];
        }
    }

    if (reached_exact.empty()) return h;
    const std::uint32_t deepest = reached_exact.rbegin()->first;
    DepthObservation running;
    for (std::uint32_t d = deepest; d >= 1; --d) {
        if (auto it = reached_exact.find(d); it != reached_exact.end()) running.reached += it->second;
        if (auto it = revoked_exact.find(d); it != revoked_exact.end()) running.revoked += it->second;
        h.observations[d] = running;
    }
    return h;
}

BlockId select_tip(const BlockTree& tree, const MinerState& miner) {
    BlockId best = kGenesis;
    for (BlockId b = 1; b < tree.size(); ++b) {
        if (!miner.knows(b)) continue;
        const auto hb = tree[b].height;
        const auto hbest = tree[best].height;
        if (hb > hbest) {
            best = b;
        } else if (hb == hbest) {
            const auto rb = miner.receipt_round(b);
            const auto rbest = miner.receipt_round(best);
            if (rb < rbest || (rb == rbest && b < best)) best = b;
        }
    }
    return best;
}

BlockId common_ancestor(BlockId a, BlockId b, const BlockTree& tree) {
    auto up = [&tree](BlockId x) {
        const BlockId parent = tree.at(x).parent;
        if (parent == kNoParent || !tree.contains(parent))
            throw StructuralFault("block " + std::to_string(x) + " has no parent link");
        return parent;
    };
    while (tree.at(a).height > tree.at(b).height) a = up(a);
    while (tree.at(b).height > tree.at(a).height) b = up(b);
    while (a != b) {
        a = up(a);
        b = up(b);
    }
    return a;
}

std::uint32_t switch_depth(BlockId old_tip, BlockId new_tip, const BlockTree& tree) {
    const BlockId fork_point = common_ancestor(old_tip, new_tip, tree);
    return tree.at(old_tip).height - tree.at(fork_point).height;
}

SwitchHistogram run_trial(const SimConfig& config, std::uint64_t trial) {
    SimState state(config, trial);
    while (!state.finished()) state.step_round();
    return state.histogram();
}

SwitchHistogram run_simulation(const SimConfig& config) {
    validate(config);
    std::vector<SwitchHistogram> per_trial(config.trials);
    parallel_for(config.trials, [&](std::size_t t) { per_trial[t] = run_trial(config, t); });

    SwitchHistogram merged;
    merged.config = config;
    for (const auto& h : per_trial) merged.merge(h);
    return merged;
}

RevocationCurve estimate_revocation_curve(const SwitchHistogram& hist) {
    const auto first = hist.observations.find(1);
    if (first == hist.observations.end() || first->second.reached == 0)
        throw EmptyObservations("no block reached confirmation depth 1 in any trial");

    std::vector<double> probabilities;
    for (std::uint32_t d = 1;; ++d) {
        const auto it = hist.observations.find(d);
        if (it == hist.observations.end() || it->second.reached == 0) break;
        probabilities.push_back(static_cast<double>(it->second.revoked) /
                                static_cast<double>(it->second.reached));
    }
    return RevocationCurve::from_probabilities(std::move(probabilities), CurveSource::Simulated,
                                               static_cast<double>(hist.config.delay.rounds));
}

}  // namespace finality::sim
