#include "finality/pool_model.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "finality/error.hpp"
#include "finality/table.hpp"

namespace finality::pools {
namespace {

constexpr std::string_view kTable1 =
    "pool,blocks\n"
    "foundrydigital.com,299\n"
    "antpool.com,189\n"
    "viabtc.com,129\n"
    "f2pool.com,100\n"
    "spiderpool.com,68\n"
    "mara.com,54\n"
    "luxor.tech,38\n"
    "secpool.com,30\n"
    "binance.com,19\n"
    "braiins.com,17\n"
    "sbicrypto.com,16\n"
    "ntminerpool.com,10\n"
    "cloverpool.com,7\n"
    "ultimuspool.com,6\n"
    "ocean.xyz,6\n"
    "poolin.com,4\n"
    "whitebit.com,3\n"
    "nicehash.com,1\n"
    "SoloCKPool,1\n"
    "Unknown1,1\n"
    "Unknown2,1\n"
    "Unknown3,1\n";

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::vector<double> PoolTable::shares() const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries)
        out.push_back(static_cast<double>(e.blocks) / static_cast<double>(window));
    return out;
}

PoolTable parse_pool_table(std::string_view text) {
    const auto records = csv::read_records(text, /*skip_comments=*/true);
    if (records.empty()) throw EmptyTable("pool table has no header");

    const auto& header = records.front();
    if (header.fields.size() != 2 || trim(header.fields[0]) != "pool" ||
        trim(header.fields[1]) != "blocks")
        throw MalformedRow("expected header 'pool,blocks'", header.line);

    PoolTable table;
    std::set<std::string> seen;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.fields.size() != 2) throw MalformedRow("expected 2 fields", rec.line);
        std::string name = trim(rec.fields[0]);
        if (name.empty()) throw MalformedRow("empty pool name", rec.line);

        const std::string count = trim(rec.fields[1]);
        std::uint64_t blocks = 0;
        const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), blocks);
        if (count.empty() || ec != std::errc{} || ptr != count.data() + count.size())
            throw MalformedRow("block count '" + count + "' is not a non-negative integer", rec.line);

        if (!seen.insert(name).second) throw DuplicatePool("duplicate pool '" + name + "'");
        table.window += blocks;
        table.entries.push_back(PoolEntry{std::move(name), blocks});
    }
    if (table.window == 0) throw EmptyTable("pool table has no mined blocks");
    return table;
}

PoolTable load_pool_table(const std::filesystem::path& path) {
    return parse_pool_table(read_file(path));
}

std::string_view table1_csv() { return kTable1; }

EmpiricalModel make_model(const PoolTable& table, double delay, double block_interval) {
    EmpiricalModel model;
    model.delay = delay;
    model.block_interval = block_interval;
    for (double p : table.shares())
        if (p > 0.0) model.shares.push_back(p);
    validate(model);
    return model;
}

void validate(const EmpiricalModel& model) {
    if (!(model.delay >= 0.0) || !std::isfinite(model.delay))
        throw InvalidArgument("network delay must be finite and >= 0 seconds");
    if (!(model.block_interval > 0.0) || !std::isfinite(model.block_interval))
        throw InvalidArgument("block interval must be finite and > 0 seconds");
    if (model.shares.empty()) throw InvalidArgument("pool model needs at least one share");
    double total = 0.0;
    for (double p : model.shares) {
        if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("pool share outside (0, 1]");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("pool shares do not sum to 1");
}

double depth_one_revocation(const EmpiricalModel& model) {
    validate(model);
    const double window = model.delay / model.block_interval;
    double p1 = 0.0;
    for (double p : model.shares) p1 += p * -std::expm1(-(1.0 - p) * window);
    return p1;
}

RevocationCurve geometric_curve(double p1, unsigned d_max, double delay) {
    return RevocationCurve::geometric(p1, d_max, delay);
}

unsigned empirical_depth_rule(const PoolTable& table, double delay, double value,
                              const LossModel& model, double block_interval) {
    if (delay > kMaxDelaySeconds)
        throw InvalidArgument("network delay above " + std::to_string(kMaxDelaySeconds) + " s");
    const double p1 = depth_one_revocation(make_model(table, delay, block_interval));
    const auto curve = geometric_curve(p1, 1, delay);
    return min_confirmation_depth(value, curve, model, kDepthHardCap);
}

}  // namespace finality::pools
