#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "finality/chain_sim.hpp"
#include "finality/risk_model.hpp"
#include "finality/sweeps.hpp"

namespace finality::cli {

/// Process exit codes. Every failure maps to exactly one of these.
enum ExitStatus : int {
    kExitOk = 0,
    kExitFailure = 1,  // computational or I/O failure
    kExitUsage = 2,    // bad flags; nothing was computed
};

inline constexpr std::uint64_t kDefaultSeed = 1;

struct GlobalOptions {
    std::uint64_t seed = kDefaultSeed;
    std::filesystem::path out_dir = "out";
    RiskParams risk;
    double block_interval = 600.0;
    double value_min = 0.01;
    double value_max = 10000.0;
    std::size_t value_points = 200;
};

struct SimFlags {
    std::uint32_t miners = 100;
    std::uint32_t rounds = 1000;
    std::uint32_t trials = 10;
    sim::DelayMode delay_mode = sim::DelayMode::Fixed;
    std::optional<double> mine_prob;
};

struct SimulateCommand {
    SimFlags sim;
    std::uint32_t delay = 1;
};

struct PoolsCommand {
    std::optional<std::filesystem::path> table;
    std::vector<double> delays{1.0};
    std::optional<double> value;
    unsigned depths = 10;
};

struct RiskCommand {
    double value = 0.0;
    std::optional<double> p1;
    std::optional<std::filesystem::path> curve;
    std::optional<double> curve_delay;
    unsigned d_max = 10000;
};

struct SweepCommand {
    std::optional<sweeps::Source> source;
    std::vector<double> delays;
    std::vector<std::uint32_t> histogram_delays{4, 6, 8};
    SimFlags sim;
    std::optional<std::filesystem::path> table;
    unsigned depths = 10;
};

struct Command {
    GlobalOptions global;
    std::variant<SimulateCommand, PoolsCommand, RiskCommand, SweepCommand> action;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by parse_args for --help; carries the rendered help text.
struct HelpRequested {
    std::string text;
};

/// Parses and validates argv. Throws UsageError naming the offending flag.
Command parse_args(int argc, const char* const* argv);

/// Executes a parsed command; returns an ExitStatus.
int run(const Command& command, std::ostream& out, std::ostream& err);

/// parse_args + run with every error mapped to its exit status.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

sim::SimConfig make_sim_config(const SimFlags& flags, std::uint32_t delay, std::uint64_t seed);

}  // namespace finality::cli
