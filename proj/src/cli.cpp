#include "finality/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "finality/error.hpp"
#include "finality/pool_model.hpp"
#include "finality/table.hpp"

namespace finality::cli {
namespace {

namespace fs = std::filesystem;

const std::vector<double> kDefaultSimDelays{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
const std::vector<double> kDefaultPoolDelays{0.05, 1, 6.5, 40, 60};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
}

void add_sim_flags(CLI::App& sub, SimFlags& flags, std::string& delay_mode) {
    sub.add_option("--miners", flags.miners, "Number of miners")
        ->check(CLI::Range(1u, 1000000u))
        ->capture_default_str();
    sub.add_option("--rounds", flags.rounds, "Rounds per trial")
        ->check(CLI::Range(1u, 100000000u))
        ->capture_default_str();
    sub.add_option("--trials", flags.trials, "Independent trials")
        ->check(CLI::Range(1u, 1000000u))
        ->capture_default_str();
    sub.add_option("--mine-prob", flags.mine_prob,
                   "Per-miner per-round mining probability (default 1/miners)");
    sub.add_option("--delay-mode", delay_mode, "fixed: exactly D rounds; uniform: 1..D rounds")
        ->check(CLI::IsMember({"fixed", "uniform"}))
        ->capture_default_str();
}

void check_sim_flags(const SimFlags& flags) {
    if (flags.mine_prob)
        require(*flags.mine_prob > 0.0 && *flags.mine_prob <= 1.0, "--mine-prob must lie in (0, 1]");
}

void check_increasing(const std::vector<double>& xs, const std::string& flag) {
    for (std::size_t i = 1; i < xs.size(); ++i)
        require(xs[i - 1] < xs[i], flag + " must be strictly increasing");
}

void check_pool_delays(const std::vector<double>& delays, const std::string& flag) {
    require(!delays.empty(), flag + " needs at least one value");
    for (double d : delays)
        require(std::isfinite(d) && d >= 0.0 && d <= pools::kMaxDelaySeconds,
                flag + " values must lie in [0, 3600] seconds");
    check_increasing(delays, flag);
}

void check_sim_delays(const std::vector<double>& delays, const std::string& flag) {
    require(!delays.empty(), flag + " needs at least one value");
    for (double d : delays)
        require(d >= 1.0 && d == std::floor(d) && d <= 1e6, flag + " values must be whole rounds >= 1");
    check_increasing(delays, flag);
}

std::vector<double> value_grid(const GlobalOptions& g) {
    return sweeps::log_grid(g.value_min, g.value_max, g.value_points);
}

pools::PoolTable pool_table(const std::optional<fs::path>& path) {
    return path ? pools::load_pool_table(*path) : pools::parse_pool_table(pools::table1_csv());
}

void prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'" +
                      (ec ? ": " + ec.message() : std::string()));
}

void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, const Table*>>& files,
                   std::ostream& out) {
    prepare_out_dir(dir);
    for (const auto& [name, table] : files) {
        const fs::path path = dir / name;
        const std::size_t bytes = emit_csv(*table, path);
        out << "wrote " << path.string() << " (" << bytes << " bytes)\n";
    }
}

int run_simulate(const GlobalOptions& g, const SimulateCommand& cmd, std::ostream& out) {
    const sim::SimConfig config = make_sim_config(cmd.sim, cmd.delay, g.seed);
    const sim::SwitchHistogram hist = sim::run_simulation(config);
    const RevocationCurve curve = sim::estimate_revocation_curve(hist);

    const Table histogram = sweeps::switch_histogram_table(std::span(&hist, 1));
    const Table revocation = sweeps::revocation_table(std::span(&curve, 1));
    sweeps::SweepSpec spec;
    spec.values = value_grid(g);
    spec.delays = {static_cast<double>(cmd.delay)};
    spec.source = sweeps::Source::Simulated;
    spec.risk = g.risk;
    const Table depth_value = sweeps::depth_value_table(spec, [&curve](double) { return curve; });

    out << "switches=" << hist.total_switches() << " observed_depths=" << curve.max_depth() << '\n';
    write_outputs(g.out_dir,
                  {{"switch_histogram.csv", &histogram},
                   {"revocation.csv", &revocation},
                   {"depth_value.csv", &depth_value}},
                  out);
    return kExitOk;
}

int run_pools(const GlobalOptions& g, const PoolsCommand& cmd, std::ostream& out) {
    const pools::PoolTable table = pool_table(cmd.table);
    const auto provider = sweeps::pool_curves(table, g.block_interval, cmd.depths);
    const LossModel model = calibrate(g.risk);

    std::vector<RevocationCurve> curves;
    for (double d : cmd.delays) curves.push_back(provider(d));
    const Table revocation = sweeps::revocation_table(curves);

    sweeps::SweepSpec spec;
    spec.values = value_grid(g);
    spec.delays = cmd.delays;
    spec.source = sweeps::Source::PoolModel;
    spec.risk = g.risk;
    const Table depth_value = sweeps::depth_value_table(spec, provider);

    std::vector<std::string> report;
    if (cmd.value) {
        for (const auto& curve : curves) {
            const unsigned depth = min_confirmation_depth(*cmd.value, curve, model, pools::kDepthHardCap);
            report.push_back("delay=" + num(curve.delay()) + " p1=" + num(*curve.ratio()) +
                             " min_depth=" + std::to_string(depth));
        }
    }

    out << "pools=" << table.entries.size() << " window=" << table.window << '\n';
    for (const auto& line : report) out << line << '\n';
    write_outputs(g.out_dir, {{"pool_revocation.csv", &revocation}, {"pool_depth_value.csv", &depth_value}},
                  out);
    return kExitOk;
}

RevocationCurve curve_from_csv(const fs::path& path, std::optional<double> want_delay) {
    const Table table = parse_csv(read_file(path), sweeps::revocation_columns());
    std::set<double> delays;
    for (std::size_t r = 0; r < table.size(); ++r) delays.insert(table.real(r, 0));
    if (delays.empty()) throw InvalidArgument("curve file '" + path.string() + "' has no rows");
    double delay = *delays.begin();
    if (want_delay) {
        if (!delays.contains(*want_delay))
            throw InvalidArgument("curve file '" + path.string() + "' has no rows for delay " + num(*want_delay));
        delay = *want_delay;
    } else if (delays.size() > 1) {
        throw InvalidArgument("curve file '" + path.string() + "' holds several delays; pick one with --curve-delay");
    }

    std::vector<std::pair<std::int64_t, double>> points;
    for (std::size_t r = 0; r < table.size(); ++r)
        if (table.real(r, 0) == delay) points.emplace_back(table.integer(r, 1), table.real(r, 2));
    std::sort(points.begin(), points.end());
    std::vector<double> probabilities;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].first != static_cast<std::int64_t>(i + 1))
            throw InvalidArgument("curve file '" + path.string() + "' depths must run 1..n without gaps");
        probabilities.push_back(points[i].second);
    }
    return RevocationCurve::from_probabilities(std::move(probabilities), CurveSource::Synthetic, delay);
}

int run_risk(const GlobalOptions& g, const RiskCommand& cmd, std::ostream& out, std::ostream& err) {
    const LossModel model = calibrate(g.risk);
    const RevocationCurve curve = cmd.p1 ? pools::geometric_curve(*cmd.p1, 1)
                                         : curve_from_csv(*cmd.curve, cmd.curve_delay);
    const Threshold lt = threshold(cmd.value, model);

    out << "value=" << num(cmd.value) << '\n';
    out << "L=" << num(loss(cmd.value, g.risk)) << '\n';
    out << "c=" << num(model.c) << '\n';
    out << "LT=" << num(lt.probability) << '\n';
    if (lt.underflow) out << "LT_underflow=1 ln_LT=" << num(lt.log_probability) << '\n';

    const auto depth = try_min_confirmation_depth(cmd.value, curve, model, cmd.d_max);
    if (!depth) {
        const unsigned searched = curve.extensible() ? cmd.d_max : std::min(cmd.d_max, curve.max_depth());
        err << "error: " << NoDepthSatisfies(cmd.value, searched).what() << '\n';
        return kExitFailure;
    }
    out << "min_depth=" << *depth << '\n';
    return kExitOk;
}

int run_sweep(const GlobalOptions& g, const SweepCommand& cmd, std::ostream& out) {
    const bool sim_override = cmd.source == sweeps::Source::Simulated && !cmd.delays.empty();
    const bool pool_override = cmd.source == sweeps::Source::PoolModel && !cmd.delays.empty();
    const std::vector<double> sim_delays = sim_override ? cmd.delays : kDefaultSimDelays;
    const std::vector<double> pool_delays = pool_override ? cmd.delays : kDefaultPoolDelays;

    std::set<std::uint32_t> needed(cmd.histogram_delays.begin(), cmd.histogram_delays.end());
    for (double d : sim_delays) needed.insert(static_cast<std::uint32_t>(d));
    std::map<std::uint32_t, sim::SwitchHistogram> runs;
    for (std::uint32_t d : needed) runs.emplace(d, sim::run_simulation(make_sim_config(cmd.sim, d, g.seed)));

    std::vector<sim::SwitchHistogram> fig1_runs;
    for (std::uint32_t d : cmd.histogram_delays) fig1_runs.push_back(runs.at(d));
    const Table fig1 = sweeps::switch_histogram_table(fig1_runs);

    sweeps::SweepSpec sim_spec;
    sim_spec.values = value_grid(g);
    sim_spec.delays = sim_delays;
    sim_spec.source = sweeps::Source::Simulated;
    sim_spec.risk = g.risk;
    const Table fig2 = sweeps::depth_value_table(sim_spec, [&runs](double delay) {
        return sim::estimate_revocation_curve(runs.at(static_cast<std::uint32_t>(delay)));
    });

    const auto provider = sweeps::pool_curves(pool_table(cmd.table), g.block_interval, cmd.depths);
    std::vector<RevocationCurve> pool_curves;
    for (double d : pool_delays) pool_curves.push_back(provider(d));
    const Table fig3 = sweeps::revocation_table(pool_curves);

    sweeps::SweepSpec pool_spec = sim_spec;
    pool_spec.delays = pool_delays;
    pool_spec.source = sweeps::Source::PoolModel;
    const Table fig4 = sweeps::depth_value_table(pool_spec, provider);

    write_outputs(g.out_dir,
                  {{"fig1_switch_histogram.csv", &fig1},
                   {"fig2_sim_depth_value.csv", &fig2},
                   {"fig3_pool_revocation.csv", &fig3},
                   {"fig4_pool_depth_value.csv", &fig4}},
                  out);
    return kExitOk;
}

}  // namespace

sim::SimConfig make_sim_config(const SimFlags& flags, std::uint32_t delay, std::uint64_t seed) {
    sim::SimConfig config;
    config.n_miners = flags.miners;
    config.rounds = flags.rounds;
    config.trials = flags.trials;
    config.delay = sim::DelayModel{flags.delay_mode, delay};
    config.mine_prob = flags.mine_prob;
    config.seed = seed;
    return config;
}

Command parse_args(int argc, const char* const* argv) {
    Command command;
    GlobalOptions& g = command.global;

    CLI::App app{"Confirmation-finality lab: revocation risk by confirmation depth", "finality_lab"};
    app.fallthrough();
    app.require_subcommand(1, 1);

    std::string out_dir = g.out_dir.string();
    app.add_option("--seed", g.seed, "Base RNG seed")->capture_default_str();
    app.add_option("--out-dir", out_dir, "Directory for CSV outputs")->capture_default_str();
    app.add_option("--lambda", g.risk.lambda, "Loss-aversion coefficient")->capture_default_str();
    app.add_option("--beta", g.risk.beta, "Diminishing-sensitivity exponent")->capture_default_str();
    app.add_option("--anchor-value", g.risk.anchor_value, "Anchor transaction value in dollars")
        ->capture_default_str();
    app.add_option("--anchor-prob", g.risk.anchor_probability, "Tolerated revocation probability at the anchor")
        ->capture_default_str();
    app.add_option("--block-interval", g.block_interval, "Mean block interval in seconds")
        ->capture_default_str();
    app.add_option("--value-min", g.value_min, "Smallest dollar value in the sweep grid")->capture_default_str();
    app.add_option("--value-max", g.value_max, "Largest dollar value in the sweep grid")->capture_default_str();
    app.add_option("--value-points", g.value_points, "Points in the logarithmic value grid")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}))
        ->capture_default_str();

    SimulateCommand simulate;
    std::string simulate_mode = "fixed";
    auto* simulate_app = app.add_subcommand("simulate", "Run the fork simulator at one delay");
    add_sim_flags(*simulate_app, simulate.sim, simulate_mode);
    simulate_app->add_option("--delay", simulate.delay, "Message delay in rounds")
        ->check(CLI::Range(1u, 1000000u))
        ->capture_default_str();

    PoolsCommand pools_cmd;
    std::string pools_table;
    auto* pools_app = app.add_subcommand("pools", "Revocation curves from mining-pool shares");
    pools_app->add_option("--table", pools_table, "Pool CSV (pool,blocks); built-in pool table if omitted")
        ->check(CLI::ExistingFile);
    pools_app->add_option("--delay", pools_cmd.delays, "Network delays in seconds, comma separated")
        ->delimiter(',');
    pools_app->add_option("--value", pools_cmd.value, "Report the minimum depth for this dollar value");
    pools_app->add_option("--depths", pools_cmd.depths, "Depths in the revocation table")
        ->check(CLI::Range(1u, 10000u))
        ->capture_default_str();

    RiskCommand risk;
    std::string risk_curve;
    auto* risk_app = app.add_subcommand("risk", "Loss threshold and minimum depth for one value");
    risk_app->add_option("--value", risk.value, "Transaction value in dollars")->required();
    auto* p1_opt = risk_app->add_option("--p1", risk.p1, "Depth-one revocation probability (geometric curve)");
    auto* curve_opt = risk_app->add_option("--curve", risk_curve, "Revocation CSV (delay,depth,p_rev)")
                          ->check(CLI::ExistingFile);
    p1_opt->excludes(curve_opt);
    risk_app->add_option("--curve-delay", risk.curve_delay, "Delay to select from a multi-delay curve file")
        ->needs(curve_opt);
    risk_app->add_option("--d-max", risk.d_max, "Deepest depth to search")
        ->check(CLI::Range(1u, 1000000u))
        ->capture_default_str();

    SweepCommand sweep;
    std::string sweep_source;
    std::string sweep_table;
    std::string sweep_mode = "fixed";
    auto* sweep_app = app.add_subcommand("sweep", "Emit the four figure datasets");
    sweep_app->add_option("--source", sweep_source, "Source whose delay grid --delays replaces")
        ->check(CLI::IsMember({"simulated", "pool-model"}));
    auto* delays_opt = sweep_app->add_option("--delays", sweep.delays, "Delay grid, comma separated")
                           ->delimiter(',');
    sweep_app->add_option("--histogram-delays", sweep.histogram_delays, "Delays for the switch histogram")
        ->delimiter(',');
    sweep_app->add_option("--table", sweep_table, "Pool CSV; built-in pool table if omitted")
        ->check(CLI::ExistingFile);
    sweep_app->add_option("--depths", sweep.depths, "Depths in the pool revocation table")
        ->check(CLI::Range(1u, 10000u))
        ->capture_default_str();
    add_sim_flags(*sweep_app, sweep.sim, sweep_mode);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    g.out_dir = out_dir;
    try {
        validate(g.risk);
    } catch (const InvalidArgument& e) {
        throw UsageError(std::string("--lambda/--beta/--anchor-value/--anchor-prob: ") + e.what());
    }
    require(g.block_interval > 0.0 && std::isfinite(g.block_interval), "--block-interval must be > 0");
    require(g.value_min > 0.0 && std::isfinite(g.value_min), "--value-min must be > 0");
    require(g.value_max >= g.value_min && std::isfinite(g.value_max), "--value-max must be >= --value-min");
    require(g.value_points == 1 || g.value_max > g.value_min,
            "--value-max must exceed --value-min when --value-points > 1");

    auto parse_mode = [](const std::string& m) {
        return m == "uniform" ? sim::DelayMode::Uniform : sim::DelayMode::Fixed;
    };

    if (simulate_app->parsed()) {
        check_sim_flags(simulate.sim);
        simulate.sim.delay_mode = parse_mode(simulate_mode);
        command.action = simulate;
    } else if (pools_app->parsed()) {
        check_pool_delays(pools_cmd.delays, "--delay");
        if (pools_cmd.value)
            require(std::isfinite(*pools_cmd.value) && *pools_cmd.value >= 0.0, "--value must be >= 0");
        if (!pools_table.empty()) pools_cmd.table = pools_table;
        command.action = pools_cmd;
    } else if (risk_app->parsed()) {
        require(std::isfinite(risk.value) && risk.value >= 0.0, "--value must be finite and >= 0");
        require(risk.p1.has_value() != !risk_curve.empty(), "risk needs exactly one of --p1 or --curve");
        if (risk.p1) require(*risk.p1 >= 0.0 && *risk.p1 < 1.0, "--p1 must lie in [0, 1)");
        if (!risk_curve.empty()) risk.curve = risk_curve;
        command.action = risk;
    } else {
        check_sim_flags(sweep.sim);
        sweep.sim.delay_mode = parse_mode(sweep_mode);
        if (!sweep_source.empty())
            sweep.source = sweep_source == "pool-model" ? sweeps::Source::PoolModel : sweeps::Source::Simulated;
        require(delays_opt->count() == 0 || sweep.source.has_value(), "--delays requires --source");
        if (sweep.source == sweeps::Source::PoolModel) check_pool_delays(sweep.delays, "--delays");
        if (sweep.source == sweeps::Source::Simulated && !sweep.delays.empty())
            check_sim_delays(sweep.delays, "--delays");
        require(!sweep.histogram_delays.empty(), "--histogram-delays needs at least one value");
        for (auto d : sweep.histogram_delays) require(d >= 1, "--histogram-delays values must be >= 1");
        if (!sweep_table.empty()) sweep.table = sweep_table;
        command.action = sweep;
    }
    return command;
}

int run(const Command& command, std::ostream& out, std::ostream& err) {
    const GlobalOptions& g = command.global;
    return std::visit(
        [&](const auto& action) -> int {
            using T = std::decay_t<decltype(action)>;
            if constexpr (std::is_same_v<T, SimulateCommand>) return run_simulate(g, action, out);
            else if constexpr (std::is_same_v<T, PoolsCommand>) return run_pools(g, action, out);
            else if constexpr (std::is_same_v<T, RiskCommand>) return run_risk(g, action, out, err);
            else return run_sweep(g, action, out);
        },
        command.action);
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Command command;
    try {
        command = parse_args(argc, argv);
    } catch (const HelpRequested& help) {
        out << help.text;
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    }
    try {
        return run(command, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace finality::cli
