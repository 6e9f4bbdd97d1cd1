// mesotree command-line entry point.
//
// Exit codes: 0 success with every tolerance met, 1 tolerance failure,
// 2 usage or configuration error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "mesotree/config.hpp"
#include "mesotree/errors.hpp"
#include "mesotree/harness.hpp"
#include "mesotree/theory.hpp"

namespace {

using namespace mesotree;

constexpr int kOk = 0;
constexpr int kToleranceFailure = 1;
constexpr int kUsage = 2;

struct SimOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::string out = "out";
    std::vector<std::string> stats;
    int threads = 0;
    std::string trace;
};

void add_sim_options(CLI::App* cmd, SimOptions& o, bool with_stats) {
    cmd->add_option("-c,--config", o.config, "key = value config file");
    cmd->add_option("-s,--set", o.overrides, "override a config key: key=value (repeatable)");
    cmd->add_option("-o,--out", o.out, "output directory")->capture_default_str();
    cmd->add_option("-j,--threads", o.threads, "worker threads (0 = all cores)")->capture_default_str();
    if (with_stats)
        cmd->add_option("--stats", o.stats, "statistics: degree fringe root clt delay-scan")->delimiter(',');
    cmd->add_option("--trace", o.trace, "also write the edge list of replicate 0 to this file");
}

RunSettings resolve_settings(const SimOptions& o) {
    KeyValues kv;
    if (!o.config.empty()) kv = load_config_file(o.config);
    std::string text;
    for (const auto& s : o.overrides) text += s + "\n";
    std::istringstream in(text);
    for (auto& [k, v] : read_key_values(in)) kv[k] = v;
    return settings_from(kv);
}

void print_checks(const RunSummary& s) {
    for (const auto& c : s.checks)
        fmt::print("{} {} value={:.6g} threshold={:.6g}\n", c.pass ? "PASS" : "FAIL", c.name, c.value, c.threshold);
    fmt::print("config_hash={} replicates={} n={} wall_seconds={:.2f}\n", s.config_hash, s.replicates, s.n,
               s.wall_seconds);
}

int run_plan(const SimOptions& o, std::set<Statistic> stats) {
    ExperimentPlan plan;
    plan.settings = resolve_settings(o);
    for (const auto& s : o.stats) stats.insert(parse_statistic(s));
    plan.statistics = std::move(stats);
    plan.threads = o.threads;
    plan.out_dir = o.out;
    const auto summary = run(plan);
    write_outputs(summary, plan, plan.out_dir);
    if (!o.trace.empty()) {
        GrowthConfig cfg = plan.settings.growth;
        cfg.seed = summary.seeds.front();
        std::ofstream out(o.trace);
        if (!out) throw std::runtime_error("cannot write trace file " + o.trace);
        write_trace(out, grow(cfg), summary.config_hash);
    }
    print_checks(summary);
    return summary.passed() ? kOk : kToleranceFailure;
}

struct TheoryOptions {
    std::string kernel = "affine";
    double alpha = 0.0;
    std::string table;
    std::string tail = "constant";
    double f_star = 0.0;
    bool monotone = false;
    int kmax = 10;
    int fringe_cap = 6;
    std::string out;
};

int run_theory(const TheoryOptions& o) {
    KeyValues kv{{"kernel.kind", o.kernel}, {"kernel.alpha", fmt::format("{}", o.alpha)}};
    if (o.kernel == "tabulated") {
        kv["kernel.table"] = o.table;
        kv["kernel.tail"] = o.tail;
        kv["kernel.f_star"] = fmt::format("{}", o.f_star);
        kv["kernel.monotone"] = o.monotone ? "true" : "false";
    }
    const auto kernel = settings_from(kv).growth.kernel;
    const auto m = solve_malthusian(kernel);
    const auto p = degree_law(kernel, m.lambda_star, o.kmax);
    const auto table = fringe_recursion(o.fringe_cap, kernel, m.lambda_star);

    fmt::print("kernel={}\n", kernel.describe());
    fmt::print("lambda_star={:.6g}\n", m.lambda_star);
    for (std::size_t k = 0; k < p.size(); ++k) fmt::print("p_{}={:.6g}\n", k + 1, p[k]);

    nlohmann::ordered_json constants;
    constants["lambda_star"] = m.lambda_star;
    constants["rho_hat_at_solution"] = m.rho_hat_at_solution;
    if (kernel.is_affine()) {
        const auto c = clt_constants(kernel.alpha());
        constants["theta"] = 1.0 / (2.0 + kernel.alpha());
        constants["p1"] = c.p1;
        constants["sigma1_sq"] = c.sigma1_sq;
        fmt::print("theta={:.6g}\nsigma1_sq={:.6g}\n", 1.0 / (2.0 + kernel.alpha()), c.sigma1_sq);
    }

    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        const std::filesystem::path dir = o.out;
        std::ofstream deg(dir / "degree_law.csv");
        fmt::print(deg, "k,p_k\n");
        for (std::size_t k = 0; k < p.size(); ++k) fmt::print(deg, "{},{}\n", k + 1, p[k]);
        std::ofstream fr(dir / "fringe_table.csv");
        fmt::print(fr, "code,size,probability\n");
        for (const auto& [t, prob] : table.probability) fmt::print(fr, "{},{},{}\n", t.code(), t.size(), prob);
        std::ofstream js(dir / "constants.json");
        js << constants.dump(2) << "\n";
        if (!deg || !fr || !js) throw std::runtime_error("cannot write theory outputs to " + o.out);
    } else {
        fmt::print("code,size,probability\n");
        for (const auto& [t, prob] : table.probability) fmt::print("{},{},{:.12g}\n", t.code(), t.size(), prob);
        fmt::print("{}\n", constants.dump());
    }
    return kOk;
}

struct DelayOptions {
    std::string delay = "zero";
    double beta = 0.5;
    std::string ngrid = "1e2..1e6";
    int per_decade = 1;
    std::string method = "quad";
    std::uint64_t seed = 1;
    std::int64_t samples = 1'000'000;
    std::string out;
};

std::vector<Time> parse_grid(const std::string& text, int per_decade) {
    const auto dots = text.find("..");
    const auto number = [](const std::string& s) {
        std::size_t used = 0;
        const double x = std::stod(s, &used);
        if (used != s.size() || !(x >= 2.0)) throw ConfigError("grid points must be numbers >= 2: '" + s + "'");
        return x;
    };
    std::vector<Time> grid;
    if (dots == std::string::npos) {
        std::istringstream in(text);
        std::string item;
        while (std::getline(in, item, ',')) grid.push_back(static_cast<Time>(std::llround(number(item))));
        return grid;
    }
    if (per_decade < 1) throw ConfigError("--per-decade must be >= 1");
    const double lo = number(text.substr(0, dots));
    const double hi = number(text.substr(dots + 2));
    if (hi < lo) throw ConfigError("grid range must be increasing");
    const double l0 = std::log10(lo);
    const double l1 = std::log10(hi);
    const int steps = static_cast<int>(std::llround((l1 - l0) * per_decade));
    for (int i = 0; i <= steps; ++i) {
        const auto n = static_cast<Time>(std::llround(std::pow(10.0, l0 + static_cast<double>(i) / per_decade)));
        if (grid.empty() || n > grid.back()) grid.push_back(n);
    }
    return grid;
}

int run_check_delay(const DelayOptions& o) {
    const auto delay = parse_delay(o.delay, o.beta);
    const auto grid = parse_grid(o.ngrid, o.per_decade);
    ScanMethod method = ScanMethod::Quadrature;
    if (o.method == "mc")
        method = ScanMethod::MonteCarlo;
    else if (o.method != "quad")
        throw ConfigError("--method is 'quad' or 'mc'");
    const auto scan = delay_condition_scan(delay, grid, method, o.seed, o.samples);

    fmt::print("delay={}\n", delay.describe());
    fmt::print("n,e_n,stderr,tail_term\n");
    for (const auto& r : scan.rows) fmt::print("{},{:.6e},{:.3e},{:.6e}\n", r.n, r.e_n, r.stderr_, r.tail_term);
    if (scan.decay_slope)
        fmt::print("decay_slope={:.4f}\n", *scan.decay_slope);
    else
        fmt::print("decay_slope=none (e_n vanishes)\n");
    fmt::print("monotone={}\n", scan.e_monotone);
    fmt::print("verdict={}\n", to_string(scan.verdict));

    if (!o.out.empty()) {
        std::filesystem::create_directories(o.out);
        std::ofstream out(std::filesystem::path(o.out) / "delay_scan.csv");
        fmt::print(out, "n,e_n,stderr,verdict\n");
        for (const auto& r : scan.rows) fmt::print(out, "{},{},{},{}\n", r.n, r.e_n, r.stderr_, to_string(scan.verdict));
        if (!out) throw std::runtime_error("cannot write delay scan to " + o.out);
    }
    return scan.verdict == DelayVerdict::Satisfied ? kOk : kToleranceFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Preferential-attachment trees with delayed snapshots: simulation and limit-law oracles"};
    app.require_subcommand(1);

    SimOptions sim, fringe, root, clt, compare;
    auto* c_sim = app.add_subcommand("simulate", "grow replicates and compare the selected statistics");
    add_sim_options(c_sim, sim, true);
    auto* c_fringe = app.add_subcommand("fringe", "fringe and extended-fringe census against the fringe law");
    add_sim_options(c_fringe, fringe, false);
    auto* c_root = app.add_subcommand("rootdeg", "root-degree trajectories");
    add_sim_options(c_root, root, false);
    auto* c_clt = app.add_subcommand("clt", "leaf-count CLT statistic across replicates");
    add_sim_options(c_clt, clt, false);
    auto* c_compare = app.add_subcommand("compare", "every statistic against theory");
    add_sim_options(c_compare, compare, false);

    TheoryOptions th;
    auto* c_theory = app.add_subcommand("theory", "Malthusian parameter, degree law, fringe law and constants");
    c_theory->add_option("--kernel", th.kernel, "uniform | affine | tabulated")->capture_default_str();
    c_theory->add_option("--alpha", th.alpha, "alpha of the affine kernel")->capture_default_str();
    c_theory->add_option("--table", th.table, "f(1),...,f(K) for tabulated kernels");
    c_theory->add_option("--tail", th.tail, "constant | power:a")->capture_default_str();
    c_theory->add_option("--f-star", th.f_star, "infimum of f (tabulated)");
    c_theory->add_flag("--monotone", th.monotone, "tabulated f is non-decreasing");
    c_theory->add_option("--kmax", th.kmax, "largest degree printed")->capture_default_str();
    c_theory->add_option("--fringe-cap", th.fringe_cap, "largest fringe size tabulated")->capture_default_str();
    c_theory->add_option("-o,--out", th.out, "write CSV/JSON here instead of stdout");

    DelayOptions dl;
    auto* c_delay = app.add_subcommand("check-delay", "scan the delay condition along an n grid");
    c_delay->add_option("--delay", dl.delay, "zero | const:c | uniform | invpow:p | pareto:g,s | table:u:q,...")
        ->capture_default_str();
    c_delay->add_option("--beta", dl.beta, "time-scale exponent")->capture_default_str();
    c_delay->add_option("--ngrid", dl.ngrid, "lo..hi (decades) or a comma list")->capture_default_str();
    c_delay->add_option("--per-decade", dl.per_decade, "grid points per decade")->capture_default_str();
    c_delay->add_option("--method", dl.method, "quad | mc")->capture_default_str();
    c_delay->add_option("--seed", dl.seed, "seed for --method mc")->capture_default_str();
    c_delay->add_option("--samples", dl.samples, "draws for --method mc")->capture_default_str();
    c_delay->add_option("-o,--out", dl.out, "also write delay_scan.csv here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (*c_sim) return run_plan(sim, sim.stats.empty() ? std::set<Statistic>{Statistic::Degree} : std::set<Statistic>{});
        if (*c_fringe) return run_plan(fringe, {Statistic::Fringe});
        if (*c_root) return run_plan(root, {Statistic::Root});
        if (*c_clt) return run_plan(clt, {Statistic::Clt});
        if (*c_compare)
            return run_plan(compare, {Statistic::Degree, Statistic::Fringe, Statistic::Root, Statistic::Clt,
                                      Statistic::DelayScan});
        if (*c_theory) return run_theory(th);
        if (*c_delay) return run_check_delay(dl);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const StrategyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
