#include "mesotree/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "mesotree/errors.hpp"
#include "mesotree/theory.hpp"

namespace mesotree {

std::string to_string(Statistic s) {
    switch (s) {
        case Statistic::Degree: return "degree";
        case Statistic::Fringe: return "fringe";
        case Statistic::Root: return "root";
        case Statistic::Clt: return "clt";
        case Statistic::DelayScan: return "delay-scan";
    }
    return "degree";
}

Statistic parse_statistic(const std::string& s) {
    for (auto st : {Statistic::Degree, Statistic::Fringe, Statistic::Root, Statistic::Clt, Statistic::DelayScan})
        if (to_string(st) == s) return st;
    throw ConfigError(fmt::format("unknown statistic '{}'", s));
}

bool RunSummary::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

struct ReplicateResult {
    DegreeHist hist;
    FringeCensus census;
    PairCensus pairs;
    RootTrajectory root;
    SamplerStats stats;
};

bool wants(const ExperimentPlan& plan, Statistic s) { return plan.statistics.contains(s); }

std::vector<Time> default_delay_grid(Time n_final) {
    std::vector<Time> grid;
    for (Time n = 100; n <= std::max<Time>(n_final, 1000); n *= 10) grid.push_back(n);
    return grid;
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    const int workers = std::max(1, std::min(count, threads));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    const auto body = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double fringe_share(const FringeCensus& c, const CanonicalTree& t) {
    return static_cast<double>(c.at(t)) / static_cast<double>(c.n);
}

}  // namespace

RunSummary run(const ExperimentPlan& plan) {
    const auto started = std::chrono::steady_clock::now();
    const auto& settings = plan.settings;
    const auto& base = settings.growth;
    base.validate();
    if (settings.replicates < 1) throw ConfigError("replicates must be >= 1");

    RunSummary summary;
    summary.config_hash = config_hash(settings);
    summary.replicates = settings.replicates;
    summary.n = base.n_final;
    for (int r = 0; r < settings.replicates; ++r)
        summary.seeds.push_back(replicate_seed(base.seed, static_cast<std::uint64_t>(r)));

    const bool affine = base.kernel.is_affine();
    std::optional<RootDegreeConstants> root_consts;
    if (affine) root_consts = root_degree_constants(base.kernel.alpha(), base.delay);
    const double theta = root_consts ? root_consts->theta : 0.0;
    const auto grid = plan.root_grid.empty() ? geometric_grid(base.n_final) : plan.root_grid;

    const bool needs_tree = wants(plan, Statistic::Degree) || wants(plan, Statistic::Fringe) ||
                            wants(plan, Statistic::Root) || wants(plan, Statistic::Clt);
    std::vector<ReplicateResult> results(needs_tree ? static_cast<std::size_t>(settings.replicates) : 0);
    if (needs_tree) {
        const int threads = plan.threads > 0 ? plan.threads
                                             : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        parallel_for(settings.replicates, threads, [&](int r) {
            GrowthConfig cfg = base;
            cfg.seed = summary.seeds[static_cast<std::size_t>(r)];
            auto& out = results[static_cast<std::size_t>(r)];
            const auto trace = grow(cfg, &out.stats);
            out.hist = degree_hist(trace);
            if (wants(plan, Statistic::Fringe)) {
                out.census = fringe_census(trace, base.fringe_size_cap);
                out.pairs = extended_fringe_census(trace, base.fringe_size_cap);
            }
            if (wants(plan, Statistic::Root))
                out.root = root_trajectory(trace, theta, grid,
                                           root_consts ? root_consts->ex_x_truncated : std::function<double(double)>{});
        });
    }

    const auto& tol = plan.tolerances;
    const double total_vertices = static_cast<double>(base.n_final) * settings.replicates;
    for (const auto& r : results) summary.sampler += r.stats;

    if (wants(plan, Statistic::Degree) || wants(plan, Statistic::Fringe))
        summary.lambda_star = solve_malthusian(base.kernel).lambda_star;

    if (wants(plan, Statistic::Degree)) {
        for (const auto& r : results) {
            if (r.hist.counts.size() > summary.pooled_degree_counts.size())
                summary.pooled_degree_counts.resize(r.hist.counts.size(), 0);
            for (std::size_t k = 0; k < r.hist.counts.size(); ++k) summary.pooled_degree_counts[k] += r.hist.counts[k];
        }
        const auto kmax = static_cast<int>(summary.pooled_degree_counts.size()) - 1;
        summary.degree_theory = degree_law(base.kernel, summary.lambda_star, kmax);
        std::vector<double> empirical(summary.degree_theory.size());
        for (std::size_t k = 0; k < empirical.size(); ++k)
            empirical[k] = static_cast<double>(summary.pooled_degree_counts[k + 1]) / total_vertices;
        summary.degree_tv = tv_distance(empirical, summary.degree_theory);
        summary.checks.push_back({"degree_tv", summary.degree_tv, tol.degree_tv, summary.degree_tv < tol.degree_tv});
    }

    if (wants(plan, Statistic::Fringe)) {
        const auto table = fringe_recursion(base.fringe_size_cap, base.kernel, summary.lambda_star);
        const double reps = settings.replicates;
        double truncated = 0.0;
        for (const auto& r : results) truncated += r.census.truncated_mass();
        summary.fringe_truncated_mass = truncated / reps;

        for (const auto& [tree, prob] : table.probability) {
            FringeRow row;
            row.tree = tree;
            row.theory = prob;
            double sum = 0.0, sum2 = 0.0;
            for (const auto& r : results) {
                const double x = fringe_share(r.census, tree);
                sum += x;
                sum2 += x * x;
                row.count += r.census.at(tree);
            }
            row.mean = sum / reps;
            if (settings.replicates >= 2)
                row.stderr_ = std::sqrt(std::max(0.0, (sum2 - reps * row.mean * row.mean) / (reps - 1.0)) / reps);
            summary.fringe.push_back(row);
            if (tree.size() <= tol.fringe_check_size) {
                const double diff = std::abs(row.mean - row.theory);
                const double se_bound = settings.replicates >= 2 ? tol.fringe_se * row.stderr_ : tol.fringe_abs;
                summary.checks.push_back({"fringe " + tree.code(), diff, std::min(tol.fringe_abs, se_bound),
                                          diff <= tol.fringe_abs && diff <= se_bound});
            }
        }

        std::map<std::vector<CanonicalTree>, std::int64_t> pooled;
        for (const auto& r : results)
            for (const auto& [key, k] : r.pairs.counts) pooled[key] += k;
        const auto law = extended_fringe_law(table, 1);
        for (const auto& [key, mass] : law.mass) {
            PairRow row{key[0], key[1], 0.0, mass};
            if (const auto it = pooled.find(key); it != pooled.end())
                row.frequency = static_cast<double>(it->second) / total_vertices;
            summary.pairs.push_back(row);
            if (mass >= tol.pair_min_mass) {
                const double diff = std::abs(row.frequency - mass);
                summary.checks.push_back(
                    {"pair " + key[0].code() + " " + key[1].code(), diff, tol.pair_abs, diff <= tol.pair_abs});
            }
        }
    }

    if (wants(plan, Statistic::Root))
        for (auto& r : results) summary.root.push_back(std::move(r.root));

    if (wants(plan, Statistic::Clt) && settings.replicates >= 2) {
        std::vector<DegreeHist> hists;
        for (const auto& r : results) hists.push_back(r.hist);
        const double alpha = affine ? base.kernel.alpha() : 0.0;
        summary.clt = leaf_clt_statistic(hists, alpha);
        if (summary.clt->standardized.size() >= 8) summary.normality = anderson_darling_normal(summary.clt->standardized);
        if (affine) {
            summary.clt_theory = clt_constants(alpha);
            const double rel = std::abs(summary.clt->variance / summary.clt_theory->sigma1_sq - 1.0);
            summary.checks.push_back({"clt_variance", rel, tol.clt_variance_rel, rel <= tol.clt_variance_rel});
            if (summary.normality)
                summary.checks.push_back({"clt_normality_p", summary.normality->p_value, tol.normality_level,
                                          summary.normality->p_value > tol.normality_level});
            if (base.n_final <= plan.random_centering_max_n)
                summary.centering = random_centering(base.delay, alpha, base.n_final);
        }
    }

    if (wants(plan, Statistic::DelayScan)) {
        const auto dgrid = plan.delay_grid.empty() ? default_delay_grid(base.n_final) : plan.delay_grid;
        summary.delay_scan = delay_condition_scan(base.delay, dgrid);
        summary.checks.push_back({"delay_condition", summary.delay_scan->verdict == DelayVerdict::Violated ? 1.0 : 0.0,
                                  0.0, summary.delay_scan->verdict != DelayVerdict::Violated});
    }

    if (summary.sampler.draws > 0) {
        const double mean = summary.sampler.mean_proposals();
        summary.checks.push_back({"sampler_mean_proposals", mean, tol.retry_alarm, mean <= tol.retry_alarm});
    }

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return summary;
}

std::string RunSummary::to_json() const {
    nlohmann::ordered_json j;
    j["config_hash"] = config_hash;
    j["replicates"] = replicates;
    j["n"] = n;
    j["seeds"] = seeds;
    if (lambda_star > 0.0) j["lambda_star"] = lambda_star;
    if (!degree_theory.empty()) {
        j["degree"] = {{"tv", degree_tv}, {"max_degree", pooled_degree_counts.size() - 1}};
    }
    if (!fringe.empty()) {
        auto& f = j["fringe"];
        f["truncated_mass"] = fringe_truncated_mass;
        for (const auto& row : fringe)
            f["shapes"].push_back({{"code", row.tree.code()}, {"mean", row.mean}, {"stderr", row.stderr_},
                                   {"theory", row.theory}});
    }
    if (!root.empty()) {
        auto& r = j["root"];
        r["theta"] = root.front().theta;
        r["grid"] = root.front().times;
        std::vector<double> last;
        for (const auto& t : root) last.push_back(t.over_ntheta.back());
        r["final_over_ntheta"] = last;
    }
    if (clt) {
        auto& c = j["clt"];
        c["p1"] = clt->p1;
        c["mean"] = clt->mean;
        c["variance"] = clt->variance;
        if (clt_theory) c["sigma1_sq"] = clt_theory->sigma1_sq;
        if (normality) c["anderson_darling"] = {{"a2_star", normality->a2_star}, {"p_value", normality->p_value}};
        if (centering)
            c["random_centering"] = {{"x_n", centering->x_n}, {"gap", centering->gap},
                                     {"a_error_bound", centering->a_error_bound}};
    }
    if (delay_scan) {
        auto& d = j["delay_scan"];
        d["verdict"] = mesotree::to_string(delay_scan->verdict);
        if (delay_scan->decay_slope) d["decay_slope"] = *delay_scan->decay_slope;
        d["monotone"] = delay_scan->e_monotone;
    }
    j["sampler"] = {{"draws", sampler.draws},
                    {"proposals", sampler.proposals},
                    {"mean_proposals", sampler.mean_proposals()},
                    {"max_proposals_single_draw", sampler.max_proposals_single_draw}};
    auto& checks_json = j["checks"];
    checks_json = nlohmann::ordered_json::array();
    for (const auto& c : checks)
        checks_json.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    j["passed"] = passed();
    return j.dump(2) + "\n";
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
    return out;
}

}  // namespace

void write_outputs(const RunSummary& s, const ExperimentPlan& plan, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "config_echo.txt");
        fmt::print(out, "# config_hash = {}\n{}", s.config_hash, echo_text(plan.settings));
    }
    {
        auto out = open_out(dir / "summary.json");
        out << s.to_json();
    }
    if (!s.degree_theory.empty()) {
        auto out = open_out(dir / "degree_hist.csv");
        fmt::print(out, "n,k,count,p_theory\n");
        for (std::size_t k = 1; k < s.pooled_degree_counts.size(); ++k)
            fmt::print(out, "{},{},{},{}\n", s.n, k, s.pooled_degree_counts[k], s.degree_theory[k - 1]);
    }
    if (!s.fringe.empty()) {
        auto out = open_out(dir / "fringe.csv");
        fmt::print(out, "n,code,count,prob_theory\n");
        for (const auto& row : s.fringe) fmt::print(out, "{},{},{},{}\n", s.n, row.tree.code(), row.count, row.theory);
        auto pairs = open_out(dir / "fringe_pairs.csv");
        fmt::print(pairs, "n,t0,t1,frequency,theory\n");
        for (const auto& row : s.pairs)
            fmt::print(pairs, "{},{},{},{},{}\n", s.n, row.t0.code(), row.t1.code(), row.frequency, row.theory);
    }
    if (!s.root.empty()) {
        auto out = open_out(dir / "root.csv");
        fmt::print(out, "replicate,n_j,M,M_over_ntheta,M_over_EXn\n");
        for (std::size_t r = 0; r < s.root.size(); ++r) {
            const auto& t = s.root[r];
            for (std::size_t i = 0; i < t.times.size(); ++i)
                fmt::print(out, "{},{},{},{},{}\n", r, t.times[i], t.degree[i], t.over_ntheta[i],
                           t.over_ex.empty() ? std::string{} : fmt::format("{}", t.over_ex[i]));
        }
    }
    if (s.clt) {
        auto out = open_out(dir / "clt.csv");
        fmt::print(out, "replicate,s_r\n");
        for (std::size_t r = 0; r < s.clt->standardized.size(); ++r)
            fmt::print(out, "{},{}\n", r, s.clt->standardized[r]);
    }
    if (s.delay_scan) {
        auto out = open_out(dir / "delay_scan.csv");
        fmt::print(out, "n,e_n,stderr,verdict\n");
        for (const auto& row : s.delay_scan->rows)
            fmt::print(out, "{},{},{},{}\n", row.n, row.e_n, row.stderr_, to_string(s.delay_scan->verdict));
    }
}

}  // namespace mesotree
