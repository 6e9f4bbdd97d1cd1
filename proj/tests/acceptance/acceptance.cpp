// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mesotree/canonical.hpp"
#include "mesotree/config.hpp"
#include "mesotree/estimators.hpp"
#include "mesotree/growth.hpp"
#include "mesotree/harness.hpp"
#include "mesotree/stats.hpp"
#include "mesotree/theory.hpp"

using namespace mesotree;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, std::string note) {
        if (!ok) pass = false;
        notes.push_back((ok ? "  ok    " : "  FAIL  ") + std::move(note));
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Regime {
    const char* label;
    const char* delay;
};

const std::vector<Regime> kRegimes{{"zero", "zero"}, {"uniform", "uniform"}, {"U^-1", "invpow:1"}, {"U^-2", "invpow:2"}};

ExperimentPlan regime_plan(const char* delay, std::int64_t n, int replicates, double beta, std::uint64_t seed) {
    ExperimentPlan p;
    p.settings.growth.n_final = n;
    p.settings.growth.kernel = AttachmentKernel::affine(0.0);
    p.settings.growth.delay = parse_delay(delay, beta);
    p.settings.growth.seed = seed;
    p.settings.growth.fringe_size_cap = 6;
    p.settings.replicates = replicates;
    return p;
}

// -------------------------------------------------------------------------

Outcome criterion_malthusian() {
    Outcome o;
    const auto t0 = Clock::now();
    for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
        const double lam = solve_malthusian(AttachmentKernel::affine(alpha)).lambda_star;
        o.require(std::abs(lam - (2.0 + alpha)) < 1e-8, fmt::format("affine alpha={}: lambda*={:.12f}", alpha, lam));
    }
    const double lu = solve_malthusian(AttachmentKernel::uniform()).lambda_star;
    o.require(std::abs(lu - 1.0) < 1e-8, fmt::format("uniform: lambda*={:.12f}", lu));
    const double secs = seconds_since(t0);
    o.require(secs < 1.0, fmt::format("runtime {:.3f} s < 1 s", secs));
    return o;
}

Outcome criterion_fringe_equivalence() {
    Outcome o;
    const auto t0 = Clock::now();
    const std::vector<AttachmentKernel> kernels{AttachmentKernel::uniform(), AttachmentKernel::affine(0.0),
                                                AttachmentKernel::affine(1.0)};
    const auto trees = enumerate_trees(5);
    for (const auto& k : kernels) {
        const double lam = solve_malthusian(k).lambda_star;
        const auto table = fringe_recursion(5, k, lam);
        double worst = 0.0;
        int count = 0;
        for (const auto& level : trees)
            for (const auto& t : level) {
                worst = std::max(worst, std::abs(fringe_bruteforce(t, k, lam, 5) - table.at(t)));
                ++count;
            }
        o.require(worst <= 1e-12, fmt::format("{}: {} trees, max |brute - recursion| = {:.2e}", k.describe(), count, worst));
        const double boundary = lam / (lam + k.evaluate(1));
        const double got = table.at(CanonicalTree());
        o.require(got == boundary, fmt::format("{}: singleton mass {} vs lambda*/(lambda*+f(1)) = {}", k.describe(), got,
                                               boundary));
    }
    const double secs = seconds_since(t0);
    o.require(secs < 10.0, fmt::format("runtime {:.3f} s < 10 s", secs));
    return o;
}

// Criteria 3 and 4 share their simulations.
struct RegimeRuns {
    std::vector<RunSummary> summaries;
    double seconds = 0.0;
};

RegimeRuns run_regimes() {
    RegimeRuns out;
    const auto t0 = Clock::now();
    for (const auto& r : kRegimes) {
        auto p = regime_plan(r.delay, 50000, 20, 0.5, 2024);
        p.statistics = {Statistic::Degree, Statistic::Fringe};
        out.summaries.push_back(run(p));
    }
    out.seconds = seconds_since(t0);
    return out;
}

Outcome criterion_degree_law(const RegimeRuns& runs) {
    Outcome o;
    for (std::size_t i = 0; i < kRegimes.size(); ++i) {
        const auto& s = runs.summaries[i];
        // the theory is p_k = 4/(k(k+1)(k+2)); check the harness used exactly that
        double worst = 0.0;
        for (std::size_t k = 1; k <= s.degree_theory.size(); ++k)
            worst = std::max(worst, std::abs(s.degree_theory[k - 1] - 4.0 / (k * (k + 1.0) * (k + 2.0))));
        o.require(worst < 1e-12, fmt::format("{}: theory matches 4/(k(k+1)(k+2)) (max diff {:.1e})", kRegimes[i].label, worst));
        o.require(s.degree_tv < 0.01, fmt::format("{}: TV = {:.5f} < 0.01", kRegimes[i].label, s.degree_tv));
    }
    o.require(runs.seconds < 300.0, fmt::format("runtime {:.1f} s < 300 s (criteria 3 and 4 together)", runs.seconds));
    return o;
}

Outcome criterion_fringe_local(const RegimeRuns& runs) {
    Outcome o;
    for (std::size_t i = 0; i < kRegimes.size(); ++i) {
        const auto& s = runs.summaries[i];
        int fringe_checked = 0, pair_checked = 0;
        for (const auto& row : s.fringe) {
            if (row.tree.size() > 4) continue;
            ++fringe_checked;
            const double diff = std::abs(row.mean - row.theory);
            const bool ok = diff <= 0.01 && diff <= 3.0 * row.stderr_;
            if (!ok)
                o.require(false, fmt::format("{}: fringe {} mean {:.5f} theory {:.5f} diff {:.5f} (3 SE = {:.5f})",
                                             kRegimes[i].label, row.tree.code(), row.mean, row.theory, diff,
                                             3.0 * row.stderr_));
        }
        double worst_pair = 0.0;
        for (const auto& row : s.pairs) {
            if (row.theory < 0.01) continue;
            ++pair_checked;
            const double diff = std::abs(row.frequency - row.theory);
            worst_pair = std::max(worst_pair, diff);
            if (diff > 0.01)
                o.require(false, fmt::format("{}: pair ({}, {}) frequency {:.5f} theory {:.5f}", kRegimes[i].label,
                                             row.t0.code(), row.t1.code(), row.frequency, row.theory));
        }
        o.require(fringe_checked == 8, fmt::format("{}: {} fringe shapes of size <= 4 checked", kRegimes[i].label,
                                                   fringe_checked));
        o.require(pair_checked > 0, fmt::format("{}: {} pairs checked, max |diff| = {:.5f}", kRegimes[i].label,
                                                pair_checked, worst_pair));
    }
    return o;
}

Outcome criterion_leaf_clt() {
    Outcome o;
    auto p = regime_plan("uniform", 10000, 500, 0.3, 77);
    p.statistics = {Statistic::Clt};
    p.random_centering_max_n = 0;
    const auto s = run(p);
    const double var = s.clt->variance;
    const double rel = std::abs(var / (1.0 / 9.0) - 1.0);
    o.require(rel <= 0.15, fmt::format("sample variance {:.5f} vs 1/9 (relative error {:.3f} <= 0.15)", var, rel));
    o.require(s.normality && s.normality->p_value > 0.01,
              fmt::format("Anderson-Darling A*^2 = {:.4f}, p = {:.4f} > 0.01", s.normality->a2_star, s.normality->p_value));
    o.notes.push_back(fmt::format("  info  mean of standardized values {:.4f}", s.clt->mean));
    return o;
}

Outcome criterion_root_degree() {
    Outcome o;
    const std::vector<Time> grid{1000, 10000, 100000};
    {
        auto p = regime_plan("uniform", 100000, 50, 0.5, 606);
        p.statistics = {Statistic::Root};
        p.root_grid = grid;
        const auto s = run(p);
        int steady = 0;
        for (const auto& r : s.root) {
            const double drift = std::abs(r.over_ntheta[2] / r.over_ntheta[1] - 1.0);
            if (drift < 0.10) ++steady;
        }
        const double frac = static_cast<double>(steady) / static_cast<double>(s.root.size());
        o.require(frac >= 0.80, fmt::format("light: drift of M/sqrt(n) from 1e4 to 1e5 below 10% in {:.0f}% of replicates",
                                            100.0 * frac));
    }
    {
        auto p = regime_plan("invpow:2", 100000, 50, 0.5, 607);
        p.statistics = {Statistic::Root};
        p.root_grid = grid;
        const auto s = run(p);
        const double ex = DelayLaw(InversePowerDelay{2.0}, 0.5).x_truncated_mean(1e5);
        int grew = 0, above = 0;
        for (const auto& r : s.root) {
            if (r.over_ntheta[2] >= 2.0 * r.over_ntheta[0]) ++grew;
            if (static_cast<double>(r.degree[2]) >= 0.5 * ex) ++above;
        }
        const double reps = static_cast<double>(s.root.size());
        o.require(grew / reps >= 0.90,
                  fmt::format("heavy: M/sqrt(n) grows 2x from 1e3 to 1e5 in {:.0f}% of replicates", 100.0 * grew / reps));
        o.require(above / reps >= 0.90, fmt::format("heavy: M(1e5) >= 0.5 E[X ^ n] = {:.1f} in {:.0f}% of replicates",
                                                    0.5 * ex, 100.0 * above / reps));
    }
    return o;
}

void each_recursive_tree(int size, std::vector<Vertex>& parents, const std::function<void(const std::vector<Vertex>&)>& fn) {
    if (static_cast<int>(parents.size()) == size - 1) {
        fn(parents);
        return;
    }
    const auto next = static_cast<Vertex>(parents.size() + 2);
    for (Vertex p = 1; p < next; ++p) {
        parents.push_back(p);
        each_recursive_tree(size, parents, fn);
        parents.pop_back();
    }
}

TreeTrace build(const AttachmentKernel& k, const std::vector<Vertex>& parents) {
    TreeTrace t(k);
    for (std::size_t i = 0; i < parents.size(); ++i) t.append(parents[i], 0.0, static_cast<Time>(i + 1));
    return t;
}

Outcome criterion_sampler_equivalence() {
    Outcome o;
    const std::vector<AttachmentKernel> affine_like{AttachmentKernel::affine(0.0), AttachmentKernel::affine(1.0),
                                                    AttachmentKernel::uniform()};
    const std::vector<AttachmentKernel> monotone{
        AttachmentKernel::affine(0.0), AttachmentKernel::uniform(),
        AttachmentKernel::tabulated({1.0, 1.5, 3.0, 3.2}, ConstantTail{}, 1.0, true),
        AttachmentKernel::tabulated({1.0, 1.4, 2.0}, PowerTail{0.6}, 1.0, true)};
    double worst_affine = 0.0, worst_rejection = 0.0;
    long long cases = 0;
    for (int size = 1; size <= 8; ++size) {
        std::vector<Vertex> parents;
        each_recursive_tree(size, parents, [&](const std::vector<Vertex>& ps) {
            for (const auto& k : affine_like) {
                const auto t = build(k, ps);
                const SnapshotIndex idx(t, {});
                for (Time m = 1; m <= t.size(); ++m) {
                    const auto oracle = attachment_law_scan(t, m);
                    const auto law = attachment_law_affine(idx, m, k);
                    for (std::size_t v = 0; v < oracle.size(); ++v)
                        worst_affine = std::max(worst_affine, std::abs(law[v] - oracle[v]));
                    ++cases;
                }
            }
            for (const auto& k : monotone) {
                const auto t = build(k, ps);
                const SnapshotIndex idx(t, {});
                for (Time m = 1; m <= t.size(); ++m) {
                    const auto oracle = attachment_law_scan(t, m);
                    const auto law = attachment_law_rejection(t, idx, m);
                    for (std::size_t v = 0; v < oracle.size(); ++v)
                        worst_rejection = std::max(worst_rejection, std::abs(law[v] - oracle[v]));
                    ++cases;
                }
            }
        });
    }
    o.require(worst_affine <= 1e-12, fmt::format("edge trick vs scan: max diff {:.2e}", worst_affine));
    o.require(worst_rejection <= 1e-12, fmt::format("rejection vs scan: max diff {:.2e}", worst_rejection));
    o.notes.push_back(fmt::format("  info  {} (tree, kernel, snapshot) cases", cases));

    GrowthConfig cfg;
    cfg.n_final = 50;
    cfg.kernel = AttachmentKernel::tabulated({1.0, 1.4, 2.0, 2.2}, PowerTail{0.6}, 1.0, true);
    cfg.delay = DelayLaw(Uniform01Delay{}, 0.5);
    cfg.seed = 5;
    const auto t = grow(cfg);
    const SnapshotIndex idx(t, {});
    for (Time m : {Time{35}, Time{50}}) {
        const auto law = attachment_law_scan(t, m);
        std::vector<std::int64_t> counts(static_cast<std::size_t>(m), 0);
        Rng rng(1000 + static_cast<std::uint64_t>(m));
        for (int i = 0; i < 1'000'000; ++i) ++counts[sample_parent_rejection(t, idx, m, rng) - 1];
        const auto chi = chi_square_test(counts, law);
        o.require(chi.p_value > 0.001, fmt::format("rejection draws at n=50, m={}: chi-square {:.2f} on {} dof, p = {:.4f}",
                                                   m, chi.statistic, chi.dof, chi.p_value));
    }
    return o;
}

Outcome criterion_delay_diagnostics() {
    Outcome o;
    const std::vector<Time> grid{100, 1000, 10000, 100000, 1000000};
    for (const char* spec : {"zero", "const:1", "uniform", "invpow:1", "invpow:2"}) {
        const auto scan = delay_condition_scan(parse_delay(spec, 0.5), grid);
        std::string es;
        for (const auto& r : scan.rows) es += fmt::format(" {:.4g}", r.e_n);
        o.require(scan.verdict == DelayVerdict::Satisfied && scan.e_monotone,
                  fmt::format("{}: verdict {}, monotone {}, e_n:{}", spec, to_string(scan.verdict), scan.e_monotone, es));
    }
    return o;
}

std::string read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion_determinism() {
    Outcome o;
    const auto base = std::filesystem::temp_directory_path() / "mesotree_acceptance_determinism";
    std::filesystem::remove_all(base);
    std::vector<std::string> outputs;
    int variant = 0;
    for (int threads : {1, 4, 4}) {
        auto p = regime_plan("invpow:1", 5000, 12, 0.5, 99);
        p.statistics = {Statistic::Degree, Statistic::Fringe, Statistic::Root, Statistic::Clt, Statistic::DelayScan};
        p.threads = threads;
        p.random_centering_max_n = 5000;
        const auto dir = base / std::to_string(variant++);
        write_outputs(run(p), p, dir);
        std::string joined;
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(dir)) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) joined += f.filename().string() + "\n" + read_all(f);
        outputs.push_back(std::move(joined));
    }
    o.require(outputs[1] == outputs[2], "same seed and thread count: byte-identical outputs");
    o.require(outputs[0] == outputs[1], "1 vs 4 threads: byte-identical outputs");
    std::filesystem::remove_all(base);
    return o;
}

}  // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const char* title, const std::function<Outcome()>& fn) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.require(false, fmt::format("exception: {}", e.what()));
        }
        fmt::print("criterion {}: {} {} ({:.1f} s)\n", id, o.pass ? "PASS" : "FAIL", title, seconds_since(t0));
        for (const auto& n : o.notes) fmt::print("{}\n", n);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };

    report(1, "Malthusian parameter", criterion_malthusian);
    report(2, "fringe brute force vs recursion", criterion_fringe_equivalence);
    RegimeRuns runs;
    try {
        runs = run_regimes();
    } catch (const std::exception& e) {
        fmt::print("regime simulations failed: {}\n", e.what());
    }
    const bool have_runs = runs.summaries.size() == kRegimes.size();
    report(3, "degree law under delays", [&] {
        if (!have_runs) throw std::runtime_error("no simulations");
        return criterion_degree_law(runs);
    });
    report(4, "fringe local limit", [&] {
        if (!have_runs) throw std::runtime_error("no simulations");
        return criterion_fringe_local(runs);
    });
    report(5, "leaf-count CLT", criterion_leaf_clt);
    report(6, "root degree phase transition", criterion_root_degree);
    report(7, "sampler equivalence", criterion_sampler_equivalence);
    report(8, "delay-condition diagnostics", criterion_delay_diagnostics);
    report(9, "determinism", criterion_determinism);

    fmt::print("{} of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
