#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mesotree/config.hpp"
#include "mesotree/estimators.hpp"
#include "mesotree/growth.hpp"
#include "mesotree/stats.hpp"

namespace mesotree {

enum class Statistic { Degree, Fringe, Root, Clt, DelayScan };
std::string to_string(Statistic s);
/// Throws ConfigError for unknown names.
Statistic parse_statistic(const std::string& s);

struct Tolerances {
    double degree_tv = 0.01;
    /// Fringe shapes up to this size are checked individually.
    int fringe_check_size = 4;
    double fringe_abs = 0.01;
    double fringe_se = 3.0;
    /// Extended-fringe pairs with at least this theory mass are checked.
    double pair_min_mass = 0.01;
    double pair_abs = 0.01;
    double clt_variance_rel = 0.15;
    double normality_level = 0.01;
    double retry_alarm = 100.0;
};

struct ExperimentPlan {
    RunSettings settings;
    std::set<Statistic> statistics{Statistic::Degree};
    Tolerances tolerances;
    /// Where CSV/JSON outputs go; nothing is written when empty.
    std::filesystem::path out_dir;
    /// Worker threads; 0 means hardware concurrency.
    int threads = 0;
    /// Explicit root-degree grid; the geometric grid when empty.
    std::vector<Time> root_grid;
    /// n grid for the delay scan; decades from 100 up to n_final when empty.
    std::vector<Time> delay_grid;
    /// The random centering costs O(n^2); skipped above this size.
    Time random_centering_max_n = 20000;
};

struct Check {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = true;
};

struct FringeRow {
    CanonicalTree tree;
    double mean = 0.0;    // mean over replicates of c_n(t)/n
    double stderr_ = 0.0;
    double theory = 0.0;
    std::int64_t count = 0;  // pooled
};

struct PairRow {
    CanonicalTree t0;
    CanonicalTree t1;
    double frequency = 0.0;  // pooled count / (R n)
    double theory = 0.0;
};

struct RunSummary {
    std::string config_hash;
    int replicates = 0;
    Time n = 0;
    std::vector<std::uint64_t> seeds;

    // Degree
    std::vector<std::int64_t> pooled_degree_counts;  // index k
    std::vector<double> degree_theory;                // p_1..p_K
    double degree_tv = 0.0;
    double lambda_star = 0.0;

    // Fringe
    std::vector<FringeRow> fringe;
    std::vector<PairRow> pairs;
    double fringe_truncated_mass = 0.0;

    // Root
    std::vector<RootTrajectory> root;

    // CLT
    std::optional<LeafClt> clt;
    std::optional<CltConstants> clt_theory;
    std::optional<AndersonDarlingResult> normality;
    std::optional<RandomCentering> centering;

    // Delay scan
    std::optional<DelayScan> delay_scan;

    SamplerStats sampler;
    std::vector<Check> checks;
    double wall_seconds = 0.0;

    bool passed() const;
    /// Deterministic JSON: everything except the wall time.
    std::string to_json() const;
};

/// Runs the plan's replicates in parallel, aggregates them in replicate
/// order and writes the outputs. Throws StrategyError for an unsupported
/// kernel/sampler pair and std::runtime_error for I/O failures.
RunSummary run(const ExperimentPlan& plan);

/// Writes the summary's CSV and JSON files plus the config echo into dir.
void write_outputs(const RunSummary& summary, const ExperimentPlan& plan, const std::filesystem::path& dir);

}  // namespace mesotree
