#pragma once

#include "sparsebwk/bandit.hpp"
#include "sparsebwk/bwk_primal_dual.hpp"
#include "sparsebwk/environment.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparsebwk {

enum class ExperimentKind { estimation, bandit, bwk };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct EstimationParams {
    /// "full" (p = 1) or "decay" (p_j = min(1, propensity_c * j^(-1/3))).
    std::string propensity = "full";
    double propensity_c = 4.0;
    /// LASSO comparison curves, one per c; empty disables them.
    std::vector<double> lasso_c;
};

struct BanditParams {
    double eps_scale = 0.5;
    bool greedy = true;
    std::vector<double> etc_c;
    /// t1 = fraction * T^(2/3).
    std::vector<double> etc_fractions;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::estimation;
    InstanceConfig instance;
    double rho = 0.25;
    StepRule step_rule = StepRule::lipschitz;
    EstimationParams estimation;
    BanditParams bandit;
    BwkConfig bwk;
    std::size_t replications = 1;
    /// Checkpoints (estimation, bandit) or horizons (bwk, and the ETC runs).
    std::vector<std::size_t> t_grid;
    std::filesystem::path output_dir;
    std::uint64_t master_seed = 0;
    std::size_t threads = 1;
    bool write_trajectories = false;

    void validate() const;
};

inline constexpr int kSpecSchemaVersion = 1;

/// Versioned JSON config. Missing fields keep their defaults; unknown
/// top-level keys are rejected.
ExperimentSpec spec_from_json_text(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);
std::string spec_to_json_text(const ExperimentSpec& spec);

/// fig1-desk, fig2-desk, fig3-desk and the full-size fig1-paper, fig2-paper, fig3-paper.
ExperimentSpec preset(const std::string& name);
std::vector<std::string> preset_names();

/// One tracked metric: value per (replication, grid point).
struct Series {
    std::string name;
    std::vector<double> mean;
    std::vector<double> se;
    std::vector<std::vector<double>> raw; // [successful replication][grid point]
};

struct AggregateResult {
    std::vector<std::size_t> t_grid;
    std::vector<Series> series;
    std::vector<std::size_t> replication_ids; // successful replications, ascending
    std::vector<std::string> warnings;

    const Series& at(const std::string& name) const;
    bool has(const std::string& name) const;
};

/// Sample std / sqrt(n); zero for n == 1.
double standard_error(const std::vector<double>& values);

/// Runs every replication (seed derive_seed(master_seed, r)) on a pool of
/// spec.threads workers, aggregates in replication order and, when
/// output_dir is set, writes aggregate.csv, raw.csv, SVG plots and optional
/// per-replication trajectories. Failed replications are dropped with a
/// warning; throws std::runtime_error when none succeed.
AggregateResult run_experiment(const ExperimentSpec& spec);

/// regret / opt; throws std::invalid_argument when opt <= 0.
double relative_regret(double regret, double opt);

/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

void write_aggregate_csv(std::ostream& out, const AggregateResult& result);
void write_raw_csv(std::ostream& out, const AggregateResult& result);

struct PlotLine {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;
};

/// Minimal SVG line chart; log axes drop non-positive points.
void write_svg_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotLine>& lines, bool log_x, bool log_y);

} // namespace sparsebwk
