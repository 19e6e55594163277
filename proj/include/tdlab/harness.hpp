#pragma once

// Sweeps over beta0 or c_alpha: configuration, seeding, parallel execution,
// aggregation and the CSV / plot / meta outputs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tdlab/control.hpp"
#include "tdlab/evaluation.hpp"
#include "tdlab/record.hpp"
#include "tdlab/td.hpp"

namespace tdlab {

enum class EnvKind { Mrp, Boyan, Access, Pendulum };
enum class SweepAxis { Beta0, CAlpha };
enum class PlotKind { Sweep, Trajectory };

EnvKind parse_env_kind(std::string_view name);
std::string_view to_string(EnvKind env);

inline bool is_control(EnvKind env) { return env == EnvKind::Access || env == EnvKind::Pendulum; }

/// One learner in a sweep. `implicit-proj:5000` is the projected variant with
/// r_theta = 5000; a bare `implicit-proj` uses the config's projection.
struct AlgoSpec {
    std::string label;
    Algorithm algo = Algorithm::Standard;
    ProjectionConfig projection;
};

AlgoSpec parse_algo_spec(std::string_view token, const ProjectionConfig& base);

struct ExperimentConfig {
    std::string id = "experiment";
    long runs = 10;
    long steps = 2000;
    std::uint64_t seed = 1;
    long record_every = 1;
    Reduction reduction = Reduction::Final;
    long tail = 500;
    PlotKind plot = PlotKind::Sweep;
    bool log_y = false;

    EnvKind env = EnvKind::Mrp;
    long n_states = 100;
    long features = 20;
    /// One chain/policy for all runs (drawn from the master seed) or a fresh
    /// one per run. Control tasks always draw their feature maps per run.
    bool shared_env = true;

    std::vector<std::string> algos{"standard", "implicit"};
    double lambda = 0.25;
    double c_alpha = 1.0;
    std::optional<double> epsilon;  ///< control only; empty means the schedule

    StepSchedule schedule;
    SweepAxis axis = SweepAxis::Beta0;
    std::vector<double> grid{1.0};
    double beta0_scale = 1.0;  ///< beta0 used = grid value * beta0_scale

    ProjectionConfig projection{ProjectionMode::Separate, 1000.0, 1.0};

    /// Throws InvalidConfig naming every offending key.
    void validate() const;
    std::vector<AlgoSpec> algo_specs() const;
};

/// Flat `key = value` text with `[section]` headers and `#` comments. Keys
/// are addressed as section.key; unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(format_config(c)) reproduces c.
std::string format_config(const ExperimentConfig& config);

/// FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Every named preset at full scale.
std::vector<ExperimentConfig> figure_presets();

/// Throws UnknownPreset.
ExperimentConfig find_preset(std::string_view name);

/// Half the runs (at least one) and every other grid point, endpoints kept.
ExperimentConfig desk_scale(ExperimentConfig config);

/// One run's reduced metric and its recorded points.
struct RunSummary {
    long run = 0;
    std::uint64_t seed = 0;
    double value = 0.0;
    bool diverged = false;
    long truncation_index = -1;
    double max_trace_norm = 0.0;
    std::vector<long> t;
    std::vector<double> metric;
};

struct CellSummary {
    std::string algo;
    double axis_value = 0.0;
    double mean = 0.0;
    double sd = 0.0;           ///< sample sd, 0 for a single run
    double ci_half_width = 0.0;  ///< 1.96 sd / sqrt(n)
    long diverged = 0;
    std::vector<RunSummary> runs;
};

struct SweepResult {
    ExperimentConfig config;
    std::vector<CellSummary> cells;  ///< algo-major, then grid order
};

/// Seed of run `run` at grid value `axis_value`. The algorithm is not part of
/// it, so every learner sees the same initial weights and transitions.
std::uint64_t run_seed(const ExperimentConfig& config, double axis_value, long run);

/// The chain or policy shared by all runs of an evaluation sweep. It depends
/// on the master seed and env parameters only, not on the experiment id.
EvaluationProblem make_shared_problem(const ExperimentConfig& config);

/// Worker count from TDLAB_WORKERS, else the hardware concurrency.
unsigned default_workers();

SweepResult run_sweep(const ExperimentConfig& config, unsigned workers = default_workers());

/// Mean, sample sd and CI half-width of `values` into `cell`.
void summarize(CellSummary& cell, const std::vector<double>& values);

std::string_view axis_name(SweepAxis axis);

void write_csv(std::ostream& os, const SweepResult& result);
void emit_csv(const SweepResult& result, const std::filesystem::path& path);

/// Python/matplotlib script reading `csv_name` from its own directory.
void write_plot_script(std::ostream& os, const SweepResult& result, std::string_view csv_name);
void emit_plot_script(const SweepResult& result, const std::filesystem::path& path, std::string_view csv_name);

void write_meta(std::ostream& os, const SweepResult& result, std::string_view preset, bool desk);
void emit_meta(const SweepResult& result, const std::filesystem::path& path, std::string_view preset, bool desk);

/// Writes <dir>/<name>.csv, .plot and .meta.json.
void emit_all(const SweepResult& result, const std::filesystem::path& dir, std::string_view name, bool desk);

/// Shortest text that reads back to the same double.
std::string format_double(double x);

/// 17 significant digits, as in the CSV.
std::string format_g17(double x);

std::string_view version_string();

} // namespace tdlab
