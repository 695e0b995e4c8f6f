#pragma once

#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctrcac/architectures.hpp"
#include "ctrcac/pso.hpp"
#include "ctrcac/sim.hpp"

namespace ctrcac {

using json = nlohmann::json;

enum class ArchitectureKind { servo, ppi, fsfi, bicopter, attitude };
enum class ParamKind { tf, pid, pi, fsfi };

/// A fully resolved scenario: every default filled in, validated against the
/// strict schema. `resolved` is the echo form; loading it back yields an
/// identical scenario.
struct Scenario {
    std::string name;
    json resolved;

    Plant plant;
    bool full_state_measurements = true;

    ArchitectureKind architecture = ArchitectureKind::servo;
    bool gravity_feedforward = true;
    double outer_gain = 1.0;

    ParamKind param_kind = ParamKind::pid;
    int tf_order = 2;
    PidParameterization::RateSource pid_rate_source =
        PidParameterization::RateSource::measured_rate;
    double pid_filter_epsilon = 0.01;

    std::optional<double> p0;                ///< scalar covariance init, when given
    std::optional<MatrixXd> rtheta;          ///< full regularizer, when given
    std::optional<double> filter_pole;       ///< first-order filter, when given
    std::optional<FilterRealization> filter; ///< full realization, when given
    double rz = 1.0;
    double ru = 0.0;

    Reference reference;
    SimConfig sim;
    std::uint64_t seed = 0;
    std::optional<std::string> output_dir;

    /// True when the hyperparameters are in the (P0, pole) form the tuner
    /// searches over.
    bool tunable() const { return p0.has_value() && filter_pole.has_value(); }
};

/// Parse and validate a scenario document. Schema violations (unknown keys,
/// wrong types, missing required fields) throw ParseError; semantically
/// invalid combinations throw ConfigError.
Scenario parse_scenario(const json& doc, const std::string& name);

/// Load from a file path, or from a bundled preset when no such file exists
/// and the name matches one.
Scenario load_scenario(const std::string& path_or_preset);

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
std::string preset_summary(const std::string& name);
json preset_document(const std::string& name);

/// Instantiate the closed-loop system the scenario describes.
std::unique_ptr<System> build_system(const Scenario& s);

struct RunResult {
    TimeSeriesLog log;
    Metrics metrics;
};

RunResult run_scenario(const Scenario& s);

/// Copy of the scenario with hyperparameters replaced by a search point
/// (log10 of the covariance scale, filter pole).
Scenario with_hyperparameters(const Scenario& s, double log10_p0, double filter_pole);

/// Tuner objective: IAE of the run, or 1e9 + (horizon - t_diverge) when the
/// candidate diverges so earlier blow-ups score worse.
double score_scenario(const Scenario& s, const Vector2d& point);

/// CSV emission with a "t" column followed by the log schema, formatted so
/// identical logs produce identical bytes.
void write_csv(const std::string& path, const TimeSeriesLog& log);
void write_pso_history_csv(const std::string& path, const PsoResult& result);

/// gnuplot script plotting the CSV: error magnitudes on a log scale, outputs
/// against their references, controls, and gain trajectories.
void write_gnuplot_script(const std::string& path, const TimeSeriesLog& log,
                          const std::string& csv_name);

json metrics_to_json(const Metrics& m);

} // namespace ctrcac
