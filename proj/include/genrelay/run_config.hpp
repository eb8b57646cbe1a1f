#pragma once

#include "genrelay/budget.hpp"
#include "genrelay/core.hpp"
#include "genrelay/experiments.hpp"
#include "genrelay/mode_select.hpp"
#include "genrelay/protocol.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace genrelay {

/// Flat dotted-key configuration ("budget.kind = communication"). Lines
/// starting with '#' are comments; command-line overrides win over file
/// values.
class ConfigMap {
public:
    static ConfigMap parse_file(const std::string &path);   // FileUnreadable
    static ConfigMap parse_text(const std::string &text);

    void set(const std::string &key, const std::string &value) { values_[key] = value; }
    void apply_override(const std::string &key_equals_value); // "key=value"

    bool has(const std::string &key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string &key) const;

    const std::map<std::string, std::string> &values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

enum class Scenario {
    learn,
    operate,
    discover,
    experiment_width,
    experiment_adherence,
    experiment_optimal_budget,
    experiment_tables,
};

const char *scenario_name(Scenario s);

struct Diagnostic {
    std::string field;
    std::string message;
};

/// Everything a scenario needs, resolved and validated. Building this is
/// the entire schema check: run() executes whatever resolves, validate()
/// reports whatever does not.
struct ResolvedConfig {
    Scenario scenario = Scenario::experiment_tables;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    int workers = 1;
    bool deterministic = true;

    // learn / operate
    std::shared_ptr<const Codec> codec;
    Corpus corpus;
    std::optional<Contract> contract;
    BudgetPlan budget;
    LearningMode learning_mode = LearningMode::pre_transmission;
    PilotSchedule pilots;
    ModeConfig mode;
    std::int64_t operate_points = 0;
    std::optional<Topology> topology;
    std::string s_id = "s", g_id = "g", d_id = "d";

    // discover
    std::vector<NodeAdvertisement> registry;
    DiscoveryQuery query;

    // experiments
    SyntheticRQLaw law;
    std::vector<double> grid_double;
    std::vector<std::int64_t> budgets;
    double exp_alpha = 0.10;
    double exp_q_min = 0.0;
    double exp_alpha_star = 0.9;
    std::int64_t exp_realizations = 0;
    std::int64_t exp_test_size = 0;
    std::string table_file = "data/table4_reference.csv";
    ExperimentOptions exp_options;
};

/// Parses and validates the full schema; raises ConfigInvalid naming the
/// offending field.
ResolvedConfig resolve_config(const ConfigMap &map);

/// Schema validation without execution; empty list means valid.
std::vector<Diagnostic> validate_config(const ConfigMap &map);

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> artifacts; // paths written, relative to out dir
    std::string error;                  // machine-readable error record (JSON) on failure
};

/// Executes the resolved scenario and writes its artifacts plus a manifest
/// capturing the resolved configuration.
RunResult run_scenario(const ResolvedConfig &cfg, const ConfigMap &raw);

} // namespace genrelay
