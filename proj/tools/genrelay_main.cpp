#include "genrelay/run_config.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>

using namespace genrelay;

int main(int argc, char **argv) {
    CLI::App app{"genrelay: deterministic simulator for rate-quality learning protocols in "
                 "generative relay networks"};

    std::string config_path;
    std::string scenario_override;
    std::string out_override;
    std::optional<std::int64_t> seed_override;
    std::optional<int> workers_override;
    std::vector<std::string> overrides;
    bool validate_only = false;

    app.add_option("--config", config_path, "Run configuration file (key = value lines)");
    app.add_option("--scenario", scenario_override,
                   "learn | operate | discover | experiment.width | experiment.adherence | "
                   "experiment.optimal-budget | experiment.tables");
    app.add_option("--seed", seed_override, "Random seed (overrides the config)");
    app.add_option("--out", out_override, "Output directory");
    app.add_option("--workers", workers_override, "Worker threads (must not change results)");
    app.add_option("--set", overrides, "key=value overrides, highest precedence");
    app.add_flag("--validate", validate_only, "Validate the configuration and exit");

    CLI11_PARSE(app, argc, argv);

    ConfigMap map;
    try {
        if (!config_path.empty()) map = ConfigMap::parse_file(config_path);
        if (!scenario_override.empty()) map.set("scenario", scenario_override);
        if (seed_override.has_value()) map.set("seed", std::to_string(*seed_override));
        if (!out_override.empty()) map.set("out", out_override);
        if (workers_override.has_value()) map.set("workers", std::to_string(*workers_override));
        for (const auto &kv : overrides) map.apply_override(kv);
    } catch (const Error &e) {
        nlohmann::json err{{"error", "ConfigInvalid"}, {"detail", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }

    auto diagnostics = validate_config(map);
    if (validate_only) {
        if (diagnostics.empty()) {
            std::cout << "ok\n";
            return 0;
        }
        for (const auto &d : diagnostics) {
            std::cout << d.field << ": " << d.message << "\n";
        }
        return 2;
    }
    if (!diagnostics.empty()) {
        nlohmann::json err{{"error", "ConfigInvalid"},
                           {"field", diagnostics.front().field},
                           {"detail", diagnostics.front().message}};
        std::cerr << err.dump() << "\n";
        return 2;
    }

    try {
        ResolvedConfig cfg = resolve_config(map);
        RunResult result = run_scenario(cfg, map);
        for (const auto &artifact : result.artifacts) {
            std::cout << cfg.out_dir << "/" << artifact << "\n";
        }
        return result.exit_code;
    } catch (const Error &e) {
        nlohmann::json err{{"error", "ScenarioFailed"},
                           {"code", errc_name(e.code())},
                           {"detail", e.what()}};
        std::cerr << err.dump() << "\n";
        return 3;
    } catch (const std::exception &e) {
        nlohmann::json err{{"error", "ScenarioFailed"}, {"detail", e.what()}};
        std::cerr << err.dump() << "\n";
        return 3;
    }
}
