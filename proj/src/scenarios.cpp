#include "genrelay/run_config.hpp"

#include "genrelay/format.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

using nlohmann::json;

namespace genrelay {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path &path, const std::string &content, RunResult &result,
                const fs::path &out_dir) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::scenario_failed, "cannot write " + path.string());
    out << content;
    result.artifacts.push_back(fs::relative(path, out_dir).string());
}

json manifest_json(const ResolvedConfig &cfg, const ConfigMap &raw, const RunResult &result) {
    json j;
    j["scenario"] = scenario_name(cfg.scenario);
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["deterministic"] = cfg.deterministic;
    // Wall-clock time is suppressed in deterministic mode so reruns of the
    // same configuration are byte-identical.
    j["wallclock_unix"] = 0;
    json resolved = json::object();
    for (const auto &[k, v] : raw.values()) resolved[k] = v;
    j["config"] = resolved;
    j["artifacts"] = result.artifacts;
    return j;
}

LearningSession make_session(const ResolvedConfig &cfg) {
    LearningSession session;
    session.contract = *cfg.contract;
    session.codec = cfg.codec;
    session.corpus = &cfg.corpus;
    session.plan = cfg.budget;
    session.mode = cfg.learning_mode;
    session.seed = cfg.seed;
    return session;
}

std::string selection_csv(const std::vector<Selection> &selections) {
    std::ostringstream out;
    out << "selection_index,chosen_l_p,objective,feasible\n";
    for (std::size_t i = 0; i < selections.size(); ++i) {
        const Selection &s = selections[i];
        out << i << ","
            << (s.full_data() ? std::string("FULL_DATA") : fmt_double(*s.chosen_l_p)) << ","
            << fmt_double(s.objective_value) << "," << (s.feasible ? "true" : "false") << "\n";
    }
    return out.str();
}

std::string savings_csv(const CostLedger &ledger) {
    std::ostringstream out;
    out << "point,w_bits\n";
    for (const auto &[idx, w] : ledger.savings()) {
        out << idx << "," << fmt_double(w.to_double()) << "\n";
    }
    out << "total," << fmt_double(ledger.savings_total().to_double()) << "\n";
    return out.str();
}

std::string candidates_csv(const std::vector<NodeAdvertisement> &ads) {
    std::ostringstream out;
    out << "node_id,style,modalities,location,t_generate,l_min_bpp,l_max_bpp\n";
    for (const auto &ad : ads) {
        std::string mods;
        for (std::size_t i = 0; i < ad.modalities.size(); ++i) {
            if (i) mods += ";";
            mods += ad.modalities[i];
        }
        out << ad.node_id << ","
            << (ad.style == DiscoveryStyle::agent_card ? "agent-card" : "registry-entry") << ","
            << mods << "," << ad.location << "," << fmt_double(ad.t_generate) << ","
            << fmt_double(ad.codec.l_min_bpp.to_double()) << ","
            << fmt_double(ad.codec.l_max_bpp.to_double()) << "\n";
    }
    return out.str();
}

} // namespace

RunResult run_scenario(const ResolvedConfig &cfg, const ConfigMap &raw) {
    RunResult result;
    const fs::path out_dir(cfg.out_dir);
    fs::create_directories(out_dir);

    switch (cfg.scenario) {
    case Scenario::learn: {
        LearningSession session = make_session(cfg);
        LearningOutcome outcome = run_learning(session);
        write_file(out_dir / "trace.ndjson", outcome.ledger.trace_ndjson(), result, out_dir);
        write_file(out_dir / "ledger.csv",
                   outcome.ledger.summary_csv(variant_name(cfg.contract->variant),
                                              outcome.n_points,
                                              static_cast<std::int64_t>(
                                                  cfg.contract->n_prompt_sizes())),
                   result, out_dir);
        write_file(out_dir / "estimate.json", rq_to_json(outcome.estimate), result, out_dir);
        break;
    }
    case Scenario::operate: {
        LearningSession session = make_session(cfg);
        LearningOutcome learned = run_learning(session);
        OperationalConfig op;
        op.mode = cfg.mode;
        op.pilots = cfg.pilots;
        op.n_points = cfg.operate_points;
        op.seed = derive_seed(cfg.seed, {0x0baaULL});
        op.topo = cfg.topology.has_value() ? &*cfg.topology : nullptr;
        op.s_id = cfg.s_id;
        op.g_id = cfg.g_id;
        op.d_id = cfg.d_id;
        OperationalOutcome outcome = run_operational(session, learned.estimate, op);
        write_file(out_dir / "learn_trace.ndjson", learned.ledger.trace_ndjson(), result, out_dir);
        write_file(out_dir / "operate_trace.ndjson", outcome.ledger.trace_ndjson(), result,
                   out_dir);
        write_file(out_dir / "ledger.csv",
                   learned.ledger.summary_csv(variant_name(cfg.contract->variant),
                                              learned.n_points,
                                              static_cast<std::int64_t>(
                                                  cfg.contract->n_prompt_sizes())),
                   result, out_dir);
        write_file(out_dir / "savings.csv", savings_csv(outcome.ledger), result, out_dir);
        write_file(out_dir / "selections.csv", selection_csv(outcome.selections), result, out_dir);
        write_file(out_dir / "estimate.json", rq_to_json(outcome.final_estimate), result, out_dir);
        break;
    }
    case Scenario::discover: {
        auto candidates = discover(cfg.registry, cfg.query);
        write_file(out_dir / "candidates.csv", candidates_csv(candidates), result, out_dir);
        break;
    }
    case Scenario::experiment_width: {
        auto rows = width_distribution(cfg.law, cfg.grid_double, cfg.budgets,
                                       cfg.exp_realizations, cfg.exp_alpha, cfg.seed,
                                       cfg.exp_options);
        write_file(out_dir / "widths.csv", widths_csv(rows), result, out_dir);
        break;
    }
    case Scenario::experiment_adherence: {
        auto rows = adherence_curve(cfg.law, cfg.grid_double, cfg.budgets, cfg.exp_q_min,
                                    cfg.exp_alpha_star, cfg.exp_realizations, cfg.exp_test_size,
                                    cfg.seed, cfg.exp_options);
        write_file(out_dir / "adherence.csv", adherence_csv(rows), result, out_dir);
        break;
    }
    case Scenario::experiment_optimal_budget: {
        auto res = optimal_budget(cfg.law, cfg.grid_double, cfg.exp_q_min, cfg.exp_alpha_star,
                                  cfg.budgets, cfg.exp_realizations, cfg.exp_test_size, cfg.seed,
                                  cfg.exp_options);
        write_file(out_dir / "adherence.csv", adherence_csv(res.curve), result, out_dir);
        std::ostringstream ob;
        ob << "q_min,alpha_star,n_l_opt\n"
           << fmt_double(cfg.exp_q_min) << "," << fmt_double(cfg.exp_alpha_star) << ","
           << (res.n_l_opt.has_value() ? std::to_string(*res.n_l_opt) : std::string("NOT_FOUND"))
           << "\n";
        write_file(out_dir / "optimal_budget.csv", ob.str(), result, out_dir);
        break;
    }
    case Scenario::experiment_tables: {
        write_file(out_dir / "table3.csv", cost_table_csv(learning_cost_table()), result, out_dir);
        auto rows = load_viability_table(cfg.table_file);
        write_file(out_dir / "table4_check.csv", crosscheck_csv(crosscheck_viability(rows)),
                   result, out_dir);
        break;
    }
    }

    std::ofstream manifest(out_dir / "manifest.json", std::ios::binary);
    if (!manifest) raise(Errc::scenario_failed, "cannot write manifest");
    manifest << manifest_json(cfg, raw, result).dump(2) << "\n";
    result.artifacts.push_back("manifest.json");
    return result;
}

} // namespace genrelay
