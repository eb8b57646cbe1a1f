#include "genrelay/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace genrelay {

namespace {

std::string trim(const std::string &s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string &field, const std::string &msg) {
    raise(Errc::config_invalid, field + ": " + msg);
}

} // namespace

ConfigMap ConfigMap::parse_text(const std::string &text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            raise(Errc::config_invalid, "line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            raise(Errc::config_invalid, "line " + std::to_string(lineno) + ": empty key");
        }
        map.values_[key] = value;
    }
    return map;
}

ConfigMap ConfigMap::parse_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) raise(Errc::file_unreadable, path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

void ConfigMap::apply_override(const std::string &kv) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
        raise(Errc::config_invalid, "override '" + kv + "' is not key=value");
    }
    values_[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
}

std::optional<std::string> ConfigMap::get(const std::string &key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

const char *scenario_name(Scenario s) {
    switch (s) {
    case Scenario::learn: return "learn";
    case Scenario::operate: return "operate";
    case Scenario::discover: return "discover";
    case Scenario::experiment_width: return "experiment.width";
    case Scenario::experiment_adherence: return "experiment.adherence";
    case Scenario::experiment_optimal_budget: return "experiment.optimal-budget";
    case Scenario::experiment_tables: return "experiment.tables";
    }
    return "?";
}

namespace {

struct Reader {
    const ConfigMap &map;

    std::string require(const std::string &key) const {
        auto v = map.get(key);
        if (!v.has_value() || v->empty()) bad(key, "required key is missing");
        return *v;
    }
    std::string get_or(const std::string &key, const std::string &fallback) const {
        auto v = map.get(key);
        return v.has_value() && !v->empty() ? *v : fallback;
    }
    double number(const std::string &key, const std::string &text) const {
        try {
            std::size_t used = 0;
            double v = std::stod(text, &used);
            if (used != text.size()) bad(key, "trailing characters in number '" + text + "'");
            return v;
        } catch (const Error &) {
            throw;
        } catch (const std::exception &) {
            bad(key, "not a number: '" + text + "'");
        }
    }
    double req_number(const std::string &key) const { return number(key, require(key)); }
    double num_or(const std::string &key, double fallback) const {
        auto v = map.get(key);
        return v.has_value() && !v->empty() ? number(key, *v) : fallback;
    }
    std::int64_t req_int(const std::string &key) const {
        double v = req_number(key);
        if (v != std::floor(v)) bad(key, "expected an integer");
        return static_cast<std::int64_t>(v);
    }
    std::int64_t int_or(const std::string &key, std::int64_t fallback) const {
        auto v = map.get(key);
        if (!v.has_value() || v->empty()) return fallback;
        double d = number(key, *v);
        if (d != std::floor(d)) bad(key, "expected an integer");
        return static_cast<std::int64_t>(d);
    }
    bool bool_or(const std::string &key, bool fallback) const {
        auto v = map.get(key);
        if (!v.has_value() || v->empty()) return fallback;
        if (*v == "true" || *v == "1" || *v == "on") return true;
        if (*v == "false" || *v == "0" || *v == "off") return false;
        bad(key, "expected true/false");
    }
    Rational rational(const std::string &key, const std::string &text) const {
        try {
            return Rational::from_decimal(text);
        } catch (const std::exception &e) {
            bad(key, e.what());
        }
    }
    std::vector<std::string> split_list(const std::string &text) const {
        std::vector<std::string> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }
};

Scenario parse_scenario(const std::string &name) {
    if (name == "learn") return Scenario::learn;
    if (name == "operate") return Scenario::operate;
    if (name == "discover") return Scenario::discover;
    if (name == "experiment.width") return Scenario::experiment_width;
    if (name == "experiment.adherence") return Scenario::experiment_adherence;
    if (name == "experiment.optimal-budget") return Scenario::experiment_optimal_budget;
    if (name == "experiment.tables") return Scenario::experiment_tables;
    bad("scenario", "unknown scenario '" + name + "'");
}

SyntheticRQLaw resolve_law(const Reader &r) {
    SyntheticRQLaw law;
    law.q_max = r.num_or("codec.q_max", 10.0);
    law.beta = r.num_or("codec.beta", 1.0);
    law.sigma0 = r.num_or("codec.sigma0", 0.0);
    law.gamma = r.num_or("codec.gamma", 0.0);
    if (!(law.q_max > 0.0)) bad("codec.q_max", "must be positive");
    if (!(law.beta > 0.0)) bad("codec.beta", "must be positive");
    if (law.sigma0 < 0.0) bad("codec.sigma0", "must be >= 0");
    if (law.gamma < 0.0) bad("codec.gamma", "must be >= 0");
    return law;
}

std::vector<Rational> resolve_grid(const Reader &r) {
    auto items = r.split_list(r.require("grid"));
    if (items.empty()) bad("grid", "grid must not be empty");
    std::vector<Rational> grid;
    for (const auto &item : items) grid.push_back(r.rational("grid", item));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) bad("grid", "grid must be strictly increasing");
    }
    return grid;
}

void resolve_codec_and_corpus(const Reader &r, ResolvedConfig &out) {
    std::string family = r.require("codec.family");
    if (family == "toy-image") {
        int depth = static_cast<int>(r.int_or("codec.depth_bits", 8));
        if (depth < 1 || depth > 16) bad("codec.depth_bits", "must be in [1, 16]");
        std::vector<ToyVariant> variants;
        for (const auto &f : r.split_list(r.get_or("codec.variant_factors", "2,4,8"))) {
            int factor = static_cast<int>(r.number("codec.variant_factors", f));
            if (factor < 1) bad("codec.variant_factors", "factors must be >= 1");
            variants.push_back({"ds" + f, factor, factor});
        }
        double t_g = r.num_or("codec.generation_time", 0.0);
        out.codec = std::make_shared<ToyCodec>(variants, depth, DistanceFamily::mse, t_g);
        int count = static_cast<int>(r.int_or("corpus.count", 64));
        int width = static_cast<int>(r.int_or("corpus.width", 16));
        int height = static_cast<int>(r.int_or("corpus.height", 16));
        if (count < 1) bad("corpus.count", "must be >= 1");
        if (width < 2 || height < 2) bad("corpus.width", "corpus images must be at least 2x2");
        for (const auto &v : variants) {
            if (width % v.factor_x != 0 || height % v.factor_y != 0) {
                bad("corpus.width", "corpus dimensions must be divisible by every variant factor");
            }
        }
        out.corpus = make_synthetic_corpus(count, width, height, depth,
                                           derive_seed(out.seed, {0xc0a9ULL}));
    } else if (family == "synthetic") {
        SyntheticRQLaw law = resolve_law(r);
        Rational l_min = r.rational("codec.l_min_bpp", r.get_or("codec.l_min_bpp", "0.01"));
        Rational l_max = r.rational("codec.l_max_bpp", r.get_or("codec.l_max_bpp", "64"));
        std::int64_t pixels = r.int_or("codec.nominal_pixels", 1000);
        if (pixels < 1) bad("codec.nominal_pixels", "must be >= 1");
        Rational bpp = r.rational("codec.original_bpp", r.get_or("codec.original_bpp", "8"));
        double t_g = r.num_or("codec.generation_time", 0.0);
        auto codec = std::make_shared<SyntheticCodec>(law, l_min, l_max, pixels, bpp, t_g);
        out.corpus = codec->nominal_corpus(r.int_or("corpus.count", 64));
        out.codec = codec;
        out.law = law;
    } else {
        bad("codec.family", "expected toy-image or synthetic, got '" + family + "'");
    }
}

LearningVariant resolve_variant(const Reader &r) {
    std::string name = r.get_or("learn.variant", "source");
    try {
        return variant_from_name(name);
    } catch (const Error &) {
        bad("learn.variant", "unknown learning variant '" + name + "'");
    }
}

void resolve_learning(const Reader &r, ResolvedConfig &out) {
    resolve_codec_and_corpus(r, out);
    auto grid = resolve_grid(r);
    LearningVariant variant = resolve_variant(r);

    // Explicit metric, when given, must be compatible with the variant
    // (goal-oriented measurement only happens at the destination).
    std::string metric = r.get_or("learn.metric", "");
    if (!metric.empty()) {
        if (metric != "deviation" && metric != "goal") {
            bad("learn.metric", "expected deviation or goal");
        }
        bool goal = metric == "goal";
        if (goal && variant != LearningVariant::destination_goal) {
            bad("learn.metric", "goal-oriented quality can only be measured at the destination "
                                "(destination-goal variant)");
        }
        if (!goal && variant == LearningVariant::destination_goal) {
            bad("learn.metric", "destination-goal learning measures goal-oriented quality");
        }
    }

    bool stateful = r.bool_or("learn.stateful_task", false);
    std::string codec_variant = r.get_or("learn.codec_variant", out.codec->default_variant());
    try {
        out.contract = Contract::make("g", *out.codec, codec_variant, grid, variant,
                                      r.num_or("codec.generation_time", 0.0), stateful);
    } catch (const Error &e) {
        bad("grid", e.what());
    }

    std::string kind = r.get_or("budget.kind", "fixed");
    if (kind == "fixed") {
        out.budget.kind = BudgetKind::fixed_count;
        out.budget.fixed_n = r.req_int("budget.n");
        if (out.budget.fixed_n < 1) bad("budget.n", "must be >= 1");
    } else if (kind == "communication") {
        out.budget.kind = BudgetKind::communication;
        out.budget.comm_bits = r.rational("budget.bits", r.require("budget.bits"));
        if (!out.budget.comm_bits.is_positive()) bad("budget.bits", "must be positive");
    } else if (kind == "time") {
        out.budget.kind = BudgetKind::time;
        out.budget.time_seconds = r.rational("budget.seconds", r.require("budget.seconds"));
        if (!out.budget.time_seconds.is_positive()) bad("budget.seconds", "must be positive");
    } else if (kind == "hybrid") {
        out.budget.kind = BudgetKind::hybrid;
        out.budget.comm_bits = r.rational("budget.bits", r.require("budget.bits"));
        if (!out.budget.comm_bits.is_positive()) bad("budget.bits", "must be positive");
    } else {
        bad("budget.kind", "expected fixed, communication, time or hybrid");
    }

    out.learning_mode = r.get_or("learn.mode", "pre-transmission") == "real-time"
                            ? LearningMode::real_time
                            : LearningMode::pre_transmission;
}

void resolve_pilots(const Reader &r, ResolvedConfig &out) {
    std::string policy = r.get_or("pilots.policy", "none");
    if (policy == "none") {
        out.pilots.policy = PilotPolicy::none;
    } else if (policy == "periodic") {
        out.pilots.policy = PilotPolicy::periodic;
        out.pilots.period = r.req_int("pilots.period");
        if (out.pilots.period < 1) bad("pilots.period", "must be >= 1");
    } else if (policy == "exponential") {
        out.pilots.policy = PilotPolicy::exponential;
        out.pilots.base = r.req_number("pilots.base");
        if (!(out.pilots.base > 1.0)) bad("pilots.base", "must be > 1");
    } else {
        bad("pilots.policy", "expected none, periodic or exponential");
    }
    out.pilots.forgetting = r.num_or("pilots.forgetting", 1.0);
    if (!(out.pilots.forgetting > 0.0 && out.pilots.forgetting <= 1.0)) {
        bad("pilots.forgetting", "must be in (0, 1]");
    }
}

void resolve_mode(const Reader &r, ResolvedConfig &out) {
    std::string kind = r.get_or("mode.kind", "quality");
    if (kind == "quality") {
        out.mode.mode = CommMode::quality_constrained;
        out.mode.q_min = r.req_number("mode.q_min");
        out.mode.alpha_star = r.num_or("mode.alpha_star", 0.95);
        if (!(out.mode.alpha_star > 0.0 && out.mode.alpha_star < 1.0)) {
            bad("mode.alpha_star", "must be in (0, 1)");
        }
    } else if (kind == "rate") {
        out.mode.mode = CommMode::rate_constrained;
        out.mode.lambda = r.req_number("mode.lambda");
        out.mode.l_bits = r.req_number("mode.l_bits");
        out.mode.w_weight = r.num_or("mode.w_weight", 0.0);
        out.mode.grid_unit_bits = r.num_or("mode.grid_unit_bits", 1.0);
        if (!(out.mode.lambda > 0.0)) bad("mode.lambda", "must be positive");
        if (!(out.mode.l_bits > 0.0)) bad("mode.l_bits", "must be positive");
        if (!r.map.has("topology.file")) {
            bad("topology.file", "rate-constrained mode needs a topology");
        }
    } else if (kind == "unconstrained") {
        out.mode.mode = CommMode::unconstrained;
        out.mode.w_weight = r.num_or("mode.w_weight", 0.0);
        out.mode.lambda = r.num_or("mode.lambda", 1.0);
        out.mode.l_bits = r.req_number("mode.l_bits");
        out.mode.grid_unit_bits = r.num_or("mode.grid_unit_bits", 1.0);
    } else {
        bad("mode.kind", "expected quality, rate or unconstrained");
    }
    out.mode.inflate = r.bool_or("mode.inflate", true);
    if (out.mode.w_weight < 0.0) bad("mode.w_weight", "must be >= 0");
}

void resolve_topology(const Reader &r, ResolvedConfig &out) {
    if (auto path = r.map.get("topology.file"); path.has_value()) {
        try {
            out.topology = Topology::from_json_file(*path);
        } catch (const Error &e) {
            bad("topology.file", e.what());
        } catch (const std::exception &e) {
            bad("topology.file", e.what());
        }
        out.s_id = r.get_or("topology.source", "s");
        out.g_id = r.get_or("topology.genai", "g");
        out.d_id = r.get_or("topology.destination", "d");
        for (const std::string &id : {out.s_id, out.g_id, out.d_id}) {
            if (!out.topology->has_node(id)) bad("topology.file", "missing node '" + id + "'");
        }
    }
}

std::vector<std::int64_t> resolve_budget_list(const Reader &r, const std::string &key) {
    std::vector<std::int64_t> budgets;
    for (const auto &item : r.split_list(r.require(key))) {
        double v = r.number(key, item);
        if (v != std::floor(v) || v < 2) bad(key, "budgets must be integers >= 2");
        budgets.push_back(static_cast<std::int64_t>(v));
    }
    if (budgets.empty()) bad(key, "list must not be empty");
    for (std::size_t i = 1; i < budgets.size(); ++i) {
        if (budgets[i] <= budgets[i - 1]) bad(key, "budgets must be strictly increasing");
    }
    return budgets;
}

void resolve_experiment(const Reader &r, ResolvedConfig &out) {
    out.law = resolve_law(r);
    for (const auto &g : resolve_grid(r)) out.grid_double.push_back(g.to_double());
    out.exp_realizations = r.int_or("experiment.realizations", 1000);
    if (out.exp_realizations < 2) bad("experiment.realizations", "must be >= 2");
    out.exp_options.inflate = r.bool_or("mode.inflate", true);
    out.exp_options.count_full_data_adherent = r.bool_or("experiment.full_data_adherent", true);
    out.exp_options.workers = out.workers;
}

} // namespace

ResolvedConfig resolve_config(const ConfigMap &map) {
    Reader r{map};
    ResolvedConfig out;
    out.scenario = parse_scenario(r.require("scenario"));
    out.seed = static_cast<std::uint64_t>(r.req_int("seed"));
    out.out_dir = r.get_or("out", "out");
    out.workers = static_cast<int>(r.int_or("workers", 1));
    if (out.workers < 1) bad("workers", "must be >= 1");
    out.deterministic = r.bool_or("run.deterministic", true);

    switch (out.scenario) {
    case Scenario::learn:
        resolve_learning(r, out);
        break;
    case Scenario::operate:
        resolve_learning(r, out);
        resolve_pilots(r, out);
        resolve_mode(r, out);
        resolve_topology(r, out);
        out.operate_points = r.req_int("operate.n_points");
        if (out.operate_points < 1) bad("operate.n_points", "must be >= 1");
        if (out.mode.mode == CommMode::rate_constrained && !out.topology.has_value()) {
            bad("topology.file", "rate-constrained mode needs a topology");
        }
        break;
    case Scenario::discover: {
        std::string path = r.require("registry.file");
        try {
            out.registry = load_registry_json(path);
        } catch (const Error &e) {
            bad("registry.file", e.what());
        } catch (const std::exception &e) {
            bad("registry.file", e.what());
        }
        if (auto m = map.get("discover.modality"); m.has_value() && !m->empty()) {
            out.query.modality = *m;
        }
        if (auto l = map.get("discover.location"); l.has_value() && !l->empty()) {
            out.query.location = *l;
        }
        break;
    }
    case Scenario::experiment_width:
        resolve_experiment(r, out);
        out.budgets = resolve_budget_list(r, "experiment.budgets");
        out.exp_alpha = r.num_or("experiment.alpha", 0.10);
        if (!(out.exp_alpha > 0.0 && out.exp_alpha < 1.0)) bad("experiment.alpha", "must be in (0,1)");
        break;
    case Scenario::experiment_adherence:
    case Scenario::experiment_optimal_budget:
        resolve_experiment(r, out);
        out.budgets = resolve_budget_list(r, "experiment.budgets");
        out.exp_q_min = r.req_number("experiment.q_min");
        out.exp_alpha_star = r.num_or("experiment.alpha_star", 0.9);
        if (!(out.exp_alpha_star > 0.0 && out.exp_alpha_star < 1.0)) {
            bad("experiment.alpha_star", "must be in (0,1)");
        }
        out.exp_test_size = r.int_or("experiment.test_size", 50);
        if (out.exp_test_size < 1) bad("experiment.test_size", "must be >= 1");
        break;
    case Scenario::experiment_tables:
        out.table_file = r.get_or("experiment.table_file", "data/table4_reference.csv");
        break;
    }
    return out;
}

std::vector<Diagnostic> validate_config(const ConfigMap &map) {
    std::vector<Diagnostic> diags;
    try {
        resolve_config(map);
    } catch (const Error &e) {
        std::string what = e.what();
        // "ConfigInvalid: field: message"
        std::string body = what;
        if (auto pos = body.find(": "); pos != std::string::npos) body = body.substr(pos + 2);
        std::string field = body;
        std::string message;
        if (auto pos = body.find(": "); pos != std::string::npos) {
            field = body.substr(0, pos);
            message = body.substr(pos + 2);
        }
        diags.push_back({field, message});
    } catch (const std::exception &e) {
        diags.push_back({"", e.what()});
    }
    return diags;
}

} // namespace genrelay
