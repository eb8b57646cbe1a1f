#include "genrelay/protocol.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace genrelay {

// --- discovery ---------------------------------------------------------

std::vector<NodeAdvertisement> discover(std::span<const NodeAdvertisement> registry,
                                        const DiscoveryQuery &query, CostLedger *ledger) {
    std::vector<NodeAdvertisement> out;
    for (const auto &ad : registry) {
        if (query.modality.has_value() &&
            std::find(ad.modalities.begin(), ad.modalities.end(), *query.modality) ==
                ad.modalities.end()) {
            continue;
        }
        if (query.location.has_value() && ad.location != *query.location) continue;
        if (ledger) {
            // Agent cards arrive with the capability metadata; registry
            // entries need one more control round-trip to fetch it.
            ledger->record(0.0, "s", ad.node_id, PayloadClass::control, CostBucket::learning,
                           Rational(0));
            if (ad.style == DiscoveryStyle::registry_entry) {
                ledger->record(0.0, "s", ad.node_id, PayloadClass::control, CostBucket::learning,
                               Rational(0));
            }
        }
        out.push_back(ad);
    }
    std::sort(out.begin(), out.end(), [](const NodeAdvertisement &a, const NodeAdvertisement &b) {
        return a.node_id < b.node_id;
    });
    return out;
}

namespace {

std::shared_ptr<const Codec> codec_from_json(const json &j) {
    std::string family = j.at("family").get<std::string>();
    double t_g = j.value("generation_time", 0.0);
    if (family == "toy-image") {
        int depth = j.value("depth_bits", 8);
        std::vector<ToyVariant> variants;
        if (j.contains("variants")) {
            for (const auto &jv : j["variants"]) {
                variants.push_back({jv.at("name").get<std::string>(), jv.at("factor_x").get<int>(),
                                    jv.at("factor_y").get<int>()});
            }
        } else {
            variants = {{"ds2", 2, 2}, {"ds4", 4, 4}, {"ds8", 8, 8}};
        }
        return std::make_shared<ToyCodec>(std::move(variants), depth, DistanceFamily::mse, t_g);
    }
    if (family == "synthetic") {
        SyntheticRQLaw law;
        law.q_max = j.value("q_max", 10.0);
        law.beta = j.value("beta", 1.0);
        law.sigma0 = j.value("sigma0", 0.0);
        law.gamma = j.value("gamma", 0.0);
        Rational l_min = Rational::from_decimal(j.value("l_min_bpp", std::string("0.01")));
        Rational l_max = Rational::from_decimal(j.value("l_max_bpp", std::string("64")));
        std::int64_t pixels = j.value("nominal_pixels", 1000);
        Rational bpp = Rational::from_decimal(j.value("original_bpp", std::string("8")));
        return std::make_shared<SyntheticCodec>(law, l_min, l_max, pixels, bpp, t_g);
    }
    raise(Errc::config_invalid, "unknown codec family '" + family + "'");
}

} // namespace

std::vector<NodeAdvertisement> load_registry_json(const std::string &path) {
    std::ifstream in(path);
    if (!in) raise(Errc::file_unreadable, path);
    json j;
    in >> j;
    std::vector<NodeAdvertisement> out;
    for (const auto &jn : j) {
        NodeAdvertisement ad;
        ad.node_id = jn.at("id").get<std::string>();
        std::string style = jn.value("style", std::string("agent-card"));
        ad.style = style == "registry-entry" ? DiscoveryStyle::registry_entry
                                             : DiscoveryStyle::agent_card;
        if (jn.contains("modalities")) {
            ad.modalities = jn["modalities"].get<std::vector<std::string>>();
        }
        ad.location = jn.value("location", std::string());
        ad.t_generate = jn.value("t_generate", 0.0);
        ad.codec_impl = codec_from_json(jn.at("codec"));
        ad.codec = ad.codec_impl->descriptor();
        ad.codec.generation_time_s = ad.t_generate;
        if (jn.contains("claimed_rq")) {
            ad.claimed_rq = rq_from_json(jn["claimed_rq"].dump());
        }
        out.push_back(std::move(ad));
    }
    return out;
}

// --- contracts ---------------------------------------------------------

MetricKind metric_for_variant(LearningVariant v) {
    return v == LearningVariant::destination_goal ? MetricKind::goal : MetricKind::deviation;
}

std::vector<double> Contract::grid_double() const {
    std::vector<double> out;
    out.reserve(grid_bpp.size());
    for (const auto &g : grid_bpp) out.push_back(g.to_double());
    return out;
}

Contract Contract::make(std::string node_id, const Codec &codec, std::string codec_variant,
                        std::vector<Rational> grid_bpp, LearningVariant variant,
                        double t_generate, bool stateful_task) {
    if (grid_bpp.empty()) raise(Errc::grid_mismatch, "contract grid is empty");
    for (std::size_t i = 1; i < grid_bpp.size(); ++i) {
        if (!(grid_bpp[i] > grid_bpp[i - 1])) {
            raise(Errc::grid_mismatch, "contract grid is not strictly increasing");
        }
    }
    const CodecDescriptor &desc = codec.descriptor();
    if (std::find(desc.variants.begin(), desc.variants.end(), codec_variant) ==
        desc.variants.end()) {
        raise(Errc::unsupported_variant, "codec variant '" + codec_variant + "'");
    }
    auto [lo, hi] = codec.supported_range(codec_variant);
    if (grid_bpp.front() < lo || grid_bpp.back() > hi) {
        raise(Errc::grid_mismatch, "contract grid outside the sizes variant '" + codec_variant +
                                       "' supports [" + lo.str() + ", " + hi.str() + "]");
    }
    if (variant == LearningVariant::node_augmented && !desc.supports_augmented_generation) {
        raise(Errc::unsupported_variant, "codec does not support augmented generation");
    }
    if (variant == LearningVariant::destination_goal && stateful_task && grid_bpp.size() > 1) {
        raise(Errc::metric_incompatible,
              "stateful destination task restricts the contract to N_p = 1");
    }
    Contract c;
    c.node_id = std::move(node_id);
    c.codec_variant = std::move(codec_variant);
    c.grid_bpp = std::move(grid_bpp);
    c.variant = variant;
    c.metric = metric_for_variant(variant);
    c.t_generate = t_generate;
    c.stateful_task = stateful_task;
    return c;
}

// --- probing -----------------------------------------------------------

double ProbeReport::mean_quality() const {
    if (quality_samples.empty()) return 0.0;
    double sum = 0.0;
    for (const auto &s : quality_samples) sum += s.quality.value;
    return sum / static_cast<double>(quality_samples.size());
}

double ProbeReport::mean_latency() const {
    if (latency_samples.empty()) return 0.0;
    double sum = 0.0;
    for (double v : latency_samples) sum += v;
    return sum / static_cast<double>(latency_samples.size());
}

ProbeReport probe(const NodeAdvertisement &node, const ProbePlan &plan, const Corpus &sample,
                  std::uint64_t seed, const Topology *topo, const std::string &source_id) {
    if (plan.sizes.empty() || plan.repetitions < 1) raise(Errc::empty_input, "empty probe plan");
    if (sample.empty()) raise(Errc::empty_input, "probe needs at least one corpus point");
    if (topo) {
        if (!topo->has_node(node.node_id) || min_cut(*topo, source_id, node.node_id) <= 0.0) {
            raise(Errc::unreachable, "no path from " + source_id + " to " + node.node_id);
        }
    }
    ProbeReport report;
    report.node_id = node.node_id;
    const Codec &codec = *node.codec_impl;
    const std::string variant = codec.default_variant();
    for (int rep = 0; rep < plan.repetitions; ++rep) {
        const DataPoint &point = sample[static_cast<std::size_t>(rep) % sample.size()];
        for (std::size_t si = 0; si < plan.sizes.size(); ++si) {
            std::uint64_t loop_seed =
                derive_seed(seed, {0x9b0beULL, static_cast<std::uint64_t>(rep), si});
            Prompt prompt = codec.encode(point, plan.sizes[si], variant, loop_seed);
            report.ledger.record(0.0, source_id, node.node_id, PayloadClass::prompt,
                                 CostBucket::probe, prompt.size_bits(),
                                 prompt.size_bpp.to_double(), rep);
            Approximation approx = codec.generate(prompt);
            report.ledger.record(0.0, node.node_id, source_id, PayloadClass::approximation,
                                 CostBucket::probe, codec.approximation_bits(point),
                                 std::nullopt, rep);
            QualitySample qs;
            qs.data_point_id = point.id;
            qs.l_p = plan.sizes[si].to_double();
            qs.quality = codec.measure(point, approx, MetricKind::deviation);
            qs.site = MeasurementSite::source;
            report.quality_samples.push_back(qs);
            report.latency_samples.push_back(node.t_generate);
        }
    }
    report.cost_bits = report.ledger.total(CostBucket::probe);
    return report;
}

Contract contract_select(std::span<const ProbeReport> reports, const KpiWeights &weights,
                         const ContractRequest &request,
                         std::span<const NodeAdvertisement> registry) {
    if (reports.empty()) raise(Errc::no_candidates, "no probe reports to score");
    double max_q = 0.0, max_lat = 0.0, max_n = 0.0;
    for (const auto &r : reports) {
        max_q = std::max(max_q, r.mean_quality());
        max_lat = std::max(max_lat, r.mean_latency());
        max_n = std::max(max_n, static_cast<double>(r.quality_samples.size()));
    }
    std::vector<std::size_t> order(reports.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return reports[a].node_id < reports[b].node_id;
    });
    double best_score = 0.0;
    const ProbeReport *best = nullptr;
    for (std::size_t idx : order) {
        const auto &r = reports[idx];
        double qn = max_q > 0.0 ? r.mean_quality() / max_q : 0.0;
        double ln = max_lat > 0.0 ? r.mean_latency() / max_lat : 0.0;
        double cn = max_n > 0.0 ? static_cast<double>(r.quality_samples.size()) / max_n : 0.0;
        double score = weights.quality * qn + weights.latency * (1.0 - ln) + weights.confidence * cn;
        if (!best || score > best_score) {
            best = &r;
            best_score = score;
        }
    }
    const NodeAdvertisement *ad = nullptr;
    for (const auto &cand : registry) {
        if (cand.node_id == best->node_id) {
            ad = &cand;
            break;
        }
    }
    if (!ad) raise(Errc::unknown_node, "winning node '" + best->node_id + "' not in registry");
    return Contract::make(ad->node_id, *ad->codec_impl, ad->codec_impl->default_variant(),
                          request.grid_bpp, request.variant, ad->t_generate,
                          request.stateful_task);
}

// --- costs -------------------------------------------------------------

Rational per_point_cost(LearningVariant variant, std::span<const Rational> grid_bits,
                        const Rational &x_bits, const Rational &xhat_bits) {
    if (grid_bits.empty()) raise(Errc::empty_input, "per_point_cost with an empty grid");
    for (const auto &g : grid_bits) {
        if (!g.is_positive()) raise(Errc::empty_input, "grid sizes must be positive");
    }
    Rational sum_lp;
    Rational min_lp = grid_bits.front();
    for (const auto &g : grid_bits) {
        sum_lp += g;
        min_lp = std::min(min_lp, g);
    }
    const Rational n_p(static_cast<std::int64_t>(grid_bits.size()));
    switch (variant) {
    case LearningVariant::source_oriented: return sum_lp + n_p * xhat_bits;
    case LearningVariant::node_augmented: return x_bits + min_lp;
    case LearningVariant::node_standard: return x_bits + sum_lp;
    case LearningVariant::destination_goal: return sum_lp + n_p * xhat_bits;
    case LearningVariant::destination_deviation: return x_bits + sum_lp + n_p * xhat_bits;
    }
    raise(Errc::unknown_variant, "per_point_cost");
}

// --- learning sessions -------------------------------------------------

namespace {

/// Message-by-message executor shared by learning, pilot, and operational
/// phases. Advances a simulated clock along the latency profile's paths
/// when one is present; control-plane messages are treated as instant.
struct Exec {
    const LearningSession &session;
    CostLedger &ledger;
    double clock = 0.0;

    const LatencyProfile *prof() const {
        return session.latency.has_value() ? &*session.latency : nullptr;
    }

    void send(const std::string &from, const std::string &to, PayloadClass cls, CostBucket bucket,
              const Rational &bits, std::optional<double> l_p, std::int64_t point) {
        if (const LatencyProfile *p = prof()) {
            const std::vector<NetEdge> *path = nullptr;
            if (from == "s" && to == session.contract.node_id) path = &p->path_sg;
            else if (from == session.contract.node_id && to == "s") path = &p->path_sg;
            else if (from == session.contract.node_id && to == "d") path = &p->path_gd;
            else if (from == "s" && to == "d") path = &p->path_sd;
            if (path && !path->empty() && cls != PayloadClass::control &&
                cls != PayloadClass::estimate) {
                clock += transfer_time(bits.to_double(), *path);
            }
        }
        ledger.record(clock, from, to, cls, bucket, bits, l_p, point);
    }

    void generation() {
        clock += session.contract.t_generate;
    }

    void prompt_encode() {
        if (const LatencyProfile *p = prof()) clock += p->t_prompt;
    }

    /// One data point of the contract's learning choreography; returns the
    /// collected quality samples and charges messages to `bucket`.
    std::vector<QualitySample> run_point(const DataPoint &point, std::int64_t point_index,
                                         CostBucket bucket, std::uint64_t point_seed) {
        const Contract &c = session.contract;
        const Codec &codec = *session.codec;
        const std::string &g = c.node_id;
        const bool forward_to_d =
            session.mode == LearningMode::real_time &&
            (c.variant == LearningVariant::source_oriented ||
             c.variant == LearningVariant::node_augmented ||
             c.variant == LearningVariant::node_standard);
        std::vector<QualitySample> samples;
        auto push_sample = [&](double l_p, const QualityValue &q, MeasurementSite site) {
            samples.push_back({point.id, l_p, q, site});
        };
        prompt_encode();
        switch (c.variant) {
        case LearningVariant::source_oriented: {
            for (std::size_t i = 0; i < c.grid_bpp.size(); ++i) {
                Prompt prompt = codec.encode(point, c.grid_bpp[i], c.codec_variant,
                                             derive_seed(point_seed, {i}));
                send("s", g, PayloadClass::prompt, bucket, prompt.size_bits(),
                     prompt.size_bpp.to_double(), point_index);
                generation();
                Approximation approx = codec.generate(prompt);
                send(g, "s", PayloadClass::approximation, bucket, codec.approximation_bits(point),
                     std::nullopt, point_index);
                if (forward_to_d) {
                    send(g, "d", PayloadClass::approximation, CostBucket::forward,
                         codec.approximation_bits(point), std::nullopt, point_index);
                }
                push_sample(c.grid_bpp[i].to_double(),
                            codec.measure(point, approx, MetricKind::deviation),
                            MeasurementSite::source);
            }
            break;
        }
        case LearningVariant::node_augmented: {
            send("s", g, PayloadClass::original, bucket, point.size_bits, std::nullopt,
                 point_index);
            std::uint64_t swap_seed = derive_seed(point_seed, {0});
            Prompt base_prompt = codec.encode(point, c.grid_bpp.front(), c.codec_variant, swap_seed);
            send("s", g, PayloadClass::prompt, bucket, base_prompt.size_bits(),
                 base_prompt.size_bpp.to_double(), point_index);
            generation();
            Approximation base = codec.generate(base_prompt);
            for (std::size_t i = 0; i < c.grid_bpp.size(); ++i) {
                // The node builds the remaining prompt sizes locally from
                // the received original; no further uplink traffic.
                Approximation approx =
                    i == 0 ? base : codec.augment(base, point, c.grid_bpp[i], c.codec_variant,
                                                  swap_seed);
                if (forward_to_d) {
                    send(g, "d", PayloadClass::approximation, CostBucket::forward,
                         codec.approximation_bits(point), std::nullopt, point_index);
                }
                push_sample(c.grid_bpp[i].to_double(),
                            codec.measure(point, approx, MetricKind::deviation),
                            MeasurementSite::node);
            }
            break;
        }
        case LearningVariant::node_standard: {
            send("s", g, PayloadClass::original, bucket, point.size_bits, std::nullopt,
                 point_index);
            for (std::size_t i = 0; i < c.grid_bpp.size(); ++i) {
                Prompt prompt = codec.encode(point, c.grid_bpp[i], c.codec_variant,
                                             derive_seed(point_seed, {i}));
                send("s", g, PayloadClass::prompt, bucket, prompt.size_bits(),
                     prompt.size_bpp.to_double(), point_index);
                generation();
                Approximation approx = codec.generate(prompt);
                if (forward_to_d) {
                    send(g, "d", PayloadClass::approximation, CostBucket::forward,
                         codec.approximation_bits(point), std::nullopt, point_index);
                }
                push_sample(c.grid_bpp[i].to_double(),
                            codec.measure(point, approx, MetricKind::deviation),
                            MeasurementSite::node);
            }
            break;
        }
        case LearningVariant::destination_goal:
        case LearningVariant::destination_deviation: {
            if (c.variant == LearningVariant::destination_deviation) {
                send("s", "d", PayloadClass::original, bucket, point.size_bits, std::nullopt,
                     point_index);
            }
            for (std::size_t i = 0; i < c.grid_bpp.size(); ++i) {
                Prompt prompt = codec.encode(point, c.grid_bpp[i], c.codec_variant,
                                             derive_seed(point_seed, {i}));
                send("s", g, PayloadClass::prompt, bucket, prompt.size_bits(),
                     prompt.size_bpp.to_double(), point_index);
                generation();
                Approximation approx = codec.generate(prompt);
                send(g, "d", PayloadClass::approximation, bucket, codec.approximation_bits(point),
                     std::nullopt, point_index);
                push_sample(c.grid_bpp[i].to_double(),
                            codec.measure(point, approx, c.metric), MeasurementSite::destination);
            }
            break;
        }
        }
        return samples;
    }
};

void validate_session(const LearningSession &session) {
    const Contract &c = session.contract;
    if (c.metric == MetricKind::goal && c.variant != LearningVariant::destination_goal) {
        raise(Errc::metric_incompatible,
              "goal-oriented quality requires destination-oriented learning");
    }
    if (c.variant == LearningVariant::destination_goal && c.stateful_task &&
        c.grid_bpp.size() > 1) {
        raise(Errc::metric_incompatible, "stateful destination task requires N_p = 1");
    }
    if (!session.codec) raise(Errc::empty_input, "session has no codec");
    if (!session.corpus || session.corpus->empty()) {
        raise(Errc::empty_input, "session has no corpus");
    }
}

std::vector<Rational> nominal_grid_bits(const LearningSession &session, const DataPoint &p0) {
    std::vector<Rational> bits;
    bits.reserve(session.contract.grid_bpp.size());
    for (std::size_t i = 0; i < session.contract.grid_bpp.size(); ++i) {
        Prompt prompt = session.codec->encode(p0, session.contract.grid_bpp[i],
                                              session.contract.codec_variant, 0);
        bits.push_back(prompt.size_bits());
    }
    return bits;
}

} // namespace

LearningOutcome run_learning(const LearningSession &session) {
    validate_session(session);
    const Contract &c = session.contract;
    const Corpus &corpus = *session.corpus;
    const DataPoint &p0 = corpus.front();

    std::vector<Rational> grid_bits = nominal_grid_bits(session, p0);
    Rational kappa = per_point_cost(c.variant, grid_bits, p0.size_bits,
                                    session.codec->approximation_bits(p0));

    std::int64_t n_target = 0;
    bool hybrid = false;
    switch (session.plan.kind) {
    case BudgetKind::fixed_count:
        n_target = session.plan.fixed_n;
        break;
    case BudgetKind::communication:
        n_target = points_from_comm_budget(session.plan.comm_bits, kappa);
        break;
    case BudgetKind::time: {
        if (!session.latency.has_value()) {
            raise(Errc::incomplete_profile, "time budget needs a latency profile");
        }
        LatencyProfile prof = *session.latency;
        prof.n_prompt_sizes = static_cast<int>(c.grid_bpp.size());
        prof.original_bits = p0.size_bits.to_double();
        prof.min_prompt_bits = grid_bits.front().to_double();
        Rational sum;
        for (const auto &b : grid_bits) sum += b;
        double avg_prompt = sum.to_double() / static_cast<double>(grid_bits.size());
        double t_l = total_latency(prof, avg_prompt,
                                   session.codec->approximation_bits(p0).to_double(), c.variant);
        n_target = points_from_time_budget(session.plan.time_seconds, Rational::from_double(t_l));
        break;
    }
    case BudgetKind::hybrid:
        hybrid = true;
        break;
    }
    if (!hybrid && n_target < 1) {
        raise(Errc::budget_exhausted, "budget plan yields no learning points");
    }
    if (c.stateful_task && !hybrid &&
        n_target > static_cast<std::int64_t>(corpus.size())) {
        raise(Errc::budget_exhausted, "stateful task cannot reuse data points; corpus too small");
    }

    LearningOutcome out;
    out.kappa_nominal = kappa;
    Exec exec{session, out.ledger};
    std::vector<QualitySample> samples;
    std::int64_t n = 0;
    while (true) {
        if (hybrid) {
            Rational spent = out.ledger.learning_cost();
            Rational projected = n == 0 ? kappa : spent / Rational(n);
            if (!hybrid_should_continue(spent, session.plan, projected)) break;
            if (c.stateful_task && n >= static_cast<std::int64_t>(corpus.size())) break;
        } else if (n >= n_target) {
            break;
        }
        const DataPoint &point = corpus[static_cast<std::size_t>(n) % corpus.size()];
        auto point_samples = exec.run_point(point, n, CostBucket::learning,
                                            derive_seed(session.seed, {0x1e42ULL,
                                                                       static_cast<std::uint64_t>(n)}));
        samples.insert(samples.end(), point_samples.begin(), point_samples.end());
        ++n;
    }
    if (n == 0) raise(Errc::budget_exhausted, "hybrid budget cannot afford a single point");
    out.n_points = n;
    out.estimate = fit_rq(samples);
    out.samples = std::move(samples);

    // Remote fitters hand the estimate back to the source.
    if (c.variant != LearningVariant::source_oriented) {
        std::string fitter =
            (c.variant == LearningVariant::node_augmented || c.variant == LearningVariant::node_standard)
                ? c.node_id
                : "d";
        out.ledger.record(exec.clock, fitter, "s", PayloadClass::estimate, CostBucket::learning,
                          session.control_message_bits);
    }
    return out;
}

// --- operational phase --------------------------------------------------

namespace {

Selection run_selection(const RQEstimate &est, const ModeConfig &mode, const OperationalConfig &cfg) {
    switch (mode.mode) {
    case CommMode::quality_constrained: return select_quality_constrained(est, mode);
    case CommMode::rate_constrained:
        if (!cfg.topo) raise(Errc::config_invalid, "rate-constrained selection needs a topology");
        return select_rate_constrained(est, mode, *cfg.topo, cfg.s_id, cfg.g_id, cfg.d_id);
    case CommMode::unconstrained: return select_unconstrained(est, mode);
    }
    raise(Errc::config_invalid, "unknown communication mode");
}

} // namespace

OperationalOutcome run_operational(const LearningSession &session, const RQEstimate &estimate,
                                   const OperationalConfig &cfg) {
    validate_session(session);
    const Contract &c = session.contract;
    const Corpus &corpus = *session.corpus;

    ModeConfig mode = cfg.mode;
    if (mode.grid.empty()) mode.grid = c.grid_double();

    OperationalOutcome out;
    out.final_estimate = estimate;
    Exec exec{session, out.ledger};

    auto slots = pilot_slots(cfg.pilots, cfg.n_points);
    Selection sel = run_selection(out.final_estimate, mode, cfg);
    out.selections.push_back(sel);

    for (std::int64_t i = 1; i <= cfg.n_points; ++i) {
        const std::int64_t point_index = i - 1;
        const DataPoint &point = corpus[static_cast<std::size_t>(point_index) % corpus.size()];
        if (slots.count(i) > 0) {
            auto pilot_samples =
                exec.run_point(point, point_index, CostBucket::pilot,
                               derive_seed(cfg.seed, {0x9107ULL, static_cast<std::uint64_t>(i)}));
            out.final_estimate =
                update_with_pilot(out.final_estimate, pilot_samples, cfg.pilots.forgetting);
            ++out.pilot_count;
            sel = run_selection(out.final_estimate, mode, cfg);
            out.selections.push_back(sel);
            continue;
        }
        if (sel.full_data()) {
            exec.send("s", "d", PayloadClass::original, CostBucket::operational, point.size_bits,
                      std::nullopt, point_index);
            out.ledger.record_saving(point_index, Rational(0));
            continue;
        }
        // Map the selected grid value back to its exact rational size.
        std::size_t grid_idx = SIZE_MAX;
        for (std::size_t k = 0; k < c.grid_bpp.size(); ++k) {
            if (c.grid_bpp[k].to_double() == *sel.chosen_l_p) grid_idx = k;
        }
        if (grid_idx == SIZE_MAX) {
            raise(Errc::grid_not_covered, "selected size is not in the contract grid");
        }
        const Rational &l_star = c.grid_bpp[grid_idx];
        Prompt prompt = session.codec->encode(
            point, l_star, c.codec_variant,
            derive_seed(cfg.seed, {0x097ULL, static_cast<std::uint64_t>(i)}));
        exec.prompt_encode();
        exec.send("s", c.node_id, PayloadClass::prompt, CostBucket::operational,
                  prompt.size_bits(), prompt.size_bpp.to_double(), point_index);
        exec.generation();
        Approximation approx = session.codec->generate(prompt);
        (void)approx;
        exec.send(c.node_id, "d", PayloadClass::approximation, CostBucket::operational,
                  session.codec->approximation_bits(point), std::nullopt, point_index);
        // Savings count the avoided source uplink: original minus L_P* times
        // the pixel count.
        Rational pixels(point.payload.pixel_count());
        out.ledger.record_saving(point_index, point.size_bits - l_star * pixels);
    }
    out.savings_total = out.ledger.savings_total();
    return out;
}

} // namespace genrelay
