#include "genrelay/protocol.hpp"

#include "genrelay/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace genrelay;

namespace {

std::shared_ptr<SyntheticCodec> paper_sized_codec(double sigma0 = 0.0) {
    // Nominal pixel count of one megapixel makes bpp values read as Mbits.
    SyntheticRQLaw law{10.0, 1.0, sigma0, 0.0};
    return std::make_shared<SyntheticCodec>(law, Rational::from_decimal("0.01"), Rational(64),
                                            1000000, Rational::from_decimal("1.482"));
}

NodeAdvertisement make_advert(std::string id, double t_g, std::vector<std::string> modalities,
                              std::string location,
                              DiscoveryStyle style = DiscoveryStyle::agent_card) {
    NodeAdvertisement ad;
    ad.node_id = std::move(id);
    ad.style = style;
    ad.modalities = std::move(modalities);
    ad.location = std::move(location);
    ad.t_generate = t_g;
    ad.codec_impl = paper_sized_codec();
    ad.codec = ad.codec_impl->descriptor();
    return ad;
}

LearningSession make_session(std::shared_ptr<const Codec> codec, const Corpus *corpus,
                             std::vector<Rational> grid, LearningVariant variant,
                             std::int64_t n_points, std::uint64_t seed = 42) {
    LearningSession s;
    s.contract = Contract::make("g", *codec, codec->default_variant(), std::move(grid), variant,
                                0.0, false);
    s.codec = std::move(codec);
    s.corpus = corpus;
    s.plan.kind = BudgetKind::fixed_count;
    s.plan.fixed_n = n_points;
    s.seed = seed;
    return s;
}

std::int64_t count_messages(const CostLedger &ledger, PayloadClass cls, CostBucket bucket,
                            const std::string &to = "") {
    std::int64_t n = 0;
    for (const auto &r : ledger.records()) {
        if (r.cls == cls && r.bucket == bucket && (to.empty() || r.to == to)) ++n;
    }
    return n;
}

} // namespace

TEST_CASE("discover filters and orders by node id") {
    CHECK(discover(std::vector<NodeAdvertisement>{}, {}).empty());

    std::vector<NodeAdvertisement> registry = {
        make_advert("n3", 1.0, {"image"}, "eu"),
        make_advert("n1", 1.0, {"image", "audio"}, "us"),
        make_advert("n2", 1.0, {"audio"}, "eu"),
    };
    DiscoveryQuery q;
    q.modality = "image";
    auto hits = discover(registry, q);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].node_id == "n1");
    CHECK(hits[1].node_id == "n3");
}

TEST_CASE("discover equals a brute-force predicate scan on 50 random advertisements") {
    Rng rng(2718);
    std::vector<NodeAdvertisement> registry;
    const char *mods[] = {"image", "audio", "video"};
    const char *locs[] = {"eu", "us", "apac"};
    for (int i = 0; i < 50; ++i) {
        std::vector<std::string> m = {mods[rng.uniform_int(0, 2)]};
        if (rng.uniform01() < 0.4) m.push_back(mods[rng.uniform_int(0, 2)]);
        registry.push_back(make_advert("node" + std::to_string(10 + i), rng.uniform01(), m,
                                       locs[rng.uniform_int(0, 2)]));
    }
    DiscoveryQuery q;
    q.modality = "image";
    q.location = "eu";
    auto hits = discover(registry, q);
    std::vector<std::string> expected;
    for (const auto &ad : registry) {
        bool has_mod = std::find(ad.modalities.begin(), ad.modalities.end(), "image") !=
                       ad.modalities.end();
        if (has_mod && ad.location == "eu") expected.push_back(ad.node_id);
    }
    std::sort(expected.begin(), expected.end());
    REQUIRE(hits.size() == expected.size());
    for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i].node_id == expected[i]);
}

TEST_CASE("probe message counts and cost follow the source-oriented rule") {
    auto codec = paper_sized_codec();
    Corpus corpus = codec->nominal_corpus(3);
    NodeAdvertisement ad = make_advert("g", 0.7, {"synthetic"}, "eu");

    ProbePlan one{{Rational::from_decimal("0.5")}, 1};
    ProbeReport r1 = probe(ad, one, corpus, 9);
    CHECK(count_messages(r1.ledger, PayloadClass::prompt, CostBucket::probe) == 1);
    CHECK(count_messages(r1.ledger, PayloadClass::approximation, CostBucket::probe) == 1);
    CHECK(r1.cost_bits == Rational(500000) + Rational(1482000));

    ProbePlan three{{Rational::from_decimal("0.5")}, 3};
    ProbeReport r3 = probe(ad, three, corpus, 9);
    CHECK(r3.cost_bits == Rational(3) * (Rational(500000) + Rational(1482000)));
    REQUIRE(r3.quality_samples.size() == 3);

    // deterministic zero-noise codec: identical quality at every repetition
    CHECK(r3.quality_samples[0].quality.value == r3.quality_samples[1].quality.value);
    CHECK(r3.quality_samples[1].quality.value == r3.quality_samples[2].quality.value);
}

TEST_CASE("probe unreachable node") {
    auto codec = paper_sized_codec();
    Corpus corpus = codec->nominal_corpus(1);
    NodeAdvertisement ad = make_advert("island", 0.7, {"synthetic"}, "eu");
    Topology topo({{"s", NodeRole::source}, {"island", NodeRole::genai}}, {});
    ProbePlan plan{{Rational(1)}, 1};
    CHECK_THROWS_AS(probe(ad, plan, corpus, 1, &topo), Error);
    CHECK_THROWS_AS(probe(ad, ProbePlan{{}, 1}, corpus, 1), Error);
}

TEST_CASE("contract_select basics and scoring oracle") {
    auto codec = paper_sized_codec(0.4);
    Corpus corpus = codec->nominal_corpus(2);
    ContractRequest request;
    request.grid_bpp = {Rational::from_decimal("0.5"), Rational(1)};

    std::vector<NodeAdvertisement> registry = {
        make_advert("a", 2.0, {"synthetic"}, "eu"),
        make_advert("b", 0.5, {"synthetic"}, "eu"),
    };
    ProbePlan plan{{Rational::from_decimal("0.5")}, 2};
    std::vector<ProbeReport> reports = {probe(registry[0], plan, corpus, 5),
                                        probe(registry[1], plan, corpus, 5)};

    // single candidate wins regardless of weights
    std::vector<ProbeReport> solo = {reports[0]};
    Contract c_solo = contract_select(solo, {0, 0, 0}, request, registry);
    CHECK(c_solo.node_id == "a");

    // identical except latency: positive latency weight prefers the faster
    KpiWeights lat_only{0.0, 1.0, 0.0};
    Contract c_fast = contract_select(reports, lat_only, request, registry);
    CHECK(c_fast.node_id == "b");
    CHECK(c_fast.t_generate == 0.5);

    CHECK_THROWS_AS(contract_select(std::vector<ProbeReport>{}, lat_only, request, registry),
                    Error);
}

TEST_CASE("contract_select equals the brute-force scoring scan on 10 random reports") {
    Rng rng(515);
    auto codec = paper_sized_codec(0.8);
    Corpus corpus = codec->nominal_corpus(4);
    std::vector<NodeAdvertisement> registry;
    std::vector<ProbeReport> reports;
    for (int i = 0; i < 10; ++i) {
        registry.push_back(
            make_advert("node" + std::to_string(i), 0.1 + rng.uniform01() * 2.0, {"synthetic"}, "eu"));
        ProbePlan plan{{Rational::from_decimal("0.5")},
                       static_cast<int>(rng.uniform_int(1, 4))};
        reports.push_back(probe(registry.back(), plan, corpus,
                                derive_seed(99, {static_cast<std::uint64_t>(i)})));
    }
    KpiWeights weights{0.6, 0.3, 0.1};
    ContractRequest request;
    request.grid_bpp = {Rational::from_decimal("0.5")};
    Contract chosen = contract_select(reports, weights, request, registry);

    double max_q = 0, max_l = 0, max_n = 0;
    for (const auto &r : reports) {
        max_q = std::max(max_q, r.mean_quality());
        max_l = std::max(max_l, r.mean_latency());
        max_n = std::max(max_n, double(r.quality_samples.size()));
    }
    std::string best;
    double best_score = -1;
    for (const auto &r : reports) {
        double score = weights.quality * (max_q > 0 ? r.mean_quality() / max_q : 0) +
                       weights.latency * (1.0 - (max_l > 0 ? r.mean_latency() / max_l : 0)) +
                       weights.confidence * (max_n > 0 ? r.quality_samples.size() / max_n : 0);
        if (score > best_score || (score == best_score && r.node_id < best)) {
            best = r.node_id;
            best_score = score;
        }
    }
    CHECK(chosen.node_id == best);
}

TEST_CASE("per-point cost formulas at the published sizes") {
    const Rational x = Rational::from_decimal("1.482");
    const Rational xhat = Rational::from_decimal("1.482");
    const Rational l_min = Rational::from_decimal("0.092");
    const Rational l_avg = Rational::from_decimal("0.787");

    std::vector<Rational> g1 = {l_avg};
    CHECK(per_point_cost(LearningVariant::source_oriented, g1, x, xhat) ==
          Rational::from_decimal("2.269"));

    std::vector<Rational> g_aug = {l_min, l_avg};
    CHECK(per_point_cost(LearningVariant::node_augmented, g_aug, x, xhat) ==
          Rational::from_decimal("1.574"));

    std::vector<Rational> g3 = {l_avg, l_avg, l_avg};
    CHECK(per_point_cost(LearningVariant::node_standard, g3, x, xhat) ==
          Rational::from_decimal("3.843"));
    CHECK(per_point_cost(LearningVariant::destination_goal, g3, x, xhat) ==
          Rational(3) * Rational::from_decimal("2.269"));
    CHECK(per_point_cost(LearningVariant::destination_deviation, g3, x, xhat) ==
          Rational::from_decimal("1.482") + Rational(3) * Rational::from_decimal("2.269"));

    CHECK_THROWS_AS(per_point_cost(LearningVariant::source_oriented, std::vector<Rational>{}, x, xhat),
                    Error);
}

TEST_CASE("variant cost ordering at the published sizes for N_p >= 2") {
    const Rational x = Rational::from_decimal("1.482");
    const Rational l_min = Rational::from_decimal("0.092");
    const Rational l_avg = Rational::from_decimal("0.787");
    for (int np = 2; np <= 5; ++np) {
        std::vector<Rational> grid(static_cast<std::size_t>(np), l_avg);
        std::vector<Rational> grid_aug = grid;
        grid_aug[0] = l_min;
        Rational aug = per_point_cost(LearningVariant::node_augmented, grid_aug, x, x);
        Rational std_ = per_point_cost(LearningVariant::node_standard, grid, x, x);
        Rational src = per_point_cost(LearningVariant::source_oriented, grid, x, x);
        Rational goal = per_point_cost(LearningVariant::destination_goal, grid, x, x);
        Rational dev = per_point_cost(LearningVariant::destination_deviation, grid, x, x);
        CHECK(aug < std_);
        CHECK(std_ < src);
        CHECK(src == goal);
        CHECK(goal < dev);
    }
}

TEST_CASE("source-oriented learning reproduces the published K_L arithmetic") {
    auto codec = paper_sized_codec();
    Corpus corpus = codec->nominal_corpus(4);
    // three sizes averaging 0.787 Mb
    std::vector<Rational> grid = {Rational::from_decimal("0.4"), Rational::from_decimal("0.787"),
                                  Rational::from_decimal("1.174")};
    LearningSession session =
        make_session(codec, &corpus, grid, LearningVariant::source_oriented, 2);
    LearningOutcome out = run_learning(session);
    CHECK(out.n_points == 2);
    CHECK(out.ledger.learning_cost() == Rational::from_decimal("13.614") * Rational(1000000));
    CHECK(out.kappa_nominal == Rational(3) * Rational::from_decimal("2.269") * Rational(1000000));
    // pre-transmission: nothing reaches d during learning
    CHECK(count_messages(out.ledger, PayloadClass::approximation, CostBucket::learning, "d") == 0);
    CHECK(count_messages(out.ledger, PayloadClass::approximation, CostBucket::forward, "d") == 0);
}

TEST_CASE("node-augmented learning: originals plus minimal prompts only") {
    auto codec = paper_sized_codec();
    Corpus corpus = codec->nominal_corpus(5);
    std::vector<Rational> grid = {Rational::from_decimal("0.092"), Rational::from_decimal("0.787"),
                                  Rational::from_decimal("1.482")};
    LearningSession session =
        make_session(codec, &corpus, grid, LearningVariant::node_augmented, 5);
    LearningOutcome out = run_learning(session);
    CHECK(out.ledger.learning_cost() == Rational::from_decimal("7.870") * Rational(1000000));
    CHECK(count_messages(out.ledger, PayloadClass::original, CostBucket::learning) == 5);
    CHECK(count_messages(out.ledger, PayloadClass::prompt, CostBucket::learning) == 5);
    for (const auto &r : out.ledger.records()) {
        if (r.cls == PayloadClass::prompt) CHECK(r.size_bits == Rational(92000));
    }
    // estimate fitted at the node comes back to the source
    CHECK(count_messages(out.ledger, PayloadClass::estimate, CostBucket::learning, "s") == 1);
    // all three grid points were measured despite one uplinked prompt
    CHECK(out.estimate.grid.size() == 3);
}

TEST_CASE("destination variants deliver approximations to d during learning") {
    auto codec = ToyCodec::standard();
    Corpus corpus = make_synthetic_corpus(6, 16, 16, 8, 321);
    std::vector<Rational> grid = {Rational(2), Rational(4)};

    LearningSession goal_session =
        make_session(codec, &corpus, grid, LearningVariant::destination_goal, 3);
    LearningOutcome goal_out = run_learning(goal_session);
    CHECK(count_messages(goal_out.ledger, PayloadClass::approximation, CostBucket::learning, "d") ==
          3 * 2);
    CHECK(count_messages(goal_out.ledger, PayloadClass::original, CostBucket::learning) == 0);
    for (const auto &s : goal_out.samples) CHECK(s.site == MeasurementSite::destination);
    for (const auto &s : goal_out.samples) CHECK(s.quality.kind == MetricKind::goal);

    LearningSession dev_session =
        make_session(codec, &corpus, grid, LearningVariant::destination_deviation, 3);
    LearningOutcome dev_out = run_learning(dev_session);
    CHECK(count_messages(dev_out.ledger, PayloadClass::original, CostBucket::learning, "d") == 3);
    CHECK(count_messages(dev_out.ledger, PayloadClass::approximation, CostBucket::learning, "d") ==
          3 * 2);
}

TEST_CASE("stateful destination task rejects multiple prompt sizes") {
    auto codec = ToyCodec::standard();
    std::vector<Rational> grid = {Rational(2), Rational(4)};
    CHECK_THROWS_AS(Contract::make("g", *codec, "ds2", grid, LearningVariant::destination_goal,
                                   0.0, /*stateful=*/true),
                    Error);
    // N_p = 1 is allowed
    Contract ok = Contract::make("g", *codec, "ds2", {Rational(2)},
                                 LearningVariant::destination_goal, 0.0, true);
    CHECK(ok.stateful_task);
}

TEST_CASE("goal metric cannot pair with source or node measurement") {
    auto codec = ToyCodec::standard();
    Corpus corpus = make_synthetic_corpus(2, 8, 8, 8, 1);
    LearningSession s = make_session(codec, &corpus, {Rational(2)},
                                     LearningVariant::source_oriented, 1);
    s.contract.metric = MetricKind::goal; // bypassing make() on purpose
    CHECK_THROWS_AS(run_learning(s), Error);
}

TEST_CASE("real-time mode forwards every learning approximation to d") {
    auto codec = ToyCodec::standard();
    Corpus corpus = make_synthetic_corpus(4, 8, 8, 8, 77);
    std::vector<Rational> grid = {Rational(2), Rational(4), Rational(6)};
    LearningSession session =
        make_session(codec, &corpus, grid, LearningVariant::source_oriented, 4);
    session.mode = LearningMode::real_time;
    LearningOutcome out = run_learning(session);
    CHECK(count_messages(out.ledger, PayloadClass::approximation, CostBucket::forward, "d") ==
          4 * 3);
    // forwards do not pollute K_L
    CHECK(out.ledger.learning_cost() == Rational(4) * out.kappa_nominal);
}

TEST_CASE("K_L equals N_L * kappa exactly on a homogeneous corpus for every variant") {
    auto codec = ToyCodec::standard();
    Corpus corpus = make_synthetic_corpus(7, 16, 16, 8, 4
    );
    std::vector<Rational> grid = {Rational(2), Rational(3), Rational(5)};
    for (LearningVariant v :
         {LearningVariant::source_oriented, LearningVariant::node_augmented,
          LearningVariant::node_standard, LearningVariant::destination_goal,
          LearningVariant::destination_deviation}) {
        LearningSession session = make_session(codec, &corpus, grid, v, 7);
        LearningOutcome out = run_learning(session);
        CHECK(out.ledger.learning_cost() == Rational(7) * out.kappa_nominal);
        auto per_point = out.ledger.per_point_costs(CostBucket::learning);
        REQUIRE(per_point.size() == 7);
        Rational sum;
        for (const auto &c : per_point) sum += c;
        CHECK(sum == out.ledger.learning_cost());
    }
}

TEST_CASE("same seed gives byte-identical traces; augmentation reacts to the seed") {
    auto codec = ToyCodec::standard();
    Corpus corpus = make_synthetic_corpus(5, 16, 16, 8, 11);
    std::vector<Rational> grid = {Rational::from_decimal("2.5"), Rational(5)};
    LearningSession a = make_session(codec, &corpus, grid, LearningVariant::source_oriented, 5, 99);
    LearningSession b = make_session(codec, &corpus, grid, LearningVariant::source_oriented, 5, 99);
    LearningOutcome out_a = run_learning(a);
    LearningOutcome out_b = run_learning(b);
    CHECK(out_a.ledger.trace_ndjson() == out_b.ledger.trace_ndjson());
    CHECK(rq_to_json(out_a.estimate) == rq_to_json(out_b.estimate));

    LearningSession c = make_session(codec, &corpus, grid, LearningVariant::source_oriented, 5, 100);
    LearningOutcome out_c = run_learning(c);
    // different swap indices change measured quality, hence the estimate
    CHECK(rq_to_json(out_a.estimate) != rq_to_json(out_c.estimate));
}

TEST_CASE("communication and hybrid budgets bound the session") {
    auto codec = paper_sized_codec();
    Corpus corpus = codec->nominal_corpus(64);
    std::vector<Rational> grid = {Rational::from_decimal("0.4"), Rational::from_decimal("0.787"),
                                  Rational::from_decimal("1.174")};

    LearningSession comm = make_session(codec, &corpus, grid, LearningVariant::source_oriented, 0);
    comm.plan.kind = BudgetKind::communication;
    comm.plan.comm_bits = Rational::from_decimal("20.0") * Rational(1000000);
    LearningOutcome out = run_learning(comm);
    CHECK(out.n_points == 2); // floor(20 / 6.807)
    CHECK(out.ledger.learning_cost() <= comm.plan.comm_bits);

    LearningSession tiny = make_session(codec, &corpus, grid, LearningVariant::source_oriented, 0);
    tiny.plan.kind = BudgetKind::communication;
    tiny.plan.comm_bits = Rational(1000);
    CHECK_THROWS_AS(run_learning(tiny), Error);

    LearningSession hybrid = make_session(codec, &corpus, grid, LearningVariant::source_oriented, 0);
    hybrid.plan.kind = BudgetKind::hybrid;
    hybrid.plan.comm_bits = Rational(21000000);
    LearningOutcome hout = run_learning(hybrid);
    CHECK(hout.n_points == 3); // homogeneous cost 6.807 per point
    CHECK(hout.ledger.learning_cost() <= hybrid.plan.comm_bits + hout.kappa_nominal);
}

TEST_CASE("time budget converts through the latency model") {
    auto codec = paper_sized_codec();
    Corpus corpus = codec->nominal_corpus(16);
    std::vector<Rational> grid = {Rational::from_decimal("0.787")};
    LearningSession session = make_session(codec, &corpus, grid,
                                           LearningVariant::source_oriented, 0);
    session.plan.kind = BudgetKind::time;
    session.plan.time_seconds = Rational(10);
    CHECK_THROWS_AS(run_learning(session), Error); // profile missing

    LatencyProfile prof;
    prof.t_prompt = 0.1;
    prof.t_generate = 0.5;
    NetEdge link;
    link.from = "s";
    link.to = "g";
    link.capacity = 1e6;
    link.rate = 1e6;
    prof.path_sg = {link};
    session.latency = prof;
    // T_L = 0.1 + (0.787 + 1.482) + 0.5 = 2.869 s -> floor(10 / 2.869) = 3
    LearningOutcome out = run_learning(session);
    CHECK(out.n_points == 3);
}

TEST_CASE("operational phase: savings arithmetic at published sizes") {
    SyntheticRQLaw law{10.0, 2.0, 0.0, 0.0};
    auto codec = std::make_shared<SyntheticCodec>(law, Rational::from_decimal("0.01"), Rational(64),
                                                  307200, Rational::from_decimal("4.824"));
    Corpus corpus = codec->nominal_corpus(10);
    std::vector<Rational> grid = {Rational::from_decimal("0.787"), Rational(2)};
    LearningSession session = make_session(codec, &corpus, grid,
                                           LearningVariant::source_oriented, 4);
    LearningOutcome learned = run_learning(session);

    OperationalConfig op;
    op.mode.mode = CommMode::quality_constrained;
    op.mode.q_min = 5.0; // law mean at 0.787 is 10(1-e^-1.574) ~ 7.9, zero variance
    op.mode.alpha_star = 0.9;
    op.n_points = 10;
    op.seed = 7;
    OperationalOutcome out = run_operational(session, learned.estimate, op);
    REQUIRE(out.selections.front().chosen_l_p.value() == doctest::Approx(0.787));
    // W = 10 * (4.824 - 0.787) * 307200 bits
    CHECK(out.savings_total == Rational(10) * (Rational::from_decimal("4.824") -
                                               Rational::from_decimal("0.787")) *
                                   Rational(307200));
    CHECK(out.ledger.savings().size() == 10);
    CHECK(out.pilot_count == 0);
}

TEST_CASE("full-data fallback transmits originals with zero savings") {
    auto codec = paper_sized_codec();
    Corpus corpus = codec->nominal_corpus(4);
    std::vector<Rational> grid = {Rational::from_decimal("0.5"), Rational(1)};
    LearningSession session = make_session(codec, &corpus, grid,
                                           LearningVariant::source_oriented, 3);
    LearningOutcome learned = run_learning(session);
    OperationalConfig op;
    op.mode.mode = CommMode::quality_constrained;
    op.mode.q_min = 100.0; // unreachable: q_max is 10
    op.n_points = 4;
    OperationalOutcome out = run_operational(session, learned.estimate, op);
    CHECK(out.selections.front().full_data());
    CHECK(out.savings_total == Rational(0));
    CHECK(count_messages(out.ledger, PayloadClass::original, CostBucket::operational, "d") == 4);
}

TEST_CASE("pilot slots run learning loops and update the estimate") {
    auto codec = paper_sized_codec(0.5);
    Corpus corpus = codec->nominal_corpus(12);
    std::vector<Rational> grid = {Rational::from_decimal("0.787"), Rational(2)};
    LearningSession session = make_session(codec, &corpus, grid,
                                           LearningVariant::source_oriented, 6);
    LearningOutcome learned = run_learning(session);

    OperationalConfig op;
    op.mode.mode = CommMode::quality_constrained;
    op.mode.q_min = 1.0;
    op.mode.alpha_star = 0.9;
    op.n_points = 10;
    op.pilots.policy = PilotPolicy::periodic;
    op.pilots.period = 5;
    op.pilots.forgetting = 1.0;
    op.seed = 17;
    OperationalOutcome out = run_operational(session, learned.estimate, op);
    CHECK(out.pilot_count == 2);
    CHECK(out.ledger.savings().size() == 8);
    CHECK(out.ledger.total(CostBucket::pilot) == Rational(2) * learned.kappa_nominal);
    // pilots increase the effective sample mass at every grid point
    for (std::size_t j = 0; j < out.final_estimate.grid.size(); ++j) {
        CHECK(out.final_estimate.stats[j].weight > learned.estimate.stats[j].weight);
    }
}

TEST_CASE("rate-constrained operation picks through the network model") {
    auto codec = paper_sized_codec();
    Corpus corpus = codec->nominal_corpus(4);
    std::vector<Rational> grid = {Rational(1), Rational(2), Rational(4)};
    LearningSession session = make_session(codec, &corpus, grid,
                                           LearningVariant::source_oriented, 3);
    LearningOutcome learned = run_learning(session);

    OperationalConfig op;
    op.mode.mode = CommMode::rate_constrained;
    op.mode.lambda = 1.0;
    op.mode.l_bits = 10.0;
    op.mode.w_weight = 0.0;
    op.mode.grid = {1, 2, 4};
    op.n_points = 2;
    Topology topo = Topology::four_role(1, 1, 100, 100, 0, 0);
    op.topo = &topo;
    OperationalOutcome out = run_operational(session, learned.estimate, op);
    CHECK(out.selections.front().chosen_l_p.value() == 1.0);
}
