#pragma once

#include "genrelay/budget.hpp"
#include "genrelay/core.hpp"
#include "genrelay/ledger.hpp"
#include "genrelay/mode_select.hpp"
#include "genrelay/rq_estimate.hpp"
#include "genrelay/topology.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genrelay {

enum class DiscoveryStyle { agent_card, registry_entry };

/// Abstract stand-in for MCP/A2A node metadata. Agent-card entries carry
/// their capability metadata up front; registry entries require one extra
/// control round-trip to fetch it.
struct NodeAdvertisement {
    std::string node_id;
    DiscoveryStyle style = DiscoveryStyle::agent_card;
    std::vector<std::string> modalities;
    std::string location;
    double t_generate = 0.0;
    CodecDescriptor codec;
    std::shared_ptr<const Codec> codec_impl; // simulator-side implementation
    std::optional<RQEstimate> claimed_rq;
};

struct DiscoveryQuery {
    std::optional<std::string> modality;
    std::optional<std::string> location;
};

/// Registry scan: returns advertisements matching every query predicate,
/// ordered by node id. When a ledger is given, the control chatter is
/// logged (0 bits by default; one extra round-trip for registry entries).
std::vector<NodeAdvertisement> discover(std::span<const NodeAdvertisement> registry,
                                        const DiscoveryQuery &query,
                                        CostLedger *ledger = nullptr);

std::vector<NodeAdvertisement> load_registry_json(const std::string &path);

/// Agreement between the source and one GenAI node.
struct Contract {
    std::string node_id;
    std::string codec_variant;
    std::vector<Rational> grid_bpp; // P_Np, strictly increasing
    LearningVariant variant = LearningVariant::source_oriented;
    MetricKind metric = MetricKind::deviation;
    double t_generate = 0.0;
    bool stateful_task = false;

    std::size_t n_prompt_sizes() const { return grid_bpp.size(); }
    std::vector<double> grid_double() const;

    /// Validates grid/codec/metric compatibility and builds the contract.
    static Contract make(std::string node_id, const Codec &codec, std::string codec_variant,
                         std::vector<Rational> grid_bpp, LearningVariant variant,
                         double t_generate, bool stateful_task = false);
};

MetricKind metric_for_variant(LearningVariant v);

struct ProbePlan {
    std::vector<Rational> sizes;
    int repetitions = 1;
};

struct ProbeReport {
    std::string node_id;
    std::vector<double> latency_samples;
    std::vector<QualitySample> quality_samples;
    Rational cost_bits;
    CostLedger ledger;

    double mean_quality() const;
    double mean_latency() const;
};

/// Runs mini source-oriented learning loops against a candidate node and
/// aggregates latency and quality samples. Probe traffic is charged to its
/// own bucket, identical in shape to the source-oriented cost rule.
ProbeReport probe(const NodeAdvertisement &node, const ProbePlan &plan, const Corpus &sample,
                  std::uint64_t seed, const Topology *topo = nullptr,
                  const std::string &source_id = "s");

struct KpiWeights {
    double quality = 1.0;
    double latency = 0.0;
    double confidence = 0.0;
};

struct ContractRequest {
    std::vector<Rational> grid_bpp;
    LearningVariant variant = LearningVariant::source_oriented;
    bool stateful_task = false;
};

/// Scores probed nodes by weighted normalized KPIs (quality up, latency
/// down, sample count up) and contracts the best one; ties go to the
/// lowest node id.
Contract contract_select(std::span<const ProbeReport> reports, const KpiWeights &weights,
                         const ContractRequest &request,
                         std::span<const NodeAdvertisement> registry);

/// Communication cost per data point for each learning option:
///   source:                sum(L_p + |xhat|)
///   node (augmented):      |x| + L_min
///   node (standard):       |x| + sum(L_p)
///   destination (goal):    sum(L_p + |xhat|)
///   destination (dev):     |x| + sum(L_p + |xhat|)
Rational per_point_cost(LearningVariant variant, std::span<const Rational> grid_bits,
                        const Rational &x_bits, const Rational &xhat_bits);

enum class LearningMode { pre_transmission, real_time };

struct LearningSession {
    Contract contract;
    std::shared_ptr<const Codec> codec;
    const Corpus *corpus = nullptr;
    BudgetPlan plan;
    LearningMode mode = LearningMode::pre_transmission;
    std::optional<LatencyProfile> latency;
    std::uint64_t seed = 0;
    // When enabled, control messages (estimate returns, discovery chatter)
    // are charged at this size instead of the default 0 bits.
    Rational control_message_bits = Rational(0);
};

struct LearningOutcome {
    RQEstimate estimate;
    CostLedger ledger;
    std::int64_t n_points = 0;       // N_L actually processed
    Rational kappa_nominal;          // per-point cost of the first point
    std::vector<QualitySample> samples;
};

/// Executes the contract's learning variant message-by-message over the
/// corpus, measuring quality at the variant's site and fitting the
/// rate-quality estimate at the variant's fitter.
LearningOutcome run_learning(const LearningSession &session);

struct OperationalConfig {
    ModeConfig mode;
    PilotSchedule pilots;
    std::int64_t n_points = 0; // N_C
    std::uint64_t seed = 0;
    // Rate-constrained selection needs the network and endpoints.
    const Topology *topo = nullptr;
    std::string s_id = "s", g_id = "g", d_id = "d";
};

struct OperationalOutcome {
    CostLedger ledger;
    Rational savings_total; // W
    RQEstimate final_estimate;
    std::int64_t pilot_count = 0;
    std::vector<Selection> selections; // selection after each pilot refresh
};

/// Post-learning phase: per point either a pilot learning loop (which
/// refreshes the estimate) or a prompt transmission at the currently
/// selected size, with per-point savings w = |x_n| - L_P* * pixels.
OperationalOutcome run_operational(const LearningSession &session, const RQEstimate &estimate,
                                   const OperationalConfig &cfg);

} // namespace genrelay
