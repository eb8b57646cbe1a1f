#pragma once

#include "genrelay/errors.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace genrelay {

enum class NodeRole { source, destination, relay, genai };

struct NetNode {
    std::string id;
    NodeRole role = NodeRole::relay;
};

/// Directed edge representing a single- or multi-hop path segment.
/// capacity bounds feasibility checks; rate drives timing; flow is the
/// currently assigned traffic. Invariant: 0 <= flow <= rate <= capacity.
struct NetEdge {
    std::string from;
    std::string to;
    double capacity = 0.0;     // c_ij, bits/second
    double rate = 0.0;         // R_ij, bits/second
    double flow = 0.0;         // f_ij, bits/second
    double propagation = 0.0;  // seconds
};

/// Immutable network snapshot. Flow updates return a new snapshot.
class Topology {
public:
    Topology() = default;
    Topology(std::vector<NetNode> nodes, std::vector<NetEdge> edges);

    /// The paper's four-role diagram (source, relay, genai, destination)
    /// from six directed path capacities; rate defaults to capacity.
    static Topology four_role(double c_sr, double c_rd, double c_sg, double c_gd,
                              double c_rg, double c_gr);

    static Topology from_json_file(const std::string &path);
    static Topology from_json_text(const std::string &text);

    const std::vector<NetNode> &nodes() const { return nodes_; }
    const std::vector<NetEdge> &edges() const { return edges_; }

    std::size_t node_index(const std::string &id) const; // raises UnknownNode
    bool has_node(const std::string &id) const;
    std::optional<std::string> node_with_role(NodeRole role) const;

    /// New snapshot with the given edge's flow replaced.
    Topology with_flow(const std::string &from, const std::string &to, double flow) const;

private:
    std::vector<NetNode> nodes_;
    std::vector<NetEdge> edges_;
};

/// Max-flow/min-cut value between two nodes over edge capacities,
/// via BFS augmenting paths. 0 when disconnected.
double min_cut(const Topology &topo, const std::string &a, const std::string &b);

/// Bottleneck of the two-segment relay route: min of the s->g and g->d cuts.
double path_capacity(const Topology &topo, const std::string &s, const std::string &g,
                     const std::string &d);

/// Outflow minus inflow of a node (y_i); negative at a relay means the
/// assigned flows overload it.
double divergence(const Topology &topo, const std::string &node);

/// Store-and-forward transfer time of size_bits along an explicit edge
/// sequence: sum of size/rate + propagation per hop.
double transfer_time(double size_bits, const std::vector<NetEdge> &path);

enum class LearningVariant {
    source_oriented,
    node_augmented,
    node_standard,
    destination_goal,
    destination_deviation,
};

const char *variant_name(LearningVariant v);
LearningVariant variant_from_name(const std::string &name); // raises UnknownVariant

/// Per-data-point latency inputs: processing times plus the path segments
/// and message counts that determine T_C for each learning variant.
struct LatencyProfile {
    double t_prompt = 0.0;    // T_P, prompt encoding at s
    double t_generate = 0.0;  // T_G, generation at g
    std::vector<NetEdge> path_sg;
    std::vector<NetEdge> path_gd;
    std::vector<NetEdge> path_sd;
    int n_prompt_sizes = 1;      // N_p
    double original_bits = 0.0;  // |x|
    double min_prompt_bits = 0.0;
};

/// T_L = T_P + T_C + T_G where T_C sums transfer times over exactly the
/// messages the variant exchanges per data point.
double total_latency(const LatencyProfile &prof, double prompt_bits, double generated_bits,
                     LearningVariant variant);

} // namespace genrelay
