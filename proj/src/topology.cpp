#include "genrelay/topology.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

using nlohmann::json;

namespace genrelay {

namespace {

constexpr double kFlowEps = 1e-12;

NodeRole role_from_name(const std::string &name) {
    if (name == "source") return NodeRole::source;
    if (name == "destination") return NodeRole::destination;
    if (name == "relay") return NodeRole::relay;
    if (name == "genai") return NodeRole::genai;
    raise(Errc::config_invalid, "unknown node role '" + name + "'");
}

} // namespace

Topology::Topology(std::vector<NetNode> nodes, std::vector<NetEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    int sources = 0, destinations = 0;
    for (const auto &n : nodes_) {
        if (n.role == NodeRole::source) ++sources;
        if (n.role == NodeRole::destination) ++destinations;
    }
    if (sources > 1 || destinations > 1) {
        raise(Errc::config_invalid, "source and destination roles must be unique");
    }
    for (auto &e : edges_) {
        node_index(e.from);
        node_index(e.to);
        if (e.rate == 0.0 && e.capacity > 0.0) e.rate = e.capacity;
        if (!(e.flow >= -kFlowEps && e.flow <= e.rate + kFlowEps && e.rate <= e.capacity + kFlowEps)) {
            raise(Errc::config_invalid, "edge " + e.from + "->" + e.to +
                                            " violates 0 <= flow <= rate <= capacity");
        }
    }
}

Topology Topology::four_role(double c_sr, double c_rd, double c_sg, double c_gd, double c_rg,
                             double c_gr) {
    std::vector<NetNode> nodes = {{"s", NodeRole::source},
                                  {"r", NodeRole::relay},
                                  {"g", NodeRole::genai},
                                  {"d", NodeRole::destination}};
    auto edge = [](std::string a, std::string b, double c) {
        NetEdge e;
        e.from = std::move(a);
        e.to = std::move(b);
        e.capacity = c;
        e.rate = c;
        return e;
    };
    std::vector<NetEdge> edges = {edge("s", "r", c_sr), edge("r", "d", c_rd),
                                  edge("s", "g", c_sg), edge("g", "d", c_gd),
                                  edge("r", "g", c_rg), edge("g", "r", c_gr)};
    return Topology(std::move(nodes), std::move(edges));
}

std::size_t Topology::node_index(const std::string &id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id == id) return i;
    }
    raise(Errc::unknown_node, "node '" + id + "'");
}

bool Topology::has_node(const std::string &id) const {
    return std::any_of(nodes_.begin(), nodes_.end(), [&](const NetNode &n) { return n.id == id; });
}

std::optional<std::string> Topology::node_with_role(NodeRole role) const {
    for (const auto &n : nodes_) {
        if (n.role == role) return n.id;
    }
    return std::nullopt;
}

Topology Topology::with_flow(const std::string &from, const std::string &to, double flow) const {
    std::vector<NetEdge> edges = edges_;
    bool found = false;
    for (auto &e : edges) {
        if (e.from == from && e.to == to) {
            e.flow = flow;
            found = true;
            break;
        }
    }
    if (!found) raise(Errc::unknown_node, "no edge " + from + "->" + to);
    return Topology(nodes_, std::move(edges));
}

Topology Topology::from_json_text(const std::string &text) {
    json j = json::parse(text);
    std::vector<NetNode> nodes;
    for (const auto &jn : j.at("nodes")) {
        nodes.push_back({jn.at("id").get<std::string>(), role_from_name(jn.at("role").get<std::string>())});
    }
    std::vector<NetEdge> edges;
    for (const auto &je : j.at("edges")) {
        NetEdge e;
        e.from = je.at("from").get<std::string>();
        e.to = je.at("to").get<std::string>();
        e.capacity = je.at("capacity").get<double>();
        e.rate = je.value("rate", e.capacity);
        e.flow = je.value("flow", 0.0);
        e.propagation = je.value("propagation", 0.0);
        edges.push_back(e);
    }
    return Topology(std::move(nodes), std::move(edges));
}

Topology Topology::from_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) raise(Errc::file_unreadable, path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

double min_cut(const Topology &topo, const std::string &a, const std::string &b) {
    if (a == b) throw std::invalid_argument("min_cut endpoints must differ");
    const std::size_t n = topo.nodes().size();
    const std::size_t src = topo.node_index(a);
    const std::size_t dst = topo.node_index(b);

    // Dense residual matrix; parallel edges accumulate.
    std::vector<std::vector<double>> residual(n, std::vector<double>(n, 0.0));
    for (const auto &e : topo.edges()) {
        residual[topo.node_index(e.from)][topo.node_index(e.to)] += e.capacity;
    }

    double flow = 0.0;
    while (true) {
        // BFS for the shortest augmenting path (Edmonds-Karp).
        std::vector<std::size_t> parent(n, SIZE_MAX);
        parent[src] = src;
        std::deque<std::size_t> queue{src};
        while (!queue.empty() && parent[dst] == SIZE_MAX) {
            std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v = 0; v < n; ++v) {
                if (parent[v] == SIZE_MAX && residual[u][v] > kFlowEps) {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if (parent[dst] == SIZE_MAX) break;
        double bottleneck = std::numeric_limits<double>::infinity();
        for (std::size_t v = dst; v != src; v = parent[v]) {
            bottleneck = std::min(bottleneck, residual[parent[v]][v]);
        }
        for (std::size_t v = dst; v != src; v = parent[v]) {
            residual[parent[v]][v] -= bottleneck;
            residual[v][parent[v]] += bottleneck;
        }
        flow += bottleneck;
    }
    return flow;
}

double path_capacity(const Topology &topo, const std::string &s, const std::string &g,
                     const std::string &d) {
    return std::min(min_cut(topo, s, g), min_cut(topo, g, d));
}

double divergence(const Topology &topo, const std::string &node) {
    topo.node_index(node);
    double out = 0.0, in = 0.0;
    for (const auto &e : topo.edges()) {
        if (e.from == node) out += e.flow;
        if (e.to == node) in += e.flow;
    }
    return out - in;
}

double transfer_time(double size_bits, const std::vector<NetEdge> &path) {
    if (size_bits < 0.0) throw std::invalid_argument("negative message size");
    double total = 0.0;
    for (const auto &e : path) {
        if (!(e.rate > 0.0)) {
            raise(Errc::zero_rate_edge, "edge " + e.from + "->" + e.to + " has no usable rate");
        }
        total += size_bits / e.rate + e.propagation;
    }
    return total;
}

const char *variant_name(LearningVariant v) {
    switch (v) {
    case LearningVariant::source_oriented: return "source";
    case LearningVariant::node_augmented: return "node-augmented";
    case LearningVariant::node_standard: return "node-standard";
    case LearningVariant::destination_goal: return "destination-goal";
    case LearningVariant::destination_deviation: return "destination-deviation";
    }
    return "?";
}

LearningVariant variant_from_name(const std::string &name) {
    if (name == "source") return LearningVariant::source_oriented;
    if (name == "node-augmented") return LearningVariant::node_augmented;
    if (name == "node-standard") return LearningVariant::node_standard;
    if (name == "destination-goal") return LearningVariant::destination_goal;
    if (name == "destination-deviation") return LearningVariant::destination_deviation;
    raise(Errc::unknown_variant, "learning variant '" + name + "'");
}

double total_latency(const LatencyProfile &prof, double prompt_bits, double generated_bits,
                     LearningVariant variant) {
    auto need = [&](const std::vector<NetEdge> &path, const char *which) -> const std::vector<NetEdge> & {
        if (path.empty()) {
            raise(Errc::incomplete_profile, std::string("latency profile missing ") + which +
                                                " path for variant " + variant_name(variant));
        }
        return path;
    };
    const int np = prof.n_prompt_sizes;
    double t_c = 0.0;
    switch (variant) {
    case LearningVariant::source_oriented:
        // N_p prompt uplinks and N_p approximation downlinks per data point.
        t_c = np * (transfer_time(prompt_bits, need(prof.path_sg, "s->g")) +
                    transfer_time(generated_bits, need(prof.path_sg, "s->g")));
        break;
    case LearningVariant::node_augmented:
        t_c = transfer_time(prof.original_bits, need(prof.path_sg, "s->g")) +
              transfer_time(prof.min_prompt_bits, need(prof.path_sg, "s->g"));
        break;
    case LearningVariant::node_standard:
        t_c = transfer_time(prof.original_bits, need(prof.path_sg, "s->g")) +
              np * transfer_time(prompt_bits, need(prof.path_sg, "s->g"));
        break;
    case LearningVariant::destination_goal:
        t_c = np * (transfer_time(prompt_bits, need(prof.path_sg, "s->g")) +
                    transfer_time(generated_bits, need(prof.path_gd, "g->d")));
        break;
    case LearningVariant::destination_deviation:
        t_c = transfer_time(prof.original_bits, need(prof.path_sd, "s->d")) +
              np * (transfer_time(prompt_bits, need(prof.path_sg, "s->g")) +
                    transfer_time(generated_bits, need(prof.path_gd, "g->d")));
        break;
    }
    return prof.t_prompt + t_c + prof.t_generate;
}

} // namespace genrelay
