#include "qbmrl/topology.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "qbmrl/rng.hpp"

namespace qbmrl {

ChimeraTopology build_chimera(int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("build_chimera: rows/cols must be >= 1");

    ChimeraTopology t;
    t.rows = rows;
    t.cols = cols;
    t.qubit_count = rows * cols * 8;
    t.side_of.resize(static_cast<std::size_t>(t.qubit_count));

    auto cell_base = [cols](int r, int c) { return 8 * (r * cols + c); };

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int base = cell_base(r, c);
            for (int i = 0; i < 4; ++i) {
                t.side_of[static_cast<std::size_t>(base + i)] = Side::A;
                t.side_of[static_cast<std::size_t>(base + 4 + i)] = Side::B;
            }
            // intra-cell K(4,4)
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) t.edges.emplace_back(base + a, base + 4 + b);
            // horizontal neighbour: corresponding side-A nodes
            if (c + 1 < cols) {
                const int right = cell_base(r, c + 1);
                for (int a = 0; a < 4; ++a) t.edges.emplace_back(base + a, right + a);
            }
            // vertical neighbour: corresponding side-B nodes
            if (r + 1 < rows) {
                const int below = cell_base(r + 1, c);
                for (int b = 0; b < 4; ++b) t.edges.emplace_back(base + 4 + b, below + 4 + b);
            }
        }
    }

    for (auto& e : t.edges)
        if (e.first > e.second) std::swap(e.first, e.second);
    std::sort(t.edges.begin(), t.edges.end());
    return t;
}

VisibleMapping default_visible_mapping(const ChimeraTopology& topology, int state_dim,
                                       int action_dim) {
    if (state_dim < 1 || action_dim < 1)
        throw std::invalid_argument("default_visible_mapping: dims must be >= 1");

    std::vector<int> side_a, side_b;
    for (int j = 0; j < topology.qubit_count; ++j) {
        (topology.side_of[static_cast<std::size_t>(j)] == Side::A ? side_a : side_b).push_back(j);
    }

    VisibleMapping m;
    m.state_dim = state_dim;
    m.action_dim = action_dim;
    m.targets.reserve(static_cast<std::size_t>(state_dim + action_dim));
    for (int i = 0; i < state_dim; ++i) m.targets.push_back(side_a);
    for (int i = 0; i < action_dim; ++i) m.targets.push_back(side_b);
    return m;
}

HiddenGraph to_graph(const ChimeraTopology& topology) {
    HiddenGraph g;
    g.n_nodes = topology.qubit_count;
    g.edges = topology.edges;
    g.rows = topology.rows;
    g.cols = topology.cols;
    return g;
}

HiddenGraph make_graph(int n_nodes, std::vector<std::pair<int, int>> edges) {
    if (n_nodes < 1) throw std::invalid_argument("make_graph: n_nodes must be >= 1");
    for (auto& e : edges) {
        if (e.first > e.second) std::swap(e.first, e.second);
        if (e.first == e.second) throw std::invalid_argument("make_graph: self-loop");
        if (e.first < 0 || e.second >= n_nodes)
            throw std::invalid_argument("make_graph: edge endpoint out of range");
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
        throw std::invalid_argument("make_graph: duplicate edge");
    HiddenGraph g;
    g.n_nodes = n_nodes;
    g.edges = std::move(edges);
    return g;
}

IsingProblem make_ising_problem(HiddenGraph graph, VisibleMapping mapping) {
    for (const auto& targets : mapping.targets) {
        if (targets.empty()) throw std::invalid_argument("make_ising_problem: empty target set");
        for (int j : targets)
            if (j < 0 || j >= graph.n_nodes)
                throw std::invalid_argument("make_ising_problem: mapping target out of range");
    }
    IsingProblem p;
    p.hidden_weights.assign(graph.edges.size(), 0.0);
    p.visible_weights.reserve(mapping.targets.size());
    for (const auto& targets : mapping.targets) p.visible_weights.emplace_back(targets.size(), 0.0);
    p.visible_values.assign(static_cast<std::size_t>(mapping.visible_count()), 0.0);
    p.graph = std::move(graph);
    p.mapping = std::move(mapping);
    return p;
}

std::size_t trainable_weight_count(const IsingProblem& problem) {
    std::size_t n = problem.hidden_weights.size();
    for (const auto& row : problem.visible_weights) n += row.size();
    return n;
}

void init_weights_uniform(IsingProblem& problem, double scale, std::uint64_t seed) {
    CounterRng rng(derive_stream(seed, 0x77u));
    for (auto& w : problem.hidden_weights) w = rng.next_uniform(-scale, scale);
    for (auto& row : problem.visible_weights)
        for (auto& w : row) w = rng.next_uniform(-scale, scale);
}

void check_weights_finite(const IsingProblem& problem) {
    for (double w : problem.hidden_weights)
        if (!std::isfinite(w)) throw std::runtime_error("non-finite hidden weight");
    for (const auto& row : problem.visible_weights)
        for (double w : row)
            if (!std::isfinite(w)) throw std::runtime_error("non-finite visible weight");
}

void soft_update_weights(IsingProblem& target, const IsingProblem& online, double tau) {
    if (target.hidden_weights.size() != online.hidden_weights.size() ||
        target.visible_weights.size() != online.visible_weights.size())
        throw std::invalid_argument("soft_update_weights: key sets differ");
    for (std::size_t i = 0; i < target.hidden_weights.size(); ++i)
        target.hidden_weights[i] =
            (1.0 - tau) * target.hidden_weights[i] + tau * online.hidden_weights[i];
    for (std::size_t i = 0; i < target.visible_weights.size(); ++i) {
        if (target.visible_weights[i].size() != online.visible_weights[i].size())
            throw std::invalid_argument("soft_update_weights: key sets differ");
        for (std::size_t j = 0; j < target.visible_weights[i].size(); ++j)
            target.visible_weights[i][j] =
                (1.0 - tau) * target.visible_weights[i][j] + tau * online.visible_weights[i][j];
    }
}

std::string ising_to_json(const IsingProblem& p) {
    if (p.graph.rows < 1 || p.graph.cols < 1)
        throw std::invalid_argument("ising_to_json: only Chimera-backed problems serialize");
    nlohmann::json doc;
    doc["schema"] = "qbmrl.ising.v1";
    doc["rows"] = p.graph.rows;
    doc["cols"] = p.graph.cols;
    doc["state_dim"] = p.mapping.state_dim;
    doc["action_dim"] = p.mapping.action_dim;
    auto hw = nlohmann::json::array();
    for (std::size_t e = 0; e < p.graph.edges.size(); ++e) {
        hw.push_back({p.graph.edges[e].first, p.graph.edges[e].second, p.hidden_weights[e]});
    }
    doc["hidden_weights"] = std::move(hw);
    auto vw = nlohmann::json::array();
    for (std::size_t i = 0; i < p.mapping.targets.size(); ++i) {
        for (std::size_t k = 0; k < p.mapping.targets[i].size(); ++k) {
            vw.push_back({static_cast<int>(i), p.mapping.targets[i][k], p.visible_weights[i][k]});
        }
    }
    doc["visible_weights"] = std::move(vw);
    return doc.dump();
}

IsingProblem ising_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("schema").get<std::string>() != "qbmrl.ising.v1")
        throw std::invalid_argument("ising_from_json: unknown schema");
    const auto topology = build_chimera(doc.at("rows").get<int>(), doc.at("cols").get<int>());
    auto mapping = default_visible_mapping(topology, doc.at("state_dim").get<int>(),
                                           doc.at("action_dim").get<int>());
    auto p = make_ising_problem(to_graph(topology), std::move(mapping));

    for (const auto& row : doc.at("hidden_weights")) {
        const int j = row.at(0).get<int>();
        const int k = row.at(1).get<int>();
        const auto it = std::lower_bound(p.graph.edges.begin(), p.graph.edges.end(),
                                         std::make_pair(j, k));
        if (it == p.graph.edges.end() || *it != std::make_pair(j, k))
            throw std::invalid_argument("ising_from_json: edge not in topology");
        p.hidden_weights[static_cast<std::size_t>(it - p.graph.edges.begin())] =
            row.at(2).get<double>();
    }
    for (const auto& row : doc.at("visible_weights")) {
        const int i = row.at(0).get<int>();
        const int j = row.at(1).get<int>();
        if (i < 0 || i >= p.mapping.visible_count())
            throw std::invalid_argument("ising_from_json: visible unit out of range");
        const auto& targets = p.mapping.targets[static_cast<std::size_t>(i)];
        const auto it = std::lower_bound(targets.begin(), targets.end(), j);
        if (it == targets.end() || *it != j)
            throw std::invalid_argument("ising_from_json: pair not allowed by mapping");
        p.visible_weights[static_cast<std::size_t>(i)][static_cast<std::size_t>(it - targets.begin())] =
            row.at(2).get<double>();
    }
    return p;
}

}  // namespace qbmrl
