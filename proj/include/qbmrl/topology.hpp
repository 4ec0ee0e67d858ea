#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qbmrl {

enum class Side : std::uint8_t { A, B };

// Grid of K(4,4) unit cells. Node indexing is row-major over cells; within a
// cell the four side-A nodes come first, then the four side-B nodes, so cell
// (r, c) owns indices 8*(r*cols + c) .. 8*(r*cols + c) + 7. Inter-cell
// couplers join corresponding side-A nodes of horizontal neighbours and
// corresponding side-B nodes of vertical neighbours.
struct ChimeraTopology {
    int rows = 0;
    int cols = 0;
    int qubit_count = 0;
    std::vector<std::pair<int, int>> edges;  // j < k, lexicographically sorted
    std::vector<Side> side_of;
};

ChimeraTopology build_chimera(int rows, int cols);

// Which hidden nodes each visible unit biases. Default: state units target
// every side-A node, action units every side-B node.
struct VisibleMapping {
    int state_dim = 0;
    int action_dim = 0;
    std::vector<std::vector<int>> targets;  // per visible unit, sorted hidden indices

    int visible_count() const { return state_dim + action_dim; }
};

VisibleMapping default_visible_mapping(const ChimeraTopology& topology, int state_dim,
                                       int action_dim);

// Hidden-node graph of a clamped QBM. Chimera instances carry their grid
// shape for serialization; hand-built test graphs leave rows = cols = 0.
struct HiddenGraph {
    int n_nodes = 0;
    std::vector<std::pair<int, int>> edges;  // j < k, sorted
    int rows = 0;
    int cols = 0;
};

HiddenGraph to_graph(const ChimeraTopology& topology);
HiddenGraph make_graph(int n_nodes, std::vector<std::pair<int, int>> edges);

// Clamped-QBM data: hidden-hidden couplings keyed by the graph's edge list,
// visible-hidden bias weights keyed by the mapping's target lists, and the
// clamped visible values.
struct IsingProblem {
    HiddenGraph graph;
    VisibleMapping mapping;
    std::vector<double> hidden_weights;                // parallel to graph.edges
    std::vector<std::vector<double>> visible_weights;  // parallel to mapping.targets
    std::vector<double> visible_values;                // length state_dim + action_dim

    int n_hidden() const { return graph.n_nodes; }
};

IsingProblem make_ising_problem(HiddenGraph graph, VisibleMapping mapping);

std::size_t trainable_weight_count(const IsingProblem& problem);

// Uniform [-scale, scale] init of every trainable weight, from `seed`.
void init_weights_uniform(IsingProblem& problem, double scale, std::uint64_t seed);

void check_weights_finite(const IsingProblem& problem);

// target <- (1 - tau) * target + tau * online, key-wise over all weights.
void soft_update_weights(IsingProblem& target, const IsingProblem& online, double tau);

// JSON document {rows, cols, state_dim, action_dim, hidden_weights: [[j,k,w]...],
// visible_weights: [[i,j,w]...]}; doubles round-trip exactly.
std::string ising_to_json(const IsingProblem& problem);
IsingProblem ising_from_json(const std::string& text);

}  // namespace qbmrl
