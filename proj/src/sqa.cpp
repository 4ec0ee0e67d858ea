#include "qbmrl/sqa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "qbmrl/rng.hpp"

namespace qbmrl {

namespace {

// Adjacency + per-node visible field, flattened once per sampling call.
struct CompiledIsing {
    int n_hidden = 0;
    std::vector<int> offsets;        // CSR offsets, size n_hidden + 1
    std::vector<int> neighbors;      // neighbor node indices
    std::vector<double> couplings;   // matching w_jk
    std::vector<double> bias;        // b_j = sum_i w_ij v_i
};

CompiledIsing compile(const IsingProblem& p) {
    CompiledIsing c;
    c.n_hidden = p.n_hidden();
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(c.n_hidden));
    for (std::size_t e = 0; e < p.graph.edges.size(); ++e) {
        const auto [j, k] = p.graph.edges[e];
        const double w = p.hidden_weights[e];
        adj[static_cast<std::size_t>(j)].emplace_back(k, w);
        adj[static_cast<std::size_t>(k)].emplace_back(j, w);
    }
    c.offsets.assign(static_cast<std::size_t>(c.n_hidden) + 1, 0);
    for (int j = 0; j < c.n_hidden; ++j)
        c.offsets[static_cast<std::size_t>(j) + 1] =
            c.offsets[static_cast<std::size_t>(j)] + static_cast<int>(adj[static_cast<std::size_t>(j)].size());
    c.neighbors.reserve(static_cast<std::size_t>(c.offsets.back()));
    c.couplings.reserve(static_cast<std::size_t>(c.offsets.back()));
    for (const auto& row : adj) {
        for (const auto& [k, w] : row) {
            c.neighbors.push_back(k);
            c.couplings.push_back(w);
        }
    }
    c.bias.assign(static_cast<std::size_t>(c.n_hidden), 0.0);
    for (std::size_t i = 0; i < p.mapping.targets.size(); ++i) {
        const double v = p.visible_values[i];
        const auto& targets = p.mapping.targets[i];
        for (std::size_t k = 0; k < targets.size(); ++k)
            c.bias[static_cast<std::size_t>(targets[k])] += p.visible_weights[i][k] * v;
    }
    return c;
}

double effective_energy_compiled(const IsingProblem& p, const CompiledIsing& c,
                                 const std::int8_t* spins, double beta, double gamma,
                                 int n_replicas) {
    const int nr = n_replicas;
    double in_replica = 0.0;
    for (std::size_t e = 0; e < p.graph.edges.size(); ++e) {
        const auto [j, k] = p.graph.edges[e];
        int acc = 0;
        const std::int8_t* sj = spins + static_cast<std::size_t>(j) * nr;
        const std::int8_t* sk = spins + static_cast<std::size_t>(k) * nr;
        for (int l = 0; l < nr; ++l) acc += sj[l] * sk[l];
        in_replica += p.hidden_weights[e] * acc;
    }
    for (int j = 0; j < c.n_hidden; ++j) {
        int acc = 0;
        const std::int8_t* sj = spins + static_cast<std::size_t>(j) * nr;
        for (int l = 0; l < nr; ++l) acc += sj[l];
        in_replica += c.bias[static_cast<std::size_t>(j)] * acc;
    }
    double energy = -in_replica / nr;

    if (nr >= 2) {
        const double wp = replica_coupling(beta, gamma, nr);
        int ring = 0;
        for (int j = 0; j < c.n_hidden; ++j) {
            const std::int8_t* sj = spins + static_cast<std::size_t>(j) * nr;
            for (int l = 0; l + 1 < nr; ++l) ring += sj[l] * sj[l + 1];
            ring += sj[0] * sj[nr - 1];
        }
        energy -= wp * ring;
    }
    return energy;
}

ReplicaStackSample anneal_compiled(const CompiledIsing& c, const AnnealParams& params,
                                   std::uint64_t seed) {
    const int nr = params.n_replicas;
    const int n = c.n_hidden;
    ReplicaStackSample s;
    s.n_hidden = n;
    s.n_replicas = nr;
    s.spins.resize(static_cast<std::size_t>(n) * nr);

    CounterRng rng(seed);
    for (auto& v : s.spins) v = static_cast<std::int8_t>(rng.next_sign());

    const double inv_nr = 1.0 / nr;
    const double beta = params.beta;
    std::int8_t* spins = s.spins.data();

    for (int sweep = 1; sweep <= params.n_sweeps; ++sweep) {
        const double frac =
            params.n_sweeps == 1 ? 1.0 : static_cast<double>(sweep - 1) / (params.n_sweeps - 1);
        const double gamma = params.gamma_initial + frac * (params.gamma_final - params.gamma_initial);
        const double wp = nr >= 2 ? replica_coupling(beta, gamma, nr) : 0.0;

        for (int j = 0; j < n; ++j) {
            std::int8_t* sj = spins + static_cast<std::size_t>(j) * nr;
            const double bias_j = c.bias[static_cast<std::size_t>(j)];
            const int begin = c.offsets[static_cast<std::size_t>(j)];
            const int end = c.offsets[static_cast<std::size_t>(j) + 1];
            for (int l = 0; l < nr; ++l) {
                double field = bias_j;
                for (int a = begin; a < end; ++a) {
                    field += c.couplings[static_cast<std::size_t>(a)] *
                             spins[static_cast<std::size_t>(c.neighbors[static_cast<std::size_t>(a)]) * nr + l];
                }
                field *= inv_nr;
                if (nr >= 2) {
                    const int lm = l == 0 ? nr - 1 : l - 1;
                    const int lp = l + 1 == nr ? 0 : l + 1;
                    field += wp * (sj[lm] + sj[lp]);
                }
                const double delta = 2.0 * sj[l] * field;
                // Metropolis, with a stochastic tie-break at delta == 0: a
                // certain flip there turns zero-field sites into deterministic
                // cascades (the sequential scan then cycles without mixing).
                bool flip;
                if (delta < 0.0) flip = true;
                else if (delta == 0.0) flip = rng.next_unit() < 0.5;
                else flip = rng.next_unit() < std::exp(-beta * delta);
                if (flip) sj[l] = static_cast<std::int8_t>(-sj[l]);
            }
        }
    }
    return s;
}

}  // namespace

void validate(const AnnealParams& params) {
    if (params.n_replicas < 1) throw std::invalid_argument("AnnealParams: n_replicas must be >= 1");
    if (!(params.beta > 0.0)) throw std::invalid_argument("AnnealParams: beta must be > 0");
    if (!(params.gamma_final > 0.0))
        throw std::invalid_argument("AnnealParams: gamma_final must be > 0");
    if (params.gamma_initial < params.gamma_final)
        throw std::invalid_argument("AnnealParams: gamma_initial must be >= gamma_final");
    if (params.n_sweeps < 1) throw std::invalid_argument("AnnealParams: n_sweeps must be >= 1");
    if (params.num_reads < 1) throw std::invalid_argument("AnnealParams: num_reads must be >= 1");
}

double replica_coupling(double beta, double gamma, int n_replicas) {
    if (!(beta > 0.0)) throw std::invalid_argument("replica_coupling: beta must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("replica_coupling: gamma must be > 0");
    if (n_replicas < 1) throw std::invalid_argument("replica_coupling: n_replicas must be >= 1");
    const double x = gamma * beta / n_replicas;
    // ln(coth x) = log1p(e^{-2x}) - log1p(-e^{-2x})
    const double e = std::exp(-2.0 * x);
    const double value = (std::log1p(e) - std::log1p(-e)) / (2.0 * beta);
    if (!std::isfinite(value)) throw std::invalid_argument("replica_coupling: overflow");
    return value;
}

double effective_energy(const IsingProblem& problem, const ReplicaStackSample& sample, double beta,
                        double gamma, int n_replicas) {
    if (sample.n_hidden != problem.n_hidden() || sample.n_replicas != n_replicas ||
        sample.spins.size() != static_cast<std::size_t>(sample.n_hidden) * sample.n_replicas)
        throw std::invalid_argument("effective_energy: sample shape mismatch");
    const auto c = compile(problem);
    return effective_energy_compiled(problem, c, sample.spins.data(), beta, gamma, n_replicas);
}

ReplicaStackSample anneal_once(const IsingProblem& problem, const AnnealParams& params,
                               std::uint64_t seed) {
    validate(params);
    const auto c = compile(problem);
    return anneal_compiled(c, params, seed);
}

SampleStats sample_stats(const IsingProblem& problem, const AnnealParams& params,
                         std::uint64_t seed) {
    validate(params);
    const auto c = compile(problem);
    const int n = c.n_hidden;
    const int nr = params.n_replicas;
    const int reads = params.num_reads;

    SampleStats out;
    out.mean_h.assign(static_cast<std::size_t>(n), 0.0);
    out.mean_hh.assign(problem.graph.edges.size(), 0.0);

    std::unordered_map<std::string, int> config_counts;
    config_counts.reserve(static_cast<std::size_t>(reads) * 2);

    double energy_acc = 0.0;
    for (int r = 0; r < reads; ++r) {
        const auto sample = anneal_compiled(c, params, derive_stream(seed, static_cast<std::uint64_t>(r)));
        const std::int8_t* spins = sample.spins.data();

        for (int j = 0; j < n; ++j) {
            int acc = 0;
            for (int l = 0; l < nr; ++l) acc += spins[static_cast<std::size_t>(j) * nr + l];
            out.mean_h[static_cast<std::size_t>(j)] += static_cast<double>(acc) / nr;
        }
        for (std::size_t e = 0; e < problem.graph.edges.size(); ++e) {
            const auto [j, k] = problem.graph.edges[e];
            int acc = 0;
            for (int l = 0; l < nr; ++l)
                acc += spins[static_cast<std::size_t>(j) * nr + l] *
                       spins[static_cast<std::size_t>(k) * nr + l];
            out.mean_hh[e] += static_cast<double>(acc) / nr;
        }
        energy_acc +=
            effective_energy_compiled(problem, c, spins, params.beta, params.gamma_final, nr);
        config_counts[std::string(reinterpret_cast<const char*>(spins), sample.spins.size())] += 1;
    }

    for (auto& v : out.mean_h) v /= reads;
    for (auto& v : out.mean_hh) v /= reads;
    out.mean_energy = energy_acc / reads;

    double entropy = 0.0;
    for (const auto& [config, count] : config_counts) {
        const double p = static_cast<double>(count) / reads;
        entropy -= p * std::log(p);
    }
    out.entropy = std::max(0.0, entropy);
    out.free_energy = out.mean_energy - out.entropy / params.beta;
    out.q_value = -out.free_energy;
    return out;
}

SampleStats exact_stats(const IsingProblem& problem, double beta, double gamma, int n_replicas) {
    if (!(beta > 0.0)) throw std::invalid_argument("exact_stats: beta must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("exact_stats: gamma must be > 0");
    if (n_replicas < 1) throw std::invalid_argument("exact_stats: n_replicas must be >= 1");
    const auto c = compile(problem);
    const int n = c.n_hidden;
    const int nr = n_replicas;
    const int sites = n * nr;
    if (sites > 20) throw std::invalid_argument("exact_stats: n_hidden * n_replicas > 20");

    const std::size_t n_configs = std::size_t{1} << sites;
    const double wp = nr >= 2 ? replica_coupling(beta, gamma, nr) : 0.0;
    const double inv_nr = 1.0 / nr;
    const std::size_t n_edges = problem.graph.edges.size();

    // Gray-code walk: maintain spins, per-edge within-replica products and
    // the energy incrementally; one spin flips per step.
    std::vector<std::int8_t> spins(static_cast<std::size_t>(sites), -1);
    std::vector<double> energies(n_configs);

    auto full_energy = [&]() {
        return effective_energy_compiled(problem, c, spins.data(), beta, gamma, nr);
    };

    auto flip_delta = [&](int site) {
        const int j = site / nr;
        const int l = site % nr;
        const std::int8_t* sj = spins.data() + static_cast<std::size_t>(j) * nr;
        double field = c.bias[static_cast<std::size_t>(j)];
        for (int a = c.offsets[static_cast<std::size_t>(j)]; a < c.offsets[static_cast<std::size_t>(j) + 1]; ++a)
            field += c.couplings[static_cast<std::size_t>(a)] *
                     spins[static_cast<std::size_t>(c.neighbors[static_cast<std::size_t>(a)]) * nr + l];
        field *= inv_nr;
        if (nr >= 2) {
            const int lm = l == 0 ? nr - 1 : l - 1;
            const int lp = l + 1 == nr ? 0 : l + 1;
            field += wp * (sj[lm] + sj[lp]);
        }
        return 2.0 * sj[l] * field;
    };

    double energy = full_energy();
    energies[0] = energy;
    double min_energy = energy;
    for (std::size_t i = 1; i < n_configs; ++i) {
        const int site = std::countr_zero(i);
        energy += flip_delta(site);
        const std::size_t idx = static_cast<std::size_t>(site) / nr * nr + site % nr;
        spins[idx] = static_cast<std::int8_t>(-spins[idx]);
        energies[i] = energy;
        min_energy = std::min(min_energy, energy);
    }

    // Second Gray-code pass accumulating Boltzmann-weighted expectations.
    std::fill(spins.begin(), spins.end(), static_cast<std::int8_t>(-1));
    std::vector<double> edge_prod(n_edges);  // within-replica mean per edge
    std::vector<double> node_mean(static_cast<std::size_t>(n));
    auto refresh_sums = [&]() {
        for (std::size_t e = 0; e < n_edges; ++e) {
            const auto [j, k] = problem.graph.edges[e];
            int acc = 0;
            for (int l = 0; l < nr; ++l)
                acc += spins[static_cast<std::size_t>(j) * nr + l] *
                       spins[static_cast<std::size_t>(k) * nr + l];
            edge_prod[e] = static_cast<double>(acc) * inv_nr;
        }
        for (int j = 0; j < n; ++j) {
            int acc = 0;
            for (int l = 0; l < nr; ++l) acc += spins[static_cast<std::size_t>(j) * nr + l];
            node_mean[static_cast<std::size_t>(j)] = static_cast<double>(acc) * inv_nr;
        }
    };
    refresh_sums();

    std::vector<std::vector<std::pair<std::size_t, int>>> node_edges(static_cast<std::size_t>(n));
    for (std::size_t e = 0; e < n_edges; ++e) {
        const auto [j, k] = problem.graph.edges[e];
        node_edges[static_cast<std::size_t>(j)].emplace_back(e, k);
        node_edges[static_cast<std::size_t>(k)].emplace_back(e, j);
    }

    SampleStats out;
    out.mean_h.assign(static_cast<std::size_t>(n), 0.0);
    out.mean_hh.assign(n_edges, 0.0);
    double z = 0.0, energy_mean_acc = 0.0, entropy_acc = 0.0;

    for (std::size_t i = 0; i < n_configs; ++i) {
        if (i > 0) {
            const int site = std::countr_zero(i);
            const int j = site / nr;
            const int l = site % nr;
            const std::size_t idx = static_cast<std::size_t>(j) * nr + l;
            spins[idx] = static_cast<std::int8_t>(-spins[idx]);
            const double s_new = spins[idx];
            node_mean[static_cast<std::size_t>(j)] += 2.0 * s_new * inv_nr;
            for (const auto& [e, k] : node_edges[static_cast<std::size_t>(j)])
                edge_prod[e] += 2.0 * s_new * spins[static_cast<std::size_t>(k) * nr + l] * inv_nr;
        }
        const double shifted = -beta * (energies[i] - min_energy);
        const double w = std::exp(shifted);
        z += w;
        energy_mean_acc += w * energies[i];
        entropy_acc += w * shifted;  // sum w * ln(w), relative to shift
        for (int j = 0; j < n; ++j) out.mean_h[static_cast<std::size_t>(j)] += w * node_mean[static_cast<std::size_t>(j)];
        for (std::size_t e = 0; e < n_edges; ++e) out.mean_hh[e] += w * edge_prod[e];
    }

    for (auto& v : out.mean_h) v /= z;
    for (auto& v : out.mean_hh) v /= z;
    out.mean_energy = energy_mean_acc / z;
    // S = -sum p ln p with p = w/Z: ln p = ln w - ln Z
    out.entropy = std::max(0.0, std::log(z) - entropy_acc / z);
    out.free_energy = out.mean_energy - out.entropy / beta;
    out.q_value = -out.free_energy;

    const double log_z_free = -(std::log(z) / beta) + min_energy;  // -(1/beta) ln Z
    const double scale = std::max({std::abs(out.free_energy), std::abs(log_z_free), 1e-300});
    if (std::abs(out.free_energy - log_z_free) > 1e-9 * scale)
        throw std::runtime_error("exact_stats: free-energy identity violated");
    return out;
}

}  // namespace qbmrl
