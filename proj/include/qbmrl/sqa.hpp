#pragma once

#include <cstdint>
#include <vector>

#include "qbmrl/topology.hpp"

namespace qbmrl {

struct AnnealParams {
    int n_replicas = 5;          // Trotter slices
    double beta = 2.0;           // inverse temperature
    double gamma_initial = 3.0;  // transverse field at sweep 1
    double gamma_final = 0.5;    // transverse field at readout
    int n_sweeps = 100;          // annealing time in full Metropolis sweeps
    int num_reads = 100;         // independent anneals per estimate
};

void validate(const AnnealParams& params);

// Spin configuration of the replica stack; entry (j, l) = h_{j,l} in {-1,+1},
// stored node-major: spins[j * n_replicas + l].
struct ReplicaStackSample {
    int n_hidden = 0;
    int n_replicas = 0;
    std::vector<std::int8_t> spins;

    int spin(int node, int replica) const {
        return spins[static_cast<std::size_t>(node) * n_replicas + replica];
    }
};

struct SampleStats {
    std::vector<double> mean_h;   // per hidden node, replica- and read-averaged
    std::vector<double> mean_hh;  // per topology edge, within-replica then read-averaged
    double mean_energy = 0.0;     // <H^eff> at readout gamma
    double entropy = 0.0;         // -sum_c P(c|v) ln P(c|v)
    double free_energy = 0.0;     // mean_energy - entropy / beta
    double q_value = 0.0;         // -free_energy
};

// w+ = (1/(2 beta)) * ln(coth(gamma * beta / n_replicas)), the ferromagnetic
// coupling between neighbouring replicas. Evaluated via log1p of exp(-2x) so
// it stays strictly positive deep into the large-argument tail.
double replica_coupling(double beta, double gamma, int n_replicas);

// H^eff(v) = -(1/N_r) sum_l [sum_(j,k) w_jk h_jl h_kl + sum_(i,j) w_ij v_i h_jl]
//            - w+ [sum_j sum_{l<N_r} h_jl h_j(l+1) + sum_j h_j1 h_jNr].
// For N_r = 1 the replica bracket is defined as 0.
double effective_energy(const IsingProblem& problem, const ReplicaStackSample& sample,
                        double beta, double gamma, int n_replicas);

// Path-integral Monte Carlo: random initial spins from `seed`, then n_sweeps
// single-spin Metropolis passes in fixed scan order (node-major, replicas
// inner) with gamma interpolated linearly from gamma_initial to gamma_final
// and w+ recomputed each sweep. Pure function of (problem, params, seed).
ReplicaStackSample anneal_once(const IsingProblem& problem, const AnnealParams& params,
                               std::uint64_t seed);

// num_reads independent anneals (read seeds derived from `seed`); entropy is
// the plug-in estimate over distinct whole-stack configurations among reads.
SampleStats sample_stats(const IsingProblem& problem, const AnnealParams& params,
                         std::uint64_t seed);

// Exact enumeration oracle over all 2^(n_hidden * n_replicas) configurations
// of the Boltzmann distribution P(c|v) ~ exp(-beta H^eff(c)). Rejects
// instances with n_hidden * n_replicas > 20. Verifies internally that
// mean_energy - entropy/beta matches -(1/beta) ln Z to 1e-9 relative error.
SampleStats exact_stats(const IsingProblem& problem, double beta, double gamma, int n_replicas);

}  // namespace qbmrl
