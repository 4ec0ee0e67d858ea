#include "qbmrl/qbm_critic.hpp"

#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "qbmrl/rng.hpp"

namespace qbmrl {

namespace {

double clamp_encode(double x, double lo, double hi, std::uint64_t* clamp_count) {
    if (x < lo || x > hi) {
        if (clamp_count) ++*clamp_count;
        x = x < lo ? lo : hi;
    }
    return 2.0 * (x - lo) / (hi - lo) - 1.0;
}

void append_binary(std::vector<double>& out, double x, double lo, double hi, int bits,
                   std::uint64_t* clamp_count) {
    if (x < lo || x > hi) {
        if (clamp_count) ++*clamp_count;
        x = x < lo ? lo : hi;
    }
    const int levels = 1 << bits;
    int level = static_cast<int>(std::floor((x - lo) / (hi - lo) * levels));
    if (level >= levels) level = levels - 1;
    if (level < 0) level = 0;
    for (int b = bits - 1; b >= 0; --b) out.push_back((level >> b) & 1 ? 1.0 : -1.0);
}

SampleStats stats_from_visible(QbmCritic& critic, const std::vector<double>& visible,
                               std::uint64_t seed) {
    critic.problem.visible_values = visible;
    if (critic.backend == CriticBackend::Exact) {
        return exact_stats(critic.problem, critic.anneal.beta, critic.anneal.gamma_final,
                           critic.anneal.n_replicas);
    }
    return sample_stats(critic.problem, critic.anneal, seed);
}

}  // namespace

void validate(const EncodingSpec& spec) {
    if (spec.state_low.size() != spec.state_high.size() ||
        spec.action_low.size() != spec.action_high.size())
        throw std::invalid_argument("EncodingSpec: bound size mismatch");
    if (spec.state_low.empty() || spec.action_low.empty())
        throw std::invalid_argument("EncodingSpec: empty state or action bounds");
    for (std::size_t i = 0; i < spec.state_low.size(); ++i)
        if (!(spec.state_low[i] < spec.state_high[i]))
            throw std::invalid_argument("EncodingSpec: state low must be < high");
    for (std::size_t i = 0; i < spec.action_low.size(); ++i)
        if (!(spec.action_low[i] < spec.action_high[i]))
            throw std::invalid_argument("EncodingSpec: action low must be < high");
    if (spec.mode == EncodingMode::Binary && spec.bits_per_dim < 1)
        throw std::invalid_argument("EncodingSpec: binary mode needs bits_per_dim >= 1");
}

std::vector<double> encode_visible(const std::vector<double>& state,
                                   const std::vector<double>& action, const EncodingSpec& spec,
                                   std::uint64_t* clamp_count) {
    if (state.size() != spec.state_low.size() || action.size() != spec.action_low.size())
        throw std::invalid_argument("encode_visible: dimension mismatch with spec");
    std::vector<double> out;
    if (spec.mode == EncodingMode::Continuous) {
        out.reserve(state.size() + action.size());
        for (std::size_t i = 0; i < state.size(); ++i)
            out.push_back(clamp_encode(state[i], spec.state_low[i], spec.state_high[i], clamp_count));
        for (std::size_t i = 0; i < action.size(); ++i)
            out.push_back(
                clamp_encode(action[i], spec.action_low[i], spec.action_high[i], clamp_count));
    } else {
        out.reserve((state.size() + action.size()) * static_cast<std::size_t>(spec.bits_per_dim));
        for (std::size_t i = 0; i < state.size(); ++i)
            append_binary(out, state[i], spec.state_low[i], spec.state_high[i], spec.bits_per_dim,
                          clamp_count);
        for (std::size_t i = 0; i < action.size(); ++i)
            append_binary(out, action[i], spec.action_low[i], spec.action_high[i],
                          spec.bits_per_dim, clamp_count);
    }
    return out;
}

std::vector<double> decode_continuous(const std::vector<double>& encoded,
                                      const std::vector<double>& low,
                                      const std::vector<double>& high) {
    if (encoded.size() != low.size() || encoded.size() != high.size())
        throw std::invalid_argument("decode_continuous: size mismatch");
    std::vector<double> out(encoded.size());
    for (std::size_t i = 0; i < encoded.size(); ++i)
        out[i] = low[i] + 0.5 * (encoded[i] + 1.0) * (high[i] - low[i]);
    return out;
}

QbmCritic make_qbm_critic(int rows, int cols, EncodingSpec encoding, AnnealParams anneal,
                          double learning_rate, double discount, CriticBackend backend,
                          std::uint64_t seed) {
    validate(encoding);
    validate(anneal);
    if (!(learning_rate > 0.0)) throw std::invalid_argument("make_qbm_critic: learning_rate <= 0");
    if (discount < 0.0 || discount > 1.0)
        throw std::invalid_argument("make_qbm_critic: discount outside [0, 1]");
    const auto topology = build_chimera(rows, cols);
    if (backend == CriticBackend::Exact && topology.qubit_count * anneal.n_replicas > 20)
        throw std::invalid_argument("make_qbm_critic: exact backend over enumeration bound");
    auto mapping = default_visible_mapping(topology, encoding.encoded_state_dim(),
                                           encoding.encoded_action_dim());
    QbmCritic critic;
    critic.problem = make_ising_problem(to_graph(topology), std::move(mapping));
    critic.encoding = std::move(encoding);
    critic.anneal = anneal;
    critic.learning_rate = learning_rate;
    critic.discount = discount;
    critic.backend = backend;
    init_weights_uniform(critic.problem, 0.1, seed);
    return critic;
}

std::size_t trainable_weight_count(const QbmCritic& critic) {
    return trainable_weight_count(critic.problem);
}

QValueResult q_value(QbmCritic& critic, const std::vector<double>& state,
                     const std::vector<double>& action, std::uint64_t seed) {
    QValueResult out;
    out.visible = encode_visible(state, action, critic.encoding, &critic.clamp_warnings);
    out.stats = stats_from_visible(critic, out.visible, seed);
    out.q = out.stats.q_value;
    return out;
}

double td_update(QbmCritic& critic, const std::vector<TdBatchItem>& batch, std::uint64_t seed,
                 QbmCritic* target) {
    if (batch.empty()) throw std::invalid_argument("td_update: empty batch");

    std::vector<double> hidden_inc(critic.problem.hidden_weights.size(), 0.0);
    std::vector<std::vector<double>> visible_inc;
    visible_inc.reserve(critic.problem.visible_weights.size());
    for (const auto& row : critic.problem.visible_weights) visible_inc.emplace_back(row.size(), 0.0);

    double dq_mag = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& item = batch[i];
        const auto eval = q_value(critic, item.transition.state, item.transition.action,
                                  derive_stream(seed, i, 0));
        double target_q = item.transition.reward;
        if (!item.transition.done) {
            QbmCritic& bootstrap = target ? *target : critic;
            target_q += critic.discount * q_value(bootstrap, item.transition.next_state,
                                                  item.next_action, derive_stream(seed, i, 1))
                                              .q;
        }
        const double dq = target_q - eval.q;
        dq_mag += std::abs(dq);

        for (std::size_t e = 0; e < hidden_inc.size(); ++e)
            hidden_inc[e] += dq * eval.stats.mean_hh[e];
        for (std::size_t vi = 0; vi < visible_inc.size(); ++vi) {
            const double v = eval.visible[vi];
            const auto& targets = critic.problem.mapping.targets[vi];
            for (std::size_t k = 0; k < targets.size(); ++k)
                visible_inc[vi][k] +=
                    dq * v * eval.stats.mean_h[static_cast<std::size_t>(targets[k])];
        }
    }

    const double scale = critic.learning_rate / static_cast<double>(batch.size());
    for (std::size_t e = 0; e < hidden_inc.size(); ++e)
        critic.problem.hidden_weights[e] += scale * hidden_inc[e];
    for (std::size_t vi = 0; vi < visible_inc.size(); ++vi)
        for (std::size_t k = 0; k < visible_inc[vi].size(); ++k)
            critic.problem.visible_weights[vi][k] += scale * visible_inc[vi][k];
    check_weights_finite(critic.problem);
    return dq_mag / static_cast<double>(batch.size());
}

std::vector<double> action_gradient(QbmCritic& critic, const std::vector<double>& state,
                                    const std::vector<double>& action, double fd_step,
                                    std::uint64_t seed) {
    if (!(fd_step > 0.0)) throw std::invalid_argument("action_gradient: fd_step must be > 0");
    if (critic.encoding.mode != EncodingMode::Continuous)
        throw std::invalid_argument("action_gradient: continuous encoding required");

    const auto base = encode_visible(state, action, critic.encoding, &critic.clamp_warnings);
    const int enc_state = critic.encoding.encoded_state_dim();
    const int d_a = critic.encoding.action_dim();

    std::vector<double> grad(static_cast<std::size_t>(d_a));
    std::vector<double> probe = base;
    for (int k = 0; k < d_a; ++k) {
        const std::size_t idx = static_cast<std::size_t>(enc_state + k);
        const double center = base[idx];
        const bool up_ok = center + fd_step <= 1.0;
        const bool down_ok = center - fd_step >= -1.0;

        double q_up, q_down, span;
        if (up_ok && down_ok) {
            probe[idx] = center + fd_step;
            q_up = stats_from_visible(critic, probe, seed).q_value;
            probe[idx] = center - fd_step;
            q_down = stats_from_visible(critic, probe, seed).q_value;
            span = 2.0 * fd_step;
        } else if (!up_ok) {
            probe[idx] = center;
            q_up = stats_from_visible(critic, probe, seed).q_value;
            probe[idx] = center - fd_step;
            q_down = stats_from_visible(critic, probe, seed).q_value;
            span = fd_step;
        } else {
            probe[idx] = center + fd_step;
            q_up = stats_from_visible(critic, probe, seed).q_value;
            probe[idx] = center;
            q_down = stats_from_visible(critic, probe, seed).q_value;
            span = fd_step;
        }
        probe[idx] = center;
        grad[static_cast<std::size_t>(k)] = (q_up - q_down) / span;
    }
    return grad;
}

std::string critic_to_json(const QbmCritic& critic) {
    nlohmann::json doc;
    doc["schema"] = "qbmrl.critic.v1";
    doc["ising"] = nlohmann::json::parse(ising_to_json(critic.problem));
    nlohmann::json enc;
    enc["state_low"] = critic.encoding.state_low;
    enc["state_high"] = critic.encoding.state_high;
    enc["action_low"] = critic.encoding.action_low;
    enc["action_high"] = critic.encoding.action_high;
    enc["mode"] = critic.encoding.mode == EncodingMode::Binary ? "binary" : "continuous";
    enc["bits_per_dim"] = critic.encoding.bits_per_dim;
    doc["encoding"] = std::move(enc);
    nlohmann::json ann;
    ann["n_replicas"] = critic.anneal.n_replicas;
    ann["beta"] = critic.anneal.beta;
    ann["gamma_initial"] = critic.anneal.gamma_initial;
    ann["gamma_final"] = critic.anneal.gamma_final;
    ann["n_sweeps"] = critic.anneal.n_sweeps;
    ann["num_reads"] = critic.anneal.num_reads;
    doc["anneal"] = std::move(ann);
    doc["learning_rate"] = critic.learning_rate;
    doc["discount"] = critic.discount;
    doc["backend"] = critic.backend == CriticBackend::Exact ? "exact" : "sqa";
    return doc.dump();
}

QbmCritic critic_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("schema").get<std::string>() != "qbmrl.critic.v1")
        throw std::invalid_argument("critic_from_json: unknown schema");
    QbmCritic critic;
    critic.problem = ising_from_json(doc.at("ising").dump());
    const auto& enc = doc.at("encoding");
    critic.encoding.state_low = enc.at("state_low").get<std::vector<double>>();
    critic.encoding.state_high = enc.at("state_high").get<std::vector<double>>();
    critic.encoding.action_low = enc.at("action_low").get<std::vector<double>>();
    critic.encoding.action_high = enc.at("action_high").get<std::vector<double>>();
    critic.encoding.mode = enc.at("mode").get<std::string>() == "binary" ? EncodingMode::Binary
                                                                         : EncodingMode::Continuous;
    critic.encoding.bits_per_dim = enc.at("bits_per_dim").get<int>();
    const auto& ann = doc.at("anneal");
    critic.anneal.n_replicas = ann.at("n_replicas").get<int>();
    critic.anneal.beta = ann.at("beta").get<double>();
    critic.anneal.gamma_initial = ann.at("gamma_initial").get<double>();
    critic.anneal.gamma_final = ann.at("gamma_final").get<double>();
    critic.anneal.n_sweeps = ann.at("n_sweeps").get<int>();
    critic.anneal.num_reads = ann.at("num_reads").get<int>();
    critic.learning_rate = doc.at("learning_rate").get<double>();
    critic.discount = doc.at("discount").get<double>();
    critic.backend =
        doc.at("backend").get<std::string>() == "exact" ? CriticBackend::Exact : CriticBackend::Sqa;
    validate(critic.encoding);
    validate(critic.anneal);
    return critic;
}

}  // namespace qbmrl
