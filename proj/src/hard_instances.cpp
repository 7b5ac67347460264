#include "batchrl/hard_instances.hpp"

#include <cmath>
#include <string>

namespace batchrl {

Index hard_depth(Index actions, std::int64_t K) {
    if (actions < 2) throw std::invalid_argument("hard instances need at least two actions");
    if (K < 1) throw std::invalid_argument("K must be positive");
    const prec_t log_a = std::log(prec_t(K)) / std::log(prec_t(actions));
    return Index(std::floor(2.0 * log_a + 1e-12)) + 2;
}

HardInstanceParams HardInstanceParams::make(Index actions, Index horizon, std::int64_t K) {
    HardInstanceParams p;
    p.actions = actions;
    p.K = K;
    p.horizon = horizon;
    p.depth = hard_depth(actions, K);
    if (horizon < 2 * p.depth)
        throw std::invalid_argument("horizon " + std::to_string(horizon) + " is below 2d = " +
                                    std::to_string(2 * p.depth) + " for A = " +
                                    std::to_string(actions) + ", K = " + std::to_string(K));
    p.blocks = horizon / (2 * p.depth);
    return p;
}

namespace {

void check_code(const ActionCode& code, Index actions) {
    for (Index c : code)
        if (c < 1 || c > actions)
            throw std::invalid_argument("code symbol " + std::to_string(c) + " outside [1, " +
                                        std::to_string(actions) + "]");
}

// Layers [0, code.size()) follow the code; later layers keep the state.
TransitionTable chain_table(Index actions, Index horizon, const ActionCode& code) {
    TransitionTable t(2, actions, 2, horizon);
    for (Index h = 0; h < horizon; ++h)
        for (Index a = 0; a < actions; ++a) {
            const bool stay = h >= Index(code.size()) || a == code[std::size_t(h)] - 1;
            t.row(h, 0, a)(stay ? 0 : 1) = 1.0;
            t.row(h, 1, a)(1) = 1.0;
        }
    return t;
}

} // namespace

TabularMDP basic_hard_mdp(Index actions, const ActionCode& code) {
    if (actions < 2) throw std::invalid_argument("hard instances need at least two actions");
    if (code.size() < 2) throw std::invalid_argument("code must have length d >= 2");
    check_code(code, actions);
    const Index d = Index(code.size());
    return TabularMDP(TransitionModel(chain_table(actions, d, code), 0, false),
                      std::vector<Matrix>(std::size_t(d), Matrix::Zero(2, actions)));
}

TabularMDP concatenated_hard_mdp(Index actions, Index horizon, std::int64_t K,
                                 const ActionCode& code) {
    const HardInstanceParams p = HardInstanceParams::make(actions, horizon, K);
    const Index coded = p.blocks * p.depth;
    if (Index(code.size()) != coded)
        throw std::invalid_argument("code must have length c * d = " + std::to_string(coded));
    check_code(code, actions);
    std::vector<Matrix> rewards(std::size_t(horizon), Matrix::Zero(2, actions));
    for (Index h = coded; h < horizon; ++h) rewards[h].row(0).setOnes();
    return TabularMDP(TransitionModel(chain_table(actions, horizon, code), 0, false),
                      std::move(rewards));
}

prec_t mixture_reach_probability(const PolicyMixture& mixture, Index actions,
                                 const ActionCode& code, Index steps) {
    check_code(code, actions);
    if (steps > Index(code.size())) throw std::invalid_argument("more steps than code symbols");
    prec_t total = 0.0;
    for (const auto& [w, pi] : mixture) {
        if (pi.horizon() < steps || pi.num_actions() != actions)
            throw DimensionError("policy does not cover the coded steps");
        prec_t reach = w;
        for (Index h = 0; h < steps; ++h) reach *= pi.prob(h, 0, code[std::size_t(h)] - 1);
        total += reach;
    }
    return total;
}

ActionCode adversarial_code(const PolicyMixture& mixture, Index actions, Index depth,
                            const ActionCode& prefix) {
    check_code(prefix, actions);
    const Index offset = Index(prefix.size());
    std::vector<prec_t> reach;
    for (const auto& [w, pi] : mixture) {
        if (pi.horizon() < offset + depth || pi.num_actions() != actions)
            throw DimensionError("policy does not cover the block");
        prec_t r = w;
        for (Index h = 0; h < offset; ++h) r *= pi.prob(h, 0, prefix[std::size_t(h)] - 1);
        reach.push_back(r);
    }
    ActionCode block;
    for (Index h = offset; h < offset + depth; ++h) {
        Index best = 0;
        prec_t best_mass = std::numeric_limits<prec_t>::infinity();
        for (Index a = 0; a < actions; ++a) {
            prec_t mass = 0.0;
            for (std::size_t i = 0; i < mixture.size(); ++i) mass += reach[i] * mixture[i].second.prob(h, 0, a);
            if (mass < best_mass) {
                best_mass = mass;
                best = a;
            }
        }
        for (std::size_t i = 0; i < mixture.size(); ++i) reach[i] *= mixture[i].second.prob(h, 0, best);
        block.push_back(best + 1);
    }
    return block;
}

} // namespace batchrl
