#pragma once

#include "batchrl/mdp.hpp"

#include <utility>

namespace batchrl {

/// Code symbols are 1-based action numbers.
using ActionCode = std::vector<Index>;

struct HardInstanceParams {
    Index actions = 2;
    std::int64_t K = 0;
    Index horizon = 0;
    Index depth = 0;  ///< d = floor(2 log_A K) + 2
    Index blocks = 0; ///< c = floor(H / (2d))

    /// Throws std::invalid_argument when H < 2d or A < 2.
    static HardInstanceParams make(Index actions, Index horizon, std::int64_t K);
};

/// floor(2 log_A K) + 2, with a 1e-12 upward nudge before the floor.
Index hard_depth(Index actions, std::int64_t K);

/**
 * Two states over d steps: at s0 the coded action stays at s0, every other
 * action moves to the absorbing s1. All rewards are 0. Start at s0.
 */
TabularMDP basic_hard_mdp(Index actions, const ActionCode& code);

/**
 * c coded blocks back to back, then the state is kept until H with reward 1
 * at s0 on every step after the blocks.
 */
TabularMDP concatenated_hard_mdp(Index actions, Index horizon, std::int64_t K,
                                 const ActionCode& code);

using PolicyMixture = std::vector<std::pair<prec_t, MarkovPolicy>>;

/**
 * Next d code symbols against a finite policy mixture. Policies act on the
 * (prefix + block) chain; the block begins at step prefix.size(). Symbol h
 * minimizes the mixture's probability of still being at s0 after step h,
 * evaluated exactly on the chain built so far (lowest action on ties).
 */
ActionCode adversarial_code(const PolicyMixture& mixture, Index actions, Index depth,
                            const ActionCode& prefix = {});

/// Probability that the mixture is at s0 after the first `steps` steps of `code`.
prec_t mixture_reach_probability(const PolicyMixture& mixture, Index actions,
                                 const ActionCode& code, Index steps);

} // namespace batchrl
