#pragma once

#include "batchrl/confidence.hpp"
#include "batchrl/lp.hpp"

namespace batchrl {

/// Optimistic policy and model with their value tables.
struct EviResult {
    MarkovPolicy policy;
    TransitionModel model;       ///< augmented, attains every cell-wise optimum
    std::vector<Vector> V;       ///< V[h] over S + 1 states, h = 0..H, V[H] = 0
    std::vector<Matrix> Q;       ///< Q[h] is S x A
    Index initial_state = 0;

    prec_t value() const { return V.front()(initial_state); }
};

/**
 * Extended value iteration: backward induction where every (h, s, a) also
 * picks its successor distribution from the cell, maximizing u + q V_{h+1}.
 * The virtual state earns `reward.z_reward` per step.
 */
EviResult evi(const RewardFunction& reward, const ConfidenceRegion& region);

struct ConfidenceBounds {
    prec_t max_upper = 0.0; ///< max_pi U^pi(u, region), z earns reward.z_reward
    prec_t max_lower = 0.0; ///< max_pi L^pi(u, region), z earns nothing
};

ConfidenceBounds ucb_lcb(const RewardFunction& reward, const ConfidenceRegion& region);

/// U^pi(u, region) = max over members of W^pi(u, p).
prec_t policy_upper(const MarkovPolicy& policy, const RewardFunction& reward,
                    const ConfidenceRegion& region);
/// L^pi(u, region) = min over members of W^pi(u, p).
prec_t policy_lower(const MarkovPolicy& policy, const RewardFunction& reward,
                    const ConfidenceRegion& region);

/// The full V table of evi (every starting pair).
std::vector<Vector> extended_value_table(const ConfidenceRegion& region,
                                         const RewardFunction& reward);

} // namespace batchrl
