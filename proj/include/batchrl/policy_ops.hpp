#pragma once

#include "batchrl/evi.hpp"

#include <string>

namespace batchrl {

struct PolicyModel {
    MarkovPolicy policy;
    TransitionModel model;
};

struct WeightedPolicy {
    prec_t weight = 0.0;
    MarkovPolicy policy;
    TransitionModel model;
};

using WeightedPolicyList = std::vector<WeightedPolicy>;

struct DesignConfig {
    Index n_design = 1;
    prec_t epsilon = 1e-12;
    prec_t gap_tol = 0.0; ///< passed to policy_search

    /// n_design = ceil(4 S A H ln(K + 1)), epsilon = max((SAHK)^-10, 1e-12),
    /// gap_tol = K^-3.
    static DesignConfig defaults(Index states, Index actions, Index horizon, std::int64_t K);
};

/// (SAHK)^-10 floored at 1e-12.
prec_t search_epsilon(Index states, Index actions, Index horizon, std::int64_t K);

/**
 * Single (policy, model) pair whose occupancy is the lambda-mixture of the
 * two inputs' occupancies at every (h, s, a).
 */
PolicyModel mix_two(prec_t lambda, const PolicyModel& first, const PolicyModel& second);

/// Left fold of mix_two over a normalized weighted list.
PolicyModel sum(const WeightedPolicyList& list);

struct PolicySearchResult {
    MarkovPolicy policy;
    TransitionModel model;
    prec_t a = 0.0;              ///< max_pi U^pi(u + 1_z)
    prec_t b = 0.0;              ///< max_pi L^pi(u)
    prec_t xi = 0.0;             ///< interpolation weight when mixed
    std::vector<prec_t> etas;    ///< eta sequence tried
    std::string exit;            ///< which branch returned
    prec_t survivor_value = 0.0; ///< U^pi(u + 1_z) of the returned policy
    bool survivor = true;        ///< survivor_value >= b - 1e-8
};

/**
 * Constrained search: among policies whose optimistic value of u (with
 * reward 1 at z) stays above the best pessimistic value b, find one with
 * large value of u'. Doubles eta in EVI(u + 1_z + eta u') until the value
 * of u falls to b, then interpolates between the last two iterates.
 *
 * `bounds` may carry a precomputed ucb_lcb(u + 1_z, region).
 */
PolicySearchResult policy_search(const RewardFunction& u, const RewardFunction& u_prime,
                                 const ConfidenceRegion& region, prec_t epsilon,
                                 prec_t gap_tol = 0.0, const ConfidenceBounds* bounds = nullptr);

struct DesignTrace {
    std::vector<std::string> exits;
    std::vector<prec_t> min_coverage; ///< min_{h,s,a} sum of previous occupancies per iteration
    Index non_survivors = 0;
};

/**
 * Iterated reciprocal-coverage search. Uses a fixed member p of the region,
 * rewards r^i = min(1 / sum_{j<i} d^{pi_j}_p, 1) and returns the uniform
 * mixture of the n_design searched policies.
 */
MarkovPolicy design(const ConfidenceRegion& region, const RewardFunction& reward,
                    const DesignConfig& cfg, DesignTrace* trace = nullptr);

struct OptimalDesignResult {
    Vector lambda;
    prec_t coverage = 0.0; ///< max_j sum_i x^j_i / y_i at lambda
    prec_t bound = 0.0;    ///< number of coordinates carrying mass
    Index iterations = 0;
    bool converged = false;
};

/**
 * Maximizes sum_i ln(sum_j lambda_j x^j_i) over the simplex by projected
 * gradient ascent. Profiles are flattened into vectors of equal length.
 */
OptimalDesignResult optimal_design(const std::vector<Vector>& profiles, Index max_steps = 200000,
                                   prec_t tolerance = 1e-4);

} // namespace batchrl
