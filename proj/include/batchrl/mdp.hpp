#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace batchrl {

using Index = Eigen::Index;
using prec_t = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when the dimensions of a policy, reward or model do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Row-sum slack accepted (and repaired) when a transition model is built.
inline constexpr prec_t kRenormalizeTolerance = 1e-9;

/**
 * Raw per-layer transition table. Layer h is a (states * actions) x columns
 * matrix; row `s * actions + a` holds the successor weights of (h, s, a).
 *
 * No invariants: rows may be sub-distributions (empirical tables with
 * unvisited rows, clipped tables). Use TransitionModel for validated models.
 */
struct TransitionTable {
    Index states = 0;  ///< number of row states
    Index actions = 0;
    Index columns = 0; ///< number of successor coordinates
    std::vector<Matrix> layers;

    TransitionTable() = default;
    TransitionTable(Index states, Index actions, Index columns, Index horizon);

    Index horizon() const { return Index(layers.size()); }
    Index row_index(Index s, Index a) const { return s * actions + a; }
    auto row(Index h, Index s, Index a) { return layers[h].row(row_index(s, a)); }
    auto row(Index h, Index s, Index a) const { return layers[h].row(row_index(s, a)); }
};

/**
 * Validated episodic transition model with a fixed initial state.
 *
 * A base model has S states. An augmented model has S + 1 states where the
 * last index is the virtual absorbing state z; from z every action returns to
 * z. Every row is a probability distribution (renormalized on construction
 * when the row sum is within 1e-9 of one, rejected otherwise).
 */
class TransitionModel {
public:
    TransitionModel() = default;

    /// Takes a table whose rows cover all `table.states` states and validates it.
    /// For an augmented model, `table.states == table.columns == S + 1`.
    TransitionModel(TransitionTable table, Index initial_state, bool augmented);

    Index num_states() const { return table_.states; }
    Index num_actions() const { return table_.actions; }
    Index horizon() const { return table_.horizon(); }
    Index initial_state() const { return initial_; }
    bool augmented() const { return augmented_; }
    /// Number of real (non-virtual) states.
    Index base_states() const { return augmented_ ? table_.states - 1 : table_.states; }
    /// Index of the virtual state; only meaningful for augmented models.
    Index z() const { return table_.states - 1; }

    const Matrix& layer(Index h) const { return table_.layers[h]; }
    auto row(Index h, Index s, Index a) const { return table_.row(h, s, a); }
    prec_t prob(Index h, Index s, Index a, Index next) const {
        return table_.layers[h](table_.row_index(s, a), next);
    }
    const TransitionTable& table() const { return table_; }

private:
    TransitionTable table_;
    Index initial_ = 0;
    bool augmented_ = false;
};

/// An augmented model is a TransitionModel built with `augmented = true`.
using AugmentedModel = TransitionModel;

/// Known-reward episodic MDP: transitions, rewards in [0,1] and start state.
class TabularMDP {
public:
    TabularMDP() = default;
    /// `rewards[h]` is S x A.
    TabularMDP(TransitionModel transitions, std::vector<Matrix> rewards);

    Index num_states() const { return model_.num_states(); }
    Index num_actions() const { return model_.num_actions(); }
    Index horizon() const { return model_.horizon(); }
    Index initial_state() const { return model_.initial_state(); }
    const TransitionModel& model() const { return model_; }
    const std::vector<Matrix>& rewards() const { return rewards_; }
    prec_t reward(Index h, Index s, Index a) const { return rewards_[h](s, a); }

private:
    TransitionModel model_;
    std::vector<Matrix> rewards_;
};

/**
 * Time-indexed stochastic policy over the base states. `probs[h]` is S x A.
 * At the virtual state the policy is uniform by convention, so the same
 * policy object acts on base and augmented models.
 */
class MarkovPolicy {
public:
    MarkovPolicy() = default;
    MarkovPolicy(std::vector<Matrix> probs);

    static MarkovPolicy uniform(Index states, Index actions, Index horizon);
    /// `actions[h][s]` is the action taken.
    static MarkovPolicy deterministic(const std::vector<std::vector<Index>>& actions,
                                      Index num_actions);

    Index num_states() const { return probs_.empty() ? 0 : probs_.front().rows(); }
    Index num_actions() const { return probs_.empty() ? 0 : probs_.front().cols(); }
    Index horizon() const { return Index(probs_.size()); }

    /// Probability of `a` at (h, s); s may be the virtual state index S.
    prec_t prob(Index h, Index s, Index a) const {
        return s < num_states() ? probs_[h](s, a) : 1.0 / prec_t(num_actions());
    }
    const Matrix& layer(Index h) const { return probs_[h]; }

    friend bool operator==(const MarkovPolicy&, const MarkovPolicy&) = default;

private:
    std::vector<Matrix> probs_;
};

/**
 * Reward table u[h](s, a) over base states, plus a per-step reward earned
 * while sitting at the virtual state (0 unless an optimistic bound is wanted).
 */
struct RewardFunction {
    std::vector<Matrix> u;
    prec_t z_reward = 0.0;

    static RewardFunction zeros(Index states, Index actions, Index horizon);
    static RewardFunction constant(Index states, Index actions, Index horizon, prec_t value);
    /// Indicator of a single (h, s, a).
    static RewardFunction indicator(Index states, Index actions, Index horizon, Index h,
                                    Index s, Index a);

    Index num_states() const { return u.empty() ? 0 : u.front().rows(); }
    Index num_actions() const { return u.empty() ? 0 : u.front().cols(); }
    Index horizon() const { return Index(u.size()); }
    bool is_zero() const;

    RewardFunction with_z_reward(prec_t z) const {
        RewardFunction out = *this;
        out.z_reward = z;
        return out;
    }
    /// u + scale * other (z rewards combine the same way).
    RewardFunction plus(const RewardFunction& other, prec_t scale = 1.0) const;
};

/// Occupancy d[h](s, a); for augmented models the last row is the virtual state.
struct OccupancyTable {
    std::vector<Matrix> d;

    Index horizon() const { return Index(d.size()); }
    prec_t operator()(Index h, Index s, Index a) const { return d[h](s, a); }
    /// Probability of being in state s at step h.
    prec_t state_mass(Index h, Index s) const { return d[h].row(s).sum(); }
};

struct Step {
    Index state = 0;
    Index action = 0;
    Index next_state = 0;
};

struct Trajectory {
    std::vector<Step> steps;
    prec_t total_reward = 0.0;
};

/// Per-episode random stream.
using EpisodeRng = std::mt19937_64;

/// Counter-derived substream: identical (seed, counter) give identical streams.
EpisodeRng episode_stream(std::uint64_t master_seed, std::uint64_t counter);

/// Uniform double in [0, 1) with 53 random bits; platform independent.
inline prec_t uniform01(EpisodeRng& rng) {
    return prec_t(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw from a (row) distribution.
template <typename Derived>
Index sample_index(const Eigen::DenseBase<Derived>& weights, EpisodeRng& rng) {
    const prec_t x = uniform01(rng);
    prec_t acc = 0.0;
    Index last_positive = 0;
    for (Index i = 0; i < weights.size(); ++i) {
        if (weights(i) <= 0.0) continue;
        acc += weights(i);
        last_positive = i;
        if (x < acc) return i;
    }
    return last_positive;
}

/// Draws one episode. `rewards` may be empty (reward sum left at 0).
Trajectory sample_episode(const TransitionModel& model, const MarkovPolicy& policy,
                          EpisodeRng rng, const std::vector<Matrix>& rewards = {});
Trajectory sample_episode(const TabularMDP& mdp, const MarkovPolicy& policy, EpisodeRng rng);

/// Exact forward dynamic program for the occupancy measure of `policy` under `model`.
OccupancyTable occupancy(const TransitionModel& model, const MarkovPolicy& policy);

/// W^pi(u, p) via the occupancy measure.
prec_t general_value(const MarkovPolicy& policy, const RewardFunction& reward,
                     const TransitionModel& model);

/// Backward (Bellman) evaluation of a fixed policy. Returns V[h] over all model
/// states for h = 0..H (V[H] = 0).
std::vector<Vector> evaluate_policy(const MarkovPolicy& policy, const RewardFunction& reward,
                                    const TransitionModel& model);

/**
 * Residual of the policy-difference identity
 *   W(r,p) - W(r,p') = sum_{h,s,a} d^p_h(s,a) (p_{h,s,a} - p'_{h,s,a}) V'_{h+1},
 * where V' is the value of the policy under p'. Zero up to roundoff.
 */
prec_t policy_difference_check(const MarkovPolicy& policy, const RewardFunction& reward,
                               const TransitionModel& p, const TransitionModel& p_prime);

/// p v^2 - (p v)^2.
template <typename RowDerived, typename ValDerived>
prec_t variance(const Eigen::MatrixBase<RowDerived>& p, const Eigen::MatrixBase<ValDerived>& v) {
    const prec_t mean = p.reshaped().dot(v.reshaped());
    const prec_t second = p.reshaped().dot(v.reshaped().cwiseAbs2());
    return second - mean * mean;
}

struct OptimalValues {
    std::vector<Vector> V; ///< V[h] over model states, h = 0..H, V[H] = 0
    std::vector<Matrix> Q; ///< Q[h] base states x actions, h = 0..H-1

    /// Greedy deterministic policy, lowest action index on ties.
    MarkovPolicy greedy_policy() const;
};

/// Backward induction for max_pi W^pi(reward, model).
OptimalValues exact_optimal_value(const TransitionModel& model, const RewardFunction& reward);
OptimalValues exact_optimal_value(const TabularMDP& mdp);

/// Reward function of an MDP (z reward 0).
RewardFunction reward_of(const TabularMDP& mdp);

/// Random instance: rewards uniform in [0,1], transition rows Dirichlet(1).
TabularMDP random_mdp(Index states, Index actions, Index horizon, std::uint64_t seed);

/**
 * Reduces a start distribution to a fixed start state by prepending one step:
 * a new start state whose every action draws the original start state from
 * `initial_distribution` with reward 0. Horizon grows by one.
 */
TabularMDP with_initial_distribution(const TabularMDP& mdp, const Vector& initial_distribution);

} // namespace batchrl
