#pragma once

#include "batchrl/policy_ops.hpp"

#include <optional>
#include <string>

namespace batchrl {

/// Thrown by make_schedule when H (k1 + k2) >= K.
class BudgetInfeasible : public std::runtime_error {
public:
    BudgetInfeasible(const std::string& what, std::int64_t minimal_K, prec_t scale_factor)
        : std::runtime_error(what), minimal_K(minimal_K), scale_factor(scale_factor) {}

    std::int64_t minimal_K; ///< smallest K that is feasible with the same constants
    prec_t scale_factor;    ///< multiplying both scales by this restores feasibility at this K
};

/// Fixed batch lengths, decided before any episode runs.
struct BatchSchedule {
    std::int64_t K = 0;
    Index horizon = 0;
    prec_t iota = 0.0;
    std::int64_t k1 = 0;                   ///< per-batch length, stage 1
    std::int64_t k2 = 0;                   ///< per-batch length, stage 2
    Index M = 0;                           ///< ceil(log2 log2 K)
    std::vector<std::int64_t> elimination; ///< K_1..K_M

    std::int64_t stage3_budget() const { return K - horizon * (k1 + k2); }
    /// Episodes actually run by each elimination batch; the budget is cut at
    /// the first batch it runs out in and the last batch takes what remains.
    /// Zero-length batches are dropped.
    std::vector<std::int64_t> executed_elimination() const;
    /// 2H plus the number of executed elimination batches.
    Index total_batches() const;
};

/// K_m = ceil(K^(1 - 2^-m)) for m = 1..M.
std::vector<std::int64_t> elimination_lengths(std::int64_t K);
Index elimination_rounds(std::int64_t K);

BatchSchedule make_schedule(Index states, Index actions, Index horizon, std::int64_t K,
                            prec_t delta, prec_t c1_scale = 1.0, prec_t c2_scale = 1.0);

struct LearnerConfig {
    prec_t delta = 0.1;
    prec_t c1_scale = 1.0;
    prec_t c2_scale = 1.0;
    prec_t C1 = 200.0;     ///< known-set threshold constant
    Index n_design = 0;    ///< 0 selects ceil(4 S A H ln(K + 1))
    prec_t epsilon = 0.0;  ///< 0 selects max((SAHK)^-10, 1e-12)

    static LearnerConfig paper();
    /// Scaled-down constants that fit K around 1e4 to 1e5 on small instances.
    static LearnerConfig desk();
};

/**
 * What the learner may see of the world: dimensions, the known reward and a
 * way to run episodes. Episode i draws from substream (seed, i).
 */
class Environment {
public:
    Environment(const TabularMDP& mdp, std::uint64_t seed) : mdp_(&mdp), seed_(seed) {}

    Index num_states() const { return mdp_->num_states(); }
    Index num_actions() const { return mdp_->num_actions(); }
    Index horizon() const { return mdp_->horizon(); }
    Index initial_state() const { return mdp_->initial_state(); }
    RewardFunction reward() const { return reward_of(*mdp_); }
    std::int64_t episodes_run() const { return counter_; }

    std::vector<Trajectory> run_batch(const MarkovPolicy& policy, std::int64_t episodes);

private:
    const TabularMDP* mdp_;
    std::uint64_t seed_;
    std::int64_t counter_ = 0;
};

struct BatchRecord {
    Index stage = 0;               ///< 1, 2 or 3
    std::int64_t first_episode = 0;
    std::int64_t length = 0;
    MarkovPolicy policy;
    Index known_set_size = 0;
    Index max_constraints = 0;
    std::optional<prec_t> design_gap;     ///< U - L of the deployed policy (diagnostic)
    std::optional<prec_t> optimistic_gap; ///< U - L of the EVI-optimistic policy (diagnostic)
    Index non_survivors = 0;
    std::vector<Vector> values;           ///< stage 3: optimistic value table of the batch's region
};

struct RunLog {
    BatchSchedule schedule;
    std::uint64_t seed = 0;
    std::vector<prec_t> rewards;      ///< realized return per episode
    std::vector<BatchRecord> batches;
    std::vector<prec_t> regret;       ///< expected per-episode regret (attach_regret)
    std::vector<prec_t> cum_regret;
    prec_t optimal_value = 0.0;
    bool truncated = false;
    std::string abort_reason;
    Index known_set_size = 0;
    double wall_seconds = 0.0;

    std::int64_t episodes() const { return std::int64_t(rewards.size()); }
    /// Batch index of every episode.
    std::vector<Index> batch_index() const;
};

/**
 * One raw-exploration stage: H batches of k episodes. Batch h deploys the
 * uniform mixture of per-(s, a) searched policies on steps before h and
 * the uniform policy from step h on. Appends to `log`; the last batch's own
 * counts go to `last_batch` when given.
 */
TransitionCounts raw_exploration(const RewardFunction& u, TransitionCounts counts,
                                 std::int64_t k, Environment& env, const LearnerConfig& cfg,
                                 Index stage, RunLog& log, TransitionCounts* last_batch = nullptr);

/// Stage 3: freeze the known set, then shrink the region batch by batch.
void policy_elimination(TransitionCounts counts, const TransitionCounts& last_batch,
                        const BatchSchedule& schedule, Environment& env,
                        const LearnerConfig& cfg, RunLog& log);

/// All three stages for K episodes.
RunLog run_main(const TabularMDP& env, std::int64_t K, const LearnerConfig& cfg,
                std::uint64_t seed);

/// Uniform-random policy for all K episodes in one batch.
RunLog run_baseline_uniform(const TabularMDP& env, std::int64_t K, std::uint64_t seed);

/// Fills regret and cum_regret from the true environment.
void attach_regret(RunLog& log, const TabularMDP& env);

} // namespace batchrl
