#include "batchrl/evi.hpp"

#include <stdexcept>

namespace batchrl {

namespace {

void check_shapes(const RewardFunction& reward, const ConfidenceRegion& region) {
    if (reward.horizon() != region.horizon() || reward.num_states() != region.num_states() ||
        reward.num_actions() != region.num_actions())
        throw DimensionError("reward and region have different shapes");
}

LPResult solve_cell(const ConfidenceCell& cell, const Vector& v, bool maximize) {
    LPResult r = maximize ? lp_max_over_cell(cell, v) : lp_min_over_cell(cell, v);
    if (!r.optimal()) throw std::runtime_error("infeasible confidence cell");
    return r;
}

// Backward pass with a fixed policy (or, when `policy` is null, the greedy one).
// `maximize` selects U (true) or L (false) for the successor choice.
std::vector<Vector> robust_sweep(const MarkovPolicy* policy, const RewardFunction& reward,
                                 const ConfidenceRegion& region, bool maximize,
                                 prec_t z_reward) {
    check_shapes(reward, region);
    const Index S = region.num_states();
    const Index A = region.num_actions();
    const Index H = region.horizon();
    std::vector<Vector> V(std::size_t(H + 1), Vector::Zero(S + 1));
    for (Index h = H - 1; h >= 0; --h) {
        V[h](S) = z_reward + V[h + 1](S);
        for (Index s = 0; s < S; ++s) {
            prec_t best = -std::numeric_limits<prec_t>::infinity();
            prec_t mean = 0.0;
            for (Index a = 0; a < A; ++a) {
                const prec_t w = policy ? policy->prob(h, s, a) : 1.0;
                if (policy && w == 0.0) continue;
                const prec_t q =
                    reward.u[h](s, a) + solve_cell(region.cell(h, s, a), V[h + 1], maximize).value;
                best = std::max(best, q);
                mean += w * q;
            }
            V[h](s) = policy ? mean : best;
        }
    }
    return V;
}

} // namespace

EviResult evi(const RewardFunction& reward, const ConfidenceRegion& region) {
    check_shapes(reward, region);
    const Index S = region.num_states();
    const Index A = region.num_actions();
    const Index H = region.horizon();

    EviResult out;
    out.initial_state = region.initial_state();
    out.V.assign(std::size_t(H + 1), Vector::Zero(S + 1));
    out.Q.assign(std::size_t(H), Matrix::Zero(S, A));
    TransitionTable table(S + 1, A, S + 1, H);
    std::vector<std::vector<Index>> actions(std::size_t(H), std::vector<Index>(std::size_t(S), 0));

    for (Index h = H - 1; h >= 0; --h) {
        const Vector& next = out.V[h + 1];
        out.V[h](S) = reward.z_reward + next(S);
        for (Index a = 0; a < A; ++a) table.row(h, S, a)(S) = 1.0;
        for (Index s = 0; s < S; ++s) {
            Index best = 0;
            for (Index a = 0; a < A; ++a) {
                const LPResult r = solve_cell(region.cell(h, s, a), next, true);
                out.Q[h](s, a) = reward.u[h](s, a) + r.value;
                table.row(h, s, a) = r.argmax.transpose();
                if (out.Q[h](s, a) > out.Q[h](s, best)) best = a;
            }
            actions[h][s] = best;
            out.V[h](s) = out.Q[h](s, best);
        }
    }
    out.policy = MarkovPolicy::deterministic(actions, A);
    out.model = TransitionModel(std::move(table), region.initial_state(), true);
    return out;
}

ConfidenceBounds ucb_lcb(const RewardFunction& reward, const ConfidenceRegion& region) {
    ConfidenceBounds b;
    const Index s1 = region.initial_state();
    b.max_upper = robust_sweep(nullptr, reward, region, true, reward.z_reward).front()(s1);
    b.max_lower = robust_sweep(nullptr, reward, region, false, 0.0).front()(s1);
    return b;
}

prec_t policy_upper(const MarkovPolicy& policy, const RewardFunction& reward,
                    const ConfidenceRegion& region) {
    return robust_sweep(&policy, reward, region, true, reward.z_reward)
        .front()(region.initial_state());
}

prec_t policy_lower(const MarkovPolicy& policy, const RewardFunction& reward,
                    const ConfidenceRegion& region) {
    return robust_sweep(&policy, reward, region, false, 0.0).front()(region.initial_state());
}

std::vector<Vector> extended_value_table(const ConfidenceRegion& region,
                                         const RewardFunction& reward) {
    return evi(reward, region).V;
}

} // namespace batchrl
