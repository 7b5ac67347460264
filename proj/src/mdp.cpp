#include "batchrl/mdp.hpp"

#include <cmath>
#include <string>

namespace batchrl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void require(bool cond, const std::string& what) {
    if (!cond) throw DimensionError(what);
}

void check_policy(const TransitionModel& model, const MarkovPolicy& policy) {
    require(policy.horizon() == model.horizon(), "policy horizon does not match model");
    require(policy.num_actions() == model.num_actions(), "policy action count does not match model");
    require(policy.num_states() == model.base_states(), "policy state count does not match model");
}

void check_reward(const TransitionModel& model, const RewardFunction& reward) {
    require(reward.horizon() == model.horizon(), "reward horizon does not match model");
    require(reward.num_actions() == model.num_actions(), "reward action count does not match model");
    require(reward.num_states() == model.base_states(), "reward state count does not match model");
}

// Reward of (h, s, a) on the model's state space, z included.
prec_t reward_at(const RewardFunction& reward, const TransitionModel& model, Index h, Index s,
                 Index a) {
    if (model.augmented() && s == model.z()) return reward.z_reward;
    return reward.u[h](s, a);
}

} // namespace

TransitionTable::TransitionTable(Index states, Index actions, Index columns, Index horizon)
    : states(states), actions(actions), columns(columns),
      layers(std::size_t(horizon), Matrix::Zero(states * actions, columns)) {}

TransitionModel::TransitionModel(TransitionTable table, Index initial_state, bool augmented)
    : table_(std::move(table)), initial_(initial_state), augmented_(augmented) {
    require(table_.states > 0 && table_.actions > 0 && table_.horizon() > 0,
            "transition model needs positive dimensions");
    require(table_.columns == table_.states, "transition table must be square in states");
    require(initial_ >= 0 && initial_ < base_states(), "initial state out of range");
    if (augmented_) require(table_.states >= 2, "augmented model needs a base state and z");
    for (Index h = 0; h < horizon(); ++h) {
        Matrix& layer = table_.layers[h];
        require(layer.rows() == table_.states * table_.actions && layer.cols() == table_.columns,
                "transition layer has wrong shape");
        for (Index r = 0; r < layer.rows(); ++r) {
            if ((layer.row(r).array() < 0.0).any() || !layer.row(r).allFinite())
                throw std::invalid_argument("transition row has negative or non-finite entries");
            const prec_t sum = layer.row(r).sum();
            if (std::abs(sum - 1.0) > kRenormalizeTolerance)
                throw std::invalid_argument("transition row does not sum to one");
            if (std::abs(sum - 1.0) > 1e-14) layer.row(r) /= sum;
        }
        if (augmented_) {
            for (Index a = 0; a < table_.actions; ++a) {
                const auto zrow = table_.row(h, z(), a);
                if (zrow(z()) != 1.0)
                    throw std::invalid_argument("virtual state must be absorbing");
            }
        }
    }
}

TabularMDP::TabularMDP(TransitionModel transitions, std::vector<Matrix> rewards)
    : model_(std::move(transitions)), rewards_(std::move(rewards)) {
    require(!model_.augmented(), "an MDP is defined over base states only");
    require(Index(rewards_.size()) == model_.horizon(), "reward horizon does not match model");
    for (const auto& r : rewards_) {
        require(r.rows() == model_.num_states() && r.cols() == model_.num_actions(),
                "reward layer has wrong shape");
        if (!r.allFinite() || (r.array() < 0.0).any() || (r.array() > 1.0).any())
            throw std::invalid_argument("rewards must lie in [0, 1]");
    }
}

MarkovPolicy::MarkovPolicy(std::vector<Matrix> probs) : probs_(std::move(probs)) {
    require(!probs_.empty(), "policy needs a positive horizon");
    for (auto& layer : probs_) {
        require(layer.rows() == probs_.front().rows() && layer.cols() == probs_.front().cols(),
                "policy layers must share a shape");
        for (Index s = 0; s < layer.rows(); ++s) {
            if ((layer.row(s).array() < 0.0).any() || !layer.row(s).allFinite())
                throw std::invalid_argument("policy row has negative or non-finite entries");
            const prec_t sum = layer.row(s).sum();
            if (std::abs(sum - 1.0) > kRenormalizeTolerance)
                throw std::invalid_argument("policy row does not sum to one");
            if (std::abs(sum - 1.0) > 1e-14) layer.row(s) /= sum;
        }
    }
}

MarkovPolicy MarkovPolicy::uniform(Index states, Index actions, Index horizon) {
    return MarkovPolicy(std::vector<Matrix>(std::size_t(horizon),
                                            Matrix::Constant(states, actions, 1.0 / prec_t(actions))));
}

MarkovPolicy MarkovPolicy::deterministic(const std::vector<std::vector<Index>>& actions,
                                         Index num_actions) {
    std::vector<Matrix> probs;
    for (const auto& layer : actions) {
        Matrix m = Matrix::Zero(Index(layer.size()), num_actions);
        for (std::size_t s = 0; s < layer.size(); ++s) m(Index(s), layer[s]) = 1.0;
        probs.push_back(std::move(m));
    }
    return MarkovPolicy(std::move(probs));
}

RewardFunction RewardFunction::zeros(Index states, Index actions, Index horizon) {
    return constant(states, actions, horizon, 0.0);
}

RewardFunction RewardFunction::constant(Index states, Index actions, Index horizon, prec_t value) {
    return {std::vector<Matrix>(std::size_t(horizon), Matrix::Constant(states, actions, value)), 0.0};
}

RewardFunction RewardFunction::indicator(Index states, Index actions, Index horizon, Index h,
                                         Index s, Index a) {
    RewardFunction r = zeros(states, actions, horizon);
    r.u[h](s, a) = 1.0;
    return r;
}

bool RewardFunction::is_zero() const {
    if (z_reward != 0.0) return false;
    for (const auto& layer : u)
        if (!layer.isZero(0.0)) return false;
    return true;
}

RewardFunction RewardFunction::plus(const RewardFunction& other, prec_t scale) const {
    require(other.horizon() == horizon(), "reward horizons differ");
    RewardFunction out = *this;
    for (std::size_t h = 0; h < u.size(); ++h) out.u[h] += scale * other.u[h];
    out.z_reward += scale * other.z_reward;
    return out;
}

EpisodeRng episode_stream(std::uint64_t master_seed, std::uint64_t counter) {
    const std::uint64_t a = splitmix64(master_seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{std::uint32_t(b), std::uint32_t(b >> 32), std::uint32_t(a), std::uint32_t(a >> 32)};
    return EpisodeRng(seq);
}

Trajectory sample_episode(const TransitionModel& model, const MarkovPolicy& policy, EpisodeRng rng,
                          const std::vector<Matrix>& rewards) {
    check_policy(model, policy);
    Trajectory traj;
    traj.steps.reserve(std::size_t(model.horizon()));
    Index s = model.initial_state();
    for (Index h = 0; h < model.horizon(); ++h) {
        Index a = 0;
        if (s < policy.num_states()) {
            a = sample_index(policy.layer(h).row(s), rng);
        } else {
            a = Index(uniform01(rng) * prec_t(model.num_actions()));
            if (a >= model.num_actions()) a = model.num_actions() - 1;
        }
        const Index next = sample_index(model.row(h, s, a), rng);
        if (!rewards.empty() && s < rewards[h].rows()) traj.total_reward += rewards[h](s, a);
        traj.steps.push_back({s, a, next});
        s = next;
    }
    return traj;
}

Trajectory sample_episode(const TabularMDP& mdp, const MarkovPolicy& policy, EpisodeRng rng) {
    return sample_episode(mdp.model(), policy, std::move(rng), mdp.rewards());
}

OccupancyTable occupancy(const TransitionModel& model, const MarkovPolicy& policy) {
    check_policy(model, policy);
    const Index n = model.num_states();
    const Index A = model.num_actions();
    OccupancyTable occ;
    occ.d.reserve(std::size_t(model.horizon()));

    Vector mu = Vector::Zero(n);
    mu(model.initial_state()) = 1.0;
    for (Index h = 0; h < model.horizon(); ++h) {
        Matrix d(n, A);
        for (Index s = 0; s < n; ++s)
            for (Index a = 0; a < A; ++a) d(s, a) = mu(s) * policy.prob(h, s, a);
        // Flattened (s, a) row-major matches the table's row index s * A + a.
        const Matrix dt = d.transpose();
        mu = model.layer(h).transpose() * dt.reshaped();
        occ.d.push_back(std::move(d));
    }
    return occ;
}

prec_t general_value(const MarkovPolicy& policy, const RewardFunction& reward,
                     const TransitionModel& model) {
    check_reward(model, reward);
    const OccupancyTable occ = occupancy(model, policy);
    prec_t total = 0.0;
    for (Index h = 0; h < model.horizon(); ++h) {
        total += occ.d[h].topRows(model.base_states()).cwiseProduct(reward.u[h]).sum();
        if (model.augmented()) total += reward.z_reward * occ.d[h].row(model.z()).sum();
    }
    return total;
}

std::vector<Vector> evaluate_policy(const MarkovPolicy& policy, const RewardFunction& reward,
                                    const TransitionModel& model) {
    check_policy(model, policy);
    check_reward(model, reward);
    const Index n = model.num_states();
    const Index A = model.num_actions();
    const Index H = model.horizon();
    std::vector<Vector> V(std::size_t(H + 1), Vector::Zero(n));
    for (Index h = H - 1; h >= 0; --h) {
        const Vector next = model.layer(h) * V[h + 1];
        for (Index s = 0; s < n; ++s) {
            prec_t v = 0.0;
            for (Index a = 0; a < A; ++a)
                v += policy.prob(h, s, a) * (reward_at(reward, model, h, s, a) + next(s * A + a));
            V[h](s) = v;
        }
    }
    return V;
}

prec_t policy_difference_check(const MarkovPolicy& policy, const RewardFunction& reward,
                               const TransitionModel& p, const TransitionModel& p_prime) {
    require(p.num_states() == p_prime.num_states() && p.num_actions() == p_prime.num_actions() &&
                p.horizon() == p_prime.horizon(),
            "models must share dimensions");
    const prec_t w = general_value(policy, reward, p);
    const prec_t w_prime = general_value(policy, reward, p_prime);
    const OccupancyTable occ = occupancy(p, policy);
    const std::vector<Vector> v_prime = evaluate_policy(policy, reward, p_prime);
    prec_t sum = 0.0;
    for (Index h = 0; h < p.horizon(); ++h) {
        const Vector diff = (p.layer(h) - p_prime.layer(h)) * v_prime[h + 1];
        for (Index s = 0; s < p.num_states(); ++s)
            for (Index a = 0; a < p.num_actions(); ++a)
                sum += occ.d[h](s, a) * diff(s * p.num_actions() + a);
    }
    return std::abs(w - w_prime - sum);
}

MarkovPolicy OptimalValues::greedy_policy() const {
    std::vector<Matrix> probs;
    for (const auto& q : Q) {
        Matrix m = Matrix::Zero(q.rows(), q.cols());
        for (Index s = 0; s < q.rows(); ++s) {
            Index best = 0;
            for (Index a = 1; a < q.cols(); ++a)
                if (q(s, a) > q(s, best)) best = a;
            m(s, best) = 1.0;
        }
        probs.push_back(std::move(m));
    }
    return MarkovPolicy(std::move(probs));
}

OptimalValues exact_optimal_value(const TransitionModel& model, const RewardFunction& reward) {
    check_reward(model, reward);
    const Index n = model.num_states();
    const Index S = model.base_states();
    const Index A = model.num_actions();
    const Index H = model.horizon();
    OptimalValues out;
    out.V.assign(std::size_t(H + 1), Vector::Zero(n));
    out.Q.assign(std::size_t(H), Matrix::Zero(S, A));
    for (Index h = H - 1; h >= 0; --h) {
        const Vector next = model.layer(h) * out.V[h + 1];
        for (Index s = 0; s < S; ++s) {
            for (Index a = 0; a < A; ++a) out.Q[h](s, a) = reward.u[h](s, a) + next(s * A + a);
            out.V[h](s) = out.Q[h].row(s).maxCoeff();
        }
        if (model.augmented()) out.V[h](model.z()) = reward.z_reward + out.V[h + 1](model.z());
    }
    return out;
}

OptimalValues exact_optimal_value(const TabularMDP& mdp) {
    return exact_optimal_value(mdp.model(), reward_of(mdp));
}

RewardFunction reward_of(const TabularMDP& mdp) { return {mdp.rewards(), 0.0}; }

TabularMDP random_mdp(Index states, Index actions, Index horizon, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<prec_t> expo(1.0);
    std::uniform_real_distribution<prec_t> unit(0.0, 1.0);
    TransitionTable table(states, actions, states, horizon);
    std::vector<Matrix> rewards;
    for (Index h = 0; h < horizon; ++h) {
        for (Index r = 0; r < states * actions; ++r) {
            for (Index s = 0; s < states; ++s) table.layers[h](r, s) = expo(rng);
            table.layers[h].row(r) /= table.layers[h].row(r).sum();
        }
        Matrix rew(states, actions);
        for (Index s = 0; s < states; ++s)
            for (Index a = 0; a < actions; ++a) rew(s, a) = unit(rng);
        rewards.push_back(std::move(rew));
    }
    return TabularMDP(TransitionModel(std::move(table), 0, false), std::move(rewards));
}

TabularMDP with_initial_distribution(const TabularMDP& mdp, const Vector& initial_distribution) {
    const Index S = mdp.num_states();
    const Index A = mdp.num_actions();
    const Index H = mdp.horizon();
    require(initial_distribution.size() == S, "initial distribution has wrong size");
    TransitionTable table(S + 1, A, S + 1, H + 1);
    std::vector<Matrix> rewards;
    rewards.push_back(Matrix::Zero(S + 1, A));
    for (Index a = 0; a < A; ++a) {
        table.row(0, S, a).head(S) = initial_distribution.transpose();
        for (Index s = 0; s < S; ++s) table.row(0, s, a)(s) = 1.0; // unreachable at step 1
    }
    for (Index h = 0; h < H; ++h) {
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < A; ++a) table.row(h + 1, s, a).head(S) = mdp.model().row(h, s, a);
        for (Index a = 0; a < A; ++a) table.row(h + 1, S, a)(S) = 1.0; // unreachable after step 1
        Matrix r = Matrix::Zero(S + 1, A);
        r.topRows(S) = mdp.rewards()[h];
        rewards.push_back(std::move(r));
    }
    return TabularMDP(TransitionModel(std::move(table), S, false), std::move(rewards));
}

} // namespace batchrl
