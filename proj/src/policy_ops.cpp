#include "batchrl/policy_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace batchrl {

prec_t search_epsilon(Index states, Index actions, Index horizon, std::int64_t K) {
    const prec_t base = prec_t(states) * prec_t(actions) * prec_t(horizon) * prec_t(K);
    return std::max(std::pow(base, -10.0), 1e-12);
}

DesignConfig DesignConfig::defaults(Index states, Index actions, Index horizon, std::int64_t K) {
    DesignConfig cfg;
    const prec_t sah = prec_t(states * actions * horizon);
    cfg.n_design = std::max<Index>(1, Index(std::ceil(4.0 * sah * std::log(prec_t(K) + 1.0))));
    cfg.epsilon = search_epsilon(states, actions, horizon, K);
    cfg.gap_tol = std::pow(prec_t(K), -3.0);
    return cfg;
}

PolicyModel mix_two(prec_t lambda, const PolicyModel& first, const PolicyModel& second) {
    const TransitionModel& m1 = first.model;
    const TransitionModel& m2 = second.model;
    if (m1.num_states() != m2.num_states() || m1.num_actions() != m2.num_actions() ||
        m1.horizon() != m2.horizon() || m1.augmented() != m2.augmented() ||
        m1.initial_state() != m2.initial_state())
        throw DimensionError("mix_two: models have different shapes");
    if (!(first.policy.num_states() == m1.base_states() && second.policy.num_states() == m1.base_states() &&
          first.policy.num_actions() == m1.num_actions() &&
          second.policy.num_actions() == m1.num_actions() &&
          first.policy.horizon() == m1.horizon() && second.policy.horizon() == m1.horizon()))
        throw DimensionError("mix_two: policies do not match the models");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("mix_two: lambda outside [0, 1]");
    if (lambda == 1.0) return first;
    if (lambda == 0.0) return second;

    const Index S = m1.base_states();
    const Index N = m1.num_states();
    const Index A = m1.num_actions();
    const Index H = m1.horizon();
    const OccupancyTable d1 = occupancy(m1, first.policy);
    const OccupancyTable d2 = occupancy(m2, second.policy);

    std::vector<Matrix> probs(std::size_t(H), Matrix::Constant(S, A, 1.0 / prec_t(A)));
    TransitionTable table(N, A, m1.table().columns, H);
    for (Index h = 0; h < H; ++h) {
        const Matrix d = lambda * d1.d[h] + (1.0 - lambda) * d2.d[h];
        for (Index s = 0; s < S; ++s) {
            const prec_t mass = d.row(s).sum();
            if (mass > 0.0) probs[h].row(s) = d.row(s) / mass;
        }
        for (Index s = 0; s < N; ++s)
            for (Index a = 0; a < A; ++a) {
                if (d(s, a) > 0.0) {
                    const prec_t w = std::clamp(lambda * d1.d[h](s, a) / d(s, a), 0.0, 1.0);
                    table.row(h, s, a) = w * m1.row(h, s, a) + (1.0 - w) * m2.row(h, s, a);
                } else {
                    table.row(h, s, a) = m1.row(h, s, a);
                }
            }
    }
    return {MarkovPolicy(std::move(probs)),
            TransitionModel(std::move(table), m1.initial_state(), m1.augmented())};
}

PolicyModel sum(const WeightedPolicyList& list) {
    if (list.empty()) throw std::invalid_argument("sum: empty policy list");
    prec_t total = 0.0;
    for (const auto& item : list) {
        if (!(item.weight >= 0.0)) throw std::invalid_argument("sum: negative weight");
        total += item.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("sum: weights must sum to one");

    PolicyModel acc{list.front().policy, list.front().model};
    prec_t acc_weight = list.front().weight;
    for (std::size_t i = 1; i < list.size(); ++i) {
        const prec_t w = list[i].weight;
        if (acc_weight + w <= 0.0) {
            acc = {list[i].policy, list[i].model};
            continue;
        }
        acc = mix_two(acc_weight / (acc_weight + w), acc, {list[i].policy, list[i].model});
        acc_weight += w;
    }
    return acc;
}

PolicySearchResult policy_search(const RewardFunction& u, const RewardFunction& u_prime,
                                 const ConfidenceRegion& region, prec_t epsilon, prec_t gap_tol,
                                 const ConfidenceBounds* bounds) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("policy_search: epsilon must be positive");
    const RewardFunction base = u.with_z_reward(0.0);
    const RewardFunction tilde = u.with_z_reward(1.0);
    const RewardFunction explore = u_prime.with_z_reward(0.0);

    PolicySearchResult out;
    const ConfidenceBounds ab = bounds ? *bounds : ucb_lcb(tilde, region);
    out.a = ab.max_upper;
    out.b = ab.max_lower;

    auto finish = [&](PolicyModel pm, std::string exit) {
        out.policy = std::move(pm.policy);
        out.model = std::move(pm.model);
        out.exit = std::move(exit);
        out.survivor_value = policy_upper(out.policy, tilde, region);
        out.survivor = out.survivor_value >= out.b - 1e-8;
        return out;
    };
    auto optimistic = [&](prec_t eta) {
        EviResult e = evi(tilde.plus(explore, eta), region);
        return PolicyModel{std::move(e.policy), std::move(e.model)};
    };

    const prec_t w_prime = evi(explore, region).value();
    if (!(w_prime > 0.0)) return finish(optimistic(0.0), "zero_u_prime");

    prec_t eta = 0.0;
    if (out.a - out.b > gap_tol) {
        eta = (out.a - out.b) / (2.0 * w_prime);
    } else if (u.is_zero()) {
        eta = 1.0 / w_prime;
    } else {
        return finish(optimistic(0.0), "near_optimal");
    }

    PolicyModel previous;
    prec_t previous_value = 0.0;
    for (int i = 0;; ++i) {
        out.etas.push_back(eta);
        PolicyModel current = optimistic(eta);
        if (eta * epsilon >= 1.0) return finish(std::move(current), "eta_cap");
        const prec_t value = general_value(current.policy, base, current.model);
        if (value <= out.b) {
            if (i == 0) return finish(std::move(current), "first");
            out.xi = std::clamp((out.b - value) / (previous_value - value), 0.0, 1.0);
            return finish(mix_two(out.xi, previous, current), "interpolated");
        }
        previous = std::move(current);
        previous_value = value;
        eta *= 2.0;
    }
}

MarkovPolicy design(const ConfidenceRegion& region, const RewardFunction& reward,
                    const DesignConfig& cfg, DesignTrace* trace) {
    if (cfg.n_design < 1) throw std::invalid_argument("design: n_design must be positive");
    const Index S = region.num_states();
    const Index A = region.num_actions();
    const Index H = region.horizon();
    const TransitionModel p = region_member(region);
    const ConfidenceBounds ab = ucb_lcb(reward.with_z_reward(1.0), region);

    std::vector<Matrix> coverage(std::size_t(H), Matrix::Zero(S, A));
    WeightedPolicyList iterates;
    iterates.reserve(std::size_t(cfg.n_design));
    const prec_t w = 1.0 / prec_t(cfg.n_design);
    for (Index i = 0; i < cfg.n_design; ++i) {
        RewardFunction r_i = RewardFunction::zeros(S, A, H);
        prec_t least = std::numeric_limits<prec_t>::infinity();
        for (Index h = 0; h < H; ++h) {
            r_i.u[h] = coverage[h].unaryExpr([](prec_t c) { return c > 0.0 ? std::min(1.0 / c, 1.0) : 1.0; });
            least = std::min(least, coverage[h].minCoeff());
        }
        PolicySearchResult found = policy_search(reward, r_i, region, cfg.epsilon, cfg.gap_tol, &ab);
        const OccupancyTable d = occupancy(p, found.policy);
        for (Index h = 0; h < H; ++h) coverage[h] += d.d[h].topRows(S);
        if (trace) {
            trace->exits.push_back(found.exit);
            trace->min_coverage.push_back(least);
            trace->non_survivors += !found.survivor;
        }
        iterates.push_back({w, std::move(found.policy), p});
    }
    // Weights 1/n may not add to one exactly in floating point.
    prec_t total = 0.0;
    for (const auto& it : iterates) total += it.weight;
    for (auto& it : iterates) it.weight /= total;
    return sum(iterates).policy;
}

namespace {

Vector project_to_simplex(const Vector& v) {
    std::vector<prec_t> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    prec_t cumulative = 0.0;
    prec_t theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cumulative += u[i];
        const prec_t t = (cumulative - 1.0) / prec_t(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

} // namespace

OptimalDesignResult optimal_design(const std::vector<Vector>& profiles, Index max_steps,
                                   prec_t tolerance) {
    if (profiles.empty()) throw std::invalid_argument("optimal_design: empty profile set");
    const Index n = Index(profiles.size());
    const Index dim = profiles.front().size();
    for (const auto& x : profiles) {
        if (x.size() != dim) throw DimensionError("optimal_design: profiles differ in length");
        if ((x.array() < 0.0).any()) throw std::invalid_argument("optimal_design: negative entry");
    }

    Matrix X(dim, n);
    for (Index j = 0; j < n; ++j) X.col(j) = profiles[std::size_t(j)];
    std::vector<Index> active;
    for (Index i = 0; i < dim; ++i)
        if (X.row(i).maxCoeff() > 0.0) active.push_back(i);
    X = X(active, Eigen::all).eval();

    OptimalDesignResult out;
    out.bound = prec_t(active.size());
    Vector lambda = Vector::Constant(n, 1.0 / prec_t(n));
    auto objective = [&](const Vector& l) {
        const Vector y = X * l;
        if ((y.array() <= 0.0).any()) return -std::numeric_limits<prec_t>::infinity();
        return y.array().log().sum();
    };
    auto gradient = [&](const Vector& l) -> Vector {
        return X.transpose() * (X * l).cwiseInverse();
    };

    prec_t f = objective(lambda);
    prec_t step = 1.0;
    Vector g = gradient(lambda);
    for (out.iterations = 0; out.iterations < max_steps; ++out.iterations) {
        if (g.maxCoeff() <= out.bound + tolerance) {
            out.converged = true;
            break;
        }
        step *= 2.0;
        for (;;) {
            const Vector candidate = project_to_simplex(lambda + step * g);
            const prec_t fc = objective(candidate);
            if (fc >= f + 1e-4 * g.dot(candidate - lambda) || step < 1e-18) {
                lambda = candidate;
                f = fc;
                break;
            }
            step *= 0.5;
        }
        g = gradient(lambda);
    }
    out.lambda = lambda;
    out.coverage = g.maxCoeff();
    return out;
}

} // namespace batchrl
