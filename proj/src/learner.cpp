#include "batchrl/learner.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace batchrl {

Index elimination_rounds(std::int64_t K) {
    if (K < 4) throw std::invalid_argument("K must be at least 4");
    // Smallest M with 2^(2^M) >= K.
    Index M = 0;
    while (M < 6 && (std::int64_t(1) << (Index(1) << M)) < K) ++M;
    return M;
}

std::vector<std::int64_t> elimination_lengths(std::int64_t K) {
    const Index M = elimination_rounds(K);
    std::vector<std::int64_t> lengths;
    for (Index m = 1; m <= M; ++m) {
        const prec_t x = std::pow(prec_t(K), 1.0 - std::ldexp(1.0, -int(m)));
        lengths.push_back(std::int64_t(std::ceil(x - 1e-9 * x)));
    }
    return lengths;
}

std::vector<std::int64_t> BatchSchedule::executed_elimination() const {
    std::vector<std::int64_t> out;
    std::int64_t remaining = stage3_budget();
    for (std::size_t m = 0; m < elimination.size() && remaining > 0; ++m) {
        const bool last = m + 1 == elimination.size();
        const std::int64_t len = last ? remaining : std::min(elimination[m], remaining);
        out.push_back(len);
        remaining -= len;
    }
    return out;
}

Index BatchSchedule::total_batches() const {
    return 2 * horizon + Index(executed_elimination().size());
}

namespace {

struct StageLengths {
    prec_t k1 = 0.0;
    prec_t k2 = 0.0;
};

StageLengths raw_lengths(Index S, Index A, Index H, std::int64_t K, prec_t iota) {
    const prec_t s = prec_t(S), a = prec_t(A), h = prec_t(H), k = prec_t(K);
    return {144.0 * std::sqrt(s * a * k * h * iota),
            288.0 * s * s * s * a * a * h * h * h * h * std::sqrt(k * iota)};
}

bool feasible(Index S, Index A, Index H, std::int64_t K, prec_t iota, prec_t c1, prec_t c2) {
    const StageLengths l = raw_lengths(S, A, H, K, iota);
    const std::int64_t k1 = std::int64_t(std::ceil(c1 * l.k1));
    const std::int64_t k2 = std::int64_t(std::ceil(c2 * l.k2));
    return H * (k1 + k2) < K;
}

} // namespace

BatchSchedule make_schedule(Index states, Index actions, Index horizon, std::int64_t K,
                            prec_t delta, prec_t c1_scale, prec_t c2_scale) {
    if (states < 1 || actions < 1 || horizon < 1) throw std::invalid_argument("empty MDP shape");
    if (!(c1_scale > 0.0) || !(c2_scale > 0.0)) throw std::invalid_argument("scales must be positive");
    BatchSchedule sch;
    sch.K = K;
    sch.horizon = horizon;
    sch.iota = iota_of(delta);
    sch.M = elimination_rounds(K);
    sch.elimination = elimination_lengths(K);
    const StageLengths l = raw_lengths(states, actions, horizon, K, sch.iota);
    sch.k1 = std::int64_t(std::ceil(c1_scale * l.k1));
    sch.k2 = std::int64_t(std::ceil(c2_scale * l.k2));
    if (horizon * (sch.k1 + sch.k2) >= K) {
        std::int64_t hi = K;
        while (!feasible(states, actions, horizon, hi, sch.iota, c1_scale, c2_scale)) hi *= 2;
        std::int64_t lo = hi / 2;
        while (hi - lo > 1) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            (feasible(states, actions, horizon, mid, sch.iota, c1_scale, c2_scale) ? hi : lo) = mid;
        }
        // Each ceil adds less than one episode per batch.
        const prec_t factor = std::max(0.0, prec_t(K - 2 * horizon)) /
                              (prec_t(horizon) * (c1_scale * l.k1 + c2_scale * l.k2)) * (1.0 - 1e-12);
        std::ostringstream msg;
        msg << "budget infeasible: H*(k1 + k2) = " << horizon * (sch.k1 + sch.k2) << " >= K = " << K
            << " (k1 = " << sch.k1 << ", k2 = " << sch.k2 << "); need K >= " << hi
            << " or scales multiplied by at most " << factor;
        throw BudgetInfeasible(msg.str(), hi, factor);
    }
    return sch;
}

LearnerConfig LearnerConfig::paper() { return LearnerConfig{}; }

LearnerConfig LearnerConfig::desk() {
    LearnerConfig cfg;
    cfg.c1_scale = 1e-3;
    cfg.c2_scale = 1e-5;
    cfg.C1 = 1.0;
    return cfg;
}

std::vector<Trajectory> Environment::run_batch(const MarkovPolicy& policy, std::int64_t episodes) {
    std::vector<Trajectory> out;
    out.reserve(std::size_t(episodes));
    for (std::int64_t i = 0; i < episodes; ++i)
        out.push_back(sample_episode(*mdp_, policy, episode_stream(seed_, std::uint64_t(counter_++))));
    return out;
}

std::vector<Index> RunLog::batch_index() const {
    std::vector<Index> idx;
    idx.reserve(rewards.size());
    for (std::size_t b = 0; b < batches.size(); ++b)
        for (std::int64_t i = 0; i < batches[b].length; ++i) idx.push_back(Index(b));
    return idx;
}

namespace {

TransitionCounts execute(Environment& env, const MarkovPolicy& policy, std::int64_t episodes,
                         BatchRecord record, RunLog& log) {
    record.first_episode = log.episodes();
    record.length = episodes;
    record.policy = policy;
    TransitionCounts counts(env.num_states(), env.num_actions(), env.horizon());
    for (const Trajectory& t : env.run_batch(policy, episodes)) {
        counts.add(t);
        log.rewards.push_back(t.total_reward);
    }
    log.batches.push_back(std::move(record));
    return counts;
}

DesignConfig design_config(const LearnerConfig& cfg, Index S, Index A, Index H, std::int64_t K) {
    DesignConfig d = DesignConfig::defaults(S, A, H, K);
    if (cfg.n_design > 0) d.n_design = cfg.n_design;
    if (cfg.epsilon > 0.0) d.epsilon = cfg.epsilon;
    return d;
}

} // namespace

TransitionCounts raw_exploration(const RewardFunction& u, TransitionCounts counts,
                                 std::int64_t k, Environment& env, const LearnerConfig& cfg,
                                 Index stage, RunLog& log, TransitionCounts* last_batch) {
    if (k < 1) throw std::invalid_argument("raw_exploration: batch length must be positive");
    const Index S = env.num_states();
    const Index A = env.num_actions();
    const Index H = env.horizon();
    const prec_t iota = log.schedule.iota;
    const DesignConfig dcfg = design_config(cfg, S, A, H, log.schedule.K);
    const RewardFunction tilde = u.with_z_reward(1.0);

    for (Index h = 0; h < H; ++h) {
        const ConfidenceRegion region = build_cr(counts, cfg.C1, iota, env.initial_state());
        const TransitionModel p = region_member(region);
        const ConfidenceBounds ab = ucb_lcb(tilde, region);
        WeightedPolicyList list;
        BatchRecord record;
        record.stage = stage;
        record.known_set_size = region.known().size();
        record.max_constraints = region.max_constraints();
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < A; ++a) {
                PolicySearchResult found = policy_search(
                    u, RewardFunction::indicator(S, A, H, h, s, a), region, dcfg.epsilon, dcfg.gap_tol, &ab);
                record.non_survivors += !found.survivor;
                list.push_back({1.0 / prec_t(S * A), std::move(found.policy), p});
            }
        const MarkovPolicy mixed = sum(list).policy;
        std::vector<Matrix> probs;
        for (Index l = 0; l < H; ++l)
            probs.push_back(l < h ? mixed.layer(l) : Matrix::Constant(S, A, 1.0 / prec_t(A)));
        TransitionCounts batch = execute(env, MarkovPolicy(std::move(probs)), k, std::move(record), log);
        counts.add(batch);
        if (last_batch && h == H - 1) *last_batch = std::move(batch);
    }
    return counts;
}

void policy_elimination(TransitionCounts counts, const TransitionCounts& last_batch,
                        const BatchSchedule& schedule, Environment& env,
                        const LearnerConfig& cfg, RunLog& log) {
    const Index S = env.num_states();
    const Index A = env.num_actions();
    const Index H = env.horizon();
    const Index s1 = env.initial_state();
    const prec_t iota = schedule.iota;
    const RewardFunction r = env.reward();
    const DesignConfig dcfg = design_config(cfg, S, A, H, schedule.K);

    const KnownSet known(counts, cfg.C1, iota);
    log.known_set_size = known.size();
    ConfidenceRegion previous = ConfidenceRegion::full(S, A, H, s1, known);
    std::vector<Vector> v(std::size_t(H + 1));
    for (Index h = 0; h <= H; ++h) v[h] = Vector::Constant(S + 1, prec_t(H - h));

    const std::vector<std::int64_t> lengths = schedule.executed_elimination();
    log.truncated = Index(lengths.size()) < schedule.M;
    TransitionCounts batch = last_batch;
    for (std::size_t m = 0; m < lengths.size(); ++m) {
        ConfidenceRegion region =
            intersect(previous, build_cr_star(counts, batch, known, v, iota, s1));
        if (!nonempty(region)) {
            log.abort_reason = "empty confidence region before elimination batch " + std::to_string(m + 1);
            return;
        }
        DesignTrace trace;
        const MarkovPolicy policy = design(region, r, dcfg, &trace);

        BatchRecord record;
        record.stage = 3;
        record.known_set_size = known.size();
        record.max_constraints = region.max_constraints();
        record.non_survivors = trace.non_survivors;
        record.design_gap = policy_upper(policy, r, region) - policy_lower(policy, r, region);
        const EviResult optimistic = evi(r, region);
        record.optimistic_gap =
            policy_upper(optimistic.policy, r, region) - policy_lower(optimistic.policy, r, region);

        record.values = optimistic.V;
        batch = execute(env, policy, lengths[m], std::move(record), log);
        counts.add(batch);
        v = optimistic.V;
        previous = std::move(region);
    }
}

RunLog run_main(const TabularMDP& mdp, std::int64_t K, const LearnerConfig& cfg,
                std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    RunLog log;
    log.seed = seed;
    log.schedule = make_schedule(mdp.num_states(), mdp.num_actions(), mdp.horizon(), K, cfg.delta,
                                 cfg.c1_scale, cfg.c2_scale);
    log.rewards.reserve(std::size_t(K));
    Environment env(mdp, seed);
    const Index S = env.num_states(), A = env.num_actions(), H = env.horizon();

    TransitionCounts counts(S, A, H);
    counts = raw_exploration(RewardFunction::zeros(S, A, H), std::move(counts), log.schedule.k1, env,
                             cfg, 1, log);
    TransitionCounts last_batch;
    counts = raw_exploration(env.reward(), std::move(counts), log.schedule.k2, env, cfg, 2, log,
                             &last_batch);
    policy_elimination(std::move(counts), last_batch, log.schedule, env, cfg, log);
    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return log;
}

RunLog run_baseline_uniform(const TabularMDP& mdp, std::int64_t K, std::uint64_t seed) {
    RunLog log;
    log.seed = seed;
    log.schedule.K = K;
    log.schedule.horizon = mdp.horizon();
    Environment env(mdp, seed);
    BatchRecord record;
    record.stage = 0;
    execute(env, MarkovPolicy::uniform(mdp.num_states(), mdp.num_actions(), mdp.horizon()), K,
            std::move(record), log);
    return log;
}

void attach_regret(RunLog& log, const TabularMDP& env) {
    const RewardFunction r = reward_of(env);
    log.optimal_value = exact_optimal_value(env).V.front()(env.initial_state());
    log.regret.clear();
    log.cum_regret.clear();
    prec_t total = 0.0;
    for (const BatchRecord& b : log.batches) {
        const prec_t gap = log.optimal_value - general_value(b.policy, r, env.model());
        for (std::int64_t i = 0; i < b.length; ++i) {
            log.regret.push_back(gap);
            total += gap;
            log.cum_regret.push_back(total);
        }
    }
}

} // namespace batchrl
