#include "batchrl/hard_instances.hpp"
#include "batchrl/learner.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace batchrl;

namespace {

/// Probability of sitting at s0 at 0-based layer `layer`, by path enumeration.
prec_t s0_mass(const TabularMDP& mdp, const MarkovPolicy& pi, Index layer) {
    return oracle::path_occupancy(mdp.model(), pi)[std::size_t(layer)].row(0).sum();
}

MarkovPolicy follow(const ActionCode& code, Index A, Index H) {
    std::vector<std::vector<Index>> acts;
    for (Index h = 0; h < H; ++h) {
        const Index a = h < Index(code.size()) ? code[std::size_t(h)] - 1 : 0;
        acts.push_back({a, 0});
    }
    return MarkovPolicy::deterministic(acts, A);
}

PolicyMixture random_mixture(Index n, Index A, Index H, oracle::Rng& rng) {
    const Vector w = oracle::random_distribution(n, rng);
    PolicyMixture mix;
    for (Index i = 0; i < n; ++i) mix.emplace_back(w(i), oracle::random_policy(2, A, H, rng));
    return mix;
}

/// Exact reach probability through the MDP built from the code.
prec_t reach_via_mdp(const PolicyMixture& mix, Index A, const ActionCode& code, Index layer) {
    const TabularMDP mdp = basic_hard_mdp(A, code);
    prec_t total = 0.0;
    for (const auto& [w, pi] : mix) total += w * s0_mass(mdp, pi, layer);
    return total;
}

} // namespace

TEST(HardParams, DepthAndBlocks) {
    EXPECT_EQ(hard_depth(2, 16), 10);
    EXPECT_EQ(hard_depth(10, 1000), 8);
    EXPECT_EQ(hard_depth(2, 1000), 21);
    const HardInstanceParams p = HardInstanceParams::make(4, 50, 1000);
    EXPECT_EQ(p.depth, 11);
    EXPECT_EQ(p.blocks, 2);
    EXPECT_THROW(HardInstanceParams::make(4, 21, 1000), std::invalid_argument);
    EXPECT_THROW(HardInstanceParams::make(1, 50, 1000), std::invalid_argument);
}

TEST(BasicHard, OnlyCodePathStays) {
    const TabularMDP mdp = basic_hard_mdp(2, {1, 1, 1});
    EXPECT_EQ(mdp.horizon(), 3);
    for (const auto& pi : oracle::all_deterministic(2, 2, 3)) {
        const bool on_code = pi.prob(0, 0, 0) == 1.0 && pi.prob(1, 0, 0) == 1.0 && pi.prob(2, 0, 0) == 1.0;
        const auto d = oracle::path_occupancy(mdp.model(), pi);
        const prec_t stayed = d[2](0, 0);
        EXPECT_EQ(stayed, on_code ? 1.0 : 0.0);
    }
}

TEST(BasicHard, DeviationLosesS0) {
    const ActionCode code = {2, 1, 2, 2};
    const TabularMDP mdp = basic_hard_mdp(2, code);
    ActionCode off = code;
    off[1] = 2;
    EXPECT_DOUBLE_EQ(s0_mass(mdp, follow(off, 2, 4), 3), 0.0);
    EXPECT_DOUBLE_EQ(s0_mass(mdp, follow(code, 2, 4), 3), 1.0);
}

TEST(BasicHard, UniformReach) {
    for (Index A : {2, 3}) {
        const std::int64_t K = 20;
        const Index d = hard_depth(A, K);
        ActionCode code(std::size_t(d), 1);
        const TabularMDP mdp = basic_hard_mdp(A, code);
        const prec_t p = s0_mass(mdp, MarkovPolicy::uniform(2, A, d), d - 1);
        EXPECT_NEAR(p, std::pow(prec_t(A), -prec_t(d - 1)), 1e-15);
        EXPECT_LE(p, 1.0 / prec_t(K));
    }
}

TEST(BasicHard, RejectsBadCode) {
    EXPECT_THROW(basic_hard_mdp(2, {1, 3}), std::invalid_argument);
    EXPECT_THROW(basic_hard_mdp(2, {0, 1}), std::invalid_argument);
}

TEST(Concatenated, ValuesAndOptimum) {
    const Index A = 4, H = 25;
    const std::int64_t K = 1000;
    const HardInstanceParams p = HardInstanceParams::make(A, H, K);
    ASSERT_EQ(p.blocks, 1);
    const Index cd = p.blocks * p.depth;
    oracle::Rng rng(3);
    ActionCode code;
    for (Index i = 0; i < cd; ++i) code.push_back(1 + Index(rng() % A));
    const TabularMDP mdp = concatenated_hard_mdp(A, H, K, code);
    const RewardFunction r = reward_of(mdp);
    EXPECT_NEAR(general_value(follow(code, A, H), r, mdp.model()), prec_t(H - cd), 1e-12);
    EXPECT_NEAR(exact_optimal_value(mdp).V.front()(0), prec_t(H - cd), 1e-12);
    ActionCode off = code;
    off[0] = code[0] % A + 1;
    EXPECT_DOUBLE_EQ(general_value(follow(off, A, H), r, mdp.model()), 0.0);
    EXPECT_NEAR(general_value(MarkovPolicy::uniform(2, A, H), r, mdp.model()),
                prec_t(H - cd) * std::pow(prec_t(A), -prec_t(cd)), 1e-15);
    EXPECT_THROW(concatenated_hard_mdp(A, H, K, ActionCode(std::size_t(cd + 1), 1)), std::invalid_argument);
}

TEST(Adversary, DeterministicPolicyIsMissedAtFirstLayer) {
    const MarkovPolicy pi = MarkovPolicy::deterministic(std::vector<std::vector<Index>>(4, {1, 0}), 2);
    const PolicyMixture mix = {{1.0, pi}};
    const ActionCode code = adversarial_code(mix, 2, 4);
    EXPECT_EQ(code[0], 1);
    for (Index l = 1; l <= 4; ++l) EXPECT_DOUBLE_EQ(mixture_reach_probability(mix, 2, code, l), 0.0);
}

TEST(Adversary, UniformMixtureAnyCode) {
    const PolicyMixture mix = {{1.0, MarkovPolicy::uniform(2, 3, 5)}};
    const ActionCode code = adversarial_code(mix, 3, 5);
    EXPECT_NEAR(mixture_reach_probability(mix, 3, code, 4), std::pow(3.0, -4.0), 1e-15);
    EXPECT_NEAR(reach_via_mdp(mix, 3, code, 4), std::pow(3.0, -4.0), 1e-15);
}

TEST(Adversary, RandomMixturesReachBound) {
    oracle::Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const Index A = trial < 10 ? 2 : 2 + Index(rng() % 3), d = 4;
        const PolicyMixture mix = random_mixture(1 + Index(rng() % 5), A, d, rng);
        const ActionCode code = adversarial_code(mix, A, d);
        ASSERT_EQ(Index(code.size()), d);
        const prec_t reach = reach_via_mdp(mix, A, code, d - 1);
        EXPECT_NEAR(reach, mixture_reach_probability(mix, A, code, d - 1), 1e-15);
        EXPECT_LE(reach, std::pow(prec_t(A), -prec_t(d - 1)) + 1e-15);
    }
}

TEST(Adversary, PrefixBlock) {
    oracle::Rng rng(5);
    const PolicyMixture mix = random_mixture(3, 2, 8, rng);
    const ActionCode first = adversarial_code(mix, 2, 4);
    ActionCode all = first;
    const ActionCode second = adversarial_code(mix, 2, 4, first);
    all.insert(all.end(), second.begin(), second.end());
    prec_t direct = 0.0;
    for (const auto& [w, pi] : mix) {
        prec_t r = w;
        for (Index h = 0; h < 8; ++h) r *= pi.prob(h, 0, all[std::size_t(h)] - 1);
        direct += r;
    }
    EXPECT_NEAR(mixture_reach_probability(mix, 2, all, 8), direct, 1e-15);
    EXPECT_LE(direct, std::pow(2.0, -8.0) + 1e-15);
    EXPECT_THROW(mixture_reach_probability(mix, 2, all, 9), std::invalid_argument);
}

TEST(Concatenated, BatchCountUnderRunMain) {
    const Index A = 4, H = 22;
    const std::int64_t K = 1000;
    const HardInstanceParams p = HardInstanceParams::make(A, H, K);
    const TabularMDP mdp = concatenated_hard_mdp(A, H, K, ActionCode(std::size_t(p.blocks * p.depth), 2));
    LearnerConfig cfg = LearnerConfig::desk();
    cfg.c1_scale = 1e-9;
    cfg.c2_scale = 1e-12;
    cfg.n_design = 4;
    RunLog log = run_main(mdp, K, cfg, 0);
    EXPECT_LE(Index(log.batches.size()), 2 * H + elimination_rounds(K));
    EXPECT_EQ(log.abort_reason, "");
    EXPECT_EQ(log.episodes(), K);
}
