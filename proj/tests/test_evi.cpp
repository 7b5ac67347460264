#include "batchrl/evi.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace batchrl;

namespace {

/// A member of the region: per cell, a convex combination of the center and
/// an LP vertex for a random objective.
TransitionModel sample_member(const ConfidenceRegion& region, oracle::Rng& rng) {
    const Index S = region.num_states();
    TransitionTable t = region.center();
    for (Index h = 0; h < region.horizon(); ++h)
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < region.num_actions(); ++a) {
                Vector c(S + 1);
                for (Index i = 0; i <= S; ++i) c(i) = 2.0 * oracle::unif(rng) - 1.0;
                const Vector vertex = lp_max_over_cell(region.cell(h, s, a), c).argmax;
                const Vector center = t.row(h, s, a).transpose();
                const prec_t w = oracle::unif(rng) < 0.5 ? 1.0 : oracle::unif(rng);
                t.row(h, s, a) = (w * vertex + (1.0 - w) * center).transpose();
            }
    return TransitionModel(std::move(t), region.initial_state(), true);
}

ConfidenceRegion random_region(std::uint64_t seed, Index S, Index A, Index H, int episodes) {
    const TabularMDP mdp = random_mdp(S, A, H, seed);
    TransitionCounts c(S, A, H);
    const MarkovPolicy pi = MarkovPolicy::uniform(S, A, H);
    for (int i = 0; i < episodes; ++i) c.add(sample_episode(mdp, pi, episode_stream(seed, std::uint64_t(i))));
    return build_cr(c, 0.5, 1.0);
}

ConfidenceRegion singleton_region(const TransitionModel& model) {
    const Index S = model.base_states(), A = model.num_actions(), H = model.horizon();
    ConfidenceRegion r = ConfidenceRegion::full(S, A, H, model.initial_state(), KnownSet::all(S, A, H));
    for (Index h = 0; h < H; ++h)
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < A; ++a)
                for (Index n = 0; n <= S; ++n) {
                    Vector e = Vector::Zero(S + 1);
                    e(n) = 1.0;
                    r.cell(h, s, a).add(e, model.prob(h, s, a, n));
                }
    r.set_center(model.table());
    return r;
}

} // namespace

TEST(Lp, ConstantObjective) {
    oracle::Rng rng(1);
    const ConfidenceCell cell = oracle::random_cell(4, 5, rng);
    const LPResult r = lp_max_over_cell(cell, Vector::Constant(4, 0.7));
    ASSERT_TRUE(r.optimal());
    EXPECT_NEAR(r.value, 0.7, 1e-12);
    EXPECT_TRUE(cell.satisfied_by(r.argmax));
}

TEST(Lp, FullSimplexPicksLargestCoordinate) {
    Vector v(4);
    v << 0.3, 1.2, -0.5, 0.9;
    const LPResult r = lp_max_over_cell(ConfidenceCell(4), v);
    ASSERT_TRUE(r.optimal());
    EXPECT_DOUBLE_EQ(r.value, 1.2);
    EXPECT_EQ(r.argmax, Vector::Unit(4, 1));
    EXPECT_DOUBLE_EQ(lp_min_over_cell(ConfidenceCell(4), v).value, -0.5);
}

TEST(Lp, MatchesVertexEnumeration) {
    oracle::Rng rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const Index m = 1 + Index(rng() % 12);
        const ConfidenceCell cell = oracle::random_cell(4, m, rng);
        Vector c(4);
        for (Index i = 0; i < 4; ++i) c(i) = 2.0 * oracle::unif(rng) - 1.0;
        const LPResult r = lp_max_over_cell(cell, c);
        const oracle::VertexOptimum ref = oracle::vertex_lp(cell.coeffs(), cell.bounds(), c);
        ASSERT_TRUE(ref.feasible);
        ASSERT_TRUE(r.optimal());
        EXPECT_NEAR(r.value, ref.value, 1e-8);
        EXPECT_NEAR(r.value, c.dot(r.argmax), 1e-9);
        EXPECT_TRUE(cell.satisfied_by(r.argmax, 1e-9));
    }
}

TEST(Lp, ReportsInfeasible) {
    ConfidenceCell cell(3);
    cell.add(Vector::Unit(3, 0), -0.1); // q0 <= -0.1
    EXPECT_FALSE(lp_max_over_cell(cell, Vector::Ones(3)).optimal());
    ConfidenceCell two(3);
    two.add(Vector::Unit(3, 0), 0.2);
    two.add(-Vector::Unit(3, 0), -0.5); // q0 >= 0.5
    EXPECT_FALSE(lp_max_over_cell(two, Vector::Ones(3)).optimal());
}

TEST(Lp, BitIdenticalRepeats) {
    oracle::Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const ConfidenceCell cell = oracle::random_cell(5, 8, rng);
        Vector c(5);
        for (Index i = 0; i < 5; ++i) c(i) = oracle::unif(rng);
        const LPResult a = lp_max_over_cell(cell, c);
        const LPResult b = lp_max_over_cell(cell, c);
        EXPECT_EQ(a.argmax, b.argmax);
        EXPECT_EQ(a.value, b.value);
    }
}

TEST(Evi, ZeroRewardGivesZero) {
    const ConfidenceRegion r = random_region(1, 3, 2, 3, 100);
    const EviResult e = evi(RewardFunction::zeros(3, 2, 3), r);
    for (const Vector& v : e.V) EXPECT_NEAR(v.cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Evi, SingletonRegionIsExactOptimum) {
    oracle::Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const TransitionModel p = oracle::random_model(3, 2, 3, rng, true);
        RewardFunction u = oracle::random_reward(3, 2, 3, rng);
        u.z_reward = trial % 2 ? 1.0 : 0.0;
        const EviResult e = evi(u, singleton_region(p));
        const OptimalValues opt = exact_optimal_value(p, u);
        for (Index h = 0; h <= 3; ++h) EXPECT_LT((e.V[h] - opt.V[h]).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_NEAR(general_value(e.policy, u, p), e.value(), 1e-9);
    }
}

TEST(Evi, OptimismAgainstSampledMembers) {
    oracle::Rng rng(5);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const ConfidenceRegion r = random_region(seed, 2, 2, 2, 60);
        RewardFunction u = oracle::random_reward(2, 2, 2, rng);
        u.z_reward = seed % 2 ? 1.0 : 0.0;
        const EviResult e = evi(u, r);
        EXPECT_TRUE(contains(r, e.model));
        EXPECT_NEAR(general_value(e.policy, u, e.model), e.value(), 1e-9);
        const auto policies = oracle::all_deterministic(2, 2, 2);
        prec_t best = -1.0;
        for (int k = 0; k < 50; ++k) {
            const TransitionModel p = sample_member(r, rng);
            ASSERT_TRUE(contains(r, p));
            for (const auto& pi : policies) best = std::max(best, oracle::path_value(p, pi, u));
        }
        EXPECT_LE(best, e.value() + 1e-8);
    }
}

TEST(Evi, OptimismOverEnumeratedPoliciesH3) {
    oracle::Rng rng(6);
    const ConfidenceRegion r = random_region(11, 2, 2, 3, 80);
    const RewardFunction u = oracle::random_reward(2, 2, 3, rng);
    const EviResult e = evi(u, r);
    const auto policies = oracle::all_deterministic(2, 2, 3);
    for (int k = 0; k < 10; ++k) {
        const TransitionModel p = sample_member(r, rng);
        for (const auto& pi : policies) EXPECT_LE(oracle::path_value(p, pi, u), e.value() + 1e-8);
    }
}

TEST(Evi, RejectsInfeasibleCell) {
    ConfidenceRegion r = random_region(2, 2, 2, 2, 50);
    r.cell(1, 0, 0).add(Vector::Unit(3, 0), -1.0);
    EXPECT_THROW(evi(RewardFunction::zeros(2, 2, 2), r), std::runtime_error);
}

TEST(UcbLcb, SingletonCollapses) {
    oracle::Rng rng(7);
    const TransitionModel p = oracle::random_model(2, 2, 3, rng, true);
    const RewardFunction u = oracle::random_reward(2, 2, 3, rng);
    const ConfidenceBounds b = ucb_lcb(u, singleton_region(p));
    const prec_t v = exact_optimal_value(p, u).V.front()(0);
    EXPECT_NEAR(b.max_upper, v, 1e-9);
    EXPECT_NEAR(b.max_lower, v, 1e-9);
}

TEST(UcbLcb, ZRewardOnlyWithAllKnownIsZero) {
    oracle::Rng rng(8);
    TransitionModel p = clip(oracle::random_model(2, 2, 2, rng), KnownSet::all(2, 2, 2));
    const ConfidenceBounds b = ucb_lcb(RewardFunction::zeros(2, 2, 2).with_z_reward(1.0), singleton_region(p));
    EXPECT_NEAR(b.max_upper, 0.0, 1e-12);
    EXPECT_NEAR(b.max_lower, 0.0, 1e-12);
}

TEST(UcbLcb, OneSidedAgainstSampledMembers) {
    oracle::Rng rng(9);
    const auto policies = oracle::all_deterministic(2, 2, 2);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ConfidenceRegion r = random_region(20 + seed, 2, 2, 2, 80);
        const RewardFunction u = oracle::random_reward(2, 2, 2, rng).with_z_reward(1.0);
        const ConfidenceBounds b = ucb_lcb(u, r);
        EXPECT_GE(b.max_upper, b.max_lower);

        std::vector<TransitionModel> members;
        for (int k = 0; k < 50; ++k) members.push_back(sample_member(r, rng));
        const RewardFunction u0 = u.with_z_reward(0.0);
        prec_t sampled_lower = -1.0, sampled_upper = -1.0, exact_lower = -1.0;
        for (const auto& pi : policies) {
            prec_t lo = 1e300;
            for (const auto& p : members) {
                lo = std::min(lo, oracle::path_value(p, pi, u0));
                sampled_upper = std::max(sampled_upper, oracle::path_value(p, pi, u));
            }
            sampled_lower = std::max(sampled_lower, lo);
            exact_lower = std::max(exact_lower, policy_lower(pi, u0, r));
            EXPECT_LE(policy_upper(pi, u, r), b.max_upper + 1e-9);
        }
        EXPECT_LE(b.max_lower, sampled_lower + 1e-8);
        EXPECT_LE(sampled_upper, b.max_upper + 1e-8);
        EXPECT_NEAR(b.max_lower, exact_lower, 1e-9);
    }
}

TEST(UcbLcb, TruthInRegionOrdersBounds) {
    const TabularMDP mdp = random_mdp(3, 2, 3, 31);
    TransitionCounts c(3, 2, 3);
    for (int i = 0; i < 400; ++i)
        c.add(sample_episode(mdp, MarkovPolicy::uniform(3, 2, 3), episode_stream(31, std::uint64_t(i))));
    const prec_t iota = iota_of(0.1);
    const ConfidenceRegion r = build_cr(c, 1.0, iota);
    const KnownSet w(c, 1.0, iota);
    ASSERT_TRUE(contains(r, clip(mdp.model(), w)));
    const RewardFunction u = reward_of(mdp).with_z_reward(1.0);
    const ConfidenceBounds b = ucb_lcb(u, r);
    const prec_t truth = exact_optimal_value(clip(mdp.model(), w), reward_of(mdp)).V.front()(0);
    EXPECT_GE(b.max_upper + 1e-9, truth);
    EXPECT_LE(b.max_lower, truth + 1e-9);
}

TEST(ExtendedValueTable, LastLayerAndMonotone) {
    oracle::Rng rng(10);
    const ConfidenceRegion r = random_region(40, 3, 2, 3, 150);
    const RewardFunction u = oracle::random_reward(3, 2, 3, rng).with_z_reward(0.5);
    const auto v = extended_value_table(r, u);
    for (Index s = 0; s < 3; ++s) EXPECT_NEAR(v[2](s), u.u[2].row(s).maxCoeff(), 1e-12);
    EXPECT_NEAR(v[2](3), 0.5, 1e-12);
    EXPECT_NEAR(v[1](3), 1.0, 1e-12);

    // Second dataset from the same instance, boxed against the same known set.
    const TabularMDP mdp = random_mdp(3, 2, 3, 40);
    TransitionCounts more(3, 2, 3);
    for (int i = 0; i < 600; ++i)
        more.add(sample_episode(mdp, MarkovPolicy::uniform(3, 2, 3), episode_stream(41, std::uint64_t(i))));
    const ConfidenceRegion tighter = intersect(r, build_box_region(more, r.known(), 1.0));
    ASSERT_TRUE(nonempty(tighter));
    const auto w = extended_value_table(tighter, u);
    for (Index h = 0; h <= 3; ++h) EXPECT_TRUE(((w[h] - v[h]).array() <= 1e-9).all()) << h;
}
