#include "batchrl/confidence.hpp"
#include "batchrl/io.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace batchrl;

namespace {

Trajectory path(std::initializer_list<std::array<Index, 3>> steps) {
    Trajectory t;
    for (const auto& s : steps) t.steps.push_back({s[0], s[1], s[2]});
    return t;
}

TabularMDP deterministic_chain(Index S, Index A, Index H) {
    TransitionTable t(S, A, S, H);
    for (Index h = 0; h < H; ++h)
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < A; ++a) t.row(h, s, a)((s + a + 1) % S) = 1.0;
    return TabularMDP(TransitionModel(std::move(t), 0, false),
                      std::vector<Matrix>(std::size_t(H), Matrix::Zero(S, A)));
}

} // namespace

TEST(Accumulate, EmptyListLeavesCounts) {
    TransitionCounts c(2, 2, 2);
    c.add(0, 1, 1, 0, 3);
    const TransitionCounts out = accumulate(c, {});
    EXPECT_EQ(out, c);
}

TEST(Accumulate, OneTrajectoryTwoTallies) {
    const std::vector<Trajectory> ts = {path({{0, 1, 1}, {1, 0, 0}})};
    const TransitionCounts c = accumulate(TransitionCounts(2, 2, 2), ts);
    EXPECT_EQ(c.total(), 2);
    EXPECT_EQ(c(0, 0, 1, 1), 1);
    EXPECT_EQ(c(1, 1, 0, 0), 1);
}

TEST(Accumulate, DeterministicMdpCountsEqualK) {
    const TabularMDP mdp = deterministic_chain(3, 2, 4);
    const MarkovPolicy pi = MarkovPolicy::deterministic(std::vector<std::vector<Index>>(4, {1, 0, 1}), 2);
    const int k = 37;
    std::vector<Trajectory> ts;
    for (int i = 0; i < k; ++i) ts.push_back(sample_episode(mdp, pi, episode_stream(1, std::uint64_t(i))));
    const TransitionCounts c = accumulate(TransitionCounts(3, 2, 4), ts);
    // 0 -a1-> 2 -a1-> 1 -a0-> 2 -a1-> 1
    EXPECT_EQ(c(0, 0, 1, 2), k);
    EXPECT_EQ(c(1, 2, 1, 1), k);
    EXPECT_EQ(c(2, 1, 0, 2), k);
    EXPECT_EQ(c(3, 2, 1, 1), k);
    EXPECT_EQ(c.total(), 4 * k);
}

TEST(Accumulate, CommutesWithConcatenation) {
    const TabularMDP mdp = random_mdp(3, 2, 3, 2);
    const MarkovPolicy pi = MarkovPolicy::uniform(3, 2, 3);
    std::vector<Trajectory> a, b;
    for (int i = 0; i < 40; ++i) a.push_back(sample_episode(mdp, pi, episode_stream(3, std::uint64_t(i))));
    for (int i = 40; i < 70; ++i) b.push_back(sample_episode(mdp, pi, episode_stream(3, std::uint64_t(i))));
    std::vector<Trajectory> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const TransitionCounts zero(3, 2, 3);
    EXPECT_EQ(accumulate(accumulate(zero, a), b), accumulate(zero, ab));
    EXPECT_EQ(accumulate(accumulate(zero, b), a), accumulate(zero, ab));
}

TEST(Accumulate, RejectsOutOfRange) {
    const std::vector<Trajectory> bad = {path({{0, 0, 5}})};
    EXPECT_THROW(accumulate(TransitionCounts(2, 2, 1), bad), std::out_of_range);
    const std::vector<Trajectory> too_long = {path({{0, 0, 0}, {0, 0, 0}})};
    EXPECT_THROW(accumulate(TransitionCounts(2, 2, 1), too_long), std::out_of_range);
}

TEST(Counts, DerivedCountAtLeastOne) {
    TransitionCounts c(2, 2, 1);
    EXPECT_EQ(c.sa_count(0, 0, 0), 1);
    EXPECT_EQ(c.raw_sa_count(0, 0, 0), 0);
    c.add(0, 0, 0, 1, 4);
    EXPECT_EQ(c.sa_count(0, 0, 0), 4);
}

TEST(EmpiricalModel, ZeroCountsGiveZeroTable) {
    const TransitionTable p = empirical_model(TransitionCounts(2, 2, 2));
    for (const Matrix& m : p.layers) EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0);
}

TEST(EmpiricalModel, Ratio) {
    TransitionCounts c(2, 1, 1);
    c.add(0, 0, 0, 0, 3);
    c.add(0, 0, 0, 1, 1);
    const TransitionTable p = empirical_model(c);
    EXPECT_DOUBLE_EQ(p.row(0, 0, 0)(0), 0.75);
    EXPECT_DOUBLE_EQ(p.row(0, 0, 0)(1), 0.25);
}

TEST(EmpiricalModel, WithinEnvelopeOfTruth) {
    const TabularMDP mdp = random_mdp(3, 2, 3, 5);
    const MarkovPolicy pi = MarkovPolicy::uniform(3, 2, 3);
    TransitionCounts c(3, 2, 3);
    for (int i = 0; i < 100000; ++i) c.add(sample_episode(mdp, pi, episode_stream(5, std::uint64_t(i))));
    const TransitionTable p = empirical_model(c);
    const prec_t iota = iota_of(0.01);
    int visited = 0, inside = 0;
    for (Index h = 0; h < 3; ++h)
        for (Index s = 0; s < 3; ++s)
            for (Index a = 0; a < 2; ++a) {
                if (c.raw_sa_count(h, s, a) == 0) continue;
                ++visited;
                bool ok = true;
                for (Index n = 0; n < 3; ++n) {
                    const prec_t w = width_alpha(prec_t(c.sa_count(h, s, a)), prec_t(c(h, s, a, n)), iota);
                    ok = ok && std::abs(p.row(h, s, a)(n) - mdp.model().prob(h, s, a, n)) <= w;
                }
                inside += ok;
            }
    ASSERT_GT(visited, 0);
    EXPECT_GE(double(inside), 0.99 * visited);
}

TEST(KnownSet, EmptyForZeroCounts) {
    EXPECT_EQ(KnownSet(TransitionCounts(2, 2, 3), 200.0, iota_of(0.1)).size(), 0);
}

TEST(KnownSet, BoundaryInclusive) {
    const prec_t iota = 1.3;
    TransitionCounts c(2, 2, 2);
    const auto need = std::int64_t(std::ceil(1.0 * 4 * iota));
    c.add(1, 0, 1, 1, need);
    c.add(0, 0, 0, 0, need - 1);
    const KnownSet w(c, 1.0, iota);
    EXPECT_EQ(w.size(), 1);
    EXPECT_TRUE(w.contains(1, 0, 1, 1));
}

TEST(KnownSet, PaperPresetThreshold) {
    const prec_t iota = iota_of(0.1);
    EXPECT_NEAR(iota, 2.9957, 1e-4);
    TransitionCounts c(2, 1, 3);
    c.add(0, 0, 0, 0, 5392);
    c.add(0, 0, 0, 1, 5393);
    const KnownSet w(c, 200.0, iota);
    EXPECT_NEAR(w.threshold(), 5392.2, 0.5);
    EXPECT_FALSE(w.contains(0, 0, 0, 0));
    EXPECT_TRUE(w.contains(0, 0, 0, 1));
}

TEST(Clip, AllKnownIsIdentity) {
    oracle::Rng rng(3);
    const TransitionModel p = oracle::random_model(3, 2, 2, rng);
    const TransitionModel c = clip(p, KnownSet::all(3, 2, 2));
    for (Index h = 0; h < 2; ++h)
        for (Index s = 0; s < 3; ++s)
            for (Index a = 0; a < 2; ++a) {
                EXPECT_EQ(c.row(h, s, a).head(3), p.row(h, s, a));
                EXPECT_EQ(c.prob(h, s, a, 3), 0.0);
            }
}

TEST(Clip, NoneKnownSendsEverythingToZ) {
    oracle::Rng rng(4);
    const TransitionModel c = clip(oracle::random_model(3, 2, 2, rng), KnownSet::none(3, 2, 2));
    for (Index h = 0; h < 2; ++h)
        for (Index s = 0; s <= 3; ++s)
            for (Index a = 0; a < 2; ++a) EXPECT_DOUBLE_EQ(c.prob(h, s, a, 3), 1.0);
}

TEST(Clip, MassTransfer) {
    TransitionTable p(2, 1, 2, 1);
    p.row(0, 0, 0) << 0.6, 0.4;
    p.row(0, 1, 0) << 0.0, 1.0;
    TransitionCounts counts(2, 1, 1);
    counts.add(0, 0, 0, 0, 1);
    const KnownSet w(counts, 1.0, 1.0);
    const TransitionTable c = clip(p, w);
    EXPECT_EQ(c.columns, 3);
    EXPECT_DOUBLE_EQ(c.row(0, 0, 0)(0), 0.6);
    EXPECT_DOUBLE_EQ(c.row(0, 0, 0)(1), 0.0);
    EXPECT_DOUBLE_EQ(c.row(0, 0, 0)(2), 0.4);
    EXPECT_DOUBLE_EQ(c.row(0, 2, 0)(2), 1.0);
}

TEST(Clip, ConservationIdempotenceMonotonicity) {
    oracle::Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        TransitionTable p(3, 2, 3, 2);
        for (Matrix& m : p.layers)
            for (Index r = 0; r < m.rows(); ++r) m.row(r) = oracle::random_distribution(3, rng).transpose() * oracle::unif(rng);
        TransitionCounts small(3, 2, 2), large(3, 2, 2);
        for (Index h = 0; h < 2; ++h)
            for (Index s = 0; s < 3; ++s)
                for (Index a = 0; a < 2; ++a)
                    for (Index n = 0; n < 3; ++n) {
                        const auto k = std::int64_t(rng() % 4);
                        small.add(h, s, a, n, k);
                        large.add(h, s, a, n, k + std::int64_t(rng() % 2));
                    }
        const KnownSet w_small(small, 1.0, 1.0), w_large(large, 1.0, 1.0);
        const TransitionTable c = clip(p, w_small);
        const TransitionTable c_large = clip(p, w_large);
        const TransitionTable twice = clip(c, w_small);
        for (Index h = 0; h < 2; ++h)
            for (Index s = 0; s < 3; ++s)
                for (Index a = 0; a < 2; ++a) {
                    EXPECT_NEAR(c.row(h, s, a).sum(), p.row(h, s, a).sum(), 1e-12);
                    EXPECT_LT((twice.row(h, s, a) - c.row(h, s, a)).cwiseAbs().maxCoeff(), 1e-12);
                    EXPECT_GE(c.row(h, s, a)(3), c_large.row(h, s, a)(3) - 1e-15);
                }
    }
}

TEST(CountsJson, RoundTrip) {
    const TabularMDP mdp = random_mdp(3, 2, 3, 8);
    TransitionCounts c(3, 2, 3);
    for (int i = 0; i < 200; ++i) c.add(sample_episode(mdp, MarkovPolicy::uniform(3, 2, 3), episode_stream(8, std::uint64_t(i))));
    const json doc = counts_to_json(c);
    EXPECT_EQ(counts_from_json(json::parse(doc.dump())), c);
    ASSERT_FALSE(doc.at("counts").empty());
    EXPECT_GT(doc.at("counts")[0].at("n").get<std::int64_t>(), 0);
}
