#pragma once

#include "batchrl/mdp.hpp"

#include <cstdint>
#include <span>

namespace batchrl {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/**
 * Visit tallies N_h(s, a, s') over base states. Layer h is a
 * (S * A) x S integer matrix using the TransitionTable row convention.
 */
class TransitionCounts {
public:
    TransitionCounts() = default;
    TransitionCounts(Index states, Index actions, Index horizon);

    Index num_states() const { return states_; }
    Index num_actions() const { return actions_; }
    Index horizon() const { return Index(layers_.size()); }

    std::int64_t operator()(Index h, Index s, Index a, Index next) const {
        return layers_[h](s * actions_ + a, next);
    }
    /// max(sum_{s'} N_h(s,a,s'), 1).
    std::int64_t sa_count(Index h, Index s, Index a) const;
    /// Raw sum without the floor at one.
    std::int64_t raw_sa_count(Index h, Index s, Index a) const;
    std::int64_t total() const;

    const CountMatrix& layer(Index h) const { return layers_[h]; }

    void add(Index h, Index s, Index a, Index next, std::int64_t n = 1);
    /// In-place accumulation; throws std::out_of_range on a bad index.
    void add(const Trajectory& trajectory);
    void add(const TransitionCounts& other);

    friend bool operator==(const TransitionCounts&, const TransitionCounts&) = default;

private:
    Index states_ = 0;
    Index actions_ = 0;
    std::vector<CountMatrix> layers_;
};

/// Returns counts plus one tally per step of every trajectory.
TransitionCounts accumulate(TransitionCounts counts, std::span<const Trajectory> trajectories);

/// p_hat = N(s,a,s') / N(s,a); unvisited rows are all zero.
TransitionTable empirical_model(const TransitionCounts& counts);

/// log(2 / delta).
prec_t iota_of(prec_t delta);

/**
 * Frozen set of known tuples: (h,s,a,s') with N_h(s,a,s') >= C1 * H^2 * iota.
 */
class KnownSet {
public:
    KnownSet() = default;
    KnownSet(const TransitionCounts& counts, prec_t c1, prec_t iota);
    /// Everything known (clip is then the identity plus an empty z column).
    static KnownSet all(Index states, Index actions, Index horizon);
    static KnownSet none(Index states, Index actions, Index horizon);

    bool contains(Index h, Index s, Index a, Index next) const {
        return member_[h](s * actions_ + a, next);
    }
    Index num_states() const { return states_; }
    Index num_actions() const { return actions_; }
    Index horizon() const { return Index(member_.size()); }
    Index size() const;
    prec_t threshold() const { return threshold_; }
    prec_t c1() const { return c1_; }
    prec_t iota() const { return iota_; }

    /// Membership equality (thresholds are not compared).
    bool same_members(const KnownSet& other) const;

private:
    using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
    Index states_ = 0;
    Index actions_ = 0;
    prec_t c1_ = 0.0;
    prec_t iota_ = 0.0;
    prec_t threshold_ = 0.0;
    std::vector<Mask> member_;
};

KnownSet known_set(const TransitionCounts& counts, prec_t c1, prec_t iota);

/**
 * Redirects the mass of unknown tuples to the virtual state z.
 *
 * Input rows are over S successors (sub-distributions allowed), or already
 * augmented over S + 1 (then the existing z mass is kept). The output has
 * S + 1 row states and columns; rows of z are the unit vector at z.
 */
TransitionTable clip(const TransitionTable& p, const KnownSet& known);

/// clip() of a full model, validated as an augmented model.
TransitionModel clip(const TransitionModel& p, const KnownSet& known);

} // namespace batchrl
