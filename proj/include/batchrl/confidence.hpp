#pragma once

#include "batchrl/dataset.hpp"

#include <array>
#include <cmath>

namespace batchrl {

/// Slack used by every membership check.
inline constexpr prec_t kMembershipSlack = 1e-9;

/**
 * Polytope { q in simplex over S + 1 coordinates : coeffs * q <= bounds }.
 * The simplex constraints (q >= 0, sum q = 1) are implicit.
 */
class ConfidenceCell {
public:
    ConfidenceCell() = default;
    explicit ConfidenceCell(Index dim) : dim_(dim), coeffs_(0, dim), bounds_(0) {}

    Index dim() const { return dim_; }
    Index size() const { return bounds_.size(); }
    const Matrix& coeffs() const { return coeffs_; }
    const Vector& bounds() const { return bounds_; }

    /// Adds coeff . q <= bound. A constraint with the same coefficients as an
    /// existing one only tightens that one's bound.
    void add(const Eigen::Ref<const Vector>& coeff, prec_t bound);
    void add(const ConfidenceCell& other);

    template <typename Derived>
    bool satisfied_by(const Eigen::MatrixBase<Derived>& q, prec_t slack = kMembershipSlack) const {
        if (q.size() != dim_) return false;
        if ((q.array() < -slack).any() || std::abs(q.sum() - 1.0) > slack) return false;
        for (Index i = 0; i < size(); ++i)
            if (coeffs_.row(i).dot(q.reshaped()) > bounds_(i) + slack) return false;
        return true;
    }

private:
    Index dim_ = 0;
    Matrix coeffs_;
    Vector bounds_;
};

/**
 * Product region over (h, s, a) for base states s. The virtual state's rows
 * are fixed to the unit vector at z and carry no cell.
 *
 * `center` is the clipped empirical model the region was built around
 * (unvisited rows send all mass to z); it need not be a member after
 * intersection, see region_member().
 */
class ConfidenceRegion {
public:
    ConfidenceRegion() = default;
    ConfidenceRegion(Index states, Index actions, Index horizon, Index initial_state, KnownSet known);

    /// Simplex cells with no constraints (the clip pinning is not applied).
    static ConfidenceRegion full(Index states, Index actions, Index horizon, Index initial_state,
                                 KnownSet known);

    Index num_states() const { return states_; }
    Index num_actions() const { return actions_; }
    Index horizon() const { return horizon_; }
    Index initial_state() const { return initial_; }
    Index dim() const { return states_ + 1; }
    const KnownSet& known() const { return known_; }

    ConfidenceCell& cell(Index h, Index s, Index a) { return cells_[index(h, s, a)]; }
    const ConfidenceCell& cell(Index h, Index s, Index a) const { return cells_[index(h, s, a)]; }

    const TransitionTable& center() const { return center_; }
    void set_center(TransitionTable center) { center_ = std::move(center); }

    Index max_constraints() const;
    Index total_constraints() const;

private:
    std::size_t index(Index h, Index s, Index a) const {
        return std::size_t((h * states_ + s) * actions_ + a);
    }

    Index states_ = 0;
    Index actions_ = 0;
    Index horizon_ = 0;
    Index initial_ = 0;
    KnownSet known_;
    std::vector<ConfidenceCell> cells_;
    TransitionTable center_;
};

/// sqrt(4 n' iota / n^2) + 5 iota / n.
inline prec_t width_alpha(prec_t n, prec_t n_prime, prec_t iota) {
    return std::sqrt(4.0 * n_prime * iota / (n * n)) + 5.0 * iota / n;
}

/// 5 sqrt(V(p, v) iota / n) + 3 iota / n.
template <typename RowDerived, typename ValDerived>
prec_t width_alpha_star(prec_t n, const Eigen::MatrixBase<RowDerived>& p,
                        const Eigen::MatrixBase<ValDerived>& v, prec_t iota) {
    const prec_t var = std::max(variance(p, v), 0.0);
    return 5.0 * std::sqrt(var * iota / n) + 3.0 * iota / n;
}

/// Clipped empirical model with unvisited rows sent to z.
TransitionTable clipped_center(const TransitionCounts& counts, const KnownSet& known);

/**
 * Box region |p_s' - p_hat_s'| <= alpha(N(s,a), N(s,a,s')) around the
 * empirical model, mapped through clip with the counts' own known set.
 */
ConfidenceRegion build_cr(const TransitionCounts& counts, prec_t c1, prec_t iota,
                          Index initial_state = 0);

/// Box part of build_cr against an explicit known set.
ConfidenceRegion build_box_region(const TransitionCounts& counts, const KnownSet& known,
                                  prec_t iota, Index initial_state = 0);

/**
 * Box region from the cumulative counts intersected with the two half-spaces
 * |(q - p_check) . v_{h+1}| <= alpha*(N_check, p_check, v_{h+1}), where
 * p_check is the clipped batch-local empirical model. `v[h]` is over S + 1
 * states for h = 0..H (v[H] is ignored as a successor value at the last step
 * only through v[h + 1]). Rows without batch samples get no Bernstein pair.
 */
ConfidenceRegion build_cr_star(const TransitionCounts& cumulative, const TransitionCounts& batch,
                               const KnownSet& known, const std::vector<Vector>& v, prec_t iota,
                               Index initial_state = 0);

/// Per-cell constraint concatenation. Throws DimensionError on differing known sets.
ConfidenceRegion intersect(const ConfidenceRegion& r1, const ConfidenceRegion& r2);

/// True iff every base row of `model` lies in its cell within 1e-9.
bool contains(const ConfidenceRegion& region, const TransitionModel& model);

/// Per-cell membership report: the (h, s, a) rows that fail.
std::vector<std::array<Index, 3>> violations(const ConfidenceRegion& region,
                                             const TransitionModel& model);

/// Every cell has a feasible point.
bool nonempty(const ConfidenceRegion& region);

/**
 * Tightness: every coordinate of every cell stays within
 * [e^{-1/H}, e^{1/H}] times the reference (identically 0 where the
 * reference is 0). Extremes are found by LP. Throws std::invalid_argument
 * when the reference is not a member.
 */
bool is_tight(const ConfidenceRegion& region, const TransitionModel& reference, Index horizon);

/**
 * A deterministic member: the center row where it is feasible, otherwise the
 * farthest feasible point on the segment from an LP vertex towards the center.
 */
TransitionModel region_member(const ConfidenceRegion& region);

} // namespace batchrl
