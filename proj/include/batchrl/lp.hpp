#pragma once

#include "batchrl/confidence.hpp"

namespace batchrl {

enum class LpStatus { optimal, infeasible };

struct LPResult {
    Vector argmax;
    prec_t value = 0.0;
    LpStatus status = LpStatus::infeasible;

    bool optimal() const { return status == LpStatus::optimal; }
};

/**
 * max objective . q  s.t.  q >= 0, sum q = 1, coeffs q <= bounds.
 *
 * Dense two-phase tableau simplex with Bland's rule. Among optimal points the
 * lexicographically smallest one is returned, so ties resolve identically
 * on every platform.
 */
LPResult simplex_lp(const Matrix& coeffs, const Vector& bounds,
                    const Eigen::Ref<const Vector>& objective);

inline LPResult lp_max_over_cell(const ConfidenceCell& cell,
                                 const Eigen::Ref<const Vector>& objective) {
    return simplex_lp(cell.coeffs(), cell.bounds(), objective);
}

/// min objective . q over the cell; `value` holds the minimum.
inline LPResult lp_min_over_cell(const ConfidenceCell& cell,
                                 const Eigen::Ref<const Vector>& objective) {
    LPResult r = simplex_lp(cell.coeffs(), cell.bounds(), -objective);
    r.value = -r.value;
    return r;
}

/// Number of simplex_lp calls made by this thread (diagnostics).
std::uint64_t lp_solve_count();

} // namespace batchrl
