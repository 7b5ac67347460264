#include "batchrl/lp.hpp"

#include <stdexcept>

namespace batchrl {

namespace {

constexpr prec_t kCostTol = 1e-10;
constexpr prec_t kPivotTol = 1e-11;
constexpr prec_t kRatioTol = 1e-13;
constexpr prec_t kInfeasibleTol = 1e-9;
constexpr int kMaxPivots = 100000;

thread_local std::uint64_t solve_count = 0;

// Row-major tableau; the last row holds the reduced costs z_j - c_j and the
// last column the right-hand side.
struct Tableau {
    Index rows = 0; // constraint rows, objective row excluded
    Index cols = 0; // variable columns, rhs excluded
    std::vector<prec_t> t;
    std::vector<Index> basis;
    std::vector<char> blocked;
    std::vector<char> is_basic;
    std::vector<prec_t> cost;

    Index width() const { return cols + 1; }
    prec_t& at(Index i, Index j) { return t[std::size_t(i * width() + j)]; }
    prec_t& rhs(Index i) { return at(i, cols); }
    prec_t& reduced(Index j) { return at(rows, j); }

    void reset(Index r, Index c) {
        rows = r;
        cols = c;
        t.assign(std::size_t((r + 1) * (c + 1)), 0.0);
        basis.assign(std::size_t(r), 0);
        blocked.assign(std::size_t(c), 0);
        is_basic.assign(std::size_t(c), 0);
        cost.assign(std::size_t(c), 0.0);
    }

    void set_objective() {
        for (Index j = 0; j <= cols; ++j) {
            prec_t z = 0.0;
            for (Index i = 0; i < rows; ++i) {
                const prec_t cb = cost[std::size_t(basis[i])];
                if (cb != 0.0) z += cb * at(i, j);
            }
            at(rows, j) = j < cols ? z - cost[std::size_t(j)] : z;
        }
    }

    void pivot(Index r, Index c) {
        const Index w = width();
        prec_t* pr = &t[std::size_t(r * w)];
        const prec_t inv = 1.0 / pr[c];
        for (Index j = 0; j < w; ++j) pr[j] *= inv;
        pr[c] = 1.0;
        for (Index i = 0; i <= rows; ++i) {
            if (i == r) continue;
            prec_t* pi = &t[std::size_t(i * w)];
            const prec_t f = pi[c];
            if (f == 0.0) continue;
            for (Index j = 0; j < w; ++j) pi[j] -= f * pr[j];
            pi[c] = 0.0;
        }
        is_basic[std::size_t(basis[r])] = 0;
        basis[r] = c;
        is_basic[std::size_t(c)] = 1;
    }

    // Bland's rule: lowest entering index, lowest basic index on ratio ties.
    void run() {
        for (int iter = 0; iter < kMaxPivots; ++iter) {
            Index enter = -1;
            for (Index j = 0; j < cols; ++j) {
                if (!blocked[std::size_t(j)] && !is_basic[std::size_t(j)] && reduced(j) < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return;
            Index leave = -1;
            prec_t best = 0.0;
            for (Index i = 0; i < rows; ++i) {
                const prec_t a = at(i, enter);
                if (a <= kPivotTol) continue;
                const prec_t ratio = std::max(rhs(i), 0.0) / a;
                if (leave < 0 || ratio < best - kRatioTol ||
                    (ratio <= best + kRatioTol && basis[i] < basis[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) throw std::runtime_error("simplex_lp: unbounded direction in a bounded LP");
            pivot(leave, enter);
        }
        throw std::runtime_error("simplex_lp: pivot limit reached");
    }

    // Fixes to zero every free nonbasic column whose reduced cost is positive;
    // returns whether any free nonbasic column remains.
    bool lock_strict() {
        bool free_left = false;
        for (Index j = 0; j < cols; ++j) {
            if (blocked[std::size_t(j)] || is_basic[std::size_t(j)]) continue;
            if (reduced(j) > kCostTol) {
                blocked[std::size_t(j)] = 1;
            } else {
                free_left = true;
            }
        }
        return free_left;
    }
};

thread_local Tableau tab;

} // namespace

std::uint64_t lp_solve_count() { return solve_count; }

LPResult simplex_lp(const Matrix& coeffs, const Vector& bounds,
                    const Eigen::Ref<const Vector>& objective) {
    const Index n = objective.size();
    const Index m = coeffs.rows();
    if (coeffs.cols() != n || bounds.size() != m)
        throw DimensionError("simplex_lp: constraint and objective sizes differ");
    if (n == 0) throw DimensionError("simplex_lp: empty simplex");
    ++solve_count;

    LPResult out;
    const prec_t scale = objective.cwiseAbs().maxCoeff();
    const prec_t inv_scale = scale > 0.0 ? 1.0 / scale : 1.0;

    if (m == 0) {
        const prec_t top = objective.maxCoeff();
        // The lexicographically smallest optimal vertex is the last tied one.
        Index best = n - 1;
        while (objective(best) * inv_scale < top * inv_scale - kCostTol) --best;
        out.argmax = Vector::Zero(n);
        out.argmax(best) = 1.0;
        out.value = objective(best);
        out.status = LpStatus::optimal;
        return out;
    }

    Index artificials = 1;
    for (Index i = 0; i < m; ++i) artificials += bounds(i) < 0.0;
    const Index first_art = n + m;
    tab.reset(m + 1, n + m + artificials);

    Index art = first_art;
    for (Index i = 0; i < m; ++i) {
        const prec_t sign = bounds(i) < 0.0 ? -1.0 : 1.0;
        for (Index j = 0; j < n; ++j) tab.at(i, j) = sign * coeffs(i, j);
        tab.at(i, n + i) = sign;
        tab.rhs(i) = sign * bounds(i);
        if (sign < 0.0) {
            tab.at(i, art) = 1.0;
            tab.basis[i] = art++;
        } else {
            tab.basis[i] = n + i;
        }
    }
    for (Index j = 0; j < n; ++j) tab.at(m, j) = 1.0;
    tab.at(m, art) = 1.0;
    tab.rhs(m) = 1.0;
    tab.basis[m] = art;
    for (Index i = 0; i <= m; ++i) tab.is_basic[std::size_t(tab.basis[i])] = 1;

    // Phase I: maximize minus the artificial sum.
    for (Index j = first_art; j < tab.cols; ++j) tab.cost[std::size_t(j)] = -1.0;
    tab.set_objective();
    tab.run();
    if (tab.rhs(tab.rows) < -kInfeasibleTol) {
        out.status = LpStatus::infeasible;
        return out;
    }
    for (Index i = 0; i < tab.rows; ++i) {
        if (tab.basis[i] < first_art) continue;
        for (Index j = 0; j < first_art; ++j) {
            if (!tab.is_basic[std::size_t(j)] && std::abs(tab.at(i, j)) > 1e-9) {
                tab.pivot(i, j);
                break;
            }
        }
    }
    for (Index j = first_art; j < tab.cols; ++j) tab.blocked[std::size_t(j)] = 1;

    // Phase II.
    std::fill(tab.cost.begin(), tab.cost.end(), 0.0);
    for (Index j = 0; j < n; ++j) tab.cost[std::size_t(j)] = objective(j) * inv_scale;
    tab.set_objective();
    tab.run();

    // Lexicographic refinement over the optimal face.
    for (Index k = 0; k < n && tab.lock_strict(); ++k) {
        std::fill(tab.cost.begin(), tab.cost.end(), 0.0);
        tab.cost[std::size_t(k)] = -1.0;
        tab.set_objective();
        tab.run();
    }

    out.argmax = Vector::Zero(n);
    for (Index i = 0; i < tab.rows; ++i)
        if (tab.basis[i] < n) out.argmax(tab.basis[i]) = std::max(tab.rhs(i), 0.0);
    out.value = objective.dot(out.argmax);
    out.status = LpStatus::optimal;
    return out;
}

} // namespace batchrl
