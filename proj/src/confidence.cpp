#include "batchrl/confidence.hpp"

#include "batchrl/lp.hpp"

#include <cmath>
#include <stdexcept>

namespace batchrl {

void ConfidenceCell::add(const Eigen::Ref<const Vector>& coeff, prec_t bound) {
    if (coeff.size() != dim_) throw DimensionError("constraint has the wrong dimension");
    for (Index i = 0; i < size(); ++i) {
        if (coeffs_.row(i).transpose() == coeff) {
            bounds_(i) = std::min(bounds_(i), bound);
            return;
        }
    }
    const Index m = size();
    coeffs_.conservativeResize(m + 1, dim_);
    bounds_.conservativeResize(m + 1);
    coeffs_.row(m) = coeff.transpose();
    bounds_(m) = bound;
}

void ConfidenceCell::add(const ConfidenceCell& other) {
    if (other.dim_ != dim_) throw DimensionError("cells have different dimensions");
    for (Index i = 0; i < other.size(); ++i) add(other.coeffs_.row(i).transpose(), other.bounds_(i));
}

ConfidenceRegion::ConfidenceRegion(Index states, Index actions, Index horizon, Index initial_state,
                                   KnownSet known)
    : states_(states), actions_(actions), horizon_(horizon), initial_(initial_state),
      known_(std::move(known)),
      cells_(std::size_t(states * actions * horizon), ConfidenceCell(states + 1)) {
    if (known_.num_states() != states || known_.num_actions() != actions ||
        known_.horizon() != horizon)
        throw DimensionError("known set does not match the region shape");
    if (initial_state < 0 || initial_state >= states)
        throw DimensionError("initial state out of range");
}

ConfidenceRegion ConfidenceRegion::full(Index states, Index actions, Index horizon,
                                        Index initial_state, KnownSet known) {
    ConfidenceRegion r(states, actions, horizon, initial_state, std::move(known));
    TransitionTable center(states + 1, actions, states + 1, horizon);
    for (auto& l : center.layers) l.setConstant(1.0 / prec_t(states + 1));
    for (Index h = 0; h < horizon; ++h)
        for (Index a = 0; a < actions; ++a) {
            center.row(h, states, a).setZero();
            center.row(h, states, a)(states) = 1.0;
        }
    r.set_center(std::move(center));
    return r;
}

Index ConfidenceRegion::max_constraints() const {
    Index m = 0;
    for (const auto& c : cells_) m = std::max(m, c.size());
    return m;
}

Index ConfidenceRegion::total_constraints() const {
    Index m = 0;
    for (const auto& c : cells_) m += c.size();
    return m;
}

TransitionTable clipped_center(const TransitionCounts& counts, const KnownSet& known) {
    TransitionTable center = clip(empirical_model(counts), known);
    const Index S = counts.num_states();
    for (Index h = 0; h < counts.horizon(); ++h)
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < counts.num_actions(); ++a)
                if (counts.raw_sa_count(h, s, a) == 0) center.row(h, s, a)(S) = 1.0;
    return center;
}

ConfidenceRegion build_box_region(const TransitionCounts& counts, const KnownSet& known,
                                  prec_t iota, Index initial_state) {
    const Index S = counts.num_states();
    const Index A = counts.num_actions();
    const Index H = counts.horizon();
    ConfidenceRegion region(S, A, H, initial_state, known);
    Vector e = Vector::Zero(S + 1);
    for (Index h = 0; h < H; ++h)
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < A; ++a) {
                ConfidenceCell& cell = region.cell(h, s, a);
                const prec_t n = prec_t(counts.sa_count(h, s, a));
                prec_t z_low = 0.0;
                prec_t z_high = 0.0;
                for (Index next = 0; next < S; ++next) {
                    const prec_t np = prec_t(counts(h, s, a, next));
                    const prec_t p = np / n;
                    const prec_t alpha = width_alpha(n, np, iota);
                    e.setZero();
                    e(next) = 1.0;
                    if (known.contains(h, s, a, next)) {
                        if (p + alpha < 1.0) cell.add(e, p + alpha);
                        if (p - alpha > 0.0) cell.add(-e, -(p - alpha));
                    } else {
                        cell.add(e, 0.0);
                        z_low += std::max(0.0, p - alpha);
                        z_high += std::min(1.0, p + alpha);
                    }
                }
                e.setZero();
                e(S) = 1.0;
                if (z_high < 1.0) cell.add(e, z_high);
                if (z_low > 0.0) cell.add(-e, -z_low);
            }
    region.set_center(clipped_center(counts, known));
    return region;
}

ConfidenceRegion build_cr(const TransitionCounts& counts, prec_t c1, prec_t iota,
                          Index initial_state) {
    return build_box_region(counts, KnownSet(counts, c1, iota), iota, initial_state);
}

ConfidenceRegion build_cr_star(const TransitionCounts& cumulative, const TransitionCounts& batch,
                               const KnownSet& known, const std::vector<Vector>& v, prec_t iota,
                               Index initial_state) {
    const Index S = cumulative.num_states();
    const Index A = cumulative.num_actions();
    const Index H = cumulative.horizon();
    if (batch.num_states() != S || batch.num_actions() != A || batch.horizon() != H)
        throw DimensionError("batch and cumulative counts have different shapes");
    if (Index(v.size()) < H + 1) throw DimensionError("value table needs H + 1 layers");
    for (Index h = 0; h <= H; ++h)
        if (v[h].size() != S + 1) throw DimensionError("value layer must cover S + 1 states");

    ConfidenceRegion region = build_box_region(cumulative, known, iota, initial_state);
    const TransitionTable check = clip(empirical_model(batch), known);
    for (Index h = 0; h < H; ++h) {
        const Vector& next_v = v[h + 1];
        if ((next_v.array() == next_v(0)).all()) continue; // q . v is constant on the simplex
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < A; ++a) {
                if (batch.raw_sa_count(h, s, a) == 0) continue;
                const prec_t n = prec_t(batch.sa_count(h, s, a));
                const auto p = check.row(h, s, a);
                const prec_t centre = p.dot(next_v.transpose());
                const prec_t width = width_alpha_star(n, p, next_v.transpose(), iota);
                ConfidenceCell& cell = region.cell(h, s, a);
                cell.add(next_v, centre + width);
                cell.add(-next_v, -centre + width);
            }
    }
    return region;
}

ConfidenceRegion intersect(const ConfidenceRegion& r1, const ConfidenceRegion& r2) {
    if (r1.num_states() != r2.num_states() || r1.num_actions() != r2.num_actions() ||
        r1.horizon() != r2.horizon())
        throw DimensionError("regions have different shapes");
    if (!r1.known().same_members(r2.known()))
        throw DimensionError("regions were clipped with different known sets");
    ConfidenceRegion out = r1;
    for (Index h = 0; h < r1.horizon(); ++h)
        for (Index s = 0; s < r1.num_states(); ++s)
            for (Index a = 0; a < r1.num_actions(); ++a) out.cell(h, s, a).add(r2.cell(h, s, a));
    out.set_center(r2.center());
    return out;
}

std::vector<std::array<Index, 3>> violations(const ConfidenceRegion& region,
                                             const TransitionModel& model) {
    const Index S = region.num_states();
    if (!model.augmented() || model.base_states() != S ||
        model.num_actions() != region.num_actions() || model.horizon() != region.horizon())
        throw DimensionError("model is not an augmented model over the region's states");
    std::vector<std::array<Index, 3>> bad;
    for (Index h = 0; h < region.horizon(); ++h)
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < region.num_actions(); ++a)
                if (!region.cell(h, s, a).satisfied_by(model.row(h, s, a))) bad.push_back({h, s, a});
    return bad;
}

bool contains(const ConfidenceRegion& region, const TransitionModel& model) {
    return violations(region, model).empty();
}

bool nonempty(const ConfidenceRegion& region) {
    const Vector zero = Vector::Zero(region.dim());
    for (Index h = 0; h < region.horizon(); ++h)
        for (Index s = 0; s < region.num_states(); ++s)
            for (Index a = 0; a < region.num_actions(); ++a)
                if (!lp_max_over_cell(region.cell(h, s, a), zero).optimal()) return false;
    return true;
}

bool is_tight(const ConfidenceRegion& region, const TransitionModel& reference, Index horizon) {
    if (!contains(region, reference)) throw std::invalid_argument("reference is not in the region");
    if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
    const prec_t lo = std::exp(-1.0 / prec_t(horizon));
    const prec_t hi = std::exp(1.0 / prec_t(horizon));
    Vector e = Vector::Zero(region.dim());
    for (Index h = 0; h < region.horizon(); ++h)
        for (Index s = 0; s < region.num_states(); ++s)
            for (Index a = 0; a < region.num_actions(); ++a) {
                const ConfidenceCell& cell = region.cell(h, s, a);
                const auto ref = reference.row(h, s, a);
                for (Index j = 0; j < region.dim(); ++j) {
                    e.setZero();
                    e(j) = 1.0;
                    const prec_t top = lp_max_over_cell(cell, e).value;
                    if (ref(j) == 0.0) {
                        if (top > kMembershipSlack) return false;
                        continue;
                    }
                    const prec_t bottom = lp_min_over_cell(cell, e).value;
                    if (top > hi * ref(j) + kMembershipSlack) return false;
                    if (bottom < lo * ref(j) - kMembershipSlack) return false;
                }
            }
    return true;
}

TransitionModel region_member(const ConfidenceRegion& region) {
    const Index S = region.num_states();
    TransitionTable table = region.center();
    for (Index h = 0; h < region.horizon(); ++h)
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < region.num_actions(); ++a) {
                const ConfidenceCell& cell = region.cell(h, s, a);
                auto row = table.row(h, s, a);
                if (cell.satisfied_by(row)) continue;
                const Vector target = row.transpose();
                const LPResult vertex = lp_max_over_cell(cell, target);
                if (!vertex.optimal())
                    throw std::runtime_error("region_member: empty confidence cell");
                // Walk from the vertex towards the center while every constraint holds.
                const Vector dir = target - vertex.argmax;
                prec_t t = 1.0;
                for (Index i = 0; i < cell.size(); ++i) {
                    const prec_t rate = cell.coeffs().row(i).dot(dir);
                    if (rate <= 0.0) continue;
                    const prec_t room = cell.bounds()(i) - cell.coeffs().row(i).dot(vertex.argmax);
                    t = std::min(t, std::max(room, 0.0) / rate);
                }
                Vector q = (vertex.argmax + t * dir).cwiseMax(0.0);
                row = (q / q.sum()).transpose();
            }
    return TransitionModel(std::move(table), region.initial_state(), true);
}

} // namespace batchrl
