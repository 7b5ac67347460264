#include "batchrl/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace batchrl {

TransitionCounts::TransitionCounts(Index states, Index actions, Index horizon)
    : states_(states), actions_(actions),
      layers_(std::size_t(horizon), CountMatrix::Zero(states * actions, states)) {}

std::int64_t TransitionCounts::raw_sa_count(Index h, Index s, Index a) const {
    return layers_[h].row(s * actions_ + a).sum();
}

std::int64_t TransitionCounts::sa_count(Index h, Index s, Index a) const {
    return std::max<std::int64_t>(raw_sa_count(h, s, a), 1);
}

std::int64_t TransitionCounts::total() const {
    std::int64_t t = 0;
    for (const auto& l : layers_) t += l.sum();
    return t;
}

void TransitionCounts::add(Index h, Index s, Index a, Index next, std::int64_t n) {
    if (h < 0 || h >= horizon() || s < 0 || s >= states_ || a < 0 || a >= actions_ || next < 0 ||
        next >= states_)
        throw std::out_of_range("transition tuple out of range");
    layers_[h](s * actions_ + a, next) += n;
}

void TransitionCounts::add(const Trajectory& trajectory) {
    if (Index(trajectory.steps.size()) > horizon())
        throw std::out_of_range("trajectory longer than the horizon");
    for (std::size_t h = 0; h < trajectory.steps.size(); ++h) {
        const Step& st = trajectory.steps[h];
        add(Index(h), st.state, st.action, st.next_state);
    }
}

void TransitionCounts::add(const TransitionCounts& other) {
    if (other.states_ != states_ || other.actions_ != actions_ || other.horizon() != horizon())
        throw DimensionError("count tables have different shapes");
    for (std::size_t h = 0; h < layers_.size(); ++h) layers_[h] += other.layers_[h];
}

TransitionCounts accumulate(TransitionCounts counts, std::span<const Trajectory> trajectories) {
    for (const auto& t : trajectories) counts.add(t);
    return counts;
}

TransitionTable empirical_model(const TransitionCounts& counts) {
    const Index S = counts.num_states();
    const Index A = counts.num_actions();
    TransitionTable p(S, A, S, counts.horizon());
    for (Index h = 0; h < counts.horizon(); ++h)
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < A; ++a) {
                const prec_t n = prec_t(counts.sa_count(h, s, a));
                p.row(h, s, a) = counts.layer(h).row(s * A + a).cast<prec_t>() / n;
            }
    return p;
}

prec_t iota_of(prec_t delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    return std::log(2.0 / delta);
}

KnownSet::KnownSet(const TransitionCounts& counts, prec_t c1, prec_t iota)
    : states_(counts.num_states()), actions_(counts.num_actions()), c1_(c1), iota_(iota) {
    if (!(c1 > 0.0) || !(iota > 0.0)) throw std::invalid_argument("C1 and iota must be positive");
    const prec_t H = prec_t(counts.horizon());
    threshold_ = c1 * H * H * iota;
    for (Index h = 0; h < counts.horizon(); ++h)
        member_.push_back(counts.layer(h).cast<prec_t>().array() >= threshold_);
}

KnownSet KnownSet::all(Index states, Index actions, Index horizon) {
    KnownSet k;
    k.states_ = states;
    k.actions_ = actions;
    k.member_.assign(std::size_t(horizon), Mask::Constant(states * actions, states, true));
    return k;
}

KnownSet KnownSet::none(Index states, Index actions, Index horizon) {
    KnownSet k = all(states, actions, horizon);
    for (auto& m : k.member_) m.setConstant(false);
    k.threshold_ = std::numeric_limits<prec_t>::infinity();
    return k;
}

Index KnownSet::size() const {
    Index n = 0;
    for (const auto& m : member_) n += m.count();
    return n;
}

bool KnownSet::same_members(const KnownSet& other) const {
    if (states_ != other.states_ || actions_ != other.actions_ || horizon() != other.horizon())
        return false;
    for (std::size_t h = 0; h < member_.size(); ++h)
        if ((member_[h] != other.member_[h]).any()) return false;
    return true;
}

KnownSet known_set(const TransitionCounts& counts, prec_t c1, prec_t iota) {
    return KnownSet(counts, c1, iota);
}

TransitionTable clip(const TransitionTable& p, const KnownSet& known) {
    const Index S = known.num_states();
    const Index A = known.num_actions();
    if (p.actions != A || p.horizon() != known.horizon() || p.states < S ||
        (p.columns != S && p.columns != S + 1))
        throw DimensionError("table and known set have different shapes");
    TransitionTable out(S + 1, A, S + 1, p.horizon());
    for (Index h = 0; h < p.horizon(); ++h) {
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < A; ++a) {
                const auto in = p.row(h, s, a);
                auto row = out.row(h, s, a);
                prec_t z = p.columns == S + 1 ? in(S) : 0.0;
                for (Index next = 0; next < S; ++next) {
                    if (known.contains(h, s, a, next)) {
                        row(next) = in(next);
                    } else {
                        z += in(next);
                    }
                }
                row(S) = z;
            }
        for (Index a = 0; a < A; ++a) out.row(h, S, a)(S) = 1.0;
    }
    return out;
}

TransitionModel clip(const TransitionModel& p, const KnownSet& known) {
    return TransitionModel(clip(p.table(), known), p.initial_state(), true);
}

} // namespace batchrl
