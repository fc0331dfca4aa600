#include "climbsim/baseline_policies.hpp"

namespace climbsim {

PolicyOutcome SlotPolicy::insert_with_eviction(Position pos, Key key) {
    PolicyOutcome out;
    if (state_.full()) out.evicted = state_.pop_bottom();
    out.shifts = state_.insert(pos, key);
    return out;
}

PolicyOutcome FifoPolicy::on_request(const RequestRecord& request) {
    if (auto pos = state_.find(request.key)) {
        PolicyOutcome out;
        out.hit = true;
        out.position = pos;
        return out;
    }
    return insert_with_eviction(1, request.key);
}

PolicyOutcome LruPolicy::on_request(const RequestRecord& request) {
    if (auto pos = state_.find(request.key)) {
        PolicyOutcome out;
        out.hit = true;
        out.position = pos;
        out.shifts = state_.promote(*pos, 1);
        return out;
    }
    return insert_with_eviction(1, request.key);
}

PolicyOutcome ClimbPolicy::on_request(const RequestRecord& request) {
    if (auto pos = state_.find(request.key)) {
        PolicyOutcome out;
        out.hit = true;
        out.position = pos;
        if (*pos > 1) out.shifts = state_.promote(*pos, *pos - 1);
        return out;
    }
    if (!state_.full()) return insert_with_eviction(state_.occupancy() + 1, request.key);
    PolicyOutcome out;
    out.evicted = state_.replace(state_.capacity(), request.key);
    return out;
}

std::optional<std::uint64_t> LfuPolicy::count(Key key) const {
    auto it = table_.find(key);
    if (it == table_.end()) return std::nullopt;
    return it->second.count;
}

PolicyOutcome LfuPolicy::on_request(const RequestRecord& request) {
    PolicyOutcome out;
    if (auto pos = state_.find(request.key)) {
        out.hit = true;
        out.position = pos;
        Entry& e = table_.at(request.key);
        order_.erase(Rank{e.count, e.inserted, request.key});
        ++e.count;
        order_.insert(Rank{e.count, e.inserted, request.key});
        return out;
    }
    const Entry fresh{1, sequence_++};
    if (!state_.full()) {
        state_.insert(state_.occupancy() + 1, request.key);
    } else {
        const Key victim = std::get<2>(*order_.begin());
        order_.erase(order_.begin());
        table_.erase(victim);
        state_.replace(*state_.find(victim), request.key);
        out.evicted = victim;
    }
    table_.emplace(request.key, fresh);
    order_.insert(Rank{fresh.count, fresh.inserted, request.key});
    return out;
}

PolicyOutcome ClockPolicy::on_request(const RequestRecord& request) {
    PolicyOutcome out;
    if (auto pos = state_.find(request.key)) {
        out.hit = true;
        out.position = pos;
        state_.set_meta(*pos, 1);
        return out;
    }
    if (!state_.full()) {
        state_.insert(state_.occupancy() + 1, request.key);
        return out;
    }
    const std::size_t k = state_.capacity();
    while (state_.meta_at(hand_) != 0) {
        state_.set_meta(hand_, 0);
        hand_ = hand_ % k + 1;
    }
    out.evicted = state_.replace(hand_, request.key);
    hand_ = hand_ % k + 1;
    return out;
}

Position SievePolicy::hand() const { return hand_.value_or(state_.occupancy()); }

PolicyOutcome SievePolicy::on_request(const RequestRecord& request) {
    PolicyOutcome out;
    if (auto pos = state_.find(request.key)) {
        out.hit = true;
        out.position = pos;
        state_.set_meta(*pos, 1);
        return out;
    }
    if (!state_.full()) {
        out.shifts = state_.insert(1, request.key);
        // keep the hand on the same object
        if (hand_) ++*hand_;
        return out;
    }
    Position p = hand();
    while (state_.meta_at(p) != 0) {
        state_.set_meta(p, 0);
        p = (p == 1) ? state_.occupancy() : p - 1;
    }
    // Removing p and inserting at the top is a rotation of [1, p].
    out.evicted = state_.replace(p, request.key);
    out.shifts = state_.promote(p, 1);
    // The next candidate toward the top sat at p - 1 and now sits at p.
    if (p > 1) {
        hand_ = p;
    } else {
        hand_.reset();
    }
    return out;
}

}  // namespace climbsim
