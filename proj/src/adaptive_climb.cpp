#include "climbsim/adaptive_climb.hpp"

#include <algorithm>
#include <stdexcept>

namespace climbsim {

AdaptiveClimbPolicy::AdaptiveClimbPolicy(std::size_t capacity)
    : state_(capacity), jump_(static_cast<std::int64_t>(capacity)) {}

void AdaptiveClimbPolicy::set_jump(std::int64_t jump) {
    if (jump < 1 || jump > static_cast<std::int64_t>(state_.capacity()))
        throw std::out_of_range("jump must lie in [1, K]");
    jump_ = jump;
}

Telemetry AdaptiveClimbPolicy::telemetry() const {
    Telemetry t;
    t.jump = jump_;
    t.capacity = static_cast<std::int64_t>(state_.capacity());
    return t;
}

PolicyOutcome AdaptiveClimbPolicy::on_hit(Position pos) {
    if (jump_ > 1) --jump_;
    PolicyOutcome out;
    out.hit = true;
    out.position = pos;
    if (pos > 1) {
        // i - jump may fall above the top; clamp to position 1.
        const std::int64_t target = std::max<std::int64_t>(1, static_cast<std::int64_t>(pos) - jump_);
        out.shifts = state_.promote(pos, static_cast<Position>(target));
    }
    out.telemetry = telemetry();
    return out;
}

PolicyOutcome AdaptiveClimbPolicy::on_miss(Key key) {
    const auto k = static_cast<std::int64_t>(state_.capacity());
    if (jump_ < k) ++jump_;
    PolicyOutcome out;
    if (state_.full()) out.evicted = state_.pop_bottom();
    out.shifts = state_.insert(static_cast<Position>(k - jump_ + 1), key);
    out.telemetry = telemetry();
    return out;
}

PolicyOutcome AdaptiveClimbPolicy::on_request(const RequestRecord& request) {
    if (auto pos = state_.find(request.key)) return on_hit(*pos);
    return on_miss(request.key);
}

}  // namespace climbsim
