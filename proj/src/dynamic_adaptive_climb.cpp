#include "climbsim/dynamic_adaptive_climb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace climbsim {

DynamicAdaptiveClimbPolicy::DynamicAdaptiveClimbPolicy(const DynamicAdaptiveClimbParams& params)
    : state_(params.capacity),
      epsilon_(params.epsilon),
      min_capacity_(params.min_capacity),
      max_capacity_(params.max_capacity == 0 ? params.capacity : params.max_capacity),
      jump_(static_cast<std::int64_t>(params.capacity)) {
    if (!(epsilon_ > 0.0 && epsilon_ <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
    if (min_capacity_ < 2 || min_capacity_ > params.capacity || max_capacity_ < params.capacity)
        throw std::invalid_argument("capacity bounds must satisfy 2 <= K_min <= K <= K_max");
}

std::int64_t DynamicAdaptiveClimbPolicy::floor_value() const {
    return -static_cast<std::int64_t>(state_.capacity() / 2);
}

std::int64_t DynamicAdaptiveClimbPolicy::shrink_threshold() const {
    const double need = static_cast<double>(state_.capacity()) * epsilon_ / 2.0;
    return -static_cast<std::int64_t>(std::ceil(need - 1e-9));
}

void DynamicAdaptiveClimbPolicy::set_counters(std::int64_t jump, std::int64_t jump_prime) {
    if (jump < floor_value() || jump_prime < floor_value() || jump_prime > 0)
        throw std::out_of_range("counters outside their invariant ranges");
    jump_ = jump;
    jump_prime_ = jump_prime;
}

Telemetry DynamicAdaptiveClimbPolicy::telemetry() const {
    Telemetry t;
    t.jump = jump_;
    t.jump_prime = jump_prime_;
    t.capacity = static_cast<std::int64_t>(state_.capacity());
    return t;
}

PolicyOutcome DynamicAdaptiveClimbPolicy::on_hit(Position pos) {
    const std::int64_t floor = floor_value();
    if (jump_ > floor) --jump_;
    if (pos <= state_.capacity() / 2) {
        if (jump_prime_ > floor) --jump_prime_;
    } else if (jump_prime_ < 0) {
        ++jump_prime_;
    }
    PolicyOutcome out;
    out.hit = true;
    out.position = pos;
    if (pos > 1) {
        const std::int64_t actual =
            std::max<std::int64_t>(1, std::min<std::int64_t>(jump_, static_cast<std::int64_t>(pos) - 1));
        out.shifts = state_.promote(pos, pos - static_cast<Position>(actual));
    }
    return out;
}

PolicyOutcome DynamicAdaptiveClimbPolicy::on_miss(Key key) {
    ++jump_;
    if (jump_prime_ < 0) ++jump_prime_;
    const auto k = static_cast<std::int64_t>(state_.capacity());
    const std::int64_t actual = std::max<std::int64_t>(1, std::min<std::int64_t>(k - 1, jump_));
    PolicyOutcome out;
    if (state_.full()) out.evicted = state_.pop_bottom();
    out.shifts = state_.insert(static_cast<Position>(k - actual + 1), key);
    return out;
}

std::optional<ResizeEvent> DynamicAdaptiveClimbPolicy::resize_check(std::optional<Key> requested,
                                                                     std::uint64_t* shifts) {
    if (jump_ == 0) jump_prime_ = 0;

    std::size_t k = state_.capacity();
    if (jump_ >= 2 * static_cast<std::int64_t>(k)) {
        ResizeEvent ev{ResizeKind::Grow, k, 2 * k, false, 0};
        if (2 * k <= max_capacity_) {
            state_.resize(2 * k);
        } else {
            ev.to = k;
            ev.suppressed = true;
        }
        return ev;
    }

    k = state_.capacity();
    if (jump_ <= floor_value() && jump_prime_ <= shrink_threshold()) {
        const std::size_t half = k / 2;
        ResizeEvent ev{ResizeKind::Shrink, k, half, false, 0};
        if (half < min_capacity_) {
            ev.to = k;
            ev.suppressed = true;
            return ev;
        }
        if (requested) {
            if (auto pos = state_.find(*requested); pos && *pos > half) {
                const std::uint64_t moved = state_.promote(*pos, half);
                if (shifts) *shifts += moved;
            }
        }
        ev.shrink_evictions = state_.resize(half).size();
        jump_ = floor_value();
        jump_prime_ = 0;
        return ev;
    }
    return std::nullopt;
}

PolicyOutcome DynamicAdaptiveClimbPolicy::on_request(const RequestRecord& request) {
    PolicyOutcome out;
    if (auto pos = state_.find(request.key)) {
        out = on_hit(*pos);
    } else {
        out = on_miss(request.key);
    }
    out.telemetry.resize = resize_check(request.key, &out.shifts);
    const auto resize = out.telemetry.resize;
    out.telemetry = telemetry();
    out.telemetry.resize = resize;
    return out;
}

bool DynamicAdaptiveClimbPolicy::invariants_hold() const {
    const std::int64_t floor = floor_value();
    const std::size_t k = state_.capacity();
    return jump_prime_ >= floor && jump_prime_ <= 0 && jump_ >= floor && k >= min_capacity_ &&
           k <= max_capacity_ && state_.invariants_hold();
}

}  // namespace climbsim
