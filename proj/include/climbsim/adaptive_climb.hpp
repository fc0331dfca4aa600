#pragma once

#include <cstdint>

#include "climbsim/core.hpp"

namespace climbsim {

// AdaptiveClimb keeps a single promotion distance `jump` in [1, K]. Hits
// shrink it toward CLIMB-like transposition, misses grow it toward LRU-like
// move-to-front insertion.
class AdaptiveClimbPolicy final : public Policy {
public:
    explicit AdaptiveClimbPolicy(std::size_t capacity);

    PolicyOutcome on_request(const RequestRecord& request) override;
    PolicyKind kind() const override { return PolicyKind::AdaptiveClimb; }
    const CacheState& state() const override { return state_; }

    std::int64_t jump() const { return jump_; }

    // Test hook: places the counter anywhere in [1, K].
    void set_jump(std::int64_t jump);

    PolicyOutcome on_hit(Position pos);
    PolicyOutcome on_miss(Key key);

private:
    Telemetry telemetry() const;

    CacheState state_;
    std::int64_t jump_;
};

}  // namespace climbsim
