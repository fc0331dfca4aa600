#pragma once

#include <cstdint>
#include <optional>

#include "climbsim/core.hpp"

namespace climbsim {

struct DynamicAdaptiveClimbParams {
    std::size_t capacity = 0;
    double epsilon = 0.5;
    std::size_t min_capacity = 2;
    std::size_t max_capacity = 0;
};

// AdaptiveClimb with a capacity that doubles or halves.
//
// `jump` may run below zero (floor -floor(K/2)) and has no ceiling; once it
// reaches 2K the cache doubles. `jump_prime` lives in [-floor(K/2), 0] and
// drops on hits in the top half of the cache, rises on bottom-half hits and
// on misses, and resets whenever `jump` passes through zero. When both
// counters sit at their floor region the cache halves and keeps its top half.
//
// Triggers use inequalities rather than exact equality so that counters that
// overshoot across a resize still fire. The halving threshold on
// `jump_prime` is -ceil(K * epsilon / 2).
class DynamicAdaptiveClimbPolicy final : public Policy {
public:
    explicit DynamicAdaptiveClimbPolicy(const DynamicAdaptiveClimbParams& params);

    PolicyOutcome on_request(const RequestRecord& request) override;
    PolicyKind kind() const override { return PolicyKind::DynamicAdaptiveClimb; }
    const CacheState& state() const override { return state_; }

    std::int64_t jump() const { return jump_; }
    std::int64_t jump_prime() const { return jump_prime_; }
    std::size_t capacity() const { return state_.capacity(); }
    std::size_t min_capacity() const { return min_capacity_; }
    std::size_t max_capacity() const { return max_capacity_; }
    double epsilon() const { return epsilon_; }

    // -floor(K/2) for the current K.
    std::int64_t floor_value() const;
    // -ceil(K * epsilon / 2) for the current K.
    std::int64_t shrink_threshold() const;

    // Test hook. Values must respect the counter invariants.
    void set_counters(std::int64_t jump, std::int64_t jump_prime);

    // The three steps of one request, exposed for unit tests. on_hit and
    // on_miss do not run the resize check; on_request does.
    PolicyOutcome on_hit(Position pos);
    PolicyOutcome on_miss(Key key);
    // `requested` is kept resident if a halving would otherwise discard it;
    // its extra displacement is added to `shifts`.
    std::optional<ResizeEvent> resize_check(std::optional<Key> requested, std::uint64_t* shifts = nullptr);

    bool invariants_hold() const;

private:
    Telemetry telemetry() const;

    CacheState state_;
    double epsilon_;
    std::size_t min_capacity_;
    std::size_t max_capacity_;
    std::int64_t jump_;
    std::int64_t jump_prime_ = 0;
};

}  // namespace climbsim
