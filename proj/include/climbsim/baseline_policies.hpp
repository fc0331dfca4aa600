#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>

#include "climbsim/core.hpp"

namespace climbsim {

// Shared plumbing for policies whose whole state is a CacheState.
class SlotPolicy : public Policy {
public:
    explicit SlotPolicy(std::size_t capacity) : state_(capacity) {}
    const CacheState& state() const override { return state_; }

protected:
    // Inserts `key` at `pos`, evicting the bottom key first when the cache is
    // full. During warmup the position is clamped to occupancy + 1.
    PolicyOutcome insert_with_eviction(Position pos, Key key);

    CacheState state_;
};

// Hits never reorder; misses enter at the top and the bottom is evicted.
class FifoPolicy final : public SlotPolicy {
public:
    using SlotPolicy::SlotPolicy;
    PolicyOutcome on_request(const RequestRecord& request) override;
    PolicyKind kind() const override { return PolicyKind::Fifo; }
};

// Move-to-front.
class LruPolicy final : public SlotPolicy {
public:
    using SlotPolicy::SlotPolicy;
    PolicyOutcome on_request(const RequestRecord& request) override;
    PolicyKind kind() const override { return PolicyKind::Lru; }
};

// Transpose: a hit swaps with its upper neighbour, a miss replaces the bottom.
class ClimbPolicy final : public SlotPolicy {
public:
    using SlotPolicy::SlotPolicy;
    PolicyOutcome on_request(const RequestRecord& request) override;
    PolicyKind kind() const override { return PolicyKind::Climb; }
};

// In-cache LFU. Counts live only while a key is resident. The victim is the
// minimum-count key, ties broken by earliest insertion. Victims are replaced
// in place, so slot order carries no meaning for this policy.
class LfuPolicy final : public SlotPolicy {
public:
    using SlotPolicy::SlotPolicy;
    PolicyOutcome on_request(const RequestRecord& request) override;
    PolicyKind kind() const override { return PolicyKind::Lfu; }

    std::optional<std::uint64_t> count(Key key) const;

private:
    struct Entry {
        std::uint64_t count;
        std::uint64_t inserted;
    };
    // (count, insertion sequence, key)
    using Rank = std::tuple<std::uint64_t, std::uint64_t, Key>;

    std::unordered_map<Key, Entry> table_;
    std::set<Rank> order_;
    std::uint64_t sequence_ = 0;
};

// Second-chance ring. Slot positions are ring positions; the hand is
// 1-based and always names a resident slot once the cache is non-empty.
class ClockPolicy final : public SlotPolicy {
public:
    using SlotPolicy::SlotPolicy;
    PolicyOutcome on_request(const RequestRecord& request) override;
    PolicyKind kind() const override { return PolicyKind::Clock; }

    Position hand() const { return hand_; }
    bool visited(Position pos) const { return state_.meta_at(pos) != 0; }

private:
    Position hand_ = 1;
};

// SIEVE: hits set a visited bit without moving; new keys enter at the top;
// the hand sweeps from the bottom toward the top, clearing bits, and evicts
// the first unvisited key it meets.
class SievePolicy final : public SlotPolicy {
public:
    using SlotPolicy::SlotPolicy;
    PolicyOutcome on_request(const RequestRecord& request) override;
    PolicyKind kind() const override { return PolicyKind::Sieve; }

    // Current hand position; the bottom slot when the hand has wrapped or
    // has not moved yet.
    Position hand() const;
    bool visited(Position pos) const { return state_.meta_at(pos) != 0; }

private:
    std::optional<Position> hand_;
};

}  // namespace climbsim
