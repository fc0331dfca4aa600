#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace climbsim {

using Key = std::uint64_t;

// 1-based slot index; position 1 is the top of the cache.
using Position = std::size_t;

struct RequestRecord {
    std::uint64_t timestamp = 0;
    Key key = 0;
    std::uint32_t size = 1;

    friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

enum class PolicyKind {
    Fifo,
    Lru,
    Climb,
    Lfu,
    Clock,
    Sieve,
    AdaptiveClimb,
    DynamicAdaptiveClimb,
};

std::string_view policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);
std::vector<PolicyKind> all_policies();

struct PolicyConfig {
    PolicyKind kind = PolicyKind::Lru;
    std::size_t capacity = 0;
    // DynamicAdaptiveClimb only.
    double epsilon = 0.5;
    std::size_t min_capacity = 2;
    std::size_t max_capacity = 0;  // 0 means "same as capacity"

    // Throws std::invalid_argument on a malformed configuration.
    void validate() const;
    std::size_t resolved_max_capacity() const { return max_capacity == 0 ? capacity : max_capacity; }
};

enum class ResizeKind { Grow, Shrink };

struct ResizeEvent {
    ResizeKind kind = ResizeKind::Grow;
    std::size_t from = 0;
    std::size_t to = 0;
    bool suppressed = false;
    std::size_t shrink_evictions = 0;

    friend bool operator==(const ResizeEvent&, const ResizeEvent&) = default;
};

// Named counters reported by adaptive policies. All fields are empty for
// static policies.
struct Telemetry {
    std::optional<std::int64_t> jump;
    std::optional<std::int64_t> jump_prime;
    std::optional<std::int64_t> capacity;
    std::optional<ResizeEvent> resize;

    bool empty() const { return !jump && !jump_prime && !capacity && !resize; }
    std::vector<std::pair<std::string, std::int64_t>> as_map() const;

    friend bool operator==(const Telemetry&, const Telemetry&) = default;
};

struct PolicyOutcome {
    bool hit = false;
    std::optional<Position> position;  // hit position before any movement
    std::optional<Key> evicted;
    std::uint64_t shifts = 0;
    Telemetry telemetry;

    friend bool operator==(const PolicyOutcome&, const PolicyOutcome&) = default;
};

// Ordered slot array with key -> position lookup. Each slot carries a small
// metadata word that moves with its key (visited bits, counters).
class CacheState {
public:
    explicit CacheState(std::size_t capacity);

    std::size_t capacity() const { return capacity_; }
    std::size_t occupancy() const { return slots_.size(); }
    bool full() const { return slots_.size() >= capacity_; }
    bool empty() const { return slots_.empty(); }

    std::optional<Position> find(Key key) const;
    bool contains(Key key) const { return index_.contains(key); }

    Key key_at(Position pos) const { return slot(pos).key; }
    std::uint32_t meta_at(Position pos) const { return slot(pos).meta; }
    void set_meta(Position pos, std::uint32_t meta) { slot(pos).meta = meta; }

    // Moves the key at `from` to `to` (to <= from); the keys in [to, from-1]
    // each move down one slot. Returns the number of displaced keys.
    std::uint64_t promote(Position from, Position to);

    // Inserts at `pos` (clamped to occupancy + 1); keys at or below shift down.
    // Requires a free slot. Returns the number of displaced keys.
    std::uint64_t insert(Position pos, Key key, std::uint32_t meta = 0);

    // Removes the key at `pos`; keys below move up one slot.
    std::pair<Key, std::uint64_t> erase(Position pos);

    // Overwrites the key at `pos` in place. Returns the old key.
    Key replace(Position pos, Key key, std::uint32_t meta = 0);

    // Removes the bottom key. Requires occupancy > 0.
    Key pop_bottom();

    // Changes the slot count. Shrinking discards the keys beyond the new
    // capacity and returns them, top first.
    std::vector<Key> resize(std::size_t new_capacity);

    std::vector<Key> keys() const;

    // Checks distinctness, index/slot inverse and occupancy bounds.
    bool invariants_hold() const;

private:
    struct Slot {
        Key key;
        std::uint32_t entry;
        std::uint32_t meta;
    };

    Slot& slot(Position pos);
    const Slot& slot(Position pos) const;
    std::uint32_t allocate_entry(Position pos);
    void release_entry(std::uint32_t entry);

    std::size_t capacity_;
    std::vector<Slot> slots_;
    // key -> entry id; entry id -> 0-based slot index
    std::unordered_map<Key, std::uint32_t> index_;
    std::vector<std::uint32_t> entry_pos_;
    std::vector<std::uint32_t> free_entries_;
};

// Contract every eviction algorithm implements. A policy owns its CacheState
// and any private counters; instances are single-owner.
class Policy {
public:
    virtual ~Policy() = default;

    virtual PolicyOutcome on_request(const RequestRecord& request) = 0;
    virtual PolicyKind kind() const = 0;
    virtual const CacheState& state() const = 0;

    std::string_view name() const { return policy_name(kind()); }
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& config);

// Pull-based request stream consumed by the simulator.
class RequestSource {
public:
    virtual ~RequestSource() = default;
    virtual std::optional<RequestRecord> next() = 0;
    // Total record count when known up front.
    virtual std::optional<std::uint64_t> size_hint() const { return std::nullopt; }
};

// Replays an in-memory trace. The vector must outlive the source.
class VectorSource final : public RequestSource {
public:
    explicit VectorSource(const std::vector<RequestRecord>& records) : records_(&records) {}
    std::optional<RequestRecord> next() override {
        if (pos_ >= records_->size()) return std::nullopt;
        return (*records_)[pos_++];
    }
    std::optional<std::uint64_t> size_hint() const override { return records_->size(); }

private:
    const std::vector<RequestRecord>* records_;
    std::size_t pos_ = 0;
};

}  // namespace climbsim
