#include "climbsim/core.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <unordered_set>

#include "climbsim/adaptive_climb.hpp"
#include "climbsim/baseline_policies.hpp"
#include "climbsim/dynamic_adaptive_climb.hpp"

namespace climbsim {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 8> kPolicyNames{{
    {PolicyKind::Fifo, "FIFO"},
    {PolicyKind::Lru, "LRU"},
    {PolicyKind::Climb, "CLIMB"},
    {PolicyKind::Lfu, "LFU"},
    {PolicyKind::Clock, "CLOCK"},
    {PolicyKind::Sieve, "SIEVE"},
    {PolicyKind::AdaptiveClimb, "AdaptiveClimb"},
    {PolicyKind::DynamicAdaptiveClimb, "DynamicAdaptiveClimb"},
}};

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; };
        if (lower(a[i]) != lower(b[i])) return false;
    }
    return true;
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
    for (const auto& [k, name] : kPolicyNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
    for (const auto& [k, n] : kPolicyNames) {
        if (iequals(n, name)) return k;
    }
    // short aliases
    if (iequals(name, "AC")) return PolicyKind::AdaptiveClimb;
    if (iequals(name, "DAC")) return PolicyKind::DynamicAdaptiveClimb;
    return std::nullopt;
}

std::vector<PolicyKind> all_policies() {
    std::vector<PolicyKind> out;
    for (const auto& [k, name] : kPolicyNames) out.push_back(k);
    return out;
}

void PolicyConfig::validate() const {
    if (capacity == 0) throw std::invalid_argument("capacity must be positive");
    if (kind != PolicyKind::DynamicAdaptiveClimb) return;
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
    if (min_capacity < 2) throw std::invalid_argument("minimum capacity must be at least 2");
    if (min_capacity > capacity) throw std::invalid_argument("minimum capacity exceeds initial capacity");
    if (resolved_max_capacity() < capacity) throw std::invalid_argument("maximum capacity is below initial capacity");
}

std::vector<std::pair<std::string, std::int64_t>> Telemetry::as_map() const {
    std::vector<std::pair<std::string, std::int64_t>> out;
    if (jump) out.emplace_back("jump", *jump);
    if (jump_prime) out.emplace_back("jump_prime", *jump_prime);
    if (capacity) out.emplace_back("capacity", *capacity);
    return out;
}

CacheState::CacheState(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("cache capacity must be positive");
    slots_.reserve(capacity);
    index_.reserve(capacity * 2);
}

CacheState::Slot& CacheState::slot(Position pos) {
    assert(pos >= 1 && pos <= slots_.size());
    return slots_[pos - 1];
}

const CacheState::Slot& CacheState::slot(Position pos) const {
    assert(pos >= 1 && pos <= slots_.size());
    return slots_[pos - 1];
}

std::optional<Position> CacheState::find(Key key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return static_cast<Position>(entry_pos_[it->second]) + 1;
}

std::uint32_t CacheState::allocate_entry(Position pos) {
    std::uint32_t entry;
    if (!free_entries_.empty()) {
        entry = free_entries_.back();
        free_entries_.pop_back();
    } else {
        entry = static_cast<std::uint32_t>(entry_pos_.size());
        entry_pos_.push_back(0);
    }
    entry_pos_[entry] = static_cast<std::uint32_t>(pos - 1);
    return entry;
}

void CacheState::release_entry(std::uint32_t entry) { free_entries_.push_back(entry); }

std::uint64_t CacheState::promote(Position from, Position to) {
    assert(to >= 1 && to <= from && from <= slots_.size());
    if (to == from) return 0;
    auto first = slots_.begin() + static_cast<std::ptrdiff_t>(to - 1);
    auto last = slots_.begin() + static_cast<std::ptrdiff_t>(from);
    std::rotate(first, last - 1, last);
    for (std::size_t i = to - 1; i < from; ++i) entry_pos_[slots_[i].entry] = static_cast<std::uint32_t>(i);
    return from - to;
}

std::uint64_t CacheState::insert(Position pos, Key key, std::uint32_t meta) {
    if (full()) throw std::logic_error("insert into a full cache");
    assert(!contains(key));
    pos = std::clamp<Position>(pos, 1, slots_.size() + 1);
    const std::uint32_t entry = allocate_entry(pos);
    slots_.insert(slots_.begin() + static_cast<std::ptrdiff_t>(pos - 1), Slot{key, entry, meta});
    for (std::size_t i = pos; i < slots_.size(); ++i) entry_pos_[slots_[i].entry] = static_cast<std::uint32_t>(i);
    index_.emplace(key, entry);
    return slots_.size() - pos;
}

std::pair<Key, std::uint64_t> CacheState::erase(Position pos) {
    const Slot victim = slot(pos);
    slots_.erase(slots_.begin() + static_cast<std::ptrdiff_t>(pos - 1));
    for (std::size_t i = pos - 1; i < slots_.size(); ++i) entry_pos_[slots_[i].entry] = static_cast<std::uint32_t>(i);
    index_.erase(victim.key);
    release_entry(victim.entry);
    return {victim.key, slots_.size() - (pos - 1)};
}

Key CacheState::replace(Position pos, Key key, std::uint32_t meta) {
    assert(!contains(key));
    Slot& s = slot(pos);
    const Key old = s.key;
    index_.erase(old);
    s.key = key;
    s.meta = meta;
    index_.emplace(key, s.entry);
    return old;
}

Key CacheState::pop_bottom() {
    if (slots_.empty()) throw std::logic_error("pop from an empty cache");
    return erase(slots_.size()).first;
}

std::vector<Key> CacheState::resize(std::size_t new_capacity) {
    if (new_capacity == 0) throw std::invalid_argument("cache capacity must be positive");
    std::vector<Key> discarded;
    while (slots_.size() > new_capacity) discarded.push_back(pop_bottom());
    std::reverse(discarded.begin(), discarded.end());
    capacity_ = new_capacity;
    slots_.reserve(new_capacity);
    return discarded;
}

std::vector<Key> CacheState::keys() const {
    std::vector<Key> out;
    out.reserve(slots_.size());
    for (const auto& s : slots_) out.push_back(s.key);
    return out;
}

bool CacheState::invariants_hold() const {
    if (slots_.size() > capacity_) return false;
    if (index_.size() != slots_.size()) return false;
    std::unordered_set<Key> seen;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (!seen.insert(slots_[i].key).second) return false;
        auto p = find(slots_[i].key);
        if (!p || *p != i + 1) return false;
    }
    return true;
}

std::unique_ptr<Policy> make_policy(const PolicyConfig& config) {
    config.validate();
    switch (config.kind) {
        case PolicyKind::Fifo: return std::make_unique<FifoPolicy>(config.capacity);
        case PolicyKind::Lru: return std::make_unique<LruPolicy>(config.capacity);
        case PolicyKind::Climb: return std::make_unique<ClimbPolicy>(config.capacity);
        case PolicyKind::Lfu: return std::make_unique<LfuPolicy>(config.capacity);
        case PolicyKind::Clock: return std::make_unique<ClockPolicy>(config.capacity);
        case PolicyKind::Sieve: return std::make_unique<SievePolicy>(config.capacity);
        case PolicyKind::AdaptiveClimb: return std::make_unique<AdaptiveClimbPolicy>(config.capacity);
        case PolicyKind::DynamicAdaptiveClimb:
            return std::make_unique<DynamicAdaptiveClimbPolicy>(DynamicAdaptiveClimbParams{
                config.capacity, config.epsilon, config.min_capacity, config.resolved_max_capacity()});
    }
    throw std::invalid_argument("unknown policy");
}

}  // namespace climbsim
