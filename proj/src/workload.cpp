#include "climbsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace climbsim {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("empty range");
    // 2^64 mod bound; draws below it would bias the low residues
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x < threshold);
    return x % bound;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

void SizeModel::validate() const {
    if (min_bytes == 0) throw std::invalid_argument("object sizes must be at least 1 byte");
    if (max_bytes < min_bytes) throw std::invalid_argument("size range is empty");
}

std::uint32_t SizeModel::size_of(Key key, std::uint64_t seed) const {
    if (min_bytes == max_bytes) return min_bytes;
    const double u = static_cast<double>(splitmix64(key ^ splitmix64(seed)) >> 11) * 0x1.0p-53;
    const double lo = std::log(static_cast<double>(min_bytes));
    const double hi = std::log(static_cast<double>(max_bytes) + 1.0);
    const double v = std::floor(std::exp(lo + u * (hi - lo)));
    return static_cast<std::uint32_t>(std::clamp(v, static_cast<double>(min_bytes), static_cast<double>(max_bytes)));
}

void ZipfSpec::validate() const {
    if (items < 2) throw std::invalid_argument("a Zipf workload needs at least 2 items");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("Zipf alpha must be a finite value >= 0");
    if (length < 1) throw std::invalid_argument("workload length must be at least 1");
    sizes.validate();
}

ir::ProbabilityVector zipf_probabilities(std::size_t items, double alpha) {
    if (items < 2) throw std::invalid_argument("a Zipf workload needs at least 2 items");
    if (!(alpha >= 0.0)) throw std::invalid_argument("Zipf alpha must be >= 0");
    std::vector<long double> weights(items);
    long double total = 0.0L;
    for (std::size_t i = 0; i < items; ++i) {
        weights[i] = std::pow(static_cast<long double>(i + 1), -static_cast<long double>(alpha));
        total += weights[i];
    }
    std::vector<double> p(items);
    for (std::size_t i = 0; i < items; ++i) p[i] = static_cast<double>(weights[i] / total);
    return ir::ProbabilityVector(std::move(p));
}

ZipfSampler::ZipfSampler(std::size_t items, double alpha) {
    const auto p = zipf_probabilities(items, alpha);
    cdf_.resize(items);
    long double acc = 0.0L;
    for (std::size_t i = 0; i < items; ++i) {
        acc += p.values()[i];
        cdf_[i] = static_cast<double>(acc);
    }
    cdf_.back() = 1.0;
}

std::size_t ZipfSampler::sample(Rng& rng) const {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(it - cdf_.begin()) + 1;
}

IrStream::IrStream(const ZipfSpec& spec, std::vector<Key> permutation, Key key_offset, std::uint64_t first_timestamp)
    : spec_((spec.validate(), spec)),
      sampler_(spec.items, spec.alpha),
      rng_(spec.seed),
      permutation_(std::move(permutation)),
      key_offset_(key_offset),
      first_timestamp_(first_timestamp) {
    if (!permutation_.empty() && permutation_.size() != spec.items)
        throw std::invalid_argument("rank permutation must cover every item");
}

std::optional<RequestRecord> IrStream::next() {
    if (emitted_ >= spec_.length) return std::nullopt;
    const std::size_t rank = sampler_.sample(rng_);
    const Key item = permutation_.empty() ? rank : permutation_[rank - 1];
    RequestRecord r;
    r.timestamp = first_timestamp_ + emitted_;
    r.key = key_offset_ + item;
    r.size = spec_.sizes.size_of(r.key, spec_.seed);
    ++emitted_;
    return r;
}

std::vector<RequestRecord> generate_ir_stream(const ZipfSpec& spec) {
    IrStream stream(spec);
    std::vector<RequestRecord> out;
    out.reserve(spec.length);
    while (auto r = stream.next()) out.push_back(*r);
    return out;
}

std::vector<Key> random_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<Key> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i + 1;
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = uniform_below(rng, i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

void PhasePlan::validate() const {
    if (phases.empty()) throw std::invalid_argument("a phase plan needs at least one phase");
    for (const auto& phase : phases) phase.spec.validate();
}

PhaseStream generate_phase_stream(const PhasePlan& plan) {
    plan.validate();
    PhaseStream out;
    std::uint64_t total = 0;
    for (const auto& phase : plan.phases) total += phase.spec.length;
    out.records.reserve(total);
    for (const auto& phase : plan.phases) {
        out.boundaries.push_back(out.records.size());
        std::vector<Key> perm;
        if (phase.permutation_seed) perm = random_permutation(phase.spec.items, *phase.permutation_seed);
        IrStream stream(phase.spec, std::move(perm), phase.key_offset, out.records.size() + 1);
        while (auto r = stream.next()) out.records.push_back(*r);
    }
    return out;
}

}  // namespace climbsim
