#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "climbsim/core.hpp"
#include "climbsim/ir_analytics.hpp"

namespace climbsim {

// All synthetic streams draw from std::mt19937_64, whose output sequence is
// fixed by the C++ standard. Conversions to doubles and bounded integers are
// done here rather than through <random> distributions, whose algorithms are
// implementation-defined.
using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 0x5EED'C11B'2025ULL;

// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);
// Uniform integer in [0, bound) by rejection sampling.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);
std::uint64_t splitmix64(std::uint64_t x);

struct SizeModel {
    // Constant size when min_bytes == max_bytes, otherwise log-uniform in
    // [min_bytes, max_bytes], fixed per key.
    std::uint32_t min_bytes = 1;
    std::uint32_t max_bytes = 1;

    std::uint32_t size_of(Key key, std::uint64_t seed) const;
    void validate() const;
};

struct ZipfSpec {
    std::size_t items = 0;  // N
    double alpha = 1.0;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t length = 0;
    SizeModel sizes;

    void validate() const;  // throws std::invalid_argument
};

ir::ProbabilityVector zipf_probabilities(std::size_t items, double alpha);

// Draws ranks 1..N i.i.d. by inverse-CDF lookup.
class ZipfSampler {
public:
    ZipfSampler(std::size_t items, double alpha);
    std::size_t sample(Rng& rng) const;
    std::size_t items() const { return cdf_.size(); }

private:
    std::vector<double> cdf_;
};

// Streaming IR generator. Key = key_offset + permutation[rank - 1], where the
// permutation defaults to the identity; timestamps count up from first_timestamp.
class IrStream final : public RequestSource {
public:
    explicit IrStream(const ZipfSpec& spec, std::vector<Key> permutation = {}, Key key_offset = 0,
                      std::uint64_t first_timestamp = 1);

    std::optional<RequestRecord> next() override;
    std::optional<std::uint64_t> size_hint() const override { return spec_.length; }

private:
    ZipfSpec spec_;
    ZipfSampler sampler_;
    Rng rng_;
    std::vector<Key> permutation_;
    Key key_offset_;
    std::uint64_t emitted_ = 0;
    std::uint64_t first_timestamp_;
};

std::vector<RequestRecord> generate_ir_stream(const ZipfSpec& spec);

// Fisher-Yates shuffle of 1..n.
std::vector<Key> random_permutation(std::size_t n, std::uint64_t seed);

struct Phase {
    ZipfSpec spec;
    // Fresh rank permutation for this phase; identity when absent.
    std::optional<std::uint64_t> permutation_seed;
    // Added to every key of the phase; distinct offsets give disjoint key sets.
    Key key_offset = 0;
};

struct PhasePlan {
    std::vector<Phase> phases;
    void validate() const;
};

struct PhaseStream {
    std::vector<RequestRecord> records;
    // Index of the first record of each phase.
    std::vector<std::size_t> boundaries;
};

PhaseStream generate_phase_stream(const PhasePlan& plan);

}  // namespace climbsim
