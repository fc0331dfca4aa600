#pragma once

// Independent-Requests model analytics: closed-form stationary distributions
// of LRU and CLIMB over full-cache configurations, the expected hit ratio of
// a distribution, and an exact Markov-chain oracle for small instances.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace climbsim::ir {

class AnalyticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// p_1..p_N; non-negative and normalized to within 1e-12.
class ProbabilityVector {
public:
    static constexpr double kTolerance = 1e-12;

    explicit ProbabilityVector(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    // Item ids are 1-based.
    double of(std::size_t item) const { return values_.at(item - 1); }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> values_;
};

// Ordered tuple of distinct 1-based item ids, top of the cache first.
using Configuration = std::vector<std::size_t>;
using StationaryDistribution = std::map<Configuration, double>;

enum class ChainModel { Lru, Climb, AdaptiveClimb };

// All K-permutations of 1..N in lexicographic order.
std::vector<Configuration> enumerate_configurations(std::size_t n, std::size_t k);
std::uint64_t configuration_count(std::size_t n, std::size_t k);

double pi_lru(const ProbabilityVector& p, const Configuration& config);

// Sum of prod p_{sigma_i}^(K-i+1) over every K-permutation; 1/C_1.
double climb_weight_sum(const ProbabilityVector& p, std::size_t k);
double pi_climb(const ProbabilityVector& p, const Configuration& config);
double pi_climb(const ProbabilityVector& p, const Configuration& config, double weight_sum);

StationaryDistribution lru_distribution(const ProbabilityVector& p, std::size_t k);
StationaryDistribution climb_distribution(const ProbabilityVector& p, std::size_t k);

struct MarkovOptions {
    double tolerance = 1e-12;
    std::uint64_t max_iterations = 1'000'000;
};

struct MarkovResult {
    // Marginal over configurations (jump is summed out for AdaptiveClimb).
    StationaryDistribution distribution;
    double residual = 0.0;
    std::uint64_t iterations = 0;
    std::size_t states = 0;
};

inline constexpr std::size_t kMaxOracleItems = 7;
inline constexpr std::size_t kMaxOracleCapacity = 4;

// Power iteration on the exact transition matrix of the chosen policy under
// IR requests. Throws AnalyticsError when N > 7, K > 4, K >= N, or when the
// iteration cap is reached (the message carries the residual).
MarkovResult markov_stationary(ChainModel model, const ProbabilityVector& p, std::size_t k,
                               const MarkovOptions& options = {});

double expected_hit_ratio(const StationaryDistribution& dist, const ProbabilityVector& p);

// Half the L1 distance; configurations absent from one side count as zero.
double total_variation(const StationaryDistribution& a, const StationaryDistribution& b);

double max_abs_difference(const StationaryDistribution& a, const StationaryDistribution& b);

std::string format_configuration(const Configuration& config);

}  // namespace climbsim::ir
