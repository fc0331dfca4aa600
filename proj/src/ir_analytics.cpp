#include "climbsim/ir_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace climbsim::ir {

ProbabilityVector::ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw AnalyticsError("probability vector is empty");
    long double sum = 0.0L;
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw AnalyticsError("probabilities must be finite and non-negative");
        sum += v;
    }
    if (std::abs(sum - 1.0L) > kTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "probabilities sum to " << static_cast<double>(sum) << ", not 1";
        throw AnalyticsError(msg.str());
    }
}

namespace {

void check_shape(const ProbabilityVector& p, const Configuration& config) {
    std::vector<bool> seen(p.size() + 1, false);
    for (auto item : config) {
        if (item < 1 || item > p.size()) throw AnalyticsError("configuration names an item outside 1..N");
        if (seen[item]) throw AnalyticsError("configuration repeats an item");
        seen[item] = true;
    }
    if (config.empty() || config.size() >= p.size()) throw AnalyticsError("configuration size must satisfy 1 <= K < N");
}

void enumerate(std::size_t n, std::size_t k, Configuration& prefix, std::vector<bool>& used,
               std::vector<Configuration>& out) {
    if (prefix.size() == k) {
        out.push_back(prefix);
        return;
    }
    for (std::size_t item = 1; item <= n; ++item) {
        if (used[item]) continue;
        used[item] = true;
        prefix.push_back(item);
        enumerate(n, k, prefix, used, out);
        prefix.pop_back();
        used[item] = false;
    }
}

double climb_weight(const ProbabilityVector& p, const Configuration& config) {
    const std::size_t k = config.size();
    double w = 1.0;
    for (std::size_t i = 0; i < k; ++i) w *= std::pow(p.of(config[i]), static_cast<double>(k - i));
    return w;
}

// One request applied to a full configuration. Returns the hit position
// (1-based) or 0 on a miss.
std::size_t find_item(const Configuration& c, std::size_t item) {
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == item) return i + 1;
    }
    return 0;
}

void move_up(Configuration& c, std::size_t from, std::size_t to) {
    // 1-based; to <= from
    std::rotate(c.begin() + static_cast<std::ptrdiff_t>(to - 1), c.begin() + static_cast<std::ptrdiff_t>(from - 1),
                c.begin() + static_cast<std::ptrdiff_t>(from));
}

void insert_evicting_last(Configuration& c, std::size_t pos, std::size_t item) {
    c.pop_back();
    c.insert(c.begin() + static_cast<std::ptrdiff_t>(pos - 1), item);
}

struct ChainState {
    Configuration config;
    std::size_t jump = 0;  // AdaptiveClimb only
};

ChainState step(ChainModel model, ChainState s, std::size_t item) {
    const std::size_t k = s.config.size();
    const std::size_t pos = find_item(s.config, item);
    switch (model) {
        case ChainModel::Lru:
            if (pos) {
                move_up(s.config, pos, 1);
            } else {
                insert_evicting_last(s.config, 1, item);
            }
            break;
        case ChainModel::Climb:
            if (pos > 1) {
                std::swap(s.config[pos - 1], s.config[pos - 2]);
            } else if (!pos) {
                s.config.back() = item;
            }
            break;
        case ChainModel::AdaptiveClimb:
            if (pos) {
                if (s.jump > 1) --s.jump;
                if (pos > 1) {
                    const std::size_t target = pos > s.jump ? pos - s.jump : 1;
                    move_up(s.config, pos, target);
                }
            } else {
                if (s.jump < k) ++s.jump;
                insert_evicting_last(s.config, k - s.jump + 1, item);
            }
            break;
    }
    return s;
}

}  // namespace

std::uint64_t configuration_count(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < k; ++i) count *= (n - i);
    return count;
}

std::vector<Configuration> enumerate_configurations(std::size_t n, std::size_t k) {
    std::vector<Configuration> out;
    out.reserve(configuration_count(n, k));
    Configuration prefix;
    std::vector<bool> used(n + 1, false);
    enumerate(n, k, prefix, used, out);
    return out;
}

double pi_lru(const ProbabilityVector& p, const Configuration& config) {
    check_shape(p, config);
    double prob = 1.0;
    double prefix = 0.0;
    for (auto item : config) {
        const double residual = 1.0 - prefix;
        if (residual <= 1e-15) throw AnalyticsError("item set " + format_configuration(config) + " has zero residual mass");
        prob *= p.of(item) / residual;
        prefix += p.of(item);
    }
    return prob;
}

double climb_weight_sum(const ProbabilityVector& p, std::size_t k) {
    double sum = 0.0;
    for (const auto& c : enumerate_configurations(p.size(), k)) sum += climb_weight(p, c);
    return sum;
}

double pi_climb(const ProbabilityVector& p, const Configuration& config, double weight_sum) {
    check_shape(p, config);
    if (!(weight_sum > 0.0)) throw AnalyticsError("every configuration has zero weight");
    return climb_weight(p, config) / weight_sum;
}

double pi_climb(const ProbabilityVector& p, const Configuration& config) {
    check_shape(p, config);
    return pi_climb(p, config, climb_weight_sum(p, config.size()));
}

StationaryDistribution lru_distribution(const ProbabilityVector& p, std::size_t k) {
    StationaryDistribution out;
    for (auto& c : enumerate_configurations(p.size(), k)) {
        const double v = pi_lru(p, c);
        out.emplace(std::move(c), v);
    }
    return out;
}

StationaryDistribution climb_distribution(const ProbabilityVector& p, std::size_t k) {
    const double sum = climb_weight_sum(p, k);
    StationaryDistribution out;
    for (auto& c : enumerate_configurations(p.size(), k)) {
        const double v = pi_climb(p, c, sum);
        out.emplace(std::move(c), v);
    }
    return out;
}

MarkovResult markov_stationary(ChainModel model, const ProbabilityVector& p, std::size_t k,
                               const MarkovOptions& options) {
    const std::size_t n = p.size();
    if (n > kMaxOracleItems || k > kMaxOracleCapacity)
        throw AnalyticsError("state space guard exceeded: the oracle needs N <= 7 and K <= 4");
    if (k == 0 || k >= n) throw AnalyticsError("oracle needs 1 <= K < N");

    const auto configs = enumerate_configurations(n, k);
    std::map<Configuration, std::size_t> config_index;
    for (std::size_t i = 0; i < configs.size(); ++i) config_index.emplace(configs[i], i);

    const std::size_t jumps = model == ChainModel::AdaptiveClimb ? k : 1;
    const std::size_t states = configs.size() * jumps;
    auto encode = [&](const ChainState& s) {
        const std::size_t base = config_index.at(s.config) * jumps;
        return model == ChainModel::AdaptiveClimb ? base + (s.jump - 1) : base;
    };

    // next[s * n + (item - 1)]
    std::vector<std::size_t> next(states * n);
    for (std::size_t c = 0; c < configs.size(); ++c) {
        for (std::size_t j = 0; j < jumps; ++j) {
            const ChainState from{configs[c], model == ChainModel::AdaptiveClimb ? j + 1 : 0};
            const std::size_t s = c * jumps + j;
            for (std::size_t item = 1; item <= n; ++item) next[s * n + item - 1] = encode(step(model, from, item));
        }
    }

    std::vector<double> x(states, 1.0 / static_cast<double>(states));
    std::vector<double> y(states);
    MarkovResult result;
    result.states = states;
    double residual = 1.0;
    std::uint64_t it = 0;
    while (it < options.max_iterations) {
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t s = 0; s < states; ++s) {
            const double mass = x[s];
            if (mass == 0.0) continue;
            for (std::size_t item = 0; item < n; ++item) y[next[s * n + item]] += mass * p.values()[item];
        }
        residual = 0.0;
        for (std::size_t s = 0; s < states; ++s) residual += std::abs(y[s] - x[s]);
        x.swap(y);
        ++it;
        if (residual < options.tolerance) break;
    }
    result.residual = residual;
    result.iterations = it;
    if (residual >= options.tolerance) {
        std::ostringstream msg;
        msg << "power iteration did not converge after " << it << " iterations (residual " << residual << ")";
        throw AnalyticsError(msg.str());
    }
    for (std::size_t c = 0; c < configs.size(); ++c) {
        double mass = 0.0;
        for (std::size_t j = 0; j < jumps; ++j) mass += x[c * jumps + j];
        result.distribution.emplace(configs[c], mass);
    }
    return result;
}

double expected_hit_ratio(const StationaryDistribution& dist, const ProbabilityVector& p) {
    double total = 0.0;
    for (const auto& [config, prob] : dist) {
        double resident = 0.0;
        for (auto item : config) resident += p.of(item);
        total += prob * resident;
    }
    return total;
}

double total_variation(const StationaryDistribution& a, const StationaryDistribution& b) {
    double sum = 0.0;
    for (const auto& [c, v] : a) {
        auto it = b.find(c);
        sum += std::abs(v - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [c, v] : b) {
        if (!a.contains(c)) sum += std::abs(v);
    }
    return 0.5 * sum;
}

double max_abs_difference(const StationaryDistribution& a, const StationaryDistribution& b) {
    double worst = 0.0;
    for (const auto& [c, v] : a) {
        auto it = b.find(c);
        worst = std::max(worst, std::abs(v - (it == b.end() ? 0.0 : it->second)));
    }
    for (const auto& [c, v] : b) {
        if (!a.contains(c)) worst = std::max(worst, std::abs(v));
    }
    return worst;
}

std::string format_configuration(const Configuration& config) {
    std::string out = "(";
    for (std::size_t i = 0; i < config.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(config[i]);
    }
    return out + ")";
}

}  // namespace climbsim::ir
