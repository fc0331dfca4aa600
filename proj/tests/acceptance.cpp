// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "climbsim/dynamic_adaptive_climb.hpp"
#include "climbsim/harness.hpp"
#include "climbsim/ir_analytics.hpp"
#include "climbsim/trace_io.hpp"
#include "climbsim/workload.hpp"
#include "oracles.hpp"

using namespace climbsim;

namespace {

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "] ";
        }
    }
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

constexpr std::size_t kN = 10'000;
constexpr std::uint64_t kLength = 1'000'000;

const std::vector<RequestRecord>& zipf_stream(double alpha) {
    static std::map<double, std::vector<RequestRecord>> cache;
    auto it = cache.find(alpha);
    if (it == cache.end()) {
        ZipfSpec s{.items = kN, .alpha = alpha, .seed = kDefaultSeed, .length = kLength};
        it = cache.emplace(alpha, generate_ir_stream(s)).first;
    }
    return it->second;
}

PolicyConfig config_for(PolicyKind kind, std::size_t k) { return DynamicSettings{}.configure(kind, k); }

// ---------------------------------------------------------------------------

void closed_forms(Verdict& v) {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20);
    double worst = 0.0, worst_sum = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + rng() % 4;                              // 3..6
        const std::size_t k = 1 + rng() % std::min<std::size_t>(3, n - 1);  // 1..3
        ir::ProbabilityVector p(oracle::random_simplex(rng, n));
        const auto lru = ir::lru_distribution(p, k);
        const auto climb = ir::climb_distribution(p, k);
        const auto lru_chain = ir::markov_stationary(ir::ChainModel::Lru, p, k);
        const auto climb_chain = ir::markov_stationary(ir::ChainModel::Climb, p, k);
        worst = std::max({worst, ir::max_abs_difference(lru, lru_chain.distribution),
                          ir::max_abs_difference(climb, climb_chain.distribution)});
        double sl = 0, sc = 0;
        for (auto& [c, x] : lru) sl += x;
        for (auto& [c, x] : climb) sc += x;
        worst_sum = std::max({worst_sum, std::abs(sl - 1.0), std::abs(sc - 1.0)});
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.detail << "max |chain - closed form| = " << worst << ", max |sum - 1| = " << worst_sum << ", " << fmt(secs, 2)
             << " s";
    v.require(worst < 1e-9, "deviation < 1e-9");
    v.require(worst_sum < 1e-9, "normalization");
    v.require(secs < 60.0, "runtime < 60 s");
}

void simulator_agreement(Verdict& v) {
    ZipfSpec s{.items = 4, .alpha = 1.0, .seed = 42, .length = 1'000'000};
    const auto recs = generate_ir_stream(s);
    const auto p = zipf_probabilities(4, 1.0);
    for (auto kind : {PolicyKind::Lru, PolicyKind::Climb}) {
        auto policy = make_policy(config_for(kind, 2));
        ir::StationaryDistribution freq;
        std::uint64_t counted = 0;
        for (const auto& r : recs) {
            policy->on_request(r);
            if (!policy->state().full()) continue;
            const auto keys = policy->state().keys();
            freq[ir::Configuration(keys.begin(), keys.end())] += 1.0;
            ++counted;
        }
        for (auto& [c, x] : freq) x /= static_cast<double>(counted);
        const auto analytic = kind == PolicyKind::Lru ? ir::lru_distribution(p, 2) : ir::climb_distribution(p, 2);
        const double tv = ir::total_variation(freq, analytic);
        v.detail << policy_name(kind) << " TV = " << fmt(tv, 5) << "; ";
        v.require(tv < 0.02, std::string(policy_name(kind)) + " TV < 0.02");
    }
}

struct StaticRun {
    RunReport report;
    std::vector<std::uint8_t> hits;
    std::vector<std::int64_t> jumps;
};

StaticRun run_with_trace(PolicyKind kind, std::size_t k, const std::vector<RequestRecord>& recs) {
    StaticRun out;
    out.hits.reserve(recs.size());
    RunOptions opts;
    opts.observer = [&](std::uint64_t, const RequestRecord&, const PolicyOutcome& o, const Policy&) {
        out.hits.push_back(o.hit);
        if (o.telemetry.jump) out.jumps.push_back(*o.telemetry.jump);
    };
    out.report = simulate(config_for(kind, k), recs, opts);
    return out;
}

double tail_hit_ratio(const std::vector<std::uint8_t>& hits, std::size_t tail) {
    std::uint64_t h = 0;
    for (std::size_t i = hits.size() - tail; i < hits.size(); ++i) h += hits[i];
    return static_cast<double>(h) / static_cast<double>(tail);
}

std::map<PolicyKind, StaticRun>& static_runs() {
    static std::map<PolicyKind, StaticRun> runs;
    if (runs.empty()) {
        for (auto kind : {PolicyKind::Lru, PolicyKind::Climb, PolicyKind::AdaptiveClimb})
            runs.emplace(kind, run_with_trace(kind, 100, zipf_stream(1.0)));
    }
    return runs;
}

void stability_ordering(Verdict& v) {
    auto& runs = static_runs();
    const double lru = runs[PolicyKind::Lru].report.hit_ratio();
    const double climb = runs[PolicyKind::Climb].report.hit_ratio();
    const double climb_tail = tail_hit_ratio(runs[PolicyKind::Climb].hits, 100'000);
    const double ac_tail = tail_hit_ratio(runs[PolicyKind::AdaptiveClimb].hits, 100'000);
    v.detail << "hit ratio CLIMB " << fmt(climb) << " vs LRU " << fmt(lru) << "; final 1e5: AdaptiveClimb "
             << fmt(ac_tail) << " vs CLIMB " << fmt(climb_tail);
    v.require(climb >= lru, "CLIMB >= LRU");
    v.require(std::abs(ac_tail - climb_tail) <= 0.01, "AdaptiveClimb within 1 pp of CLIMB");
}

void jump_convergence(Verdict& v) {
    auto jumps = static_runs()[PolicyKind::AdaptiveClimb].jumps;
    std::vector<std::int64_t> tail(jumps.end() - 100'000, jumps.end());
    std::nth_element(tail.begin(), tail.begin() + 50'000, tail.end());
    const auto upper = tail[50'000];
    std::nth_element(tail.begin(), tail.begin() + 49'999, tail.end());
    const double median = (static_cast<double>(tail[49'999]) + static_cast<double>(upper)) / 2.0;
    v.detail << "median jump over the final 1e5 requests = " << median << " (K = 100)";
    v.require(median <= 2.0, "median jump <= 2");
}

void adaptation_speed(Verdict& v) {
    int wins = 0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        Phase a;
        a.spec = ZipfSpec{.items = 1000, .alpha = 1.0, .seed = s, .length = 500'000};
        Phase b = a;
        b.spec.seed = s + 100;
        b.permutation_seed = s + 200;
        b.key_offset = 1000;
        const auto ps = generate_phase_stream(PhasePlan{{a, b}});
        const auto ac = run_with_trace(PolicyKind::AdaptiveClimb, 100, ps.records);
        const auto climb = run_with_trace(PolicyKind::Climb, 100, ps.records);
        const auto mac = measure_recovery(ac.hits, ps.boundaries[1]);
        const auto mcl = measure_recovery(climb.hits, ps.boundaries[1]);
        const bool win = mac.recovery && (!mcl.recovery || *mac.recovery < *mcl.recovery);
        wins += win;
        auto txt = [](const RecoveryMeasurement& m) { return m.recovery ? std::to_string(*m.recovery) : "never"; };
        v.detail << "seed " << s << ": AC " << txt(mac) << " vs CLIMB " << txt(mcl) << "; ";
    }
    v.detail << wins << "/5";
    v.require(wins == 5, "5/5 seeds");
}

struct DynamicTrace {
    RunReport report;
    bool invariants = true;
    std::uint64_t first_reach = 0;
};

DynamicTrace run_dynamic(const PolicyConfig& c, const std::vector<RequestRecord>& recs, std::size_t target) {
    DynamicTrace t;
    RunOptions opts;
    opts.observer = [&](std::uint64_t i, const RequestRecord&, const PolicyOutcome& o, const Policy& p) {
        const auto& dac = static_cast<const DynamicAdaptiveClimbPolicy&>(p);
        const auto k = static_cast<std::int64_t>(dac.capacity());
        const std::int64_t floor = -(k / 2);
        if (!(dac.jump_prime() >= floor && dac.jump_prime() <= 0 && dac.jump() >= floor &&
              dac.capacity() >= c.min_capacity && dac.capacity() <= c.resolved_max_capacity() &&
              dac.state().occupancy() <= dac.capacity() && o.telemetry.capacity == k))
            t.invariants = false;
        if (!t.first_reach && dac.capacity() >= target) t.first_reach = i + 1;
    };
    t.report = simulate(c, recs, opts);
    return t;
}

void resize_behavior(Verdict& v) {
    // (a) uniform requests over 8 * K0 keys
    {
        const std::size_t k0 = 64, ws = 8 * k0;
        ZipfSpec s{.items = ws, .alpha = 0.0, .seed = 7, .length = 1'000'000};
        PolicyConfig c = config_for(PolicyKind::DynamicAdaptiveClimb, k0);
        c.min_capacity = k0;
        c.max_capacity = 1024;
        const auto t = run_dynamic(c, generate_ir_stream(s), std::min(ws, c.max_capacity));
        v.detail << "(a) K reached " << ws << " at request " << t.first_reach << ", " << t.report.grow_events
                 << " doublings; ";
        v.require(t.first_reach > 0 && t.first_reach <= 1'000'000, "(a) doubling reaches the working set");
        v.require(t.invariants, "(a) counter invariants");
    }
    // (b) 32 hot keys carrying 96% of requests, K0 = 256
    {
        const std::size_t k0 = 256, kmin = 8, hot = 32;
        Rng rng(11);
        std::vector<RequestRecord> recs;
        recs.reserve(1'000'000);
        for (std::uint64_t i = 0; i < 1'000'000; ++i) {
            const bool is_hot = uniform01(rng) < 0.96;
            recs.push_back({i + 1, is_hot ? 1 + uniform_below(rng, hot) : 1000 + uniform_below(rng, 20'000), 1});
        }
        PolicyConfig c = config_for(PolicyKind::DynamicAdaptiveClimb, k0);
        c.min_capacity = kmin;
        c.max_capacity = k0;
        c.epsilon = 0.5;
        const auto t = run_dynamic(c, recs, k0 + 1);
        std::size_t cover = kmin;
        while (cover < hot) cover *= 2;
        const auto fin = t.report.final_capacity;
        v.detail << "(b) " << t.report.shrink_events << " halvings, final K " << fin << " (target " << cover << ")";
        v.require(t.report.shrink_events >= 1, "(b) at least one halving");
        v.require(fin * 2 >= cover && fin <= cover * 2, "(b) final K within 2x of target");
        v.require(t.invariants, "(b) counter invariants");
    }
}

void skew_sweep(Verdict& v) {
    const std::vector<double> alphas{0.2, 0.6, 1.0, 1.4};
    std::map<PolicyKind, std::vector<double>> mr;
    for (double a : alphas) {
        for (auto kind : all_policies()) mr[kind].push_back(simulate(config_for(kind, 100), zipf_stream(a)).miss_ratio());
    }
    for (auto& [kind, curve] : mr) {
        v.detail << policy_name(kind) << " ";
        for (double x : curve) v.detail << fmt(x, 3) << ' ';
        v.detail << "; ";
        for (std::size_t i = 1; i < curve.size(); ++i)
            v.require(curve[i] < curve[i - 1], std::string(policy_name(kind)) + " strictly decreasing");
    }
}

void capacity_sweep(Verdict& v) {
    const std::vector<std::size_t> ks{kN / 100, kN / 50, kN / 20, kN / 10};
    std::map<PolicyKind, std::vector<double>> mr;
    for (std::size_t k : ks) {
        for (auto kind : all_policies()) mr[kind].push_back(simulate(config_for(kind, k), zipf_stream(1.0)).miss_ratio());
    }
    const auto& dac = mr[PolicyKind::DynamicAdaptiveClimb];
    const auto& lru = mr[PolicyKind::Lru];
    const auto& lfu = mr[PolicyKind::Lfu];
    for (std::size_t i = 0; i < ks.size(); ++i) {
        v.detail << "K=" << ks[i] << ": DAC " << fmt(dac[i]) << " LRU " << fmt(lru[i]) << " LFU " << fmt(lfu[i]) << "; ";
        v.require(dac[i] <= lru[i], "DAC <= LRU at K=" + std::to_string(ks[i]));
        if (i >= 2) v.require(dac[i] <= lfu[i], "DAC <= LFU at K=" + std::to_string(ks[i]));
    }
    for (auto& [kind, curve] : mr) {
        for (std::size_t i = 1; i < curve.size(); ++i)
            v.require(curve[i] <= curve[i - 1] + 0.005, std::string(policy_name(kind)) + " non-increasing in K");
    }
}

void mrr_suite(Verdict& v) {
    v.require(std::abs(compute_mrr(0.355, 0.50).mrr - 0.29) < 1e-12, "(0.355, 0.50) -> 0.29");
    v.require(compute_mrr(0.5, 0.5).mrr == 0.0, "(0.5, 0.5) -> 0");
    v.require(std::abs(compute_mrr(0.4, 0.2).mrr + 0.5) < 1e-12, "(0.4, 0.2) -> -0.5");
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad = 0;
    const int trials = 1'000'000;
    for (int i = 0; i < trials; ++i) {
        const double a = 1.0 - u(rng), f = 1.0 - u(rng);
        const auto m = compute_mrr(a, f);
        const int sign = (f > a) - (f < a);
        const int got = (m.mrr > 0) - (m.mrr < 0);
        if (sign != got || m.mrr < -1.0 || m.mrr > 1.0 || m.mr_algo != a || m.mr_fifo != f) ++bad;
    }
    bool undefined_thrown = false;
    try {
        compute_mrr(0.0, 0.0);
    } catch (const UndefinedMrr&) {
        undefined_thrown = true;
    }
    v.detail << "3 examples, " << trials << " random pairs, " << bad << " violations";
    v.require(bad == 0, "sign and bound invariants");
    v.require(undefined_thrown, "zero denominator rejected");
}

void shift_proxy(Verdict& v) {
    for (double a : {0.8, 1.2}) {
        for (std::size_t k : {100u, 1000u}) {
            const double lru = simulate(config_for(PolicyKind::Lru, k), zipf_stream(a)).shifts_per_request();
            const double ac = simulate(config_for(PolicyKind::AdaptiveClimb, k), zipf_stream(a)).shifts_per_request();
            const double dac =
                simulate(config_for(PolicyKind::DynamicAdaptiveClimb, k), zipf_stream(a)).shifts_per_request();
            v.detail << "a=" << a << " K=" << k << ": LRU " << fmt(lru, 2) << " AC " << fmt(ac, 2) << " DAC "
                     << fmt(dac, 2) << "; ";
            const auto at = " at alpha " + fmt(a, 1) + " K " + std::to_string(k);
            v.require(ac < lru, "AC < LRU" + at);
            v.require(dac < lru, "DAC < LRU" + at);
        }
    }
}

template <typename F>
std::optional<TraceErrorKind> error_of(F&& f) {
    try {
        f();
    } catch (const TraceError& e) {
        return e.kind();
    }
    return std::nullopt;
}

void format_fidelity(Verdict& v) {
    std::mt19937_64 rng(2025);
    std::vector<RequestRecord> recs(100'000);
    for (auto& r : recs) {
        r.timestamp = rng() & 0xFFFFFFFFu;
        r.key = rng();
        r.size = static_cast<std::uint32_t>(1 + rng() % 0xFFFFFFFFu);
    }
    std::ostringstream bin(std::ios::binary);
    write_binary_trace(bin, recs);
    const std::string bytes = bin.str();
    std::istringstream bin_in(bytes, std::ios::binary);
    v.require(read_binary_trace(bin_in) == recs, "binary round-trip");
    v.require(bytes.size() == 14 + 20 * recs.size(), "binary size");

    std::ostringstream csv;
    write_csv_trace(csv, recs);
    std::istringstream csv_in(csv.str());
    v.require(read_csv_trace(csv_in) == recs, "csv round-trip");

    auto read_bin = [](std::string b) {
        std::istringstream in(b, std::ios::binary);
        return read_binary_trace(in);
    };
    auto read_csv = [](std::string t) {
        std::istringstream in(t);
        return read_csv_trace(in);
    };
    const std::string small = bytes.substr(0, 14 + 40);
    std::string two = small;
    two[6] = 2;  // count = 2
    for (int i = 7; i < 14; ++i) two[i] = 0;

    struct Case {
        const char* name;
        std::function<void()> run;
        TraceErrorKind expected;
    };
    std::vector<Case> cases{
        {"bad magic", [&] { auto b = two; b[1] = 'X'; read_bin(b); }, TraceErrorKind::BadMagic},
        {"version", [&] { auto b = two; b[4] = 9; read_bin(b); }, TraceErrorKind::VersionMismatch},
        {"truncated", [&] { read_bin(two.substr(0, two.size() - 1)); }, TraceErrorKind::Truncated},
        {"count mismatch", [&] { auto b = two; b[6] = 3; read_bin(b); }, TraceErrorKind::Truncated},
        {"trailing", [&] { read_bin(two + "x"); }, TraceErrorKind::TrailingBytes},
        {"reserved", [&] { auto b = two; b[14 + 19] = 1; read_bin(b); }, TraceErrorKind::NonzeroReserved},
        {"csv zero size", [&] { read_csv("1,42,0\n"); }, TraceErrorKind::ZeroSize},
        {"csv missing column", [&] { read_csv("1,42\n"); }, TraceErrorKind::Malformed},
        {"csv non-integer", [&] { read_csv("1,4x2,3\n"); }, TraceErrorKind::Malformed},
    };
    int ok = 0;
    for (auto& c : cases) {
        const auto got = error_of(c.run);
        if (got == c.expected) {
            ++ok;
        } else {
            v.require(false, c.name);
        }
    }
    v.detail << "1e5-record binary and csv round-trips, " << ok << "/" << cases.size() << " corrupt inputs rejected";
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, void (*)(Verdict&)>> criteria{
        {"closed-form stationary distributions match the Markov chain", closed_forms},
        {"simulated LRU/CLIMB configuration frequencies match the closed forms", simulator_agreement},
        {"CLIMB >= LRU and AdaptiveClimb tracks CLIMB on static Zipf", stability_ordering},
        {"AdaptiveClimb jump converges to <= 2", jump_convergence},
        {"AdaptiveClimb recovers faster than CLIMB after a hot-set change", adaptation_speed},
        {"DynamicAdaptiveClimb doubles and halves as intended", resize_behavior},
        {"miss ratio falls with Zipf skew for every policy", skew_sweep},
        {"capacity sweep shape", capacity_sweep},
        {"MRR formula", mrr_suite},
        {"AdaptiveClimb and DynamicAdaptiveClimb shift less than LRU", shift_proxy},
        {"trace format fidelity", format_fidelity},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second(v);
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !v.pass;
        std::printf("criterion %2zu: %s  %s -- %s (%.1f s)\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first,
                    v.detail.str().c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
