#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "climbsim/harness.hpp"
#include "climbsim/ir_analytics.hpp"
#include "climbsim/trace_io.hpp"
#include "climbsim/workload.hpp"

namespace climbsim::cli {

namespace {

// Raised for flag combinations CLI11 cannot express; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WorkloadFlags {
    std::optional<std::size_t> zipf_n;
    double alpha = 1.0;
    std::uint64_t length = 100'000;
    std::uint64_t seed = kDefaultSeed;
    std::size_t phases = 1;
    bool disjoint_phases = false;
    std::uint32_t size_min = 1;
    std::uint32_t size_max = 1;
    std::string trace;
    std::string trace_format;

    void add_synthetic(CLI::App& app, bool require_n) {
        auto* n = app.add_option("--zipf-n", zipf_n, "number of distinct items N");
        if (require_n) n->required();
        app.add_option("--alpha", alpha, "Zipf skew (>= 0)")->capture_default_str();
        app.add_option("--length", length, "total number of requests")->capture_default_str();
        app.add_option("--seed", seed, "generator seed")->capture_default_str();
        app.add_option("--phases", phases, "number of phases; each later phase permutes item ranks")
            ->capture_default_str();
        app.add_flag("--disjoint-phases", disjoint_phases, "give every phase its own key range");
        app.add_option("--size-min", size_min, "smallest object size in bytes")->capture_default_str();
        app.add_option("--size-max", size_max, "largest object size in bytes (log-uniform per key)")
            ->capture_default_str();
    }

    void add_trace(CLI::App& app) {
        auto* t = app.add_option("--trace", trace, "replay a trace file instead of a synthetic stream");
        app.add_option("--trace-format", trace_format, "csv or bin (default: from the extension)")
            ->check(CLI::IsMember({"csv", "bin"}));
        t->excludes("--zipf-n");
    }

    bool synthetic() const { return trace.empty(); }

    PhasePlan plan() const {
        if (!zipf_n) throw UsageError("a synthetic workload needs --zipf-n (or pass --trace)");
        if (phases < 1) throw UsageError("--phases must be at least 1");
        if (length < phases) throw UsageError("--length must cover every phase");
        PhasePlan plan;
        const std::uint64_t per_phase = length / phases;
        for (std::size_t i = 0; i < phases; ++i) {
            Phase ph;
            ph.spec.items = *zipf_n;
            ph.spec.alpha = alpha;
            ph.spec.length = i + 1 == phases ? length - per_phase * (phases - 1) : per_phase;
            ph.spec.seed = i == 0 ? seed : splitmix64(seed + i);
            ph.spec.sizes = SizeModel{size_min, size_max};
            if (i > 0) ph.permutation_seed = splitmix64(seed ^ (0xA5A5A5A5ULL * (i + 1)));
            ph.key_offset = disjoint_phases ? static_cast<Key>(i) * *zipf_n : 0;
            plan.phases.push_back(ph);
        }
        try {
            plan.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return plan;
    }

    ZipfSpec single_spec() const {
        auto p = plan();
        if (p.phases.size() != 1) throw UsageError("this command does not support --phases");
        return p.phases.front().spec;
    }

    std::string label() const {
        if (!synthetic()) return trace;
        std::ostringstream os;
        os << "zipf(n=" << zipf_n.value_or(0) << ",alpha=" << alpha << ",length=" << length << ",seed=" << seed;
        if (phases > 1) os << ",phases=" << phases << (disjoint_phases ? ",disjoint" : "");
        if (size_min != size_max) os << ",sizes=" << size_min << ".." << size_max;
        os << ")";
        return os.str();
    }

    std::vector<RequestRecord> materialize() const {
        if (!synthetic()) {
            const auto fmt = trace_format.empty() ? detect_format(trace) : parse_format(trace_format);
            return read_trace_file(trace, fmt);
        }
        return generate_phase_stream(plan()).records;
    }
};

struct DynamicFlags {
    std::optional<double> epsilon;
    std::optional<std::size_t> kmin;
    std::optional<std::size_t> kmax;

    void add(CLI::App& app) {
        app.add_option("--epsilon", epsilon, "DynamicAdaptiveClimb halving sensitivity in (0, 1]");
        app.add_option("--kmin", kmin, "DynamicAdaptiveClimb capacity floor (default: initial K)");
        app.add_option("--kmax", kmax, "DynamicAdaptiveClimb capacity ceiling (default: 8 x initial K)");
    }
    bool any() const { return epsilon || kmin || kmax; }

    DynamicSettings settings() const {
        DynamicSettings s;
        if (epsilon) s.epsilon = *epsilon;
        s.min_capacity = kmin;
        s.max_capacity = kmax;
        return s;
    }
};

PolicyKind policy_from(const std::string& name) {
    if (auto p = parse_policy(name)) return *p;
    throw UsageError("unknown policy '" + name + "'");
}

std::string format_double(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

void write_output(const std::string& path, const std::string& contents, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << contents;
    } else {
        write_file_atomically(path, contents);
    }
}

// ---------------------------------------------------------------- generate

struct GenerateCmd {
    WorkloadFlags workload;
    std::string out_path;
    std::string format;

    void add(CLI::App& app) {
        workload.add_synthetic(app, true);
        app.add_option("--out", out_path, "output trace path")->required();
        app.add_option("--format", format, "csv or bin (default: from the extension)")
            ->check(CLI::IsMember({"csv", "bin"}));
    }

    int run(std::ostream& out) const {
        const auto plan = workload.plan();
        const TraceFormat fmt = format.empty() ? detect_format(out_path) : parse_format(format);
        const auto stream = generate_phase_stream(plan);
        write_trace_file(out_path, stream.records, fmt);
        out << "wrote " << stream.records.size() << " records to " << out_path;
        if (stream.boundaries.size() > 1) {
            out << " (phase starts:";
            for (auto b : stream.boundaries) out << ' ' << b;
            out << ')';
        }
        out << '\n';
        return kExitOk;
    }
};

// ---------------------------------------------------------------- simulate

struct SimulateCmd {
    std::string policy;
    std::string capacity;
    DynamicFlags dynamic;
    WorkloadFlags workload;
    std::string report_path;
    std::string report_format = "json";

    void add(CLI::App& app) {
        app.add_option("--policy", policy, "policy name (FIFO, LRU, CLIMB, LFU, CLOCK, SIEVE, AdaptiveClimb, "
                                           "DynamicAdaptiveClimb)")
            ->required();
        app.add_option("--capacity", capacity, "cache slots, or a percentage of distinct keys such as 5%")
            ->required();
        dynamic.add(app);
        workload.add_synthetic(app, false);
        workload.add_trace(app);
        app.add_option("--report", report_path, "report output path (default: stdout)");
        app.add_option("--report-format", report_format, "json, csv or table")
            ->check(CLI::IsMember({"json", "csv", "table"}))
            ->capture_default_str();
    }

    int run(std::ostream& out) const {
        const PolicyKind kind = policy_from(policy);
        if (kind != PolicyKind::DynamicAdaptiveClimb && dynamic.any())
            throw UsageError("--epsilon, --kmin and --kmax only apply to DynamicAdaptiveClimb");
        CapacitySpec cap;
        try {
            cap = CapacitySpec::parse(capacity);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (workload.synthetic()) workload.plan();  // flag validation before any work

        RunOptions opts;
        opts.workload_label = workload.label();
        opts.seed = workload.synthetic() ? workload.seed : 0;

        PolicyConfig config;
        RunReport report;
        auto build = [&](std::size_t k) {
            config = dynamic.settings().configure(kind, k);
            try {
                config.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        };
        if (!workload.synthetic() && !cap.percent) {
            // absolute K over a file: stream it
            build(cap.resolve(0));
            const auto fmt =
                workload.trace_format.empty() ? detect_format(workload.trace) : parse_format(workload.trace_format);
            auto source = open_trace(workload.trace, fmt);
            report = simulate(config, *source, opts);
        } else {
            const auto records = workload.materialize();
            build(cap.resolve(distinct_keys(records)));
            report = simulate(config, records, opts);
        }

        std::string body;
        if (report_format == "json") {
            body = report_to_json(report);
        } else {
            SweepRow row;
            row.axis = SweepAxis::Capacity;
            row.axis_value = static_cast<double>(report.config.capacity);
            row.report = report;
            body = emit_report(std::span<const SweepRow>(&row, 1),
                               report_format == "csv" ? ReportFormat::Rows : ReportFormat::Table);
        }
        if (!report_path.empty()) write_output(report_path, body, out);
        out << "policy=" << policy_name(kind) << " capacity=" << config.capacity << " requests=" << report.requests
            << " miss_ratio=" << format_double(report.miss_ratio())
            << " byte_miss_ratio=" << format_double(report.byte_miss_ratio());
        if (kind == PolicyKind::DynamicAdaptiveClimb)
            out << " final_capacity=" << report.final_capacity << " resizes=" << report.resizes.size();
        out << '\n';
        if (report_path.empty()) out << body;
        return kExitOk;
    }
};

// ---------------------------------------------------------------- sweep

struct SweepCmd {
    std::vector<std::string> policies;
    std::vector<std::string> capacities;
    std::vector<double> alphas;
    std::string capacity;
    DynamicFlags dynamic;
    WorkloadFlags workload;
    std::string report_path;
    std::string format = "rows";
    unsigned threads = 1;

    void add(CLI::App& app) {
        app.add_option("--policies", policies, "comma-separated policy list")->required()->delimiter(',');
        auto* caps = app.add_option("--capacities", capacities, "capacity axis, e.g. 1%,2%,5% or 100,200")
                         ->delimiter(',');
        auto* al = app.add_option("--alphas", alphas, "Zipf skew axis, e.g. 0.2,0.6,1.0")->delimiter(',');
        caps->excludes(al);
        app.add_option("--capacity", capacity, "fixed capacity for an alpha sweep");
        dynamic.add(app);
        workload.add_synthetic(app, false);
        workload.add_trace(app);
        app.add_option("--report", report_path, "report output path (default: stdout)");
        app.add_option("--format", format, "rows (CSV) or table")
            ->check(CLI::IsMember({"rows", "table"}))
            ->capture_default_str();
        app.add_option("--threads", threads, "parallel runs")->capture_default_str();
    }

    int run(std::ostream& out, std::ostream& err) const {
        SweepSpec spec;
        for (const auto& p : policies) spec.policies.push_back(policy_from(p));
        if (capacities.empty() == alphas.empty()) throw UsageError("give exactly one of --capacities or --alphas");
        try {
            if (!capacities.empty()) {
                spec.axis = SweepAxis::Capacity;
                for (const auto& c : capacities) spec.capacities.push_back(CapacitySpec::parse(c));
            } else {
                spec.axis = SweepAxis::Alpha;
                if (capacity.empty()) throw UsageError("an alpha sweep needs --capacity");
                if (!workload.synthetic()) throw UsageError("an alpha sweep needs a synthetic workload");
                spec.alphas = alphas;
                spec.capacity = CapacitySpec::parse(capacity);
            }
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        if (spec.axis == SweepAxis::Capacity && !capacity.empty())
            throw UsageError("--capacity is only used with --alphas");
        if (dynamic.any() && std::find(spec.policies.begin(), spec.policies.end(),
                                       PolicyKind::DynamicAdaptiveClimb) == spec.policies.end())
            throw UsageError("--epsilon, --kmin and --kmax only apply to DynamicAdaptiveClimb");
        spec.dynamic = dynamic.settings();
        spec.threads = std::max(1u, threads);

        std::vector<RequestRecord> trace_records;
        if (workload.synthetic()) {
            spec.workload = workload.single_spec();
        } else {
            trace_records = workload.materialize();
            spec.workload = TraceWorkload{&trace_records, workload.label()};
        }
        SweepResult result;
        try {
            result = sweep(spec);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        for (const auto& w : result.warnings) err << "warning: " << w << '\n';
        const auto body = emit_report(result.rows, format == "table" ? ReportFormat::Table : ReportFormat::Rows);
        write_output(report_path, body, out);
        if (!report_path.empty()) out << "wrote " << result.rows.size() << " rows to " << report_path << '\n';
        return kExitOk;
    }
};

// ---------------------------------------------------------------- analyze

std::vector<double> read_probabilities(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open probability file '" + path + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        for (char& c : line) {
            if (c == ',' || c == ';' || c == '\r' || c == '\t') c = ' ';
        }
        std::istringstream fields(line);
        std::string tok;
        while (fields >> tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) throw std::runtime_error("bad probability '" + tok + "' in " + path);
            values.push_back(v);
        }
    }
    return values;
}

struct AnalyzeCmd {
    std::string model;
    std::string probs;
    std::optional<std::size_t> zipf_n;
    double alpha = 1.0;
    std::size_t k = 0;
    bool oracle = false;

    static constexpr std::uint64_t kMaxConfigurations = 5'000'000;

    void add(CLI::App& app) {
        app.add_option("--model", model, "lru or climb")->required()->check(CLI::IsMember({"lru", "climb"}));
        auto* p = app.add_option("--probs", probs, "file of probabilities p_1..p_N");
        auto* n = app.add_option("--zipf-n", zipf_n, "use Zipf probabilities over N items");
        p->excludes(n);
        app.add_option("--alpha", alpha, "Zipf skew for --zipf-n")->capture_default_str();
        app.add_option("--k", k, "cache size K")->required();
        app.add_flag("--oracle", oracle, "cross-check against the exact Markov chain");
    }

    int run(std::ostream& out) const {
        if (probs.empty() && !zipf_n) throw UsageError("give --probs or --zipf-n");
        if (!probs.empty() && alpha != 1.0) throw UsageError("--alpha only applies with --zipf-n");
        std::optional<ir::ProbabilityVector> p;
        if (zipf_n) {
            if (*zipf_n < 2 || !(alpha >= 0.0)) throw UsageError("--zipf-n must be >= 2 and --alpha >= 0");
            p = zipf_probabilities(*zipf_n, alpha);
        } else {
            p = ir::ProbabilityVector(read_probabilities(probs));
        }
        const std::size_t n = p->size();
        if (k < 1 || k >= n) throw UsageError("--k must satisfy 1 <= K < N");
        if (oracle && (n > ir::kMaxOracleItems || k > ir::kMaxOracleCapacity))
            throw UsageError("--oracle needs N <= 7 and K <= 4");
        if (ir::configuration_count(n, k) > kMaxConfigurations)
            throw UsageError("too many configurations to enumerate");

        const bool lru = model == "lru";
        const auto dist = lru ? ir::lru_distribution(*p, k) : ir::climb_distribution(*p, k);
        out << "configuration,probability\n";
        for (const auto& [config, prob] : dist) out << ir::format_configuration(config) << ',' << format_double(prob, 12) << '\n';
        out << "expected_hit_ratio=" << format_double(ir::expected_hit_ratio(dist, *p), 12) << '\n';
        if (oracle) {
            const auto chain = ir::markov_stationary(lru ? ir::ChainModel::Lru : ir::ChainModel::Climb, *p, k);
            const double dev = ir::max_abs_difference(dist, chain.distribution);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3e", dev);
            out << "oracle_iterations=" << chain.iterations << " oracle_residual=" << chain.residual << '\n';
            out << "max_abs_deviation=" << buf << '\n';
            if (!(dev < 1e-9)) return kExitRuntime;
        }
        return kExitOk;
    }
};

// ---------------------------------------------------------------- convert

struct ConvertCmd {
    std::string in_path;
    std::string out_path;
    std::string in_format;
    std::string out_format;

    void add(CLI::App& app) {
        app.add_option("--in", in_path, "input trace")->required();
        app.add_option("--out", out_path, "output trace")->required();
        app.add_option("--in-format", in_format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
        app.add_option("--out-format", out_format, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
    }

    int run(std::ostream& out) const {
        const auto from = in_format.empty() ? detect_format(in_path) : parse_format(in_format);
        const auto to = out_format.empty() ? detect_format(out_path) : parse_format(out_format);
        const auto records = read_trace_file(in_path, from);
        write_trace_file(out_path, records, to);
        out << "converted " << records.size() << " records\n";
        return kExitOk;
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"climbsim: cache replacement simulation toolkit"};
    app.require_subcommand(1);

    GenerateCmd generate;
    SimulateCmd simulate_cmd;
    SweepCmd sweep_cmd;
    AnalyzeCmd analyze;
    ConvertCmd convert;

    auto* gen_app = app.add_subcommand("generate", "write a synthetic Zipf trace");
    generate.add(*gen_app);
    auto* sim_app = app.add_subcommand("simulate", "replay one workload through one policy");
    simulate_cmd.add(*sim_app);
    auto* sweep_app = app.add_subcommand("sweep", "run policies across capacities or Zipf skews");
    sweep_cmd.add(*sweep_app);
    auto* an_app = app.add_subcommand("analyze", "stationary distributions under independent requests");
    analyze.add(*an_app);
    auto* conv_app = app.add_subcommand("convert", "convert traces between CSV and binary");
    convert.add(*conv_app);

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("climbsim");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen_app->parsed()) return generate.run(out);
        if (sim_app->parsed()) return simulate_cmd.run(out);
        if (sweep_app->parsed()) return sweep_cmd.run(out, err);
        if (an_app->parsed()) return analyze.run(out);
        if (conv_app->parsed()) return convert.run(out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace climbsim::cli
