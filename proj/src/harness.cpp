#include "climbsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "climbsim/dynamic_adaptive_climb.hpp"
#include "climbsim/trace_io.hpp"

namespace climbsim {

double RunReport::hit_ratio() const { return requests ? static_cast<double>(hits) / static_cast<double>(requests) : 0.0; }
double RunReport::miss_ratio() const {
    return requests ? static_cast<double>(misses) / static_cast<double>(requests) : 0.0;
}
double RunReport::byte_miss_ratio() const {
    return bytes_requested ? static_cast<double>(bytes_missed) / static_cast<double>(bytes_requested) : 0.0;
}
double RunReport::shifts_per_request() const {
    return requests ? static_cast<double>(total_shifts) / static_cast<double>(requests) : 0.0;
}

namespace {

TrajectoryPoint sample_point(std::uint64_t request, const PolicyOutcome& out, const Policy& policy) {
    TrajectoryPoint p;
    p.request = request;
    p.jump = out.telemetry.jump.value_or(0);
    p.jump_prime = out.telemetry.jump_prime.value_or(0);
    p.capacity = out.telemetry.capacity.value_or(static_cast<std::int64_t>(policy.state().capacity()));
    p.occupancy = policy.state().occupancy();
    return p;
}

}  // namespace

RunReport simulate(const PolicyConfig& config, RequestSource& source, const RunOptions& options) {
    auto policy = make_policy(config);
    RunReport report;
    report.config = config;
    report.workload = options.workload_label;
    report.seed = options.seed;
    report.peak_capacity = policy->state().capacity();

    const auto hint = source.size_hint();
    report.sample_stride = hint ? std::max<std::uint64_t>(1, *hint / kTrajectorySamples) : 1;
    const bool adaptive_stride = !hint;

    std::uint64_t index = 0;
    while (true) {
        std::optional<RequestRecord> request;
        try {
            request = source.next();
        } catch (const std::exception& e) {
            throw SimulationError("workload error after " + std::to_string(index) + " requests: " + e.what());
        }
        if (!request) break;

        const PolicyOutcome out = policy->on_request(*request);
        ++report.requests;
        report.bytes_requested += request->size;
        if (out.hit) {
            ++report.hits;
        } else {
            ++report.misses;
            report.bytes_missed += request->size;
        }
        report.total_shifts += out.shifts;
        if (const auto& ev = out.telemetry.resize) {
            if (ev->suppressed) {
                ++report.suppressed_triggers;
            } else {
                (ev->kind == ResizeKind::Grow ? report.grow_events : report.shrink_events) += 1;
                report.shrink_evictions += ev->shrink_evictions;
                report.resizes.push_back({index + 1, *ev});
            }
        }
        report.peak_capacity = std::max(report.peak_capacity, policy->state().capacity());

        if ((index + 1) % report.sample_stride == 0) {
            const auto& st = policy->state();
            if (st.occupancy() > st.capacity()) ++report.occupancy_violations;
            report.trajectory.push_back(sample_point(index + 1, out, *policy));
            if (adaptive_stride && report.trajectory.size() >= 2 * kTrajectorySamples) {
                std::vector<TrajectoryPoint> kept;
                kept.reserve(kTrajectorySamples);
                for (std::size_t i = 1; i < report.trajectory.size(); i += 2) kept.push_back(report.trajectory[i]);
                report.trajectory = std::move(kept);
                report.sample_stride *= 2;
            }
        }
        if (options.observer) options.observer(index, *request, out, *policy);
        ++index;
    }
    if (report.requests == 0) throw SimulationError("workload produced no requests");
    if (report.hits + report.misses != report.requests) throw SimulationError("hit/miss accounting mismatch");
    report.final_capacity = policy->state().capacity();
    return report;
}

RunReport simulate(const PolicyConfig& config, const std::vector<RequestRecord>& records, const RunOptions& options) {
    VectorSource source(records);
    return simulate(config, source, options);
}

MrrResult compute_mrr(double mr_algo, double mr_fifo) {
    if (!(mr_algo >= 0.0 && mr_algo <= 1.0) || !(mr_fifo >= 0.0 && mr_fifo <= 1.0))
        throw std::invalid_argument("miss ratios must lie in [0, 1]");
    MrrResult r{mr_algo, mr_fifo, 0.0};
    const double denom = mr_algo <= mr_fifo ? mr_fifo : mr_algo;
    if (denom == 0.0) throw UndefinedMrr("MRR is undefined: the applicable miss ratio is zero");
    r.mrr = (mr_fifo - mr_algo) / denom;
    return r;
}

CapacitySpec CapacitySpec::parse(const std::string& text) {
    CapacitySpec spec;
    std::string body = text;
    if (!body.empty() && body.back() == '%') {
        spec.percent = true;
        body.pop_back();
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(body, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad capacity '" + text + "'");
    }
    if (used != body.size() || !(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("bad capacity '" + text + "'");
    if (!spec.percent && v != std::floor(v)) throw std::invalid_argument("capacity '" + text + "' must be an integer");
    spec.value = v;
    return spec;
}

std::size_t CapacitySpec::resolve(std::size_t distinct) const {
    if (!percent) return static_cast<std::size_t>(value);
    const double k = std::round(value / 100.0 * static_cast<double>(distinct));
    return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

std::string CapacitySpec::to_string() const {
    std::ostringstream os;
    os << value;
    if (percent) os << '%';
    return os.str();
}

PolicyConfig DynamicSettings::configure(PolicyKind kind, std::size_t capacity) const {
    PolicyConfig c;
    c.kind = kind;
    c.capacity = capacity;
    if (kind == PolicyKind::DynamicAdaptiveClimb) {
        c.epsilon = epsilon;
        c.min_capacity = min_capacity.value_or(std::max<std::size_t>(2, capacity));
        c.max_capacity = max_capacity.value_or(capacity * kDefaultMaxCapacityFactor);
    }
    return c;
}

std::size_t distinct_keys(std::span<const RequestRecord> records) {
    std::unordered_set<Key> keys;
    keys.reserve(records.size() / 4 + 16);
    for (const auto& r : records) keys.insert(r.key);
    return keys.size();
}

namespace {

std::string zipf_label(const ZipfSpec& z) {
    std::ostringstream os;
    os << "zipf(n=" << z.items << ",alpha=" << z.alpha << ",length=" << z.length << ",seed=" << z.seed << ")";
    return os.str();
}

struct Task {
    std::size_t point;
    double axis_value;
    PolicyConfig config;
    const std::vector<RequestRecord>* records;
    std::string label;
    std::uint64_t seed;
};

}  // namespace

SweepResult sweep(const SweepSpec& spec) {
    SweepResult result;
    const bool capacity_axis = spec.axis == SweepAxis::Capacity;
    if (capacity_axis ? spec.capacities.empty() : spec.alphas.empty()) throw std::invalid_argument("sweep axis is empty");
    if (spec.policies.empty()) throw std::invalid_argument("sweep needs at least one policy");
    if (!capacity_axis && !std::holds_alternative<ZipfSpec>(spec.workload))
        throw std::invalid_argument("an alpha sweep needs a synthetic Zipf workload");

    std::vector<PolicyKind> policies;
    for (auto p : spec.policies) {
        if (std::find(policies.begin(), policies.end(), p) != policies.end()) {
            result.warnings.push_back("duplicate policy " + std::string(policy_name(p)) + " ignored");
            continue;
        }
        policies.push_back(p);
    }
    if (std::find(policies.begin(), policies.end(), PolicyKind::Fifo) == policies.end()) {
        policies.insert(policies.begin(), PolicyKind::Fifo);
        result.warnings.push_back("FIFO added as the MRR baseline");
    }

    // Workloads are generated once per axis point and shared by every policy.
    std::vector<std::vector<RequestRecord>> generated;
    std::vector<const std::vector<RequestRecord>*> point_records;
    std::vector<std::string> point_labels;
    std::vector<std::uint64_t> point_seeds;
    std::vector<double> axis_values;
    std::vector<std::size_t> point_capacity;

    const std::size_t points = capacity_axis ? spec.capacities.size() : spec.alphas.size();
    generated.reserve(points);
    if (capacity_axis) {
        const std::vector<RequestRecord>* records = nullptr;
        std::string label;
        std::uint64_t seed = 0;
        if (const auto* z = std::get_if<ZipfSpec>(&spec.workload)) {
            generated.push_back(generate_ir_stream(*z));
            records = &generated.back();
            label = zipf_label(*z);
            seed = z->seed;
        } else {
            const auto& t = std::get<TraceWorkload>(spec.workload);
            if (!t.records || t.records->empty()) throw std::invalid_argument("trace workload is empty");
            records = t.records;
            label = t.label;
        }
        const std::size_t distinct = distinct_keys(*records);
        for (const auto& c : spec.capacities) {
            point_records.push_back(records);
            point_labels.push_back(label);
            point_seeds.push_back(seed);
            point_capacity.push_back(c.resolve(distinct));
            axis_values.push_back(static_cast<double>(point_capacity.back()));
        }
    } else {
        for (double alpha : spec.alphas) {
            ZipfSpec z = std::get<ZipfSpec>(spec.workload);
            z.alpha = alpha;
            generated.push_back(generate_ir_stream(z));
            point_records.push_back(&generated.back());
            point_labels.push_back(zipf_label(z));
            point_seeds.push_back(z.seed);
            point_capacity.push_back(spec.capacity.resolve(distinct_keys(generated.back())));
            axis_values.push_back(alpha);
        }
    }

    std::vector<Task> tasks;
    for (std::size_t pt = 0; pt < points; ++pt) {
        for (auto p : policies) {
            tasks.push_back(Task{pt, axis_values[pt], spec.dynamic.configure(p, point_capacity[pt]), point_records[pt],
                                 point_labels[pt], point_seeds[pt]});
        }
    }
    for (const auto& t : tasks) t.config.validate();

    std::vector<RunReport> reports(tasks.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks.size());
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                RunOptions opts;
                opts.workload_label = tasks[i].label;
                opts.seed = tasks[i].seed;
                reports[i] = simulate(tasks[i].config, *tasks[i].records, opts);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(tasks.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        SweepRow row;
        row.axis = spec.axis;
        row.axis_value = tasks[i].axis_value;
        row.report = std::move(reports[i]);
        result.rows.push_back(std::move(row));
    }
    // MRR only between runs sharing workload, seed and initial K.
    for (std::size_t pt = 0; pt < points; ++pt) {
        const std::size_t base = pt * policies.size();
        const auto fifo = std::find_if(result.rows.begin() + static_cast<std::ptrdiff_t>(base),
                                       result.rows.begin() + static_cast<std::ptrdiff_t>(base + policies.size()),
                                       [](const SweepRow& r) { return r.report.config.kind == PolicyKind::Fifo; });
        const double mr_fifo = fifo->report.miss_ratio();
        for (std::size_t j = base; j < base + policies.size(); ++j) {
            auto& row = result.rows[j];
            if (row.report.config.kind == PolicyKind::Fifo) continue;
            try {
                row.mrr = compute_mrr(row.report.miss_ratio(), mr_fifo);
            } catch (const UndefinedMrr&) {
                result.warnings.push_back("MRR undefined for " + std::string(policy_name(row.report.config.kind)) +
                                          " at axis value " + std::to_string(row.axis_value));
            }
        }
    }
    return result;
}

const std::vector<std::string> kReportColumns = {
    "axis",          "axis_value",       "policy",        "capacity",         "final_capacity", "peak_capacity",
    "epsilon",       "min_capacity",     "max_capacity",  "workload",         "seed",           "requests",
    "hits",          "misses",           "hit_ratio",     "miss_ratio",       "bytes_requested", "bytes_missed",
    "byte_miss_ratio", "total_shifts",   "shifts_per_request", "shrink_evictions", "grow_events", "shrink_events",
    "suppressed_triggers", "mrr",
};

namespace {

std::string fixed(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string axis_name(SweepAxis axis) { return axis == SweepAxis::Capacity ? "capacity" : "alpha"; }

std::string axis_value_text(const SweepRow& row) {
    return row.axis == SweepAxis::Capacity ? std::to_string(static_cast<std::uint64_t>(row.axis_value))
                                           : fixed(row.axis_value, 4);
}

// Quotes a CSV field when needed.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

bool is_dynamic(const PolicyConfig& c) { return c.kind == PolicyKind::DynamicAdaptiveClimb; }

}  // namespace

std::string emit_report(std::span<const SweepRow> rows, ReportFormat format) {
    if (rows.empty()) throw std::invalid_argument("nothing to report");
    std::ostringstream os;
    if (format == ReportFormat::Rows) {
        for (std::size_t i = 0; i < kReportColumns.size(); ++i) os << (i ? "," : "") << kReportColumns[i];
        os << '\n';
        for (const auto& row : rows) {
            const auto& r = row.report;
            const auto& c = r.config;
            const bool dyn = is_dynamic(c);
            os << axis_name(row.axis) << ',' << axis_value_text(row) << ',' << policy_name(c.kind) << ','
               << c.capacity << ',' << r.final_capacity << ',' << r.peak_capacity << ','
               << (dyn ? fixed(c.epsilon, 4) : "") << ',' << (dyn ? std::to_string(c.min_capacity) : "") << ','
               << (dyn ? std::to_string(c.resolved_max_capacity()) : "") << ',' << csv_field(r.workload) << ','
               << r.seed << ',' << r.requests << ',' << r.hits << ',' << r.misses << ',' << fixed(r.hit_ratio())
               << ',' << fixed(r.miss_ratio()) << ',' << r.bytes_requested << ',' << r.bytes_missed << ','
               << fixed(r.byte_miss_ratio()) << ',' << r.total_shifts << ',' << fixed(r.shifts_per_request(), 4)
               << ',' << r.shrink_evictions << ',' << r.grow_events << ',' << r.shrink_events << ','
               << r.suppressed_triggers << ',' << (row.mrr ? fixed(row.mrr->mrr) : "") << '\n';
        }
        return os.str();
    }

    // Table: one block per axis point, in first-seen order.
    std::vector<std::string> points;
    for (const auto& row : rows) {
        const auto key = axis_value_text(row);
        if (std::find(points.begin(), points.end(), key) == points.end()) points.push_back(key);
    }
    for (const auto& point : points) {
        std::vector<const SweepRow*> block;
        for (const auto& row : rows) {
            if (axis_value_text(row) == point) block.push_back(&row);
        }
        std::stable_sort(block.begin(), block.end(), [](const SweepRow* a, const SweepRow* b) {
            if (a->report.miss_ratio() != b->report.miss_ratio()) return a->report.miss_ratio() < b->report.miss_ratio();
            return policy_name(a->report.config.kind) < policy_name(b->report.config.kind);
        });
        os << axis_name(block.front()->axis) << " = " << point << "  (" << block.front()->report.workload << ")\n";
        char line[256];
        std::snprintf(line, sizeof line, "  %-22s %8s %8s %10s %10s %10s %12s\n", "policy", "K", "K_final",
                      "miss_ratio", "byte_miss", "mrr", "shifts/req");
        os << line;
        for (const auto* row : block) {
            const auto& r = row->report;
            std::snprintf(line, sizeof line, "  %-22s %8zu %8zu %10s %10s %10s %12s\n",
                          std::string(policy_name(r.config.kind)).c_str(), r.config.capacity, r.final_capacity,
                          fixed(r.miss_ratio()).c_str(), fixed(r.byte_miss_ratio()).c_str(),
                          row->mrr ? fixed(row->mrr->mrr, 4).c_str() : "-", fixed(r.shifts_per_request(), 4).c_str());
            os << line;
        }
    }
    return os.str();
}

std::string report_to_json(const RunReport& r, std::size_t indent) {
    using nlohmann::ordered_json;
    ordered_json j;
    ordered_json cfg;
    cfg["policy"] = std::string(policy_name(r.config.kind));
    cfg["capacity"] = r.config.capacity;
    if (is_dynamic(r.config)) {
        cfg["epsilon"] = r.config.epsilon;
        cfg["min_capacity"] = r.config.min_capacity;
        cfg["max_capacity"] = r.config.resolved_max_capacity();
    }
    j["config"] = cfg;
    j["workload"] = r.workload;
    j["seed"] = r.seed;
    j["requests"] = r.requests;
    j["hits"] = r.hits;
    j["misses"] = r.misses;
    j["hit_ratio"] = r.hit_ratio();
    j["miss_ratio"] = r.miss_ratio();
    j["bytes_requested"] = r.bytes_requested;
    j["bytes_missed"] = r.bytes_missed;
    j["byte_miss_ratio"] = r.byte_miss_ratio();
    j["total_shifts"] = r.total_shifts;
    j["shifts_per_request"] = r.shifts_per_request();
    j["shrink_evictions"] = r.shrink_evictions;
    j["final_capacity"] = r.final_capacity;
    j["peak_capacity"] = r.peak_capacity;
    j["grow_events"] = r.grow_events;
    j["shrink_events"] = r.shrink_events;
    j["suppressed_triggers"] = r.suppressed_triggers;
    j["occupancy_violations"] = r.occupancy_violations;
    j["recovery_window"] = kRecoveryWindow;
    ordered_json resizes = ordered_json::array();
    for (const auto& rr : r.resizes) {
        resizes.push_back({{"request", rr.request},
                           {"kind", rr.event.kind == ResizeKind::Grow ? "grow" : "shrink"},
                           {"from", rr.event.from},
                           {"to", rr.event.to},
                           {"shrink_evictions", rr.event.shrink_evictions}});
    }
    j["resizes"] = resizes;
    j["sample_stride"] = r.sample_stride;
    ordered_json traj;
    std::vector<std::uint64_t> req;
    std::vector<std::int64_t> jump, jump_prime, capacity;
    for (const auto& p : r.trajectory) {
        req.push_back(p.request);
        jump.push_back(p.jump);
        jump_prime.push_back(p.jump_prime);
        capacity.push_back(p.capacity);
    }
    traj["request"] = req;
    if (r.config.kind == PolicyKind::AdaptiveClimb || is_dynamic(r.config)) traj["jump"] = jump;
    if (is_dynamic(r.config)) traj["jump_prime"] = jump_prime;
    traj["capacity"] = capacity;
    j["trajectory"] = traj;
    return j.dump(static_cast<int>(indent)) + "\n";
}

RecoveryMeasurement measure_recovery(std::span<const std::uint8_t> hits, std::size_t boundary, std::size_t window,
                                     double fraction) {
    if (window == 0 || boundary < window || boundary > hits.size())
        throw std::invalid_argument("recovery measurement needs a full window before the boundary");
    std::vector<std::uint64_t> prefix(hits.size() + 1, 0);
    for (std::size_t i = 0; i < hits.size(); ++i) prefix[i + 1] = prefix[i] + (hits[i] ? 1 : 0);
    auto ratio_ending_at = [&](std::size_t end) {  // window over [end - window, end)
        return static_cast<double>(prefix[end] - prefix[end - window]) / static_cast<double>(window);
    };
    RecoveryMeasurement m;
    m.baseline = ratio_ending_at(boundary);
    const double threshold = fraction * m.baseline;
    // Only windows made entirely of post-boundary requests count.
    for (std::size_t end = boundary + window; end <= hits.size(); ++end) {
        if (ratio_ending_at(end) >= threshold) {
            m.recovery = end - boundary;
            return m;
        }
    }
    return m;
}

}  // namespace climbsim
