#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "climbsim/core.hpp"
#include "climbsim/workload.hpp"

namespace climbsim {

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UndefinedMrr : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Rolling window used for adaptation (recovery-time) measurements.
inline constexpr std::size_t kRecoveryWindow = 10'000;
// Trajectories keep at most about this many samples.
inline constexpr std::uint64_t kTrajectorySamples = 10'000;

struct TrajectoryPoint {
    std::uint64_t request = 0;  // 1-based request index
    std::int64_t jump = 0;
    std::int64_t jump_prime = 0;
    std::int64_t capacity = 0;
    std::uint64_t occupancy = 0;
};

struct ResizeRecord {
    std::uint64_t request = 0;
    ResizeEvent event;
};

struct RunReport {
    PolicyConfig config;
    std::string workload;
    std::uint64_t seed = 0;

    std::uint64_t requests = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t bytes_requested = 0;
    std::uint64_t bytes_missed = 0;
    std::uint64_t total_shifts = 0;
    // Keys discarded by cache halving; not counted as misses.
    std::uint64_t shrink_evictions = 0;

    std::uint64_t grow_events = 0;
    std::uint64_t shrink_events = 0;
    std::uint64_t suppressed_triggers = 0;
    std::vector<ResizeRecord> resizes;  // applied resizes only
    std::size_t final_capacity = 0;
    std::size_t peak_capacity = 0;
    // Sampled steps at which occupancy exceeded the current capacity.
    std::uint64_t occupancy_violations = 0;

    std::uint64_t sample_stride = 1;
    std::vector<TrajectoryPoint> trajectory;

    double hit_ratio() const;
    double miss_ratio() const;
    double byte_miss_ratio() const;
    double shifts_per_request() const;
};

using RequestObserver =
    std::function<void(std::uint64_t index, const RequestRecord&, const PolicyOutcome&, const Policy&)>;

struct RunOptions {
    std::string workload_label;
    std::uint64_t seed = 0;
    // Called after every request with the 0-based request index.
    RequestObserver observer;
};

// Replays `source` through a fresh policy built from `config`.
RunReport simulate(const PolicyConfig& config, RequestSource& source, const RunOptions& options = {});
RunReport simulate(const PolicyConfig& config, const std::vector<RequestRecord>& records,
                   const RunOptions& options = {});

struct MrrResult {
    double mr_algo = 0.0;
    double mr_fifo = 0.0;
    double mrr = 0.0;
};

// Miss-ratio reduction against FIFO:
//   (mr_fifo - mr_algo) / mr_fifo   when mr_algo <= mr_fifo
//   (mr_fifo - mr_algo) / mr_algo   otherwise
MrrResult compute_mrr(double mr_algo, double mr_fifo);

// Capacity given either as a slot count or as a percentage of the
// workload's distinct keys.
struct CapacitySpec {
    double value = 0.0;
    bool percent = false;

    static CapacitySpec parse(const std::string& text);  // "100" or "5%"
    std::size_t resolve(std::size_t distinct_keys) const;
    std::string to_string() const;
};

// Bounds for DynamicAdaptiveClimb at a given initial K. Unset bounds default
// to K_min = K and K_max = 8K.
struct DynamicSettings {
    double epsilon = 0.5;
    std::optional<std::size_t> min_capacity;
    std::optional<std::size_t> max_capacity;

    PolicyConfig configure(PolicyKind kind, std::size_t capacity) const;
};

inline constexpr std::size_t kDefaultMaxCapacityFactor = 8;

enum class SweepAxis { Capacity, Alpha };

struct TraceWorkload {
    const std::vector<RequestRecord>* records = nullptr;
    std::string label;
};

struct SweepSpec {
    std::vector<PolicyKind> policies;
    SweepAxis axis = SweepAxis::Capacity;
    std::vector<CapacitySpec> capacities;  // capacity axis
    std::vector<double> alphas;            // alpha axis
    CapacitySpec capacity;                 // fixed K on the alpha axis
    std::variant<ZipfSpec, TraceWorkload> workload;
    DynamicSettings dynamic;
    unsigned threads = 1;
};

struct SweepRow {
    SweepAxis axis = SweepAxis::Capacity;
    double axis_value = 0.0;
    RunReport report;
    std::optional<MrrResult> mrr;  // absent for FIFO
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::string> warnings;
};

// One run per (policy, axis point); FIFO is added when missing and duplicate
// policies are dropped with a warning.
SweepResult sweep(const SweepSpec& spec);

enum class ReportFormat { Table, Rows };

// Machine-readable rows use kReportColumns in order, one line per report.
// The table groups by axis point and lists policies by ascending miss ratio.
std::string emit_report(std::span<const SweepRow> rows, ReportFormat format);
extern const std::vector<std::string> kReportColumns;

// Full single-run report (config echo, counters, trajectory, resizes) as JSON.
std::string report_to_json(const RunReport& report, std::size_t indent = 2);

std::size_t distinct_keys(std::span<const RequestRecord> records);

struct RecoveryMeasurement {
    double baseline = 0.0;  // hit ratio of the window ending at the boundary
    // Requests after the boundary until a window lying wholly after the
    // boundary reaches fraction * baseline (so never less than the window
    // length). Absent if that does not happen before `hits` ends.
    std::optional<std::uint64_t> recovery;
};

RecoveryMeasurement measure_recovery(std::span<const std::uint8_t> hits, std::size_t boundary,
                                     std::size_t window = kRecoveryWindow, double fraction = 0.9);

}  // namespace climbsim
