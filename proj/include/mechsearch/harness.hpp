#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mechsearch/actions.hpp"
#include "mechsearch/engine.hpp"
#include "mechsearch/policies.hpp"
#include "mechsearch/scene.hpp"
#include "mechsearch/simphys.hpp"

namespace mechsearch {

inline constexpr std::string_view kRolloutSchema = "mech-search/rollout/1";
inline constexpr std::string_view kManifestSchema = "mech-search/manifest/1";

struct HeapInfo {
    std::uint64_t seed = 0;
    int n_objects = 0;
    int index = 0;
    std::string file;
    friend bool operator==(const HeapInfo&, const HeapInfo&) = default;
};

struct StepRecord {
    int timestep = 0;
    int priority_head = -1;  // -1 when no priority list was built (human steps)
    int goal_id = -1;
    ActionPlan plan;
    Outcome outcome = Outcome::GraspFailed;
    std::vector<int> ejected_ids;
    /// Change in the target's visible fraction across the step.
    double reward = 0.0;
    bool target_recognized = false;
    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct ActionCounts {
    int suction = 0;
    int parallel_jaw = 0;
    int push = 0;

    int total() const { return suction + parallel_jaw + push; }
    void add(Primitive p);
    void add(const ActionCounts& o);
    friend bool operator==(const ActionCounts&, const ActionCounts&) = default;
};

struct RolloutRecord {
    HeapInfo heap;
    std::string policy;
    /// Empty for human-driven rollouts.
    std::optional<PolicyConfig> config;
    double resolution = kDefaultResolution;
    std::vector<StepRecord> steps;
    TerminationCause termination = TerminationCause::NoActionAvailable;
    ActionCounts action_counts;

    bool success() const { return termination == TerminationCause::Success; }
};

nlohmann::json record_to_json(const RolloutRecord& r);
/// Throws BadRecord when the object does not match the schema or breaks a record invariant.
RolloutRecord record_from_json(const nlohmann::json& j);
std::string record_to_line(const RolloutRecord& r);
std::vector<RolloutRecord> read_records(const std::filesystem::path& path);

/// Visible fraction of the target, 0 once it is gone or fully hidden.
double target_visibility(const SegMasks& masks, int target_id);

RolloutRecord run_rollout(const SceneState& heap, const HeapInfo& info, const PolicyConfig& config, const EngineConfig& engine = {});

struct HeapCase {
    SceneState scene;
    HeapInfo info;
};

struct HeapManifestEntry {
    std::string file;  // relative to the manifest's directory
    std::uint64_t seed = 0;
    int n_objects = 0;
    int index = 0;
    int target_id = 0;
};

struct HeapManifest {
    std::uint64_t base_seed = 0;
    std::vector<HeapManifestEntry> heaps;
};

nlohmann::json manifest_to_json(const HeapManifest& m);
HeapManifest manifest_from_json(const nlohmann::json& j);
void save_manifest(const HeapManifest& m, const std::filesystem::path& path);
HeapManifest load_manifest(const std::filesystem::path& path);
/// Loads every heap listed in the manifest.
std::vector<HeapCase> load_heaps(const std::filesystem::path& manifest_path);

/// Runs every heap x config pair on a bounded worker pool. `sink` is called
/// under a lock as each record completes. The returned records are ordered
/// by (config, heap) regardless of scheduling.
std::vector<RolloutRecord> run_batch(const std::vector<HeapCase>& heaps, const std::vector<PolicyConfig>& configs,
                                     const EngineConfig& engine, int workers,
                                     const std::function<void(const RolloutRecord&)>& sink = {});

struct PolicySummary {
    std::string policy;
    int n_objects = 0;
    int rollouts = 0;
    int successes = 0;
    double success_rate = 0.0;
    /// Over successful rollouts only; unset when there were none.
    std::optional<double> mean_actions;
    double sem_actions = 0.0;
    /// curve[k - 1] = successes needing at most k actions, k = 1..2N.
    std::vector<int> curve;
    ActionCounts action_totals;
    int failures_no_action = 0;
    int failures_target_ejected = 0;
    int failures_timeout = 0;
    friend bool operator==(const PolicySummary&, const PolicySummary&) = default;
};

struct ExperimentSummary {
    std::vector<PolicySummary> groups;
    const PolicySummary* find(std::string_view policy, int n_objects) const;
    friend bool operator==(const ExperimentSummary&, const ExperimentSummary&) = default;
};

/// Groups by (policy, heap size). Throws BadRecord on an empty record set.
ExperimentSummary summarize(const std::vector<RolloutRecord>& records);

/// Writes summary.csv, summary.txt and one curve_<policy>_n<N>.csv per group.
std::vector<std::filesystem::path> emit_reports(const ExperimentSummary& summary, const std::filesystem::path& out_dir);

struct ExperimentOptions {
    int workers = 1;
    std::filesystem::path out_dir;
};

/// Runs the manifest, appends records to out_dir/records.jsonl and emits the
/// reports. A records.jsonl.partial marker exists while the run is in progress.
ExperimentSummary run_experiment(const std::filesystem::path& manifest_path, const std::vector<PolicyConfig>& configs,
                                 const EngineConfig& engine, const ExperimentOptions& options);

}  // namespace mechsearch
