#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mechsearch/actions.hpp"
#include "mechsearch/engine.hpp"
#include "mechsearch/harness.hpp"
#include "mechsearch/policies.hpp"
#include "mechsearch/scene.hpp"

namespace mechsearch {

/// Wire protocol version carried in every request and response.
inline constexpr int kProtocolVersion = 1;

struct HumanStep {
    ActionPlan plan;
    TransitionResult transition;
    double reward = 0.0;
    bool target_recognized = false;
    std::optional<TerminationCause> termination;
};

/// A rollout driven one action at a time by an outside supervisor. Grasps
/// are executed whatever their quality; only feasibility limits the choice.
class HumanRollout {
public:
    HumanRollout(SceneState heap, HeapInfo info, std::uint64_t seed, EngineConfig engine, int timestep_factor = 2);

    /// Throws SessionFinished, or UnknownObject when the object is not visible.
    HumanStep step(int object_id, Primitive primitive);

    const SceneState& scene() const { return scene_; }
    const SegMasks& masks() const { return masks_; }
    std::optional<int> recognized() const;
    bool finished() const { return termination_.has_value(); }
    std::optional<TerminationCause> termination() const { return termination_; }
    const RolloutRecord& record() const { return record_; }
    const EngineConfig& engine() const { return engine_; }

private:
    SceneState scene_;
    SegMasks masks_;
    EngineConfig engine_;
    PolicyConfig recognition_;
    PolicyState state_;
    Rng physics_;
    std::optional<TerminationCause> termination_;
    RolloutRecord record_;
};

/// Headless replay of (object, primitive) choices; returns the final scene.
SceneState replay_human_actions(const SceneState& heap, const HeapInfo& info, std::uint64_t seed, const EngineConfig& engine,
                                const std::vector<std::pair<int, Primitive>>& actions);

struct SessionOptions {
    EngineConfig engine{};
    /// Physics seed used when a create request does not carry one.
    std::uint64_t seed = 0;
    int timestep_factor = 2;
    /// Directory holding heap snapshots (and optionally a manifest.json) that
    /// create requests may name by file.
    std::optional<std::filesystem::path> heap_dir;
    /// Finished rollouts are appended here as JSON lines when set.
    std::optional<std::filesystem::path> records_path;
    /// Runs inside every step while it is marked in flight. Test hook.
    std::function<void()> step_hook;
};

/// Thread-safe registry of supervisor sessions. Requests and responses are
/// the JSON wire messages; errors are thrown as mechsearch::Error.
class SessionManager {
public:
    explicit SessionManager(SessionOptions options = {});
    ~SessionManager();

    /// Body: {"version", one of "heap": {n_objects, seed, ...} | "snapshot": scene | "heap_file": name, optional "seed"}.
    nlohmann::json create(const nlohmann::json& request);
    nlohmann::json get(const std::string& id) const;
    /// Body: {"version", "object_id", "primitive"}.
    nlohmann::json step(const std::string& id, const nlohmann::json& request);
    nlohmann::json record(const std::string& id) const;
    /// Heap files available under heap_dir.
    nlohmann::json list_heaps() const;

private:
    struct Entry;
    std::shared_ptr<Entry> find(const std::string& id) const;

    SessionOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t counter_ = 0;
    std::mutex records_mutex_;
};

/// Observation payload for a session state (no step fields).
nlohmann::json observation_json(const std::string& session_id, const HumanRollout& rollout);

}  // namespace mechsearch
