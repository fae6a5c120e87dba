#include "mechsearch/session.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>

#include "mechsearch/errors.hpp"
#include "mechsearch/heapgen.hpp"
#include "mechsearch/planners.hpp"
#include "mechsearch/scene_io.hpp"

namespace mechsearch {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// HumanRollout

HumanRollout::HumanRollout(SceneState heap, HeapInfo info, std::uint64_t seed, EngineConfig engine, int timestep_factor)
    : scene_(std::move(heap)), engine_(engine) {
    scene_.validate();
    recognition_.timestep_factor = timestep_factor;
    recognition_.validate();
    masks_ = rasterize_scene(scene_, engine_.resolution);
    RolloutStreams streams = make_streams(seed, info.seed);
    state_.rng = streams.policy;
    physics_ = streams.physics;
    record_.heap = std::move(info);
    record_.policy = "human";
    record_.resolution = engine_.resolution;
}

std::optional<int> HumanRollout::recognized() const { return recognize_target(masks_, scene_.target_id, recognition_); }

HumanStep HumanRollout::step(int object_id, Primitive primitive) {
    if (termination_) throw Error(ErrorCode::SessionFinished, "session already finished");
    const MaskEntry* entry = masks_.find(object_id);
    if (!entry || entry->modal_count == 0) {
        throw Error(ErrorCode::UnknownObject, "object " + std::to_string(object_id) + " is not visible");
    }

    HumanStep out;
    const std::optional<int> rec = recognized();
    const Planner planner(scene_, masks_, engine_.planner);
    switch (primitive) {
        case Primitive::ParallelJaw: out.plan = planner.parallel_jaw(object_id); break;
        case Primitive::Suction: out.plan = planner.suction(object_id); break;
        case Primitive::Push: out.plan = planner.push(object_id); break;
    }
    out.transition = execute_plan(scene_, out.plan, physics_, engine_.physics);
    SegMasks next_masks = rasterize_scene(out.transition.next_scene, engine_.resolution);
    out.reward = target_visibility(next_masks, scene_.target_id) - target_visibility(masks_, scene_.target_id);
    out.target_recognized = rec.has_value();

    StepRecord s;
    s.timestep = state_.steps_taken;
    s.goal_id = object_id;
    s.plan = out.plan;
    s.outcome = out.transition.outcome;
    s.ejected_ids = out.transition.ejected_ids;
    s.reward = out.reward;
    s.target_recognized = out.target_recognized;
    record_.steps.push_back(std::move(s));
    record_.action_counts.add(primitive);

    record_transition(state_, masks_, out.plan, out.transition);
    out.termination = check_termination(out.transition.next_scene, out.transition, out.plan, rec, state_, recognition_);
    scene_ = out.transition.next_scene;
    masks_ = std::move(next_masks);
    if (out.termination) {
        termination_ = out.termination;
        record_.termination = *out.termination;
    }
    return out;
}

SceneState replay_human_actions(const SceneState& heap, const HeapInfo& info, std::uint64_t seed, const EngineConfig& engine,
                                const std::vector<std::pair<int, Primitive>>& actions) {
    HumanRollout rollout(heap, info, seed, engine);
    for (const auto& [id, primitive] : actions) rollout.step(id, primitive);
    return rollout.scene();
}

// ---------------------------------------------------------------------------
// Wire payloads

namespace {

std::string color_for(int id) {
    static constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#b07aa1", "#76b7b2", "#edc948",
                                               "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295", "#8cd17d"};
    return kPalette[static_cast<std::size_t>(id) % std::size(kPalette)];
}

json status_json(const HumanRollout& r) { return r.finished() ? "finished" : "active"; }

std::uint64_t get_seed(const json& j) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    throw Error(ErrorCode::BadRequest, "seed must be a non-negative integer");
}

void check_version(const json& request) {
    if (!request.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    if (request.contains("version") && request.at("version") != kProtocolVersion) {
        throw Error(ErrorCode::BadRequest, "unsupported protocol version " + request.at("version").dump());
    }
}

bool plain_file_name(const std::string& name) {
    return !name.empty() && name.find('/') == std::string::npos && name.find('\\') == std::string::npos && name != "." && name != "..";
}

}  // namespace

json observation_json(const std::string& session_id, const HumanRollout& rollout) {
    const SceneState& scene = rollout.scene();
    const SegMasks& masks = rollout.masks();
    const std::optional<int> rec = rollout.recognized();

    std::vector<const ObjectState*> drawn;
    for (const ObjectState& o : scene.objects) {
        if (o.active()) drawn.push_back(&o);
    }
    std::stable_sort(drawn.begin(), drawn.end(), [](const ObjectState* a, const ObjectState* b) {
        return a->layer != b->layer ? a->layer < b->layer : a->id < b->id;
    });
    json objects = json::array();
    for (const ObjectState* o : drawn) {
        json poly = json::array();
        for (const Vec2& v : o->world_polygon()) poly.push_back({v.x, v.y});
        const MaskEntry* e = masks.find(o->id);
        json obj{{"id", o->id},
                 {"polygon", std::move(poly)},
                 {"color", color_for(o->id)},
                 {"layer", o->layer},
                 {"visible_fraction", e ? visibility_ratio(masks, o->id) : 0.0},
                 {"visible", e && e->modal_count > 0}};
        if (rec && *rec == o->id) obj["target"] = true;
        objects.push_back(std::move(obj));
    }
    const auto term = rollout.termination();
    return {
        {"version", kProtocolVersion},
        {"session_id", session_id},
        {"status", status_json(rollout)},
        {"termination", term ? json(std::string(to_string(*term))) : json(nullptr)},
        {"timestep", scene.timestep},
        {"action_count", rollout.record().action_counts.total()},
        {"bin", {{"width", scene.bin.width}, {"depth", scene.bin.depth}, {"wall", scene.bin.wall}}},
        {"objects", std::move(objects)},
    };
}

// ---------------------------------------------------------------------------
// SessionManager

struct SessionManager::Entry {
    std::string id;
    std::mutex mutex;
    std::atomic<bool> in_flight{false};
    HumanRollout rollout;
    bool record_written = false;

    Entry(std::string id_, HumanRollout r) : id(std::move(id_)), rollout(std::move(r)) {}
};

SessionManager::SessionManager(SessionOptions options) : options_(std::move(options)) {}
SessionManager::~SessionManager() = default;

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
    return it->second;
}

json SessionManager::create(const json& request) {
    check_version(request);
    SceneState heap;
    HeapInfo info;
    try {
        if (request.contains("heap")) {
            const json& h = request.at("heap");
            HeapSpec spec;
            spec.n_objects = h.at("n_objects").get<int>();
            spec.seed = get_seed(h.at("seed"));
            if (h.contains("heap_center_sigma")) spec.heap_center_sigma = h.at("heap_center_sigma").get<double>();
            if (h.contains("offset_sigma")) spec.offset_sigma = h.at("offset_sigma").get<double>();
            if (h.contains("max_layer")) spec.max_layer = h.at("max_layer").get<int>();
            spec.resolution = options_.engine.resolution;
            heap = generate_heap(spec);
            info = {spec.seed, spec.n_objects, 0, ""};
        } else if (request.contains("snapshot")) {
            heap = scene_from_json(request.at("snapshot"));
            info = {0, heap.initial_count, 0, ""};
        } else if (request.contains("heap_file")) {
            const std::string name = request.at("heap_file").get<std::string>();
            if (!options_.heap_dir) throw Error(ErrorCode::BadRequest, "server has no heap directory");
            if (!plain_file_name(name)) throw Error(ErrorCode::BadRequest, "heap_file must be a plain file name");
            const fs::path path = *options_.heap_dir / name;
            if (!fs::exists(path)) throw Error(ErrorCode::BadRequest, "no heap file '" + name + "'");
            heap = load_scene(path);
            info = {0, heap.initial_count, 0, name};
            const fs::path manifest = *options_.heap_dir / "manifest.json";
            if (fs::exists(manifest)) {
                for (const HeapManifestEntry& e : load_manifest(manifest).heaps) {
                    if (e.file == name) info = {e.seed, e.n_objects, e.index, e.file};
                }
            }
        } else {
            throw Error(ErrorCode::BadRequest, "create request needs one of heap, snapshot, heap_file");
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::BadRequest, std::string("malformed create request: ") + e.what());
    }
    const std::uint64_t seed = request.contains("seed") ? get_seed(request.at("seed")) : options_.seed;
    HumanRollout rollout(std::move(heap), std::move(info), seed, options_.engine, options_.timestep_factor);

    std::shared_ptr<Entry> entry;
    {
        std::lock_guard lock(mutex_);
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mix_seed(++counter_ ^ mix_seed(options_.seed))));
        entry = std::make_shared<Entry>(buf, std::move(rollout));
        sessions_.emplace(entry->id, entry);
    }
    std::lock_guard lock(entry->mutex);
    return observation_json(entry->id, entry->rollout);
}

json SessionManager::get(const std::string& id) const {
    const std::shared_ptr<Entry> entry = find(id);
    std::lock_guard lock(entry->mutex);
    return observation_json(entry->id, entry->rollout);
}

json SessionManager::step(const std::string& id, const json& request) {
    const std::shared_ptr<Entry> entry = find(id);
    if (entry->in_flight.exchange(true)) throw Error(ErrorCode::ConcurrentStep, "a step is already in flight for session '" + id + "'");
    struct Release {
        std::atomic<bool>& flag;
        ~Release() { flag = false; }
    } release{entry->in_flight};

    check_version(request);
    int object_id = 0;
    Primitive primitive = Primitive::Suction;
    try {
        if (request.contains("session_id") && request.at("session_id") != id) {
            throw Error(ErrorCode::BadRequest, "session_id in the body does not match the URL");
        }
        object_id = request.at("object_id").get<int>();
        primitive = primitive_from_string(request.at("primitive").get<std::string>());
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::BadRequest, std::string("malformed step request: ") + e.what());
    }

    std::lock_guard lock(entry->mutex);
    if (options_.step_hook) options_.step_hook();
    const HumanStep result = entry->rollout.step(object_id, primitive);

    json response = observation_json(entry->id, entry->rollout);
    response["plan"] = plan_to_json(result.plan);
    response["quality"] = result.plan.quality;
    response["outcome"] = std::string(to_string(result.transition.outcome));
    response["ejected"] = result.transition.ejected_ids;
    response["reward"] = result.reward;

    if (entry->rollout.finished() && options_.records_path && !entry->record_written) {
        std::lock_guard records_lock(records_mutex_);
        std::ofstream out(*options_.records_path, std::ios::app);
        if (!out) throw Error(ErrorCode::IoError, "cannot append to " + options_.records_path->string());
        out << record_to_line(entry->rollout.record()) << '\n';
        entry->record_written = true;
    }
    return response;
}

json SessionManager::record(const std::string& id) const {
    const std::shared_ptr<Entry> entry = find(id);
    std::lock_guard lock(entry->mutex);
    json j = record_to_json(entry->rollout.record());
    if (!entry->rollout.finished()) j["termination"] = nullptr;
    return {{"version", kProtocolVersion}, {"session_id", entry->id}, {"record", std::move(j)}};
}

json SessionManager::list_heaps() const {
    json files = json::array();
    if (options_.heap_dir && fs::is_directory(*options_.heap_dir)) {
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(*options_.heap_dir)) {
            const std::string name = e.path().filename().string();
            if (e.is_regular_file() && e.path().extension() == ".json" && name != "manifest.json") names.push_back(name);
        }
        std::sort(names.begin(), names.end());
        for (auto& n : names) files.push_back(n);
    }
    return {{"version", kProtocolVersion}, {"heaps", std::move(files)}};
}

}  // namespace mechsearch
