#include "mechsearch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "mechsearch/errors.hpp"
#include "mechsearch/scene_io.hpp"

namespace mechsearch {

using nlohmann::json;
namespace fs = std::filesystem;

void ActionCounts::add(Primitive p) {
    switch (p) {
        case Primitive::Suction: ++suction; break;
        case Primitive::ParallelJaw: ++parallel_jaw; break;
        case Primitive::Push: ++push; break;
    }
}

void ActionCounts::add(const ActionCounts& o) {
    suction += o.suction;
    parallel_jaw += o.parallel_jaw;
    push += o.push;
}

// ---------------------------------------------------------------------------
// Records

json record_to_json(const RolloutRecord& r) {
    json steps = json::array();
    for (const StepRecord& s : r.steps) {
        steps.push_back({
            {"t", s.timestep},
            {"priority_head", s.priority_head},
            {"goal_id", s.goal_id},
            {"action", plan_to_json(s.plan)},
            {"quality", s.plan.quality},
            {"outcome", std::string(to_string(s.outcome))},
            {"ejected", s.ejected_ids},
            {"reward", s.reward},
            {"recognized", s.target_recognized},
        });
    }
    return {
        {"schema", std::string(kRolloutSchema)},
        {"heap", {{"seed", r.heap.seed}, {"n_objects", r.heap.n_objects}, {"index", r.heap.index}, {"file", r.heap.file}}},
        {"policy", r.policy},
        {"config", r.config ? config_to_json(*r.config) : json(nullptr)},
        {"resolution", r.resolution},
        {"steps", std::move(steps)},
        {"termination", std::string(to_string(r.termination))},
        {"action_counts", {{"suction", r.action_counts.suction}, {"parallel_jaw", r.action_counts.parallel_jaw}, {"push", r.action_counts.push}}},
    };
}

RolloutRecord record_from_json(const json& j) {
    RolloutRecord r;
    try {
        if (j.at("schema").get<std::string>() != kRolloutSchema) throw Error(ErrorCode::BadRecord, "unsupported record schema");
        const json& h = j.at("heap");
        r.heap = {h.at("seed").get<std::uint64_t>(), h.at("n_objects").get<int>(), h.at("index").get<int>(), h.at("file").get<std::string>()};
        r.policy = j.at("policy").get<std::string>();
        if (!j.at("config").is_null()) r.config = config_from_json(j.at("config"));
        r.resolution = j.at("resolution").get<double>();
        for (const json& s : j.at("steps")) {
            StepRecord step;
            step.timestep = s.at("t").get<int>();
            step.priority_head = s.at("priority_head").get<int>();
            step.goal_id = s.at("goal_id").get<int>();
            step.plan = plan_from_json(s.at("action"));
            step.outcome = outcome_from_string(s.at("outcome").get<std::string>());
            step.ejected_ids = s.at("ejected").get<std::vector<int>>();
            step.reward = s.at("reward").get<double>();
            step.target_recognized = s.at("recognized").get<bool>();
            r.steps.push_back(std::move(step));
        }
        r.termination = termination_from_string(j.at("termination").get<std::string>());
        const json& c = j.at("action_counts");
        r.action_counts = {c.at("suction").get<int>(), c.at("parallel_jaw").get<int>(), c.at("push").get<int>()};
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::BadRecord, std::string("malformed rollout record: ") + e.what());
    }
    ActionCounts recount;
    for (const StepRecord& s : r.steps) recount.add(s.plan.primitive());
    if (recount != r.action_counts) throw Error(ErrorCode::BadRecord, "action counts do not match the logged steps");
    if (r.heap.n_objects > 0 && static_cast<int>(r.steps.size()) > 2 * r.heap.n_objects) {
        throw Error(ErrorCode::BadRecord, "rollout longer than twice the heap size");
    }
    return r;
}

std::string record_to_line(const RolloutRecord& r) { return record_to_json(r).dump(); }

std::vector<RolloutRecord> read_records(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<RolloutRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::BadRecord, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(record_from_json(j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rollouts

double target_visibility(const SegMasks& masks, int target_id) {
    return masks.find(target_id) ? visibility_ratio(masks, target_id) : 0.0;
}

RolloutRecord run_rollout(const SceneState& heap, const HeapInfo& info, const PolicyConfig& config, const EngineConfig& engine) {
    config.validate();
    heap.validate();
    RolloutRecord record;
    record.heap = info;
    record.policy = config.name();
    record.config = config;
    record.resolution = engine.resolution;

    RolloutStreams streams = make_streams(config.seed, info.seed);
    PolicyState state;
    state.rng = streams.policy;
    Rng physics = streams.physics;

    SceneState scene = heap;
    SegMasks masks = rasterize_scene(scene, engine.resolution);
    double v = target_visibility(masks, scene.target_id);
    for (;;) {
        Decision d = select_action(scene, masks, config, state, engine.planner);
        if (!d.execute()) {
            record.termination = TerminationCause::NoActionAvailable;
            break;
        }
        const ActionPlan& plan = *d.plan;
        TransitionResult tr = execute_plan(scene, plan, physics, engine.physics);
        SegMasks next_masks = rasterize_scene(tr.next_scene, engine.resolution);
        const double v_next = target_visibility(next_masks, scene.target_id);

        StepRecord step;
        step.timestep = state.steps_taken;
        step.priority_head = d.priority.empty() ? -1 : d.priority.front();
        step.goal_id = plan.goal_id;
        step.plan = plan;
        step.outcome = tr.outcome;
        step.ejected_ids = tr.ejected_ids;
        step.reward = v_next - v;
        step.target_recognized = d.recognized.has_value();
        record.steps.push_back(std::move(step));
        record.action_counts.add(plan.primitive());

        record_transition(state, masks, plan, tr);
        const auto cause = check_termination(tr.next_scene, tr, plan, d.recognized, state, config);
        scene = std::move(tr.next_scene);
        masks = std::move(next_masks);
        v = v_next;
        if (cause) {
            record.termination = *cause;
            break;
        }
    }
    return record;
}

// ---------------------------------------------------------------------------
// Manifests

json manifest_to_json(const HeapManifest& m) {
    json heaps = json::array();
    for (const HeapManifestEntry& e : m.heaps) {
        heaps.push_back({{"file", e.file}, {"seed", e.seed}, {"n_objects", e.n_objects}, {"index", e.index}, {"target_id", e.target_id}});
    }
    return {{"schema", std::string(kManifestSchema)}, {"base_seed", m.base_seed}, {"heaps", std::move(heaps)}};
}

HeapManifest manifest_from_json(const json& j) {
    try {
        if (j.at("schema").get<std::string>() != kManifestSchema) throw Error(ErrorCode::InvalidConfig, "unsupported manifest schema");
        HeapManifest m;
        m.base_seed = j.at("base_seed").get<std::uint64_t>();
        for (const json& e : j.at("heaps")) {
            m.heaps.push_back({e.at("file").get<std::string>(), e.at("seed").get<std::uint64_t>(), e.at("n_objects").get<int>(),
                               e.at("index").get<int>(), e.at("target_id").get<int>()});
        }
        return m;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed heap manifest: ") + e.what());
    }
}

void save_manifest(const HeapManifest& m, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << manifest_to_json(m).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

HeapManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
    return manifest_from_json(j);
}

std::vector<HeapCase> load_heaps(const fs::path& manifest_path) {
    const HeapManifest m = load_manifest(manifest_path);
    if (m.heaps.empty()) throw Error(ErrorCode::InvalidConfig, "heap manifest is empty");
    const fs::path dir = manifest_path.parent_path();
    std::vector<HeapCase> out;
    out.reserve(m.heaps.size());
    for (const HeapManifestEntry& e : m.heaps) {
        out.push_back({load_scene(dir / e.file), HeapInfo{e.seed, e.n_objects, e.index, e.file}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Batches

std::vector<RolloutRecord> run_batch(const std::vector<HeapCase>& heaps, const std::vector<PolicyConfig>& configs,
                                     const EngineConfig& engine, int workers, const std::function<void(const RolloutRecord&)>& sink) {
    if (heaps.empty() || configs.empty()) throw Error(ErrorCode::InvalidConfig, "nothing to run");
    if (workers < 1) throw Error(ErrorCode::InvalidConfig, "workers must be at least 1");
    for (const PolicyConfig& c : configs) c.validate();

    const std::size_t total = heaps.size() * configs.size();
    std::vector<RolloutRecord> results(total);
    std::atomic<std::size_t> next{0};
    std::mutex sink_mutex;
    std::exception_ptr failure;

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            try {
                const PolicyConfig& config = configs[i / heaps.size()];
                const HeapCase& heap = heaps[i % heaps.size()];
                results[i] = run_rollout(heap.scene, heap.info, config, engine);
                if (sink) {
                    std::lock_guard lock(sink_mutex);
                    sink(results[i]);
                }
            } catch (...) {
                std::lock_guard lock(sink_mutex);
                if (!failure) failure = std::current_exception();
                next = total;
                return;
            }
        }
    };

    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), total);
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

// ---------------------------------------------------------------------------
// Summaries

namespace {

int policy_rank(const std::string& name) {
    const std::vector<std::string> names = policy_names();
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? static_cast<int>(names.size()) : static_cast<int>(it - names.begin());
}

std::string display_name(const std::string& policy) {
    if (policy == "random") return "Random";
    if (policy == "prandom") return "Preempted Random";
    if (policy == "prandom-push") return "Preempted Random + Pushing";
    if (policy == "largest") return "Largest-First";
    if (policy == "largest-push") return "Largest-First + Pushing";
    if (policy == "human") return "Human";
    return policy;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

const PolicySummary* ExperimentSummary::find(std::string_view policy, int n_objects) const {
    for (const PolicySummary& g : groups) {
        if (g.policy == policy && g.n_objects == n_objects) return &g;
    }
    return nullptr;
}

ExperimentSummary summarize(const std::vector<RolloutRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::BadRecord, "cannot summarize an empty record set");
    using Key = std::tuple<int, std::string, int>;
    std::map<Key, std::vector<const RolloutRecord*>> grouped;
    for (const RolloutRecord& r : records) grouped[{policy_rank(r.policy), r.policy, r.heap.n_objects}].push_back(&r);

    ExperimentSummary summary;
    for (const auto& [key, group] : grouped) {
        PolicySummary s;
        s.policy = std::get<1>(key);
        s.n_objects = std::get<2>(key);
        s.rollouts = static_cast<int>(group.size());
        std::vector<int> success_lengths;
        int max_len = 2 * s.n_objects;
        for (const RolloutRecord* r : group) {
            s.action_totals.add(r->action_counts);
            switch (r->termination) {
                case TerminationCause::Success: success_lengths.push_back(r->action_counts.total()); break;
                case TerminationCause::NoActionAvailable: ++s.failures_no_action; break;
                case TerminationCause::TargetEjected: ++s.failures_target_ejected; break;
                case TerminationCause::Timeout: ++s.failures_timeout; break;
            }
            max_len = std::max(max_len, r->action_counts.total());
        }
        s.successes = static_cast<int>(success_lengths.size());
        s.success_rate = static_cast<double>(s.successes) / s.rollouts;
        if (!success_lengths.empty()) {
            // Integer sums keep the statistics independent of record order.
            long long sum = 0;
            long long sum_sq = 0;
            for (int x : success_lengths) {
                sum += x;
                sum_sq += static_cast<long long>(x) * x;
            }
            const auto n = static_cast<long long>(success_lengths.size());
            s.mean_actions = static_cast<double>(sum) / static_cast<double>(n);
            if (n > 1) {
                const double variance = static_cast<double>(n * sum_sq - sum * sum) / static_cast<double>(n * (n - 1));
                s.sem_actions = std::sqrt(variance / static_cast<double>(n));
            }
        }
        s.curve.assign(static_cast<std::size_t>(max_len), 0);
        for (int len : success_lengths) {
            for (int k = std::max(len, 1); k <= max_len; ++k) ++s.curve[static_cast<std::size_t>(k - 1)];
        }
        summary.groups.push_back(std::move(s));
    }
    return summary;
}

std::vector<fs::path> emit_reports(const ExperimentSummary& summary, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<fs::path> written;
    auto open = [&](const fs::path& path) {
        std::ofstream out(path);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
        written.push_back(path);
        return out;
    };

    {
        std::ofstream csv = open(out_dir / "summary.csv");
        csv << "policy,n_objects,rollouts,successes,success_rate,mean_actions,sem_actions,mean_defined,"
               "suction,parallel_jaw,push,fail_no_action,fail_target_ejected,fail_timeout\n";
        for (const PolicySummary& g : summary.groups) {
            csv << g.policy << ',' << g.n_objects << ',' << g.rollouts << ',' << g.successes << ',' << fixed(g.success_rate, 4) << ','
                << (g.mean_actions ? fixed(*g.mean_actions, 4) : "") << ',' << (g.mean_actions ? fixed(g.sem_actions, 4) : "") << ','
                << (g.mean_actions ? "true" : "false") << ',' << g.action_totals.suction << ',' << g.action_totals.parallel_jaw << ','
                << g.action_totals.push << ',' << g.failures_no_action << ',' << g.failures_target_ejected << ',' << g.failures_timeout
                << '\n';
        }
        if (!csv) throw Error(ErrorCode::IoError, "write failed for summary.csv");
    }

    {
        std::ofstream txt = open(out_dir / "summary.txt");
        char line[256];
        std::snprintf(line, sizeof line, "%-28s %4s %6s %8s %16s %8s %8s %6s %8s %8s %8s\n", "policy", "N", "runs", "success",
                      "mean actions", "suction", "jaw", "push", "no-act", "ejected", "timeout");
        txt << line;
        for (const PolicySummary& g : summary.groups) {
            const std::string mean = g.mean_actions ? fixed(*g.mean_actions, 2) + " +- " + fixed(g.sem_actions, 2) : "undefined";
            std::snprintf(line, sizeof line, "%-28s %4d %6d %7.1f%% %16s %8d %8d %6d %8d %8d %8d\n", display_name(g.policy).c_str(),
                          g.n_objects, g.rollouts, 100.0 * g.success_rate, mean.c_str(), g.action_totals.suction,
                          g.action_totals.parallel_jaw, g.action_totals.push, g.failures_no_action, g.failures_target_ejected,
                          g.failures_timeout);
            txt << line;
        }
        txt << "\nPublished reference, 15-object heaps (1000 simulated trials; physical trials for Human):\n"
               "  Random                        88.8%   11.26 +- 0.15\n"
               "  Preempted Random              89.7%    8.55 +- 0.16\n"
               "  Preempted Random + Pushing    94.3%    8.87 +- 0.15\n"
               "  Largest-First                 90.3%    6.35 +- 0.14\n"
               "  Largest-First + Pushing       93.3%    6.51 +- 0.14\n"
               "  Human (physical)              98%      3.06 +- 0.32\n"
               "Absolute values are not expected to match under the geometric proxy models; compare orderings.\n";
        if (!txt) throw Error(ErrorCode::IoError, "write failed for summary.txt");
    }

    for (const PolicySummary& g : summary.groups) {
        std::ofstream csv = open(out_dir / ("curve_" + g.policy + "_n" + std::to_string(g.n_objects) + ".csv"));
        csv << "k,successes\n";
        for (std::size_t k = 0; k < g.curve.size(); ++k) csv << k + 1 << ',' << g.curve[k] << '\n';
        if (!csv) throw Error(ErrorCode::IoError, "write failed for curve file");
    }
    return written;
}

ExperimentSummary run_experiment(const fs::path& manifest_path, const std::vector<PolicyConfig>& configs, const EngineConfig& engine,
                                 const ExperimentOptions& options) {
    const std::vector<HeapCase> heaps = load_heaps(manifest_path);
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + options.out_dir.string() + ": " + ec.message());

    const fs::path records_path = options.out_dir / "records.jsonl";
    const fs::path marker = options.out_dir / "records.jsonl.partial";
    {
        std::ofstream m(marker);
        if (!m) throw Error(ErrorCode::IoError, "cannot write " + marker.string());
        m << "run in progress\n";
    }
    std::ofstream out(records_path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + records_path.string());

    const std::vector<RolloutRecord> records = run_batch(heaps, configs, engine, options.workers, [&](const RolloutRecord& r) {
        out << record_to_line(r) << '\n';
        out.flush();
    });
    out.close();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + records_path.string());
    fs::remove(marker, ec);

    ExperimentSummary summary = summarize(records);
    emit_reports(summary, options.out_dir);
    return summary;
}

}  // namespace mechsearch
