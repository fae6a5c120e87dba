// Prints one PASS/FAIL line per primary acceptance criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mechsearch/errors.hpp"
#include "mechsearch/harness.hpp"
#include "mechsearch/heapgen.hpp"
#include "mechsearch/planners.hpp"
#include "mechsearch/policies.hpp"
#include "mechsearch/scene_io.hpp"
#include "oracles.hpp"

using namespace mechsearch;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kHeapSeed = 42;
constexpr std::uint64_t kPolicySeed = 7;
constexpr int kHeapsPerSize = 200;

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Heap directory with a manifest, generated the same way as `mech-search gen`.
fs::path write_heaps(const fs::path& root, int n, int count) {
    const fs::path dir = root / ("heaps_n" + std::to_string(n));
    fs::create_directories(dir);
    HeapManifest m;
    m.base_seed = kHeapSeed;
    for (int i = 0; i < count; ++i) {
        HeapSpec spec;
        spec.n_objects = n;
        spec.seed = derive_seed(kHeapSeed, static_cast<std::uint64_t>(i));
        const SceneState s = generate_heap(spec);
        const std::string name = fmt("heap_n%d_%04d.json", n, i);
        save_scene(s, dir / name);
        m.heaps.push_back({name, spec.seed, n, i, s.target_id});
    }
    save_manifest(m, dir / "manifest.json");
    return dir / "manifest.json";
}

std::vector<PolicyConfig> configs_for(const std::vector<std::string>& names) {
    std::vector<PolicyConfig> out;
    for (const std::string& n : names) {
        PolicyConfig c = PolicyConfig::from_name(n);
        c.seed = kPolicySeed;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> sorted_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    std::sort(out.begin(), out.end());
    return out;
}

void distance_transform_exactness() {
    const auto t0 = Clock::now();
    Rng rng(20240601);
    int mismatches = 0;
    for (int g = 0; g < 20; ++g) {
        const double density = 0.01 + 0.4 * rng.uniform();
        std::vector<std::uint8_t> bits(64 * 64);
        for (auto& b : bits) b = rng.bernoulli(density);
        bits[rng.below(bits.size())] = 1;
        const MaskImage mask{64, 64, kDefaultResolution, {0.0, 0.0}, bits};
        const DistanceField field = distance_transform(mask);
        const auto oracle = oracles::brute_force_sq_distance(bits, 64, 64);
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (field.values[i] != std::sqrt(static_cast<double>(oracle[i])) / kDefaultResolution) ++mismatches;
        }
    }
    const double secs = seconds_since(t0);
    report(mismatches == 0 && secs < 5.0, "distance-transform-exactness",
           fmt("20 random 64x64 grids, %d mismatched pixels, %.2f s including the brute-force oracle", mismatches, secs));
}

void push_geometry() {
    const PlannerParams params;
    int plans = 0, bad = 0, scenes = 0;
    for (int i = 0; i < 500; ++i) {
        HeapSpec spec;
        spec.n_objects = 10 + 5 * (i % 3);
        spec.seed = derive_seed(777, static_cast<std::uint64_t>(i));
        const SceneState s = generate_heap(spec);
        const SegMasks m = rasterize_scene(s);
        ++scenes;
        const Planner planner(s, m, params);
        // The free-space target comes from the exact distance transform checked above.
        Vec2 free_pt;
        try {
            free_pt = most_free_point(planner.free_space(), params.gripper.push_half_width());
        } catch (const Error&) {
            continue;
        }
        for (int id : m.visible_ids()) {
            const ActionPlan plan = planner.push(id);
            if (plan.quality != 1.0) {
                if (plan.quality != 0.0) ++bad;
                continue;
            }
            ++plans;
            const auto& push = std::get<Push>(plan.action);
            const Vec2 start = push.p.xy(), end = push.p_prime.xy();
            const Vec2 u = (end - start) * (1.0 / norm(end - start));
            // (a) collision-free start.
            const Polygon fp = make_ccw(push_footprint(start, u, params.gripper));
            const Aabb in = s.bin.interior();
            bool ok = std::all_of(fp.begin(), fp.end(), [&](Vec2 p) {
                return p.x >= in.lo.x - 1e-12 && p.x <= in.hi.x + 1e-12 && p.y >= in.lo.y - 1e-12 && p.y <= in.hi.y + 1e-12;
            });
            for (const ObjectState& o : s.objects) {
                if (!o.active()) continue;
                for (const Polygon& part : o.world_parts()) ok = ok && convex_intersection_area(fp, part) <= 1e-12;
            }
            // (b) the stroke passes the centroid.
            ok = ok && point_segment_distance(s.at(id).pose.position(), start, end) <= params.com_tolerance + 1e-12;
            // (c) minimal deviation among all feasible sampled starts.
            const auto candidates = oracles::feasible_pushes(s, id, free_pt, params);
            double best = 10.0;
            for (const auto& c : candidates) best = std::min(best, c.deviation);
            const Vec2 pref = free_pt - s.at(id).pose.position();
            const double dev = std::acos(std::clamp(dot(u, pref * (1.0 / norm(pref))), -1.0, 1.0));
            ok = ok && !candidates.empty() && dev <= best + 1e-9;
            if (!ok) ++bad;
        }
    }
    report(bad == 0 && plans > 0, "push-geometry", fmt("%d scenes, %d quality-1 push plans re-verified, %d violations", scenes, plans, bad));
}

struct Runs {
    std::map<int, ExperimentSummary> by_size;
    std::vector<RolloutRecord> all;
};

void ordering(const Runs& runs, double ordering_secs) {
    const ExperimentSummary& s = runs.by_size.at(15);
    const auto* r = s.find("random", 15);
    const auto* p = s.find("prandom", 15);
    const auto* l = s.find("largest", 15);
    const bool defined = r && p && l && r->mean_actions && p->mean_actions && l->mean_actions;
    const bool ok = defined && *l->mean_actions + 0.5 <= *p->mean_actions && *p->mean_actions + 0.5 <= *r->mean_actions && ordering_secs < 600.0;
    report(ok, "policy-ordering",
           defined ? fmt("N=15, %d heaps: LargestFirst %.2f < PreemptedRandom %.2f < Random %.2f (gaps %.2f, %.2f); %.1f s single-threaded",
                         kHeapsPerSize, *l->mean_actions, *p->mean_actions, *r->mean_actions, *p->mean_actions - *l->mean_actions,
                         *r->mean_actions - *p->mean_actions, ordering_secs)
                   : std::string("missing means"));
}

void scaling(const Runs& runs) {
    bool ok = true;
    std::string detail;
    for (const std::string& policy : policy_names()) {
        std::vector<double> xs, ys;
        for (int n : {10, 15, 20}) {
            const auto* g = runs.by_size.at(n).find(policy, n);
            if (g && g->mean_actions) {
                xs.push_back(n);
                ys.push_back(*g->mean_actions);
            }
        }
        if (xs.size() != 3) {
            ok = false;
            detail += policy + " missing; ";
            continue;
        }
        const double mx = (xs[0] + xs[1] + xs[2]) / 3, my = (ys[0] + ys[1] + ys[2]) / 3;
        double sxy = 0, sxx = 0, syy = 0;
        for (int i = 0; i < 3; ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        const double slope = sxy / sxx;
        const double r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 0.0;
        ok = ok && r2 >= 0.9 && slope > 0;
        detail += fmt("%s %.2f/%.2f/%.2f slope %.3f R2 %.3f; ", policy.c_str(), ys[0], ys[1], ys[2], slope, r2);
    }
    report(ok, "linear-scaling", detail);
}

void efficiency_head(const Runs& runs) {
    const auto* l = runs.by_size.at(15).find("largest", 15);
    const auto* r = runs.by_size.at(15).find("random", 15);
    const double lf = static_cast<double>(l->curve.at(4)) / l->rollouts;
    const double rnd = static_cast<double>(r->curve.at(4)) / r->rollouts;
    report(lf >= 0.45 && rnd <= 0.25, "efficiency-head",
           fmt("N=15, share of heaps solved within 5 actions: LargestFirst %.1f%% (need >= 45%%), Random %.1f%% (need <= 25%%)", 100 * lf,
               100 * rnd));
}

void push_scarcity(const Runs& runs) {
    bool ok = true;
    std::string detail;
    for (const char* policy : {"prandom-push", "largest-push"}) {
        const auto* g = runs.by_size.at(15).find(policy, 15);
        const double share = g->action_totals.total() ? static_cast<double>(g->action_totals.push) / g->action_totals.total() : 0.0;
        ok = ok && share >= 0.01 && share <= 0.15;
        detail += fmt("%s %d of %d actions are pushes (%.2f%%); ", policy, g->action_totals.push, g->action_totals.total(), 100 * share);
    }
    report(ok, "push-scarcity", detail + "need 1-15%");
}

void termination_soundness(const Runs& runs) {
    int over = 0, inconsistent = 0, no_action = 0, ejected = 0, timeout = 0;
    for (const RolloutRecord& r : runs.all) {
        const int n = r.heap.n_objects;
        if (static_cast<int>(r.steps.size()) > 2 * n) ++over;
        switch (r.termination) {
            case TerminationCause::Success:
                if (r.steps.empty() || r.steps.back().outcome != Outcome::GraspSucceeded) ++inconsistent;
                break;
            case TerminationCause::NoActionAvailable: ++no_action; break;
            case TerminationCause::TargetEjected: ++ejected; break;
            case TerminationCause::Timeout:
                if (static_cast<int>(r.steps.size()) != 2 * n) ++inconsistent;
                ++timeout;
                break;
        }
    }
    const int failed = no_action + ejected + timeout;
    const bool modal = failed > 0 && 2 * no_action >= failed;
    report(over == 0 && inconsistent == 0 && modal, "termination-soundness",
           fmt("%zu rollouts, %d over 2N steps, %d inconsistent causes; failures: %d no-action, %d target-ejected, %d timeout "
               "(no-action must be >= 50%% of failures)",
               runs.all.size(), over, inconsistent, no_action, ejected, timeout));
}

void determinism(const fs::path& manifest, const fs::path& root) {
    const auto configs = configs_for(policy_names());
    run_experiment(manifest, configs, {}, {1, root / "det_a"});
    run_experiment(manifest, configs, {}, {4, root / "det_b"});
    const auto a = sorted_lines(root / "det_a" / "records.jsonl");
    const auto b = sorted_lines(root / "det_b" / "records.jsonl");
    report(a == b && !a.empty(), "determinism",
           fmt("N=15 manifest, 5 policies: %zu records with 1 worker, %zu with 4 workers, sets %s", a.size(), b.size(),
               a == b ? "byte-identical" : "differ"));
}

void threshold_semantics() {
    const PolicyConfig plain = PolicyConfig::from_name("largest");
    const PolicyConfig pushing = PolicyConfig::from_name("largest-push");
    const bool ok = grasp_threshold(3, 3, plain) == 0.15 && grasp_threshold(3, 3, pushing) == 0.15 && grasp_threshold(1, 3, plain) == 0.15 &&
                    grasp_threshold(1, 3, pushing) == 0.3 && grasp_threshold(1, std::nullopt, plain) == 0.15 &&
                    grasp_threshold(1, std::nullopt, pushing) == 0.3;
    report(ok, "threshold-semantics", "target 0.15 in all cases; non-target 0.3 with pushing, 0.15 without (6 cases)");
}

}  // namespace

int main() {
    const fs::path root = fs::temp_directory_path() / "mech_search_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    distance_transform_exactness();
    push_geometry();

    Runs runs;
    std::map<int, fs::path> manifests;
    for (int n : {10, 15, 20}) manifests[n] = write_heaps(root, n, kHeapsPerSize);

    // The ordering run alone, single-threaded, for the runtime bound.
    const auto t0 = Clock::now();
    run_experiment(manifests[15], configs_for({"random", "prandom", "largest"}), {}, {1, root / "ordering"});
    const double ordering_secs = seconds_since(t0);

    for (int n : {10, 15, 20}) {
        const fs::path out = root / ("sweep_n" + std::to_string(n));
        run_experiment(manifests[n], configs_for(policy_names()), {}, {1, out});
        // Everything downstream is computed from the JSONL on disk.
        auto records = read_records(out / "records.jsonl");
        runs.by_size[n] = summarize(records);
        runs.all.insert(runs.all.end(), records.begin(), records.end());
    }

    ordering(runs, ordering_secs);
    scaling(runs);
    efficiency_head(runs);
    push_scarcity(runs);
    termination_soundness(runs);
    determinism(manifests[15], root);
    threshold_semantics();

    fs::remove_all(root);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
