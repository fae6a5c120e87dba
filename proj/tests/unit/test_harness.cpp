#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "mechsearch/errors.hpp"
#include "mechsearch/harness.hpp"
#include "mechsearch/heapgen.hpp"
#include "mechsearch/scene_io.hpp"

using namespace mechsearch;
using fixtures::rect;
using fixtures::scene_of;
namespace fs = std::filesystem;

namespace {

std::vector<HeapCase> make_heaps(int count, int n, std::uint64_t base) {
    std::vector<HeapCase> out;
    for (int i = 0; i < count; ++i) {
        HeapSpec spec;
        spec.n_objects = n;
        spec.seed = derive_seed(base, static_cast<std::uint64_t>(i));
        out.push_back({generate_heap(spec), HeapInfo{spec.seed, n, i, ""}});
    }
    return out;
}

RolloutRecord fake_record(const std::string& policy, int n, TerminationCause cause, int actions) {
    RolloutRecord r;
    r.policy = policy;
    r.config = PolicyConfig::from_name(policy);
    r.heap.n_objects = n;
    r.termination = cause;
    for (int i = 0; i < actions; ++i) {
        StepRecord s;
        s.timestep = i;
        s.goal_id = 0;
        s.plan = ActionPlan{SuctionGrasp{}, 0.5, 0};
        s.outcome = i + 1 == actions && cause == TerminationCause::Success ? Outcome::GraspSucceeded : Outcome::GraspFailed;
        r.steps.push_back(s);
        r.action_counts.add(Primitive::Suction);
    }
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::string> lines_of(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("an exposed target is extracted in one action") {
    const SceneState s = scene_of({rect(0, 0.2, 0.3, 0.05, 0.05)}, 0);
    const RolloutRecord r = run_rollout(s, {1, 1, 0, ""}, PolicyConfig::from_name("largest"));
    CHECK(r.success());
    CHECK(r.steps.size() == 1);
    CHECK(r.action_counts.suction == 1);
    CHECK(r.steps[0].reward == doctest::Approx(-1.0));
}

TEST_CASE("rollouts are reproducible and records round trip") {
    const auto heaps = make_heaps(3, 15, 5);
    for (const std::string& name : policy_names()) {
        PolicyConfig c = PolicyConfig::from_name(name);
        c.seed = 9;
        for (const HeapCase& h : heaps) {
            const RolloutRecord a = run_rollout(h.scene, h.info, c);
            const RolloutRecord b = run_rollout(h.scene, h.info, c);
            CHECK(record_to_line(a) == record_to_line(b));
            const RolloutRecord back = record_from_json(record_to_json(a));
            CHECK(record_to_line(back) == record_to_line(a));
            CHECK(static_cast<int>(a.steps.size()) <= 2 * h.info.n_objects);
            CHECK(a.action_counts.total() == static_cast<int>(a.steps.size()));
        }
    }
}

TEST_CASE("malformed records are rejected") {
    const nlohmann::json good = record_to_json(fake_record("largest", 15, TerminationCause::Success, 3));
    CHECK_NOTHROW(record_from_json(good));
    auto code_of = [](const nlohmann::json& j) {
        try {
            record_from_json(j);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoError;
    };
    nlohmann::json j = good;
    j["schema"] = "nope";
    CHECK(code_of(j) == ErrorCode::BadRecord);
    j = good;
    j["termination"] = "Exploded";
    CHECK(code_of(j) == ErrorCode::BadRecord);
    j = good;
    j["action_counts"]["suction"] = 7;
    CHECK(code_of(j) == ErrorCode::BadRecord);
    CHECK(code_of(nlohmann::json::array()) == ErrorCode::BadRecord);
}

TEST_CASE("batch of two heaps and two policies") {
    const auto heaps = make_heaps(2, 10, 1);
    const std::vector<PolicyConfig> configs = {PolicyConfig::from_name("random"), PolicyConfig::from_name("largest")};
    const auto records = run_batch(heaps, configs, {}, 1);
    REQUIRE(records.size() == 4);
    CHECK(records[0].policy == "random");
    CHECK(records[3].policy == "largest");
    const ExperimentSummary s = summarize(records);
    REQUIRE(s.groups.size() == 2);
    for (const PolicySummary& g : s.groups) {
        CHECK(g.rollouts == 2);
        CHECK(g.successes + g.failures_no_action + g.failures_target_ejected + g.failures_timeout == 2);
    }
}

TEST_CASE("worker count does not change the record set") {
    const auto heaps = make_heaps(6, 10, 2);
    std::vector<PolicyConfig> configs;
    for (const std::string& name : policy_names()) configs.push_back(PolicyConfig::from_name(name));
    std::vector<std::string> one, many;
    run_batch(heaps, configs, {}, 1, [&](const RolloutRecord& r) { one.push_back(record_to_line(r)); });
    const auto ordered = run_batch(heaps, configs, {}, 8, [&](const RolloutRecord& r) { many.push_back(record_to_line(r)); });
    std::sort(one.begin(), one.end());
    std::sort(many.begin(), many.end());
    CHECK(one == many);
    std::vector<std::string> from_return;
    for (const auto& r : ordered) from_return.push_back(record_to_line(r));
    std::sort(from_return.begin(), from_return.end());
    CHECK(from_return == one);
}

TEST_CASE("mean and standard error over successful rollouts") {
    const ExperimentSummary s = summarize({fake_record("largest", 15, TerminationCause::Success, 3),
                                           fake_record("largest", 15, TerminationCause::Success, 5)});
    const PolicySummary* g = s.find("largest", 15);
    REQUIRE(g != nullptr);
    CHECK(g->success_rate == 1.0);
    REQUIRE(g->mean_actions.has_value());
    CHECK(*g->mean_actions == doctest::Approx(4.0));
    CHECK(g->sem_actions == doctest::Approx(1.0));
    CHECK(g->curve.size() == 30);
    CHECK(g->curve[2] == 1);
    CHECK(g->curve[4] == 2);
    CHECK(g->curve.back() == 2);
}

TEST_CASE("all-failure groups have no mean") {
    const ExperimentSummary s = summarize({fake_record("random", 10, TerminationCause::Timeout, 20),
                                           fake_record("random", 10, TerminationCause::NoActionAvailable, 4)});
    const PolicySummary* g = s.find("random", 10);
    REQUIRE(g != nullptr);
    CHECK(g->success_rate == 0.0);
    CHECK_FALSE(g->mean_actions.has_value());
    CHECK(g->failures_timeout == 1);
    CHECK(g->failures_no_action == 1);
    CHECK_THROWS_AS(summarize({}), Error);
}

TEST_CASE("summaries do not depend on record order") {
    const auto heaps = make_heaps(5, 10, 3);
    auto records = run_batch(heaps, {PolicyConfig::from_name("prandom"), PolicyConfig::from_name("largest")}, {}, 1);
    const ExperimentSummary a = summarize(records);
    std::reverse(records.begin(), records.end());
    CHECK(summarize(records) == a);
}

TEST_CASE("reports") {
    const fs::path dir = fresh_dir("mech_search_reports_test");
    const ExperimentSummary s = summarize({fake_record("random", 15, TerminationCause::Success, 3),
                                           fake_record("random", 15, TerminationCause::Success, 9),
                                           fake_record("random", 15, TerminationCause::Timeout, 30)});
    const auto files = emit_reports(s, dir);
    CHECK(files.size() == 3);
    for (const auto& f : files) CHECK(fs::exists(f));
    const auto curve = lines_of(dir / "curve_random_n15.csv");
    REQUIRE(curve.size() == 31);
    long prev = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const long v = std::stol(curve[i].substr(curve[i].find(',') + 1));
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(prev == 2);
    std::ifstream txt(dir / "summary.txt");
    const std::string body((std::istreambuf_iterator<char>(txt)), {});
    CHECK(body.find("88.8%") != std::string::npos);
    CHECK(body.find("11.26 +- 0.15") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("experiment output re-summarizes to the same numbers") {
    const fs::path dir = fresh_dir("mech_search_experiment_test");
    const auto heaps = make_heaps(4, 10, 4);
    HeapManifest m;
    m.base_seed = 4;
    for (const HeapCase& h : heaps) {
        const std::string name = "heap_" + std::to_string(h.info.index) + ".json";
        save_scene(h.scene, dir / name);
        m.heaps.push_back({name, h.info.seed, h.info.n_objects, h.info.index, h.scene.target_id});
    }
    save_manifest(m, dir / "manifest.json");
    const auto loaded = load_heaps(dir / "manifest.json");
    REQUIRE(loaded.size() == heaps.size());
    CHECK(loaded[2].scene == heaps[2].scene);

    const std::vector<PolicyConfig> configs = {PolicyConfig::from_name("random"), PolicyConfig::from_name("largest-push")};
    const ExperimentSummary live = run_experiment(dir / "manifest.json", configs, {}, {2, dir / "out"});
    CHECK_FALSE(fs::exists(dir / "out" / "records.jsonl.partial"));
    const auto records = read_records(dir / "out" / "records.jsonl");
    CHECK(records.size() == 8);
    CHECK(summarize(records) == live);
    fs::remove_all(dir);
}

}
