#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mechsearch/engine.hpp"
#include "mechsearch/errors.hpp"
#include "mechsearch/harness.hpp"
#include "mechsearch/heapgen.hpp"
#include "mechsearch/planners.hpp"
#include "mechsearch/policies.hpp"
#include "mechsearch/scene_io.hpp"
#include "mechsearch/server.hpp"

namespace fs = std::filesystem;
namespace ms = mechsearch;
using nlohmann::json;

namespace {

struct GenArgs {
    int n = 15;
    int count = 200;
    bool full = false;
    std::uint64_t seed = 42;
    double center_sigma = ms::HeapSpec{}.heap_center_sigma;
    double offset_sigma = ms::HeapSpec{}.offset_sigma;
    int max_layer = ms::HeapSpec{}.max_layer;
    fs::path out = "heaps";
};

struct PlanArgs {
    fs::path scene;
    int goal = 0;
    std::string primitive;
    std::optional<fs::path> dump_masks;
};

struct RunArgs {
    fs::path heaps;
    std::vector<std::string> policies;
    fs::path out = "results";
    int workers = 1;
    std::uint64_t seed = 0;
    ms::PolicyConfig base{};
    bool global_argmax = false;
    bool first_fit = false;
};

struct ReportArgs {
    fs::path in;
    fs::path out;
};

struct ServeArgs {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<fs::path> heaps;
    std::optional<fs::path> records;
    std::uint64_t seed = 0;
};

void cmd_gen(const GenArgs& a) {
    const int count = a.full ? 1000 : a.count;
    if (count < 1) throw ms::Error(ms::ErrorCode::InvalidConfig, "--count must be positive");
    fs::create_directories(a.out);
    ms::HeapManifest manifest;
    manifest.base_seed = a.seed;
    const ms::EngineConfig engine = ms::EngineConfig::from_env();
    for (int i = 0; i < count; ++i) {
        ms::HeapSpec spec;
        spec.n_objects = a.n;
        spec.seed = ms::derive_seed(a.seed, static_cast<std::uint64_t>(i));
        spec.heap_center_sigma = a.center_sigma;
        spec.offset_sigma = a.offset_sigma;
        spec.max_layer = a.max_layer;
        spec.resolution = engine.resolution;
        const ms::SceneState scene = ms::generate_heap(spec);
        char name[64];
        std::snprintf(name, sizeof name, "heap_n%d_%04d.json", a.n, i);
        ms::save_scene(scene, a.out / name);
        manifest.heaps.push_back({name, spec.seed, a.n, i, scene.target_id});
    }
    ms::save_manifest(manifest, a.out / "manifest.json");
    std::cout << "wrote " << count << " heaps and " << (a.out / "manifest.json").string() << '\n';
}

void cmd_plan(const PlanArgs& a) {
    const ms::EngineConfig engine = ms::EngineConfig::from_env();
    const ms::SceneState scene = ms::load_scene(a.scene);
    const ms::SegMasks masks = ms::rasterize_scene(scene, engine.resolution);
    if (a.dump_masks) ms::dump_masks(masks, *a.dump_masks);
    const ms::Planner planner(scene, masks, engine.planner);
    ms::ActionPlan plan;
    switch (ms::primitive_from_string(a.primitive)) {
        case ms::Primitive::ParallelJaw: plan = planner.parallel_jaw(a.goal); break;
        case ms::Primitive::Suction: plan = planner.suction(a.goal); break;
        case ms::Primitive::Push: plan = planner.push(a.goal); break;
    }
    std::cout << json{{"plan", ms::plan_to_json(plan)}, {"quality", plan.quality}}.dump(2) << '\n';
}

void cmd_run(const RunArgs& a) {
    if (a.global_argmax && a.first_fit) throw ms::Error(ms::ErrorCode::InvalidConfig, "--first-fit and --global-argmax are exclusive");
    const fs::path manifest = fs::is_directory(a.heaps) ? a.heaps / "manifest.json" : a.heaps;
    const ms::EngineConfig engine = ms::EngineConfig::from_env();
    std::vector<ms::PolicyConfig> configs;
    for (const std::string& name : a.policies) {
        ms::PolicyConfig c = ms::PolicyConfig::from_name(name);
        c.t_thresh = a.base.t_thresh;
        c.t_high = a.base.t_high;
        c.recognition_visibility_threshold = a.base.recognition_visibility_threshold;
        c.push_consecutive_cap = a.base.push_consecutive_cap;
        c.timestep_factor = a.base.timestep_factor;
        c.seed = a.seed;
        c.grasp_pass = a.global_argmax ? ms::GraspPass::GlobalArgmax : ms::GraspPass::FirstFit;
        c.validate();
        configs.push_back(c);
    }
    fs::create_directories(a.out);
    json configs_json = json::array();
    for (const auto& c : configs) configs_json.push_back(ms::config_to_json(c));
    {
        std::ofstream run(a.out / "run.json");
        run << json{{"heaps", manifest.string()}, {"workers", a.workers}, {"resolution", engine.resolution}, {"configs", configs_json}}.dump(2)
            << '\n';
    }
    const ms::ExperimentSummary summary = ms::run_experiment(manifest, configs, engine, {a.workers, a.out});
    for (const ms::PolicySummary& g : summary.groups) {
        char mean[48] = "n/a";
        if (g.mean_actions) std::snprintf(mean, sizeof mean, "%.2f +/- %.2f", *g.mean_actions, g.sem_actions);
        std::printf("%-14s N=%-3d success %5.1f%%  mean actions %s\n", g.policy.c_str(), g.n_objects, 100.0 * g.success_rate, mean);
    }
    std::cout << "records and reports in " << a.out.string() << '\n';
}

void cmd_report(const ReportArgs& a) {
    const fs::path out = a.out.empty() ? a.in.parent_path() : a.out;
    fs::create_directories(out);
    const ms::ExperimentSummary summary = ms::summarize(ms::read_records(a.in));
    for (const fs::path& p : ms::emit_reports(summary, out)) std::cout << p.string() << '\n';
}

void cmd_serve(const ServeArgs& a) {
    ms::SessionOptions options;
    options.engine = ms::EngineConfig::from_env();
    options.seed = a.seed;
    options.heap_dir = a.heaps;
    options.records_path = a.records;
    ms::SessionServer server(options);
    server.bind(a.host, a.port);
    std::cout << "serving on http://" << a.host << ':' << a.port << std::endl;
    server.serve();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mechanical search bin simulator and benchmark harness"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate heap snapshots and a manifest");
    g->add_option("--n", gen.n, "Objects per heap");
    g->add_option("--count", gen.count, "Number of heaps");
    g->add_flag("--full", gen.full, "Generate 1000 heaps");
    g->add_option("--seed", gen.seed, "Base seed");
    g->add_option("--center-sigma", gen.center_sigma, "Heap center spread (m)");
    g->add_option("--offset-sigma", gen.offset_sigma, "Per-object drop spread (m)");
    g->add_option("--max-layer", gen.max_layer, "Highest resting layer");
    g->add_option("--out", gen.out, "Output directory");

    PlanArgs plan;
    auto* p = app.add_subcommand("plan", "Plan one action on a snapshot and print it");
    p->add_option("--scene", plan.scene, "Scene snapshot")->required()->check(CLI::ExistingFile);
    p->add_option("--goal", plan.goal, "Goal object id")->required();
    p->add_option("--primitive", plan.primitive, "parallel_jaw | suction | push")->required();
    p->add_option("--dump-masks", plan.dump_masks, "Write occupancy and per-object mask PNGs into this directory");

    RunArgs run;
    run.policies = {"largest-push"};
    auto* r = app.add_subcommand("run", "Run policies over a heap manifest");
    r->add_option("--heaps", run.heaps, "Heap manifest, or the directory holding manifest.json")->required()->check(CLI::ExistingPath);
    r->add_option("--policy", run.policies, "Comma-separated policy names")->delimiter(',');
    r->add_option("--out", run.out, "Output directory");
    r->add_option("--workers", run.workers, "Worker threads");
    r->add_option("--seed", run.seed, "Policy seed");
    r->add_option("--t-thresh", run.base.t_thresh, "Grasp threshold for the recognized target, and for every object without pushing");
    r->add_option("--t-high", run.base.t_high, "Grasp threshold for non-targets when pushing is enabled");
    r->add_option("--recognition-threshold", run.base.recognition_visibility_threshold, "Target visibility needed for recognition");
    r->add_option("--push-cap", run.base.push_consecutive_cap, "Consecutive pushes allowed");
    r->add_option("--timestep-factor", run.base.timestep_factor, "Steps allowed per initial object");
    r->add_flag("--global-argmax", run.global_argmax, "Execute the best threshold-clearing grasp over the whole priority list");
    r->add_flag("--first-fit", run.first_fit, "Execute the first threshold-clearing grasp in priority order (default)");

    ReportArgs report;
    auto* rep = app.add_subcommand("report", "Summarize a records file");
    rep->add_option("--in", report.in, "records.jsonl")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", report.out, "Output directory (defaults to the records directory)");

    ServeArgs serve;
    auto* s = app.add_subcommand("serve", "Serve supervisor sessions over HTTP");
    s->add_option("--host", serve.host, "Bind address");
    s->add_option("--port", serve.port, "Port");
    s->add_option("--heaps", serve.heaps, "Heap directory")->check(CLI::ExistingDirectory);
    s->add_option("--records", serve.records, "Append finished rollouts to this JSONL file");
    s->add_option("--seed", serve.seed, "Default physics seed");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*g) cmd_gen(gen);
        if (*p) cmd_plan(plan);
        if (*r) cmd_run(run);
        if (*rep) cmd_report(report);
        if (*s) cmd_serve(serve);
    } catch (const ms::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
