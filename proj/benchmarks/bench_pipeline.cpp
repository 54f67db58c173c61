#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>

#include "forgesim/pipeline.hpp"

using namespace forgesim;
namespace fs = std::filesystem;

namespace {

// Self-contained fixture under a temp dir; built once per process.
RunConfig bench_config() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "forgesim_bench";
        fs::create_directories(d);
        std::ofstream meta(d / "metadata.csv");
        meta << "record_id,creator_id,method_id,target_id\n";
        for (int i = 0; i < 60; ++i)
            meta << "r" << i << ",c" << (i % 4) << ",m" << (i % 5) << ",t" << (i % 7) << "\n";
        meta.close();
        Json toolbox;
        toolbox["operators"] = Json::array({
            Json{{"op_id", "face_swap"},
                 {"category", "IdentityManipulation"},
                 {"params", Json::array({Json{{"name", "blend"}, {"min", 0.0}, {"max", 1.0}}})}},
            Json{{"op_id", "age_edit"}, {"category", "AttributeExpressionEditing"}},
            Json{{"op_id", "style_blend"}, {"category", "StyleBasedSynthesis"}},
        });
        write_text_file((d / "toolbox.json").string(), toolbox.dump() + "\n");
        return d;
    }();

    RunConfig cfg;
    cfg.seed = 7;
    cfg.metadata_path = (dir / "metadata.csv").string();
    cfg.toolbox_path = (dir / "toolbox.json").string();
    cfg.output_dir = (dir / "out").string();
    cfg.ars.n_warmup = 20;
    cfg.ars.tau_warmup = Rational(1, 10);
    cfg.ars.q = Rational(1, 10);
    return cfg;
}

}  // namespace

static void Phase1Generate(benchmark::State& state) {
    RunConfig cfg = bench_config();
    cfg.target_forged = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        const auto result = pipeline.run_phase1();
        benchmark::DoNotOptimize(result.blueprints.size());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(Phase1Generate)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void Phase2Trajectories(benchmark::State& state) {
    RunConfig cfg = bench_config();
    cfg.target_forged = static_cast<std::uint64_t>(state.range(0));
    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto phase1 = pipeline.run_phase1();
    for (auto _ : state) {
        const auto phase2 = pipeline.run_phase2(phase1.blueprints);
        benchmark::DoNotOptimize(phase2.samples.size());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(Phase2Trajectories)->Arg(50)->Unit(benchmark::kMillisecond);

static void EmitManifest(benchmark::State& state) {
    RunConfig cfg = bench_config();
    cfg.target_forged = 100;
    cfg.target_real = 100;
    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto phase1 = pipeline.run_phase1();
    const auto phase2 = pipeline.run_phase2(phase1.blueprints);
    for (auto _ : state) {
        const auto manifest = pipeline.emit(phase1.blueprints, phase2.samples);
        benchmark::DoNotOptimize(manifest.samples.size());
    }
}
BENCHMARK(EmitManifest)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
