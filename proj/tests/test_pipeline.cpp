#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "forgesim/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace forgesim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    TempDir() {
        static std::atomic<int> counter{0};
        path = fs::temp_directory_path() /
               ("forgesim_pipe_" + std::to_string(::getpid()) + "_" + std::to_string(++counter));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path path;
};

void write_fixture_inputs(const fs::path& dir) {
    // 3-creator metadata table.
    std::ofstream meta(dir / "metadata.csv");
    meta << "record_id,creator_id,method_id,target_id\n";
    for (int i = 0; i < 24; ++i) {
        meta << "r" << i << ",c" << (i % 3 + 1) << ",m" << (i % 4) << ",t" << (i % 5) << "\n";
    }
    meta.close();

    Json toolbox;
    toolbox["operators"] = Json::array({
        Json{{"op_id", "face_swap"},
             {"category", "IdentityManipulation"},
             {"params", Json::array({Json{{"name", "blend"}, {"min", 0.0}, {"max", 1.0}}})}},
        Json{{"op_id", "age_edit"},
             {"category", "AttributeExpressionEditing"},
             {"params", Json::array({Json{{"name", "delta"}, {"min", -10.0}, {"max", 10.0}}})}},
        Json{{"op_id", "style_blend"},
             {"category", "StyleBasedSynthesis"},
             {"params", Json::array({Json{{"name", "strength"}, {"min", 0.0}, {"max", 1.0}}})}},
    });
    std::ofstream tb(dir / "toolbox.json");
    tb << toolbox.dump(2) << "\n";
}

RunConfig fixture_config(const fs::path& dir, std::uint64_t n_forged = 12,
                         std::uint64_t m_real = 5) {
    write_fixture_inputs(dir);
    RunConfig cfg;
    cfg.seed = 4242;
    cfg.metadata_path = (dir / "metadata.csv").string();
    cfg.toolbox_path = (dir / "toolbox.json").string();
    cfg.target_real = m_real;
    cfg.target_forged = n_forged;
    cfg.reflection_period = 5;
    cfg.output_dir = (dir / "out").string();
    cfg.ars.n_warmup = 5;
    cfg.ars.tau_warmup = Rational(1, 10);
    return cfg;
}

std::string file_bytes(const std::string& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("run config round-trips and digests are stable") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path);
    const Json doc = cfg.to_json();
    const RunConfig restored = RunConfig::from_json(doc);
    CHECK(restored.to_json().dump() == doc.dump());
    CHECK(restored.digest() == cfg.digest());

    RunConfig changed = cfg;
    changed.seed = 1;
    CHECK(changed.digest() != cfg.digest());

    CHECK_THROWS_AS(RunConfig::from_json(Json{{"phase2_threads", 0}}), ConfigError);
    Json both = doc;
    both["agents"] = Json{{"profiles", "a"}, {"metadata", "b"}};
    CHECK_THROWS_AS(RunConfig::from_json(both), ConfigError);
}

TEST_CASE("phase 1 reaches the target and replays byte-identically") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 12);
    {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        const auto result = pipeline.run_phase1();
        CHECK(result.blueprints.size() == 12);
        CHECK(result.stats.accepted == 12);
        CHECK(result.stats.iterations >= 12);
        for (const auto& bp : result.blueprints) {
            CHECK(bp.y == 1);
            CHECK((bp.delta_prime == 0 || bp.delta_prime == 1));
            CHECK(bp.fused > bp.tau_accept);  // strict exceed at acceptance
            CHECK(bp.fused == fuse_score(bp.s_llm, bp.s_disc, cfg.ars));
        }
    }
    const std::string first_blueprints = file_bytes(cfg.paths().blueprints());
    const std::string first_memory = file_bytes(cfg.paths().memory_log());
    const std::string first_trace = file_bytes(cfg.paths().ars_trace());
    const std::string first_reflections = file_bytes(cfg.paths().reflections());
    {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        (void)pipeline.run_phase1();
    }
    CHECK(file_bytes(cfg.paths().blueprints()) == first_blueprints);
    CHECK(file_bytes(cfg.paths().memory_log()) == first_memory);
    CHECK(file_bytes(cfg.paths().ars_trace()) == first_trace);
    CHECK(file_bytes(cfg.paths().reflections()) == first_reflections);
}

TEST_CASE("every attempt is logged; reflections fire on the configured cadence") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 10);
    cfg.reflection_period = 5;
    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto result = pipeline.run_phase1();

    // One factual record per attempt.
    std::uint64_t factual = 0;
    for_each_line(cfg.paths().memory_log(), [&](std::size_t, const std::string& line) {
        if (parse_json(line, "mem")["kind"] == "Factual") ++factual;
    });
    CHECK(factual == result.stats.iterations);

    // 3 agents, reflections at every 5th tick for agents with records.
    // Round-robin scheduling guarantees all 3 have records by tick 3.
    std::uint64_t reflection_count = 0;
    for_each_line(cfg.paths().reflections(), [&](std::size_t, const std::string& line) {
        const auto doc = parse_json(line, "refl");
        CHECK(doc.at("produced_at").get<std::uint64_t>() % 5 == 0);
        ++reflection_count;
    });
    CHECK(reflection_count == (result.stats.iterations / 5) * 3);

    // Trace has one row per attempt plus header.
    std::uint64_t trace_rows = 0;
    for_each_line(cfg.paths().ars_trace(),
                  [&](std::size_t, const std::string&) { ++trace_rows; });
    CHECK(trace_rows == 1 + result.stats.iterations);
}

TEST_CASE("a 15-iteration run with R=5 yields 3 reflections per agent") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 1000);  // unreachable target
    cfg.reflection_period = 5;
    cfg.iteration_cap = 15;
    Pipeline pipeline(cfg, make_backends(cfg, true));
    try {
        (void)pipeline.run_phase1();
        FAIL("expected IterationCapError");
    } catch (const IterationCapError& e) {
        CHECK(e.attempts == 15);
    }
    std::map<std::string, int> per_agent;
    std::set<std::uint64_t> ticks;
    for_each_line(cfg.paths().reflections(), [&](std::size_t, const std::string& line) {
        const auto doc = parse_json(line, "refl");
        ++per_agent[doc.at("agent_id").get<std::string>()];
        ticks.insert(doc.at("produced_at").get<std::uint64_t>());
    });
    REQUIRE(per_agent.size() == 3);
    for (const auto& [agent, count] : per_agent) CHECK(count == 3);
    CHECK(ticks == std::set<std::uint64_t>{5, 10, 15});
}

TEST_CASE("impassable warm-up threshold caps out with zero acceptances") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 5);
    cfg.ars.tau_warmup = Rational(1);  // strict > 1 never fires
    cfg.ars.n_warmup = 1000;
    cfg.iteration_cap = 100;
    Pipeline pipeline(cfg, make_backends(cfg, true));
    try {
        (void)pipeline.run_phase1();
        FAIL("expected IterationCapError");
    } catch (const IterationCapError& e) {
        CHECK(e.attempts == 100);
        CHECK(e.accepted == 0);
    }
}

TEST_CASE("checkpoint at the midpoint resumes into identical artifacts") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 14);

    // Uninterrupted reference run.
    {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        (void)pipeline.run_phase1();
    }
    const std::string ref_blueprints = file_bytes(cfg.paths().blueprints());
    const std::string ref_memory = file_bytes(cfg.paths().memory_log());
    const std::string ref_trace = file_bytes(cfg.paths().ars_trace());
    const std::string ref_reflections = file_bytes(cfg.paths().reflections());

    // Halted run + resume.
    {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        pipeline.set_halt_after(10);
        const auto partial = pipeline.run_phase1();
        CHECK(partial.stats.halted);
        CHECK(fs::exists(cfg.paths().checkpoint()));
    }
    CHECK(file_bytes(cfg.paths().blueprints()) != ref_blueprints);
    {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        const auto resumed = pipeline.resume_phase1(cfg.paths().checkpoint());
        CHECK(resumed.blueprints.size() == 14);
    }
    CHECK(file_bytes(cfg.paths().blueprints()) == ref_blueprints);
    CHECK(file_bytes(cfg.paths().memory_log()) == ref_memory);
    CHECK(file_bytes(cfg.paths().ars_trace()) == ref_trace);
    CHECK(file_bytes(cfg.paths().reflections()) == ref_reflections);
}

TEST_CASE("checkpoint of a fresh halt resumes into the full run") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 6);
    {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        (void)pipeline.run_phase1();
    }
    const std::string reference = file_bytes(cfg.paths().blueprints());
    {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        pipeline.set_halt_after(1);
        (void)pipeline.run_phase1();
    }
    {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        (void)pipeline.resume_phase1(cfg.paths().checkpoint());
    }
    CHECK(file_bytes(cfg.paths().blueprints()) == reference);
}

TEST_CASE("tampered checkpoints are rejected") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 8);
    Pipeline pipeline(cfg, make_backends(cfg, true));
    pipeline.set_halt_after(4);
    (void)pipeline.run_phase1();

    std::string bytes = file_bytes(cfg.paths().checkpoint());
    const auto pos = bytes.find("\"tick\":4");
    REQUIRE(pos != std::string::npos);
    bytes.replace(pos, 8, "\"tick\":5");
    write_text_file(cfg.paths().checkpoint(), bytes);

    Pipeline fresh(cfg, make_backends(cfg, true));
    CHECK_THROWS_AS(fresh.resume_phase1(cfg.paths().checkpoint()), CorruptCheckpointError);

    // A different config must also be refused.
    RunConfig other = cfg;
    other.seed = 777;
    Pipeline wrong(other, make_backends(other, true));
    {
        Pipeline again(cfg, make_backends(cfg, true));
        again.set_halt_after(4);
        (void)again.run_phase1();
    }
    CHECK_THROWS_AS(wrong.resume_phase1(cfg.paths().checkpoint()), ConfigError);
}

TEST_CASE("phase 2: one trajectory per blueprint with exact event counts") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 8);
    cfg.social.rounds = 2;
    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto phase1 = pipeline.run_phase1();
    const auto phase2 = pipeline.run_phase2(phase1.blueprints);

    REQUIRE(phase2.trajectories.size() == 8);
    for (const auto& trajectory : phase2.trajectories)
        CHECK(trajectory.events.size() == 2 * 6);

    // Every forged blueprint gets an auditor hard negative (y=1 -> delta=0).
    std::map<std::string, bool> negative_per_blueprint;
    for (const auto& sample : phase2.samples) {
        if (sample.provenance.role && *sample.provenance.role == "Auditor") {
            CHECK(sample.delta == 0);
            CHECK(sample.mismatch_flag == 1);
            // trajectory_event_ref is "ev-<blueprint_id>-rNN-sNN".
            const std::string& ref = *sample.provenance.trajectory_event_ref;
            negative_per_blueprint[ref.substr(3, ref.find("-r", 3) - 3)] = true;
        }
    }
    CHECK(negative_per_blueprint.size() == 8);

    CHECK_THROWS_AS(pipeline.run_phase2({}), InsufficientDataError);
}

TEST_CASE("phase 2 parallel execution matches serial output") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 10);
    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto phase1 = pipeline.run_phase1();

    const auto serial = pipeline.run_phase2(phase1.blueprints);
    RunConfig parallel_cfg = cfg;
    parallel_cfg.phase2_threads = 4;
    Pipeline parallel(parallel_cfg, make_backends(parallel_cfg, true));
    const auto parallel_result = parallel.run_phase2(phase1.blueprints);

    REQUIRE(serial.samples.size() == parallel_result.samples.size());
    for (std::size_t i = 0; i < serial.samples.size(); ++i)
        CHECK(serial.samples[i].to_json().dump() == parallel_result.samples[i].to_json().dump());
}

TEST_CASE("emit: header counts match tallies; real samples are well-formed") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 10, 7);
    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto phase1 = pipeline.run_phase1();
    const auto phase2 = pipeline.run_phase2(phase1.blueprints);
    const auto manifest = pipeline.emit(phase1.blueprints, phase2.samples);

    CHECK(manifest.header.m_real == 7);
    CHECK(manifest.header.n_forged == 10);
    CHECK(manifest.header.total_samples == manifest.samples.size());

    const auto reloaded = load_manifest(cfg.paths().manifest());
    const auto tallies = recount(reloaded.samples);
    CHECK(tallies.m_real == manifest.header.m_real);
    CHECK(tallies.n_forged == manifest.header.n_forged);
    CHECK(tallies.n_interaction == manifest.header.n_interaction);
    CHECK(tallies.total_samples == manifest.header.total_samples);

    for (const auto& sample : reloaded.samples) {
        if (sample.y == 0) {
            CHECK(sample.delta == 1);
            CHECK(sample.provenance.chain_summary.empty());
            CHECK(!sample.text.empty());
        }
    }

    // Samples are sorted by id.
    for (std::size_t i = 1; i < reloaded.samples.size(); ++i)
        CHECK(reloaded.samples[i - 1].sample_id < reloaded.samples[i].sample_id);
}

TEST_CASE("emit without socialize falls back to blueprint-own samples") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 6, 3);
    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto phase1 = pipeline.run_phase1();
    const auto manifest = pipeline.emit(phase1.blueprints, {});
    CHECK(manifest.header.m_real == 3);
    CHECK(manifest.header.n_forged == 6);
    CHECK(manifest.header.n_interaction == 0);
    CHECK(manifest.samples.size() == 9);
}

TEST_CASE("empty run emits a header-only manifest") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 0, 0);
    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto phase1 = pipeline.run_phase1();
    CHECK(phase1.blueprints.empty());
    const auto manifest = pipeline.emit(phase1.blueprints, {});
    CHECK(manifest.header.m_real == 0);
    CHECK(manifest.header.n_forged == 0);
    CHECK(manifest.samples.empty());

    const auto reloaded = load_manifest(cfg.paths().manifest());
    CHECK(reloaded.samples.empty());
}

TEST_CASE("manifests from identical seeded runs are byte-identical") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 10, 4);
    auto run_all = [&] {
        Pipeline pipeline(cfg, make_backends(cfg, true));
        const auto phase1 = pipeline.run_phase1();
        const auto phase2 = pipeline.run_phase2(phase1.blueprints);
        (void)pipeline.emit(phase1.blueprints, phase2.samples);
        return file_bytes(cfg.paths().manifest());
    };
    CHECK(run_all() == run_all());
}

TEST_CASE("misleading and accurate intents both appear at the default ratio") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 12);
    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto result = pipeline.run_phase1();
    int zeros = 0;
    int ones = 0;
    for (const auto& bp : result.blueprints) (bp.delta_prime == 0 ? zeros : ones)++;
    CHECK(zeros > 0);
    CHECK(ones > 0);
}

TEST_CASE("real image pool comes from a file when configured") {
    TempDir tmp;
    RunConfig cfg = fixture_config(tmp.path, 2, 2);
    std::ofstream refs(tmp.path / "refs.txt");
    refs << "assets/one.png\nassets/two.png\nassets/three.png\n";
    refs.close();
    cfg.real_images_path = (tmp.path / "refs.txt").string();

    Pipeline pipeline(cfg, make_backends(cfg, true));
    const auto pool = pipeline.real_image_pool();
    REQUIRE(pool.size() == 3);
    CHECK(pool[0] == "assets/one.png");

    RunConfig starved = cfg;
    starved.target_real = 9;
    Pipeline hungry(starved, make_backends(starved, true));
    const auto phase1 = hungry.run_phase1();
    CHECK_THROWS_AS(hungry.emit(phase1.blueprints, {}), ConfigError);
}
