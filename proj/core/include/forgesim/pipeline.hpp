#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forgesim/actions.hpp"
#include "forgesim/ars.hpp"
#include "forgesim/backends.hpp"
#include "forgesim/dataset.hpp"
#include "forgesim/memory.hpp"
#include "forgesim/profile.hpp"
#include "forgesim/social.hpp"

namespace forgesim {

// Fixed artifact layout under the run's output directory.
struct RunPaths {
    std::string dir;
    std::string blueprints() const { return dir + "/blueprints.jsonl"; }
    std::string memory_log() const { return dir + "/memory.jsonl"; }
    std::string reflections() const { return dir + "/reflections.jsonl"; }
    std::string ars_trace() const { return dir + "/ars_trace.csv"; }
    std::string trajectories() const { return dir + "/trajectories.jsonl"; }
    std::string samples() const { return dir + "/samples.jsonl"; }
    std::string manifest() const { return dir + "/manifest.jsonl"; }
    std::string checkpoint() const { return dir + "/checkpoint.json"; }
    std::string profiles() const { return dir + "/profiles.jsonl"; }
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::string profiles_path;  // exactly one of profiles_path/metadata_path
    std::string metadata_path;
    std::string toolbox_path;
    ArsConfig ars;
    SocialConfig social = SocialConfig::defaults();
    std::uint64_t target_real = 0;    // M
    std::uint64_t target_forged = 0;  // N
    std::uint64_t reflection_period = 5;
    Rational misleading_prob{1, 2};
    ChainLengthDist chain_lengths;
    ToolWeightPolicy tool_weights = ToolWeightPolicy::defaults();
    std::uint64_t style_sample_size = 3;
    std::string real_images_path;  // optional; refs synthesized when empty
    std::uint64_t iteration_cap = 0;  // 0 -> 50 * target_forged
    bool deterministic = true;
    std::uint64_t checkpoint_every = 0;  // ticks; 0 disables
    std::string output_dir = "out";
    std::map<std::string, BackendConfig> backend_endpoints;  // empty -> stubs
    std::uint32_t phase2_threads = 1;
    std::uint64_t self_score_context = 3;  // evaluative records fed to SelfScore

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json(const Json& doc);
    Json to_json() const;
    std::string digest() const;  // fnv64 of the canonical serialization
    RunPaths paths() const { return RunPaths{output_dir}; }
    std::uint64_t effective_cap() const {
        return iteration_cap ? iteration_cap : 50 * target_forged;
    }
    void validate() const;
};

/// Build the run's backends: HTTP clients when endpoints are configured,
/// seeded stubs otherwise (or when force_stubs is set). auth_token comes from
/// the FORGESIM_AUTH_TOKEN environment variable, never from the config file.
BackendSet make_backends(const RunConfig& cfg, bool force_stubs, CallLogSink log = nullptr);

struct Phase1Stats {
    std::uint64_t iterations = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    bool halted = false;  // stopped early at halt_after_tick
};

struct Phase1Result {
    std::vector<ForgeryBlueprint> blueprints;
    ArsState ars;
    Phase1Stats stats;
};

struct Phase2Result {
    std::vector<SocialTrajectory> trajectories;
    std::vector<DatasetSample> samples;
};

// Mid-run phase-1 snapshot. The memory/blueprint/reflection/trace files plus
// this state fully determine the remainder of the run in deterministic mode.
struct Checkpoint {
    std::string config_digest;
    std::uint64_t tick = 0;
    std::uint64_t rng_state = 0;
    ArsState ars;
    std::map<std::string, std::uint64_t> memory_offsets;
    std::uint64_t reflections_emitted = 0;
    std::uint64_t blueprints_emitted = 0;
    std::uint64_t trace_rows = 0;

    void save(const std::string& path) const;
    /// Verifies the embedded content digest; throws CorruptCheckpointError.
    static Checkpoint load(const std::string& path);
};

/// Orchestrates the two phases and manifest emission against pluggable
/// backends, writing every artifact under cfg.output_dir.
class Pipeline {
public:
    Pipeline(RunConfig cfg, BackendSet backends);

    /// Test/ops hook: stop after this tick and write a checkpoint. The flag
    /// is runtime-only so it does not perturb the config digest.
    void set_halt_after(std::uint64_t tick) { halt_after_tick_ = tick; }

    /// Generate -> score -> gate -> memory-update loop until target_forged
    /// acceptances. Throws IterationCapError when the cap is hit first.
    Phase1Result run_phase1();
    Phase1Result resume_phase1(const std::string& checkpoint_path);

    /// One trajectory per blueprint plus its labeled sample pairs.
    /// Throws InsufficientDataError on an empty blueprint list.
    Phase2Result run_phase2(const std::vector<ForgeryBlueprint>& blueprints);

    /// Combine real samples (captioned via the cognition backend) with the
    /// provided forged/interaction samples, sort by sample_id, and write the
    /// manifest. With an empty samples list the blueprint-own samples are
    /// synthesized so `generate` + `emit` works without `socialize`.
    DatasetManifest emit(const std::vector<ForgeryBlueprint>& blueprints,
                         const std::vector<DatasetSample>& social_samples);

    const MemoryStore& memory() const { return memory_; }
    const RunConfig& config() const { return cfg_; }

    std::vector<AgentProfile> load_agents() const;
    std::vector<std::string> real_image_pool() const;

private:
    Phase1Result run_phase1_impl(std::optional<Checkpoint> resume_from);
    void write_memory(const std::string& agent_id, MemoryKind kind, Json payload,
                      std::uint64_t tick);
    Checkpoint snapshot(std::uint64_t tick) const;

    RunConfig cfg_;
    BackendSet backends_;
    MemoryStore memory_;
    Rng rng_;
    BlueprintAssembler assembler_;
    std::uint64_t halt_after_tick_ = 0;

    // Incremental sinks, live during run_phase1.
    JsonlWriter blueprint_sink_;
    JsonlWriter memory_sink_;
    JsonlWriter reflection_sink_;
    JsonlWriter trace_sink_;
    std::uint64_t memory_lines_ = 0;
    std::uint64_t reflection_lines_ = 0;
    std::uint64_t blueprint_lines_ = 0;
    std::uint64_t trace_lines_ = 0;
};

}  // namespace forgesim
