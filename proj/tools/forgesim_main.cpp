// forgesim: agent-based forgery-simulation dataset generator.
//
// Subcommands compose through on-disk artifacts: profile-extract writes
// profiles, generate writes blueprints (+ memory/trace/checkpoint), socialize
// writes trajectories and samples, emit writes the manifest, stats reports on
// a manifest. `generate` then `socialize` then `emit` equals one combined run.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "forgesim/pipeline.hpp"

namespace {

using namespace forgesim;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;  // CLI11 parse errors
constexpr int kExitInput = 2;
constexpr int kExitBackend = 3;
constexpr int kExitIterationCap = 4;

int run_profile_extract(const std::string& metadata_path, const std::string& out_path,
                        std::uint64_t seed, std::uint64_t style_sample, bool stub_backends,
                        const std::string& backend_config_path) {
    RunConfig cfg;
    cfg.seed = seed;
    if (!backend_config_path.empty()) {
        const Json doc = parse_json(read_text_file(backend_config_path), backend_config_path);
        RunConfig parsed = RunConfig::from_json(doc);
        cfg.backend_endpoints = parsed.backend_endpoints;
    }
    const auto backends = make_backends(cfg, stub_backends || cfg.backend_endpoints.empty());

    const auto records = load_metadata_table(metadata_path);
    ProfileConfig pc;
    pc.style_sample_size = style_sample;
    pc.rng_seed = seed;
    const auto profiles = build_all_profiles(records, pc, *backends.cognition);
    save_profiles(profiles, out_path);
    std::cout << "profile-extract: wrote " << profiles.size() << " profiles to " << out_path
              << "\n";
    return kExitOk;
}

int run_generate(const RunConfig& cfg, bool stub_backends, const std::string& resume_path,
                 std::uint64_t halt_after) {
    Pipeline pipeline(cfg, make_backends(cfg, stub_backends));
    if (halt_after) pipeline.set_halt_after(halt_after);
    const Phase1Result result = resume_path.empty() ? pipeline.run_phase1()
                                                    : pipeline.resume_phase1(resume_path);
    if (result.stats.halted) {
        std::cout << "generate: halted at tick " << result.stats.iterations << " with "
                  << result.blueprints.size() << " blueprints; checkpoint written to "
                  << cfg.paths().checkpoint() << "\n";
        return kExitOk;
    }
    std::cout << "generate: accepted " << result.blueprints.size() << " blueprints in "
              << result.stats.iterations << " iterations -> " << cfg.paths().blueprints() << "\n";
    return kExitOk;
}

int run_socialize(const RunConfig& cfg, bool stub_backends) {
    Pipeline pipeline(cfg, make_backends(cfg, stub_backends));
    const auto blueprints = load_blueprints(cfg.paths().blueprints());
    const auto result = pipeline.run_phase2(blueprints);
    std::cout << "socialize: " << result.trajectories.size() << " trajectories, "
              << result.samples.size() << " samples -> " << cfg.paths().samples() << "\n";
    return kExitOk;
}

int run_emit(const RunConfig& cfg, bool stub_backends) {
    Pipeline pipeline(cfg, make_backends(cfg, stub_backends));
    std::vector<ForgeryBlueprint> blueprints;
    if (std::ifstream probe(cfg.paths().blueprints()); probe.good())
        blueprints = load_blueprints(cfg.paths().blueprints());
    std::vector<DatasetSample> samples;
    if (std::ifstream probe(cfg.paths().samples()); probe.good()) {
        for_each_line(cfg.paths().samples(), [&](std::size_t lineno, const std::string& line) {
            samples.push_back(DatasetSample::from_json(
                parse_json(line, cfg.paths().samples() + ":" + std::to_string(lineno))));
        });
    }
    const auto manifest = pipeline.emit(blueprints, samples);
    std::cout << "emit: " << manifest.header.total_samples << " samples (m_real="
              << manifest.header.m_real << ", n_forged=" << manifest.header.n_forged
              << ", n_interaction=" << manifest.header.n_interaction << ") -> "
              << cfg.paths().manifest() << "\n";
    return kExitOk;
}

struct TraceSummary {
    std::uint64_t rows = 0;
    std::uint64_t accepts = 0;
    std::string final_tau;
};

TraceSummary read_trace(const std::string& path) {
    TraceSummary summary;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        if (lineno == 1) return;  // header
        ++summary.rows;
        const auto first = line.find(',');
        const auto second = line.find(',', first + 1);
        const auto third = line.find(',', second + 1);
        if (first == std::string::npos || second == std::string::npos ||
            third == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad trace row");
        summary.final_tau = line.substr(second + 1, third - second - 1);
        if (line.substr(third + 1) == "Accept") ++summary.accepts;
    });
    return summary;
}

int run_stats(const std::string& manifest_path, const std::string& trace_path,
              const std::string& format) {
    const auto manifest = load_manifest(manifest_path);
    const auto stats = compute_stats(manifest);

    const bool csv = format == "csv";
    auto row = [&](const std::string& key, const std::string& value) {
        if (csv)
            std::cout << key << "," << value << "\n";
        else
            std::cout << "  " << key << ": " << value << "\n";
    };

    if (!csv) std::cout << "manifest " << manifest_path << "\n";
    row("m_real", std::to_string(stats.m_real));
    row("n_forged", std::to_string(stats.n_forged));
    row("n_interaction", std::to_string(stats.n_interaction));
    row("total", std::to_string(stats.total));
    row("delta_0", std::to_string(stats.delta_zero));
    row("delta_1", std::to_string(stats.delta_one));
    for (const auto& [role, count] : stats.per_role_events)
        row("role_" + role, std::to_string(count));

    if (stats.m_real != manifest.header.m_real || stats.n_forged != manifest.header.n_forged ||
        stats.n_interaction != manifest.header.n_interaction ||
        stats.total != manifest.header.total_samples) {
        std::cerr << "stats: header counts disagree with recomputed tallies\n";
        return kExitInput;
    }

    if (!trace_path.empty()) {
        const auto trace = read_trace(trace_path);
        row("ars_evaluations", std::to_string(trace.rows));
        row("ars_accepts", std::to_string(trace.accepts));
        char rate[32];
        std::snprintf(rate, sizeof(rate), "%.6f",
                      trace.rows ? static_cast<double>(trace.accepts) /
                                       static_cast<double>(trace.rows)
                                 : 0.0);
        row("ars_acceptance_rate", rate);
        row("ars_final_tau", trace.final_tau);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forgesim: profiled forgery agents, an adaptive quality gate, and a "
                 "multi-role social simulation emitting consistency-labeled dataset manifests"};
    app.require_subcommand(1);

    // profile-extract
    std::string metadata_path;
    std::string profiles_out;
    std::uint64_t pe_seed = 0;
    std::uint64_t style_sample = 3;
    bool pe_stubs = false;
    std::string pe_backend_config;
    auto* profile_cmd =
        app.add_subcommand("profile-extract", "Compute agent profiles from a metadata table");
    profile_cmd->add_option("--metadata", metadata_path, "metadata table (CSV or JSONL)")
        ->required();
    profile_cmd->add_option("--out", profiles_out, "output profiles JSONL")->required();
    profile_cmd->add_option("--seed", pe_seed, "sampling seed");
    profile_cmd->add_option("--style-sample", style_sample,
                            "records sent to the cognition backend per creator (L)");
    profile_cmd->add_flag("--stub-backends", pe_stubs, "force deterministic stub backends");
    profile_cmd->add_option("--backend-config", pe_backend_config,
                            "run config supplying backend endpoints");

    // generate / socialize / emit
    std::string config_path;
    std::string resume_path;
    std::uint64_t halt_after = 0;
    bool stubs = false;
    auto* generate_cmd = app.add_subcommand("generate", "Run phase 1: blueprint generation");
    auto* socialize_cmd =
        app.add_subcommand("socialize", "Run phase 2: social trajectories and samples");
    auto* emit_cmd = app.add_subcommand("emit", "Combine artifacts into the dataset manifest");
    for (auto* cmd : {generate_cmd, socialize_cmd, emit_cmd}) {
        cmd->add_option("--config", config_path, "run config JSON")->required();
        cmd->add_flag("--stub-backends", stubs, "force deterministic stub backends");
    }
    generate_cmd->add_option("--resume", resume_path, "resume from a checkpoint file");
    generate_cmd->add_option("--halt-after", halt_after,
                             "stop after this tick and write a checkpoint");

    // stats
    std::string manifest_path;
    std::string trace_path;
    std::string format = "text";
    auto* stats_cmd = app.add_subcommand("stats", "Report manifest and gate statistics");
    stats_cmd->add_option("--manifest", manifest_path, "manifest JSONL")->required();
    stats_cmd->add_option("--ars-trace", trace_path, "ARS trace CSV");
    stats_cmd->add_option("--format", format, "output format: text or csv")
        ->check(CLI::IsMember({"text", "csv"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (profile_cmd->parsed())
            return run_profile_extract(metadata_path, profiles_out, pe_seed, style_sample,
                                       pe_stubs, pe_backend_config);
        if (stats_cmd->parsed()) return run_stats(manifest_path, trace_path, format);
        const RunConfig cfg = RunConfig::from_file(config_path);
        if (generate_cmd->parsed()) return run_generate(cfg, stubs, resume_path, halt_after);
        if (socialize_cmd->parsed()) return run_socialize(cfg, stubs);
        if (emit_cmd->parsed()) return run_emit(cfg, stubs);
    } catch (const IterationCapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << "attempts=" << e.attempts << " accepted=" << e.accepted << "\n";
        return kExitIterationCap;
    } catch (const BackendError& e) {
        std::cerr << "backend error (" << to_string(e.kind) << ", attempts=" << e.attempts
                  << "): " << e.what() << "\n";
        return kExitBackend;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitUsage;
}
