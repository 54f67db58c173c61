#include "forgesim/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>

namespace forgesim {

namespace {

constexpr const char* kEngineVersion = "forgesim 0.1.0";

Json chain_lengths_to_json(const ChainLengthDist& lengths) {
    Json doc;
    for (const auto& [len, w] : lengths.weights) doc[std::to_string(len)] = w;
    return doc;
}

ChainLengthDist chain_lengths_from_json(const Json& doc) {
    ChainLengthDist lengths;
    lengths.weights.clear();
    for (const auto& [key, w] : doc.items()) {
        const int len = std::stoi(key);
        if (len <= 0) throw ConfigError("chain_length_weights: lengths must be >= 1");
        lengths.weights[static_cast<std::uint32_t>(len)] = w.get<double>();
    }
    if (lengths.weights.empty()) throw ConfigError("chain_length_weights: empty");
    return lengths;
}

Json tool_weights_to_json(const ToolWeightPolicy& policy) {
    Json doc;
    Json base;
    for (const auto& [category, w] : policy.base_weights) base[to_string(category)] = w;
    doc["base"] = std::move(base);
    Json lexicon;
    for (const auto& [category, words] : policy.lexicon) {
        Json list = Json::array();
        for (const auto& word : words) list.push_back(word);
        lexicon[to_string(category)] = std::move(list);
    }
    doc["lexicon"] = std::move(lexicon);
    if (policy.median_diversity)
        doc["median_diversity"] = *policy.median_diversity;
    else
        doc["median_diversity"] = nullptr;
    return doc;
}

ToolWeightPolicy tool_weights_from_json(const Json& doc) {
    ToolWeightPolicy policy = ToolWeightPolicy::defaults();
    if (doc.contains("base")) {
        for (const auto& [name, w] : doc["base"].items())
            policy.base_weights[tool_category_from_string(name)] = w.get<double>();
    }
    if (doc.contains("lexicon")) {
        for (const auto& [name, words] : doc["lexicon"].items()) {
            std::vector<std::string> list;
            for (const auto& word : words) list.push_back(word.get<std::string>());
            policy.lexicon[tool_category_from_string(name)] = std::move(list);
        }
    }
    if (doc.contains("median_diversity") && !doc["median_diversity"].is_null())
        policy.median_diversity = doc["median_diversity"].get<std::uint64_t>();
    return policy;
}

Json backend_config_to_json(const BackendConfig& cfg) {
    Json doc;
    doc["endpoint_url"] = cfg.endpoint_url;
    doc["timeout_ms"] = cfg.timeout_ms;
    doc["max_retries"] = cfg.max_retries;
    doc["retry_backoff_ms"] = cfg.retry_backoff_ms;
    return doc;
}

BackendConfig backend_config_from_json(const Json& doc) {
    BackendConfig cfg;
    cfg.endpoint_url = doc.at("endpoint_url").get<std::string>();
    cfg.timeout_ms = doc.value("timeout_ms", cfg.timeout_ms);
    cfg.max_retries = doc.value("max_retries", cfg.max_retries);
    cfg.retry_backoff_ms = doc.value("retry_backoff_ms", cfg.retry_backoff_ms);
    if (cfg.timeout_ms == 0) throw ConfigError("backend: timeout_ms must be >= 1");
    return cfg;
}

Rational ratio_field(const Json& doc, const char* key, const Rational& fallback) {
    if (!doc.contains(key)) return fallback;
    const Json& v = doc[key];
    if (v.is_string()) return Rational::parse(v.get<std::string>());
    if (v.is_number()) return Rational::from_double_quantized(v.get<double>());
    throw ConfigError(std::string(key) + " must be a number or string");
}

std::string padded_id(const char* prefix, std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%06llu", prefix, static_cast<unsigned long long>(index));
    return buf;
}

}  // namespace

RunConfig RunConfig::from_json(const Json& doc) {
    RunConfig cfg;
    cfg.seed = doc.value("seed", cfg.seed);
    if (doc.contains("agents")) {
        const Json& agents = doc["agents"];
        if (agents.contains("profiles")) cfg.profiles_path = agents["profiles"].get<std::string>();
        if (agents.contains("metadata")) cfg.metadata_path = agents["metadata"].get<std::string>();
    }
    cfg.toolbox_path = doc.value("toolbox", cfg.toolbox_path);
    if (doc.contains("targets")) {
        cfg.target_real = doc["targets"].value("real", cfg.target_real);
        cfg.target_forged = doc["targets"].value("forged", cfg.target_forged);
    }
    if (doc.contains("ars")) cfg.ars = ArsConfig::from_json(doc["ars"]);
    if (doc.contains("social")) cfg.social = SocialConfig::from_json(doc["social"]);
    cfg.reflection_period = doc.value("reflection_period", cfg.reflection_period);
    cfg.misleading_prob = ratio_field(doc, "misleading_prob", cfg.misleading_prob);
    if (doc.contains("chain_length_weights"))
        cfg.chain_lengths = chain_lengths_from_json(doc["chain_length_weights"]);
    if (doc.contains("tool_weights")) cfg.tool_weights = tool_weights_from_json(doc["tool_weights"]);
    cfg.style_sample_size = doc.value("style_sample_size", cfg.style_sample_size);
    if (doc.contains("real_images") && !doc["real_images"].is_null())
        cfg.real_images_path = doc["real_images"].get<std::string>();
    cfg.iteration_cap = doc.value("iteration_cap", cfg.iteration_cap);
    cfg.deterministic = doc.value("deterministic", cfg.deterministic);
    cfg.checkpoint_every = doc.value("checkpoint_every", cfg.checkpoint_every);
    cfg.output_dir = doc.value("output_dir", cfg.output_dir);
    if (doc.contains("backends") && !doc["backends"].is_null()) {
        for (const auto& [kind, entry] : doc["backends"].items()) {
            if (kind != "cognition" && kind != "detector" && kind != "edit")
                throw ConfigError("backends: unknown kind '" + kind + "'");
            cfg.backend_endpoints[kind] = backend_config_from_json(entry);
        }
    }
    cfg.phase2_threads = doc.value("phase2_threads", cfg.phase2_threads);
    cfg.self_score_context = doc.value("self_score_context", cfg.self_score_context);
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    try {
        return from_json(parse_json(read_text_file(path), path));
    } catch (const Json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

Json RunConfig::to_json() const {
    Json doc;
    doc["seed"] = seed;
    Json agents;
    if (!profiles_path.empty()) agents["profiles"] = profiles_path;
    if (!metadata_path.empty()) agents["metadata"] = metadata_path;
    doc["agents"] = std::move(agents);
    doc["toolbox"] = toolbox_path;
    Json targets;
    targets["real"] = target_real;
    targets["forged"] = target_forged;
    doc["targets"] = std::move(targets);
    doc["ars"] = ars.to_json();
    doc["social"] = social.to_json();
    doc["reflection_period"] = reflection_period;
    doc["misleading_prob"] = misleading_prob.to_string();
    doc["chain_length_weights"] = chain_lengths_to_json(chain_lengths);
    doc["tool_weights"] = tool_weights_to_json(tool_weights);
    doc["style_sample_size"] = style_sample_size;
    if (real_images_path.empty())
        doc["real_images"] = nullptr;
    else
        doc["real_images"] = real_images_path;
    doc["iteration_cap"] = iteration_cap;
    doc["deterministic"] = deterministic;
    doc["checkpoint_every"] = checkpoint_every;
    doc["output_dir"] = output_dir;
    Json backends_doc;
    for (const auto& [kind, entry] : backend_endpoints)
        backends_doc[kind] = backend_config_to_json(entry);
    doc["backends"] = std::move(backends_doc);
    doc["phase2_threads"] = phase2_threads;
    doc["self_score_context"] = self_score_context;
    return doc;
}

std::string RunConfig::digest() const { return to_hex(fnv1a64(to_json().dump())); }

void RunConfig::validate() const {
    ars.validate();
    social.validate();
    if (!profiles_path.empty() && !metadata_path.empty())
        throw ConfigError("agents: set either 'profiles' or 'metadata', not both");
    if (phase2_threads == 0) throw ConfigError("phase2_threads must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

BackendSet make_backends(const RunConfig& cfg, bool force_stubs, CallLogSink log) {
    if (force_stubs || cfg.backend_endpoints.empty()) return BackendSet::stubs(cfg.seed);

    std::optional<std::string> token;
    if (const char* env = std::getenv("FORGESIM_AUTH_TOKEN"); env && *env) token = env;

    auto config_for = [&](const char* kind) -> std::optional<BackendConfig> {
        const auto it = cfg.backend_endpoints.find(kind);
        if (it == cfg.backend_endpoints.end()) return std::nullopt;
        BackendConfig bc = it->second;
        bc.auth_token = token;
        return bc;
    };

    BackendSet set;
    if (const auto bc = config_for("cognition"))
        set.cognition = make_http_cognition(*bc, log);
    else
        set.cognition = make_stub_cognition(cfg.seed);
    if (const auto bc = config_for("detector"))
        set.detector = make_http_detector(*bc, log);
    else
        set.detector = make_stub_detector(cfg.seed);
    if (const auto bc = config_for("edit"))
        set.edit = make_http_edit(*bc, log);
    else
        set.edit = make_stub_edit(cfg.seed);
    return set;
}

void Checkpoint::save(const std::string& path) const {
    Json doc;
    doc["type"] = "checkpoint";
    doc["format_version"] = 1;
    doc["config_digest"] = config_digest;
    doc["tick"] = tick;
    doc["rng_state"] = rng_state;
    doc["ars"] = ars.to_json();
    Json offsets;
    for (const auto& [agent_id, count] : memory_offsets) offsets[agent_id] = count;
    doc["memory_offsets"] = std::move(offsets);
    doc["reflections_emitted"] = reflections_emitted;
    doc["blueprints_emitted"] = blueprints_emitted;
    doc["trace_rows"] = trace_rows;
    doc["digest"] = to_hex(fnv1a64(doc.dump()));
    write_text_file(path, doc.dump() + "\n");
}

Checkpoint Checkpoint::load(const std::string& path) {
    Json doc = parse_json(read_text_file(path), path);
    if (!doc.is_object() || doc.value("type", "") != "checkpoint")
        throw CorruptCheckpointError(path + ": not a checkpoint file");
    if (!doc.contains("digest") || !doc["digest"].is_string())
        throw CorruptCheckpointError(path + ": missing digest");
    const std::string recorded = doc["digest"].get<std::string>();
    doc.erase("digest");
    if (to_hex(fnv1a64(doc.dump())) != recorded)
        throw CorruptCheckpointError(path + ": content digest mismatch");

    Checkpoint ckpt;
    try {
        ckpt.config_digest = doc.at("config_digest").get<std::string>();
        ckpt.tick = doc.at("tick").get<std::uint64_t>();
        ckpt.rng_state = doc.at("rng_state").get<std::uint64_t>();
        ckpt.ars = ArsState::from_json(doc.at("ars"));
        for (const auto& [agent_id, count] : doc.at("memory_offsets").items())
            ckpt.memory_offsets[agent_id] = count.get<std::uint64_t>();
        ckpt.reflections_emitted = doc.at("reflections_emitted").get<std::uint64_t>();
        ckpt.blueprints_emitted = doc.at("blueprints_emitted").get<std::uint64_t>();
        ckpt.trace_rows = doc.at("trace_rows").get<std::uint64_t>();
    } catch (const Json::exception& e) {
        throw CorruptCheckpointError(path + ": " + e.what());
    }
    return ckpt;
}

Pipeline::Pipeline(RunConfig cfg, BackendSet backends)
    : cfg_(std::move(cfg)), backends_(std::move(backends)), rng_(cfg_.seed) {
    cfg_.validate();
    if (!backends_.cognition || !backends_.detector || !backends_.edit)
        throw ConfigError("pipeline: incomplete backend set");
}

std::vector<AgentProfile> Pipeline::load_agents() const {
    std::vector<AgentProfile> profiles;
    if (!cfg_.profiles_path.empty()) {
        profiles = load_profiles(cfg_.profiles_path);
    } else if (!cfg_.metadata_path.empty()) {
        const auto records = load_metadata_table(cfg_.metadata_path);
        ProfileConfig pc;
        pc.style_sample_size = cfg_.style_sample_size;
        pc.rng_seed = cfg_.seed;
        profiles = build_all_profiles(records, pc, *backends_.cognition);
    } else {
        throw ConfigError("config needs agents.profiles or agents.metadata");
    }
    if (profiles.empty()) throw ConfigError("no agent profiles available");
    std::sort(profiles.begin(), profiles.end(),
              [](const AgentProfile& a, const AgentProfile& b) { return a.agent_id < b.agent_id; });
    return profiles;
}

std::vector<std::string> Pipeline::real_image_pool() const {
    std::vector<std::string> pool;
    if (!cfg_.real_images_path.empty()) {
        for_each_line(cfg_.real_images_path,
                      [&](std::size_t, const std::string& line) { pool.push_back(line); });
        if (pool.empty()) throw ConfigError(cfg_.real_images_path + ": no image references");
    } else {
        const std::uint64_t count = std::max<std::uint64_t>(cfg_.target_real, 1);
        for (std::uint64_t i = 1; i <= count; ++i) pool.push_back(padded_id("real-", i));
    }
    return pool;
}

void Pipeline::write_memory(const std::string& agent_id, MemoryKind kind, Json payload,
                            std::uint64_t tick) {
    const std::uint64_t seq = memory_.write(agent_id, kind, payload, tick);
    MemoryRecord rec;
    rec.seq = seq;
    rec.agent_id = agent_id;
    rec.kind = kind;
    rec.tick = tick;
    rec.payload = std::move(payload);
    memory_sink_.write(rec.to_json());
    ++memory_lines_;
}

Checkpoint Pipeline::snapshot(std::uint64_t tick) const {
    Checkpoint ckpt;
    ckpt.config_digest = cfg_.digest();
    ckpt.tick = tick;
    ckpt.rng_state = rng_.state();
    ckpt.memory_offsets = memory_.offsets();
    ckpt.reflections_emitted = reflection_lines_;
    ckpt.blueprints_emitted = blueprint_lines_;
    ckpt.trace_rows = trace_lines_;
    return ckpt;  // caller fills .ars
}

Phase1Result Pipeline::run_phase1() { return run_phase1_impl(std::nullopt); }

Phase1Result Pipeline::resume_phase1(const std::string& checkpoint_path) {
    Checkpoint ckpt = Checkpoint::load(checkpoint_path);
    if (ckpt.config_digest != cfg_.digest())
        throw ConfigError("checkpoint was written by a different config (digest mismatch)");
    return run_phase1_impl(std::move(ckpt));
}

Phase1Result Pipeline::run_phase1_impl(std::optional<Checkpoint> resume_from) {
    if (cfg_.profiles_path.empty() && cfg_.metadata_path.empty())
        throw ConfigError("phase 1 needs agents.profiles or agents.metadata");
    if (cfg_.toolbox_path.empty()) throw ConfigError("phase 1 needs a toolbox path");

    std::filesystem::create_directories(cfg_.output_dir);

    const auto profiles = load_agents();
    const Toolbox toolbox = Toolbox::load(cfg_.toolbox_path);
    const auto pool = real_image_pool();

    // Flattening reference point: the roster's median diversity, unless the
    // config pinned one.
    ToolWeightPolicy policy = cfg_.tool_weights;
    if (!policy.median_diversity) {
        std::vector<std::uint64_t> diversities;
        diversities.reserve(profiles.size());
        for (const auto& p : profiles) diversities.push_back(p.diversity);
        std::sort(diversities.begin(), diversities.end());
        policy.median_diversity = diversities[(diversities.size() - 1) / 2];
    }

    const RunPaths paths = cfg_.paths();
    std::vector<ForgeryBlueprint> blueprints;
    ArsGate gate = resume_from ? ArsGate(cfg_.ars, resume_from->ars) : ArsGate(cfg_.ars);
    std::uint64_t tick = 0;

    if (resume_from) {
        std::uint64_t total_memory_lines = 0;
        for (const auto& [agent_id, count] : resume_from->memory_offsets)
            total_memory_lines += count;
        truncate_lines(paths.blueprints(), resume_from->blueprints_emitted);
        truncate_lines(paths.memory_log(), total_memory_lines);
        truncate_lines(paths.reflections(), resume_from->reflections_emitted);
        truncate_lines(paths.ars_trace(), 1 + resume_from->trace_rows);

        memory_ = MemoryStore::load(paths.memory_log());
        if (memory_.offsets() != resume_from->memory_offsets)
            throw CorruptCheckpointError("memory log does not match checkpoint offsets");
        blueprints = load_blueprints(paths.blueprints());
        if (blueprints.size() != resume_from->blueprints_emitted)
            throw CorruptCheckpointError("blueprint file does not match checkpoint count");

        rng_.set_state(resume_from->rng_state);
        assembler_.set_next_index(resume_from->blueprints_emitted + 1);
        tick = resume_from->tick;
        memory_lines_ = total_memory_lines;
        reflection_lines_ = resume_from->reflections_emitted;
        blueprint_lines_ = resume_from->blueprints_emitted;
        trace_lines_ = resume_from->trace_rows;

        blueprint_sink_.open(paths.blueprints(), true);
        memory_sink_.open(paths.memory_log(), true);
        reflection_sink_.open(paths.reflections(), true);
        trace_sink_.open(paths.ars_trace(), true);
    } else {
        memory_ = MemoryStore();
        rng_ = Rng(cfg_.seed);
        assembler_.set_next_index(1);
        memory_lines_ = reflection_lines_ = blueprint_lines_ = trace_lines_ = 0;

        blueprint_sink_.open(paths.blueprints(), false);
        memory_sink_.open(paths.memory_log(), false);
        reflection_sink_.open(paths.reflections(), false);
        trace_sink_.open(paths.ars_trace(), false);
        trace_sink_.write_raw(ars_trace_header());
    }

    Phase1Stats stats;
    const std::uint64_t cap = cfg_.effective_cap();

    while (blueprints.size() < cfg_.target_forged) {
        if (tick >= cap) {
            blueprint_sink_.flush();
            memory_sink_.flush();
            reflection_sink_.flush();
            trace_sink_.flush();
            throw IterationCapError("iteration cap " + std::to_string(cap) +
                                        " reached with " + std::to_string(blueprints.size()) +
                                        " of " + std::to_string(cfg_.target_forged) +
                                        " blueprints accepted",
                                    tick, blueprints.size());
        }
        ++tick;

        const AgentProfile& agent = profiles[(tick - 1) % profiles.size()];
        const std::string& source = pool[rng_.next_index(pool.size())];
        const std::uint64_t chain_seed = rng_.next_u64();
        const OperatorChain chain = sample_operator_chain(agent, toolbox, memory_, chain_seed,
                                                          cfg_.chain_lengths, policy);
        const std::string result_ref = apply_chain(source, chain, toolbox, *backends_.edit);
        const Intent intent = rng_.next_double() < cfg_.misleading_prob.to_double()
                                  ? Intent::Misleading
                                  : Intent::Accurate;
        const std::string description =
            generate_description(chain, toolbox, result_ref, intent, *backends_.cognition);

        // Self-assessment conditioned on recent evaluative memory.
        Json score_context;
        score_context["image_ref"] = result_ref;
        score_context["description"] = description;
        Json history = Json::array();
        const auto recent =
            memory_.retrieve(agent.agent_id, MemoryKind::Evaluative,
                             cfg_.self_score_context ? cfg_.self_score_context : 1);
        for (const auto& rec : recent) history.push_back(rec.payload);
        score_context["history"] = std::move(history);
        const auto self = backends_.cognition->call(
            {CognitionTask::SelfScore, std::move(score_context)});
        if (!self.score)
            throw BackendError(BackendErrorKind::Protocol, "SelfScore response without score");
        const CandidateScore score = score_candidate(
            *self.score, backends_.detector->call({result_ref}).forgery_confidence, cfg_.ars);

        const ArsOutcome outcome = gate.evaluate(score.fused);
        trace_sink_.write_raw(ars_trace_row(outcome));
        ++trace_lines_;

        // Memory update: every attempt is logged, accepted or not.
        Json factual;
        factual["source"] = source;
        factual["result"] = result_ref;
        factual["chain"] = chain.to_json();
        factual["description"] = description;
        factual["intent"] = to_string(intent);
        factual["decision"] = to_string(outcome.decision);
        factual["s_llm"] = score.s_llm.to_string();
        factual["s_disc"] = score.s_disc.to_string();
        factual["fused"] = score.fused.to_string();
        write_memory(agent.agent_id, MemoryKind::Factual, std::move(factual), tick);

        if (outcome.decision == ArsDecision::Accept) {
            for (const auto& step : chain.steps) {
                Json eval;
                eval["assessment"] = "accepted";
                eval["op_id"] = step.op_id;
                eval["preferred_params"] = step.params;
                eval["fused"] = score.fused.to_string();
                write_memory(agent.agent_id, MemoryKind::Evaluative, std::move(eval), tick);
            }
            ForgeryBlueprint bp = assembler_.assemble(source, chain, result_ref, description,
                                                      intent, agent.agent_id, tick);
            bp.s_llm = score.s_llm;
            bp.s_disc = score.s_disc;
            bp.fused = score.fused;
            bp.tau_accept = outcome.tau;
            bp.is_challenge = outcome.is_challenge;
            blueprint_sink_.write(bp.to_json());
            ++blueprint_lines_;
            blueprints.push_back(std::move(bp));
            ++stats.accepted;
        } else {
            Json eval;
            eval["assessment"] = "rejected";
            eval["fused"] = score.fused.to_string();
            eval["tau"] = outcome.tau.to_string();
            write_memory(agent.agent_id, MemoryKind::Evaluative, std::move(eval), tick);
            ++stats.rejected;
        }

        if (cfg_.reflection_period && tick % cfg_.reflection_period == 0) {
            for (const auto& profile : profiles) {
                if (memory_.record_count(profile.agent_id) == 0) continue;
                const auto summary = memory_.reflect(profile.agent_id, cfg_.reflection_period,
                                                     *backends_.cognition, tick);
                reflection_sink_.write(summary.to_json());
                ++reflection_lines_;
            }
        }

        const bool halting = halt_after_tick_ && tick == halt_after_tick_;
        if (halting || (cfg_.checkpoint_every && tick % cfg_.checkpoint_every == 0)) {
            blueprint_sink_.flush();
            memory_sink_.flush();
            reflection_sink_.flush();
            trace_sink_.flush();
            Checkpoint ckpt = snapshot(tick);
            ckpt.ars = gate.state();
            ckpt.save(paths.checkpoint());
        }
        if (halting) {
            stats.halted = true;
            break;
        }
    }

    blueprint_sink_.flush();
    memory_sink_.flush();
    reflection_sink_.flush();
    trace_sink_.flush();

    stats.iterations = tick;
    Phase1Result result;
    result.blueprints = std::move(blueprints);
    result.ars = gate.state();
    result.stats = stats;
    return result;
}

Phase2Result Pipeline::run_phase2(const std::vector<ForgeryBlueprint>& blueprints) {
    if (blueprints.empty()) throw InsufficientDataError("phase 2 needs at least one blueprint");
    cfg_.social.validate();
    std::filesystem::create_directories(cfg_.output_dir);

    Phase2Result result;
    result.trajectories.resize(blueprints.size());

    // Per-blueprint seeds are derived statelessly from (run seed, blueprint
    // id), so chunked parallel execution produces the serial stream.
    auto process = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::uint64_t seed =
                fnv1a64("phase2:" + blueprints[i].blueprint_id, cfg_.seed ^ 0xc2b2ae3d27d4eb4fULL);
            result.trajectories[i] =
                run_trajectory(blueprints[i], *backends_.cognition, seed, cfg_.social);
        }
    };

    const std::uint32_t threads =
        std::min<std::uint32_t>(cfg_.phase2_threads, static_cast<std::uint32_t>(blueprints.size()));
    if (threads <= 1) {
        process(0, blueprints.size());
    } else {
        std::vector<std::future<void>> futures;
        const std::size_t chunk = (blueprints.size() + threads - 1) / threads;
        for (std::uint32_t t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(blueprints.size(), begin + chunk);
            if (begin >= end) break;
            futures.push_back(std::async(std::launch::async, process, begin, end));
        }
        for (auto& f : futures) f.get();
    }

    const RunPaths paths = cfg_.paths();
    JsonlWriter trajectory_sink;
    trajectory_sink.open(paths.trajectories(), false);
    JsonlWriter sample_sink;
    sample_sink.open(paths.samples(), false);

    for (std::size_t i = 0; i < blueprints.size(); ++i) {
        for (const auto& event : result.trajectories[i].events)
            trajectory_sink.write(event.to_json());
        auto samples = build_sample_pairs(blueprints[i], result.trajectories[i]);
        for (const auto& sample : samples) sample_sink.write(sample.to_json());
        result.samples.insert(result.samples.end(), std::make_move_iterator(samples.begin()),
                              std::make_move_iterator(samples.end()));
    }
    return result;
}

DatasetManifest Pipeline::emit(const std::vector<ForgeryBlueprint>& blueprints,
                               const std::vector<DatasetSample>& social_samples) {
    std::filesystem::create_directories(cfg_.output_dir);

    std::vector<DatasetSample> samples;
    if (social_samples.empty()) {
        // `generate` + `emit` without `socialize`: emit the blueprints' own
        // description samples via an empty trajectory.
        for (const auto& bp : blueprints) {
            SocialTrajectory empty;
            empty.blueprint_id = bp.blueprint_id;
            auto own = build_sample_pairs(bp, empty);
            samples.insert(samples.end(), std::make_move_iterator(own.begin()),
                           std::make_move_iterator(own.end()));
        }
    } else {
        samples = social_samples;
    }

    const auto pool = real_image_pool();
    if (pool.size() < cfg_.target_real)
        throw ConfigError("real image pool smaller than targets.real (" +
                          std::to_string(pool.size()) + " < " + std::to_string(cfg_.target_real) +
                          ")");
    for (std::uint64_t i = 0; i < cfg_.target_real; ++i) {
        Json context;
        context["kind"] = "real";
        context["image_ref"] = pool[i];
        const auto caption = backends_.cognition->call({CognitionTask::Describe, std::move(context)});
        DatasetSample sample;
        sample.sample_id = padded_id("r-", i + 1);
        sample.image_ref = pool[i];
        sample.text = caption.text;
        sample.y = 0;
        sample.delta = 1;
        sample.mismatch_flag = 0;
        samples.push_back(std::move(sample));
    }

    std::sort(samples.begin(), samples.end(),
              [](const DatasetSample& a, const DatasetSample& b) { return a.sample_id < b.sample_id; });
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].sample_id == samples[i - 1].sample_id)
            throw StorageError("duplicate sample_id '" + samples[i].sample_id + "'");

    DatasetManifest manifest;
    manifest.header = recount(samples);
    manifest.header.run_seed = cfg_.seed;
    manifest.header.config_digest = cfg_.digest();
    manifest.header.engine = kEngineVersion;
    manifest.samples = std::move(samples);
    write_manifest(manifest, cfg_.paths().manifest());
    return manifest;
}

}  // namespace forgesim
