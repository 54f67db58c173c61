#include "forgesim/dataset.hpp"

#include <algorithm>

namespace forgesim {

namespace {

void put_optional_score(Json& doc, const char* key, const std::optional<Rational>& value) {
    if (value)
        doc[key] = value->to_string();
    else
        doc[key] = nullptr;
}

std::optional<Rational> get_optional_score(const Json& doc, const char* key) {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    return Rational::parse(doc[key].get<std::string>());
}

}  // namespace

Json SampleProvenance::to_json() const {
    Json doc;
    doc["agent_id"] = agent_id;
    doc["chain_summary"] = chain_summary;
    put_optional_score(doc, "s_llm", s_llm);
    put_optional_score(doc, "s_disc", s_disc);
    put_optional_score(doc, "fused", fused);
    put_optional_score(doc, "tau_accept", tau_accept);
    doc["is_challenge"] = is_challenge;
    if (trajectory_event_ref)
        doc["trajectory_event_ref"] = *trajectory_event_ref;
    else
        doc["trajectory_event_ref"] = nullptr;
    if (role)
        doc["role"] = *role;
    else
        doc["role"] = nullptr;
    return doc;
}

SampleProvenance SampleProvenance::from_json(const Json& doc) {
    SampleProvenance prov;
    prov.agent_id = doc.value("agent_id", "");
    prov.chain_summary = doc.value("chain_summary", "");
    prov.s_llm = get_optional_score(doc, "s_llm");
    prov.s_disc = get_optional_score(doc, "s_disc");
    prov.fused = get_optional_score(doc, "fused");
    prov.tau_accept = get_optional_score(doc, "tau_accept");
    prov.is_challenge = doc.value("is_challenge", false);
    if (doc.contains("trajectory_event_ref") && !doc["trajectory_event_ref"].is_null())
        prov.trajectory_event_ref = doc["trajectory_event_ref"].get<std::string>();
    if (doc.contains("role") && !doc["role"].is_null())
        prov.role = doc["role"].get<std::string>();
    return prov;
}

Json DatasetSample::to_json() const {
    Json doc;
    doc["sample_id"] = sample_id;
    doc["image_ref"] = image_ref;
    doc["text"] = text;
    doc["y"] = y;
    doc["delta"] = delta;
    doc["mismatch_flag"] = mismatch_flag;
    doc["provenance"] = provenance.to_json();
    return doc;
}

DatasetSample DatasetSample::from_json(const Json& doc) {
    DatasetSample sample;
    sample.sample_id = doc.at("sample_id").get<std::string>();
    sample.image_ref = doc.at("image_ref").get<std::string>();
    sample.text = doc.at("text").get<std::string>();
    sample.y = doc.at("y").get<int>();
    sample.delta = doc.at("delta").get<int>();
    sample.mismatch_flag = doc.at("mismatch_flag").get<int>();
    sample.provenance = SampleProvenance::from_json(doc.at("provenance"));
    return sample;
}

Json ManifestHeader::to_json() const {
    Json doc;
    doc["type"] = "header";
    doc["run_seed"] = run_seed;
    doc["config_digest"] = config_digest;
    doc["m_real"] = m_real;
    doc["n_forged"] = n_forged;
    doc["n_interaction"] = n_interaction;
    doc["total_samples"] = total_samples;
    doc["engine"] = engine;
    doc["format_version"] = format_version;
    return doc;
}

ManifestHeader ManifestHeader::from_json(const Json& doc) {
    if (doc.value("type", "") != "header") throw ConfigError("manifest: first line is not a header");
    ManifestHeader header;
    header.run_seed = doc.at("run_seed").get<std::uint64_t>();
    header.config_digest = doc.at("config_digest").get<std::string>();
    header.m_real = doc.at("m_real").get<std::uint64_t>();
    header.n_forged = doc.at("n_forged").get<std::uint64_t>();
    header.n_interaction = doc.at("n_interaction").get<std::uint64_t>();
    header.total_samples = doc.at("total_samples").get<std::uint64_t>();
    header.engine = doc.value("engine", "");
    header.format_version = doc.value("format_version", 1);
    return header;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
    JsonlWriter out;
    out.open(path, false);
    out.write(manifest.header.to_json());
    for (const auto& sample : manifest.samples) out.write(sample.to_json());
    out.flush();
}

DatasetManifest load_manifest(const std::string& path) {
    DatasetManifest manifest;
    bool header_seen = false;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        const Json doc = parse_json(line, path + ":" + std::to_string(lineno));
        try {
            if (!header_seen) {
                manifest.header = ManifestHeader::from_json(doc);
                header_seen = true;
            } else {
                manifest.samples.push_back(DatasetSample::from_json(doc));
            }
        } catch (const Json::exception& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    });
    if (!header_seen) throw ConfigError(path + ": empty manifest");
    return manifest;
}

ManifestHeader recount(const std::vector<DatasetSample>& samples) {
    ManifestHeader header;
    for (const auto& sample : samples) {
        if (sample.provenance.trajectory_event_ref)
            ++header.n_interaction;
        else if (sample.y == 0)
            ++header.m_real;
        else
            ++header.n_forged;
    }
    header.total_samples = samples.size();
    return header;
}

ManifestStats compute_stats(const DatasetManifest& manifest) {
    ManifestStats stats;
    const ManifestHeader tallies = recount(manifest.samples);
    stats.m_real = tallies.m_real;
    stats.n_forged = tallies.n_forged;
    stats.n_interaction = tallies.n_interaction;
    stats.total = tallies.total_samples;
    for (const auto& sample : manifest.samples) {
        if (sample.delta == 0)
            ++stats.delta_zero;
        else
            ++stats.delta_one;
        if (sample.provenance.role) ++stats.per_role_events[*sample.provenance.role];
    }
    return stats;
}

}  // namespace forgesim
