#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forgesim/jsonio.hpp"
#include "forgesim/rational.hpp"

namespace forgesim {

// Gate and trajectory provenance carried by every emitted sample. Score
// fields are empty for real samples.
struct SampleProvenance {
    std::string agent_id;
    std::string chain_summary;  // "op_a+op_b"; empty for real samples
    std::optional<Rational> s_llm;
    std::optional<Rational> s_disc;
    std::optional<Rational> fused;
    std::optional<Rational> tau_accept;  // threshold in force at acceptance
    bool is_challenge = false;
    std::optional<std::string> trajectory_event_ref;  // interaction samples only
    std::optional<std::string> role;                  // interaction samples only

    Json to_json() const;
    static SampleProvenance from_json(const Json& doc);
};

/// Final emitted record: (image, text, authenticity y, consistency delta).
/// Real samples are (x, c, y=0, delta=1) with an empty chain; forged samples
/// have y=1 and delta = 1 iff text matches image authenticity.
struct DatasetSample {
    std::string sample_id;
    std::string image_ref;
    std::string text;
    int y = 0;
    int delta = 1;
    int mismatch_flag = 0;
    SampleProvenance provenance;

    Json to_json() const;
    static DatasetSample from_json(const Json& doc);
};

struct ManifestHeader {
    std::uint64_t run_seed = 0;
    std::string config_digest;
    std::uint64_t m_real = 0;         // real samples (y=0)
    std::uint64_t n_forged = 0;       // blueprint-own forged samples
    std::uint64_t n_interaction = 0;  // samples built from trajectory events
    std::uint64_t total_samples = 0;
    std::string engine;
    int format_version = 1;

    Json to_json() const;
    static ManifestHeader from_json(const Json& doc);
};

struct DatasetManifest {
    ManifestHeader header;
    std::vector<DatasetSample> samples;  // sorted by sample_id
};

/// Line-delimited UTF-8: header line first, then one sample per line in
/// sample_id order. Byte-identical across reruns of the same seeded run.
void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

/// Recount the per-kind tallies from the samples themselves.
ManifestHeader recount(const std::vector<DatasetSample>& samples);

struct ManifestStats {
    std::uint64_t m_real = 0;
    std::uint64_t n_forged = 0;
    std::uint64_t n_interaction = 0;
    std::uint64_t total = 0;
    std::uint64_t delta_zero = 0;
    std::uint64_t delta_one = 0;
    std::map<std::string, std::uint64_t> per_role_events;
};

ManifestStats compute_stats(const DatasetManifest& manifest);

}  // namespace forgesim
