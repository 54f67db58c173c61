#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forgesim/backends.hpp"
#include "forgesim/rational.hpp"

namespace forgesim {

// One row of a forgery-dataset metadata table.
struct ForgeryRecord {
    std::string record_id;
    std::string creator_id;
    std::string method_id;
    std::string target_id;
};

// How many times each target was manipulated across the whole table.
struct PopularityIndex {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t total_records = 0;
};

/// An agent's "forgery gene": numeric traits plus stylistic preference text.
struct AgentProfile {
    std::string agent_id;
    std::uint64_t frequency = 0;   // total works
    std::uint64_t diversity = 0;   // distinct methods used
    Rational conformity;           // average popularity of chosen targets
    std::string style_text;

    Json to_json() const;
    static AgentProfile from_json(const Json& doc);
};

struct ProfileConfig {
    std::uint64_t style_sample_size = 3;  // records sent to the cognition backend
    std::uint64_t rng_seed = 0;
};

/// Load a metadata table: CSV with header
/// `record_id,creator_id,method_id,target_id`, or JSONL with those fields.
/// Rejects empty fields and duplicate record ids.
std::vector<ForgeryRecord> load_metadata_table(const std::string& path);
std::vector<ForgeryRecord> parse_metadata_table(const std::string& content,
                                                const std::string& source_name);

PopularityIndex build_popularity_index(const std::vector<ForgeryRecord>& records);

/// Total count of a creator's works; 0 when the creator is absent.
std::uint64_t compute_frequency(const std::vector<ForgeryRecord>& records,
                                const std::string& creator);

/// Count of unique methods across the creator's records.
/// Throws InsufficientDataError when the creator has no records.
std::uint64_t compute_diversity(const std::vector<ForgeryRecord>& records,
                                const std::string& creator);

/// Average popularity of the creator's chosen targets, exact.
/// Throws InsufficientDataError (no records) or IndexMismatchError (target
/// missing from the index).
Rational compute_conformity(const std::vector<ForgeryRecord>& records,
                            const PopularityIndex& index, const std::string& creator);

/// Traits via the three ops above; style text from the cognition backend fed
/// min(L, frequency) seeded-sampled records. Deterministic under a fixed seed
/// and stub backend.
AgentProfile build_profile(const std::vector<ForgeryRecord>& records, const std::string& creator,
                           const ProfileConfig& cfg, CognitionBackend& cognition);

/// All creators in the table, sorted by id, each profiled.
std::vector<AgentProfile> build_all_profiles(const std::vector<ForgeryRecord>& records,
                                             const ProfileConfig& cfg,
                                             CognitionBackend& cognition);

std::vector<AgentProfile> load_profiles(const std::string& path);
void save_profiles(const std::vector<AgentProfile>& profiles, const std::string& path);

// Operator categories, mirrored by the toolbox and the action sampler.
enum class ToolCategory {
    IdentityManipulation,
    AttributeExpressionEditing,
    StyleBasedSynthesis,
};

const char* to_string(ToolCategory category);
const char* display_name(ToolCategory category);  // prose form for generated text
ToolCategory tool_category_from_string(const std::string& name);

/// Tool-weight scheme: per-category base weight, +1 per style-text keyword
/// hit, and a flatten-toward-uniform step for agents whose diversity exceeds
/// the roster median.
struct ToolWeightPolicy {
    std::map<ToolCategory, double> base_weights;             // default 1.0 each
    std::map<ToolCategory, std::vector<std::string>> lexicon;  // keyword lists
    std::optional<std::uint64_t> median_diversity;           // unset: no flattening

    static ToolWeightPolicy defaults();
};

struct Toolbox;  // actions.hpp

/// Probability over the toolbox's categories: non-negative, sums to 1 within
/// 1e-9. Throws EmptyToolboxError on an empty toolbox.
std::map<ToolCategory, double> derive_tool_distribution(
    const AgentProfile& profile, const Toolbox& toolbox,
    const ToolWeightPolicy& policy = ToolWeightPolicy::defaults());

}  // namespace forgesim
