#include "forgesim/profile.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <set>
#include <sstream>

#include "forgesim/actions.hpp"
#include "forgesim/rng.hpp"

namespace forgesim {

namespace {

constexpr const char* kColumns[4] = {"record_id", "creator_id", "method_id", "target_id"};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

void validate_record(const ForgeryRecord& rec, std::set<std::string>& seen_ids,
                     const std::string& source, std::size_t lineno) {
    const std::string where = source + ":" + std::to_string(lineno);
    if (rec.record_id.empty() || rec.creator_id.empty() || rec.method_id.empty() ||
        rec.target_id.empty())
        throw ConfigError(where + ": empty field in metadata record");
    if (!seen_ids.insert(rec.record_id).second)
        throw ConfigError(where + ": duplicate record_id '" + rec.record_id + "'");
}

}  // namespace

std::vector<ForgeryRecord> parse_metadata_table(const std::string& content,
                                                const std::string& source_name) {
    std::vector<ForgeryRecord> records;
    std::set<std::string> seen_ids;
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    bool header_checked = false;
    bool jsonl = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        if (!header_checked) {
            header_checked = true;
            jsonl = line.front() == '{';
            if (!jsonl) {
                const auto header = split_csv_line(line);
                if (header.size() != 4 || header[0] != kColumns[0] || header[1] != kColumns[1] ||
                    header[2] != kColumns[2] || header[3] != kColumns[3])
                    throw ConfigError(source_name +
                                      ": expected header 'record_id,creator_id,method_id,target_id'");
                continue;
            }
        }

        ForgeryRecord rec;
        if (jsonl) {
            const Json doc = parse_json(line, source_name + ":" + std::to_string(lineno));
            for (const char* col : kColumns)
                if (!doc.contains(col) || !doc[col].is_string())
                    throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                      ": missing field '" + col + "'");
            rec.record_id = doc["record_id"].get<std::string>();
            rec.creator_id = doc["creator_id"].get<std::string>();
            rec.method_id = doc["method_id"].get<std::string>();
            rec.target_id = doc["target_id"].get<std::string>();
        } else {
            const auto fields = split_csv_line(line);
            if (fields.size() != 4)
                throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                  ": expected 4 comma-separated fields");
            rec = ForgeryRecord{fields[0], fields[1], fields[2], fields[3]};
        }
        validate_record(rec, seen_ids, source_name, lineno);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<ForgeryRecord> load_metadata_table(const std::string& path) {
    return parse_metadata_table(read_text_file(path), path);
}

PopularityIndex build_popularity_index(const std::vector<ForgeryRecord>& records) {
    PopularityIndex index;
    for (const auto& rec : records) {
        ++index.counts[rec.target_id];
        ++index.total_records;
    }
    return index;
}

std::uint64_t compute_frequency(const std::vector<ForgeryRecord>& records,
                                const std::string& creator) {
    std::uint64_t count = 0;
    for (const auto& rec : records)
        if (rec.creator_id == creator) ++count;
    return count;
}

std::uint64_t compute_diversity(const std::vector<ForgeryRecord>& records,
                                const std::string& creator) {
    std::set<std::string> methods;
    bool found = false;
    for (const auto& rec : records) {
        if (rec.creator_id == creator) {
            found = true;
            methods.insert(rec.method_id);
        }
    }
    if (!found) throw InsufficientDataError("creator '" + creator + "' has no records");
    return methods.size();
}

Rational compute_conformity(const std::vector<ForgeryRecord>& records,
                            const PopularityIndex& index, const std::string& creator) {
    std::int64_t popularity_sum = 0;
    std::int64_t works = 0;
    for (const auto& rec : records) {
        if (rec.creator_id != creator) continue;
        const auto it = index.counts.find(rec.target_id);
        if (it == index.counts.end())
            throw IndexMismatchError("target '" + rec.target_id + "' missing from index");
        popularity_sum += static_cast<std::int64_t>(it->second);
        ++works;
    }
    if (works == 0) throw InsufficientDataError("creator '" + creator + "' has no records");
    return Rational(popularity_sum, works);
}

AgentProfile build_profile(const std::vector<ForgeryRecord>& records, const std::string& creator,
                           const ProfileConfig& cfg, CognitionBackend& cognition) {
    std::vector<const ForgeryRecord*> own;
    for (const auto& rec : records)
        if (rec.creator_id == creator) own.push_back(&rec);
    if (own.empty()) throw InsufficientDataError("creator '" + creator + "' has no records");

    AgentProfile profile;
    profile.agent_id = creator;
    profile.frequency = own.size();
    profile.diversity = compute_diversity(records, creator);
    profile.conformity = compute_conformity(records, build_popularity_index(records), creator);

    // Seeded sample of min(L, frequency) records, submitted as metadata.
    Rng rng = Rng(cfg.rng_seed).derive("style:" + creator);
    const std::size_t take =
        std::min<std::size_t>(cfg.style_sample_size ? cfg.style_sample_size : 1, own.size());
    auto picked = rng.sample_indices(own.size(), take);
    std::sort(picked.begin(), picked.end());  // stable prompt order

    Json context;
    context["creator_id"] = creator;
    Json sampled = Json::array();
    for (const std::size_t i : picked) {
        Json entry;
        entry["method_id"] = own[i]->method_id;
        entry["target_id"] = own[i]->target_id;
        sampled.push_back(std::move(entry));
    }
    context["records"] = std::move(sampled);

    const auto response = cognition.call({CognitionTask::StyleDescription, std::move(context)});
    if (response.text.empty())
        throw BackendError(BackendErrorKind::Protocol, "empty style description");
    profile.style_text = response.text;
    return profile;
}

std::vector<AgentProfile> build_all_profiles(const std::vector<ForgeryRecord>& records,
                                             const ProfileConfig& cfg,
                                             CognitionBackend& cognition) {
    std::set<std::string> creators;
    for (const auto& rec : records) creators.insert(rec.creator_id);
    std::vector<AgentProfile> profiles;
    profiles.reserve(creators.size());
    for (const auto& creator : creators)
        profiles.push_back(build_profile(records, creator, cfg, cognition));
    return profiles;
}

Json AgentProfile::to_json() const {
    Json doc;
    doc["agent_id"] = agent_id;
    doc["frequency"] = frequency;
    doc["diversity"] = diversity;
    doc["conformity"] = conformity.to_string();
    doc["style_text"] = style_text;
    return doc;
}

AgentProfile AgentProfile::from_json(const Json& doc) {
    AgentProfile profile;
    profile.agent_id = doc.at("agent_id").get<std::string>();
    profile.frequency = doc.at("frequency").get<std::uint64_t>();
    profile.diversity = doc.at("diversity").get<std::uint64_t>();
    profile.conformity = Rational::parse(doc.at("conformity").get<std::string>());
    profile.style_text = doc.at("style_text").get<std::string>();
    return profile;
}

std::vector<AgentProfile> load_profiles(const std::string& path) {
    std::vector<AgentProfile> profiles;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        try {
            profiles.push_back(
                AgentProfile::from_json(parse_json(line, path + ":" + std::to_string(lineno))));
        } catch (const Json::exception& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    });
    return profiles;
}

void save_profiles(const std::vector<AgentProfile>& profiles, const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    JsonlWriter out;
    out.open(path, false);
    for (const auto& profile : profiles) out.write(profile.to_json());
}

const char* to_string(ToolCategory category) {
    switch (category) {
        case ToolCategory::IdentityManipulation: return "IdentityManipulation";
        case ToolCategory::AttributeExpressionEditing: return "AttributeExpressionEditing";
        case ToolCategory::StyleBasedSynthesis: return "StyleBasedSynthesis";
    }
    return "?";
}

const char* display_name(ToolCategory category) {
    switch (category) {
        case ToolCategory::IdentityManipulation: return "identity manipulation";
        case ToolCategory::AttributeExpressionEditing: return "attribute and expression editing";
        case ToolCategory::StyleBasedSynthesis: return "style-based synthesis";
    }
    return "?";
}

ToolCategory tool_category_from_string(const std::string& name) {
    if (name == "IdentityManipulation") return ToolCategory::IdentityManipulation;
    if (name == "AttributeExpressionEditing") return ToolCategory::AttributeExpressionEditing;
    if (name == "StyleBasedSynthesis") return ToolCategory::StyleBasedSynthesis;
    throw ConfigError("unknown tool category '" + name + "'");
}

ToolWeightPolicy ToolWeightPolicy::defaults() {
    ToolWeightPolicy policy;
    policy.base_weights = {
        {ToolCategory::IdentityManipulation, 1.0},
        {ToolCategory::AttributeExpressionEditing, 1.0},
        {ToolCategory::StyleBasedSynthesis, 1.0},
    };
    policy.lexicon = {
        {ToolCategory::IdentityManipulation, {"identity", "swap", "impersonation", "likeness"}},
        {ToolCategory::AttributeExpressionEditing,
         {"attribute", "expression", "age", "gender", "smile"}},
        {ToolCategory::StyleBasedSynthesis, {"style", "synthesis", "blend", "texture"}},
    };
    return policy;
}

namespace {

std::string lowercase(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

}  // namespace

std::map<ToolCategory, double> derive_tool_distribution(const AgentProfile& profile,
                                                        const Toolbox& toolbox,
                                                        const ToolWeightPolicy& policy) {
    const auto categories = toolbox.categories();
    if (categories.empty()) throw EmptyToolboxError("toolbox has no operators");

    const std::string style = lowercase(profile.style_text);
    std::map<ToolCategory, double> weights;
    for (const ToolCategory category : categories) {
        double w = 1.0;
        if (const auto it = policy.base_weights.find(category); it != policy.base_weights.end())
            w = it->second;
        if (w > 0.0) {
            if (const auto lex = policy.lexicon.find(category); lex != policy.lexicon.end())
                for (const auto& keyword : lex->second)
                    if (style.find(keyword) != std::string::npos) w += 1.0;
        }
        weights[category] = w;
    }

    // High-diversity agents spread out: move halfway toward the uniform
    // weight. Zero-weight categories stay disabled.
    if (policy.median_diversity && profile.diversity > *policy.median_diversity) {
        double mean = 0.0;
        std::size_t live = 0;
        for (const auto& [category, w] : weights)
            if (w > 0.0) {
                mean += w;
                ++live;
            }
        if (live > 0) {
            mean /= static_cast<double>(live);
            for (auto& [category, w] : weights)
                if (w > 0.0) w += 0.5 * (mean - w);
        }
    }

    double total = 0.0;
    for (const auto& [category, w] : weights) {
        if (w < 0.0) throw ConfigError("negative tool weight");
        total += w;
    }
    if (total <= 0.0) throw EmptyToolboxError("all tool weights are zero");
    for (auto& [category, w] : weights) w /= total;
    return weights;
}

}  // namespace forgesim
