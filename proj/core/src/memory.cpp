#include "forgesim/memory.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace forgesim {

const char* to_string(MemoryKind kind) {
    return kind == MemoryKind::Factual ? "Factual" : "Evaluative";
}

MemoryKind memory_kind_from_string(const std::string& name) {
    if (name == "Factual") return MemoryKind::Factual;
    if (name == "Evaluative") return MemoryKind::Evaluative;
    throw ConfigError("unknown memory kind '" + name + "'");
}

Json MemoryRecord::to_json() const {
    Json doc;
    doc["seq"] = seq;
    doc["agent_id"] = agent_id;
    doc["kind"] = to_string(kind);
    doc["tick"] = tick;
    doc["payload"] = payload;
    return doc;
}

MemoryRecord MemoryRecord::from_json(const Json& doc) {
    MemoryRecord rec;
    rec.seq = doc.at("seq").get<std::uint64_t>();
    rec.agent_id = doc.at("agent_id").get<std::string>();
    rec.kind = memory_kind_from_string(doc.at("kind").get<std::string>());
    rec.tick = doc.at("tick").get<std::uint64_t>();
    rec.payload = doc.at("payload");
    return rec;
}

Json ReflectionSummary::to_json() const {
    Json doc;
    doc["agent_id"] = agent_id;
    doc["seq_from"] = seq_from;
    doc["seq_to"] = seq_to;
    doc["guidance_text"] = guidance_text;
    doc["produced_at"] = produced_at;
    return doc;
}

const std::deque<MemoryRecord>* MemoryStore::bucket(const std::string& agent_id) const {
    std::lock_guard<std::mutex> lock(map_mutex_);
    const auto it = records_.find(agent_id);
    return it == records_.end() ? nullptr : &it->second;
}

std::uint64_t MemoryStore::write(const std::string& agent_id, MemoryKind kind, Json payload,
                                 std::uint64_t tick) {
    if (payload.is_null() || (payload.is_object() && payload.empty()))
        throw StorageError("memory write with empty payload");
    std::deque<MemoryRecord>* target = nullptr;
    {
        std::lock_guard<std::mutex> lock(map_mutex_);
        target = &records_[agent_id];
    }
    MemoryRecord rec;
    rec.seq = target->size() + 1;
    rec.agent_id = agent_id;
    rec.kind = kind;
    rec.tick = tick;
    rec.payload = std::move(payload);
    target->push_back(std::move(rec));
    return target->back().seq;
}

std::vector<MemoryRecord> MemoryStore::retrieve(const std::string& agent_id,
                                                std::optional<MemoryKind> kind_filter,
                                                std::uint64_t last_n) const {
    if (last_n == 0) throw StorageError("retrieve with last_n == 0");
    std::vector<MemoryRecord> out;
    const auto* bucket_ptr = bucket(agent_id);
    if (!bucket_ptr) return out;
    for (auto it = bucket_ptr->rbegin(); it != bucket_ptr->rend() && out.size() < last_n; ++it) {
        if (kind_filter && it->kind != *kind_filter) continue;
        out.push_back(*it);
    }
    return out;
}

ReflectionSummary MemoryStore::reflect(const std::string& agent_id, std::uint64_t window,
                                       CognitionBackend& cognition, std::uint64_t tick) {
    const auto recent = retrieve(agent_id, std::nullopt, window ? window : 1);
    if (recent.empty())
        throw InsufficientDataError("agent '" + agent_id + "' has no memories to reflect on");

    Json context;
    context["agent_id"] = agent_id;
    Json payloads = Json::array();
    for (auto it = recent.rbegin(); it != recent.rend(); ++it) payloads.push_back(it->payload);
    context["window"] = std::move(payloads);

    const auto response = cognition.call({CognitionTask::Reflect, std::move(context)});

    ReflectionSummary summary;
    summary.agent_id = agent_id;
    summary.seq_from = recent.back().seq;  // recent is newest-first
    summary.seq_to = recent.front().seq;
    summary.guidance_text = response.text;
    summary.produced_at = tick;
    reflections_.push_back(summary);
    return summary;
}

std::optional<MemoryRecord> MemoryStore::latest_evaluative_for_op(const std::string& agent_id,
                                                                  const std::string& op_id) const {
    const auto* bucket_ptr = bucket(agent_id);
    if (!bucket_ptr) return std::nullopt;
    for (auto it = bucket_ptr->rbegin(); it != bucket_ptr->rend(); ++it) {
        if (it->kind != MemoryKind::Evaluative) continue;
        if (it->payload.is_object() && it->payload.value("op_id", "") == op_id) return *it;
    }
    return std::nullopt;
}

std::uint64_t MemoryStore::record_count(const std::string& agent_id) const {
    const auto* bucket_ptr = bucket(agent_id);
    return bucket_ptr ? bucket_ptr->size() : 0;
}

std::map<std::string, std::uint64_t> MemoryStore::offsets() const {
    std::lock_guard<std::mutex> lock(map_mutex_);
    std::map<std::string, std::uint64_t> out;
    for (const auto& [agent_id, bucket] : records_) out[agent_id] = bucket.size();
    return out;
}

std::vector<std::string> MemoryStore::agent_ids() const {
    std::lock_guard<std::mutex> lock(map_mutex_);
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& [agent_id, bucket] : records_) out.push_back(agent_id);
    return out;
}

void MemoryStore::save(std::ostream& out) const {
    std::lock_guard<std::mutex> lock(map_mutex_);
    for (const auto& [agent_id, bucket] : records_)
        for (const auto& rec : bucket) out << rec.to_json().dump() << '\n';
}

void MemoryStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    save(out);
    if (!out.good()) throw IoError("write failed for '" + path + "'");
}

MemoryStore MemoryStore::load(std::istream& in) {
    MemoryStore store;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        MemoryRecord rec;
        try {
            rec = MemoryRecord::from_json(parse_json(line, "memory log line " +
                                                               std::to_string(lineno)));
        } catch (const Json::exception& e) {
            throw StorageError("memory log line " + std::to_string(lineno) + ": " + e.what());
        }
        auto& bucket = store.records_[rec.agent_id];
        if (rec.seq != bucket.size() + 1)
            throw StorageError("memory log line " + std::to_string(lineno) + ": seq " +
                               std::to_string(rec.seq) + " breaks the per-agent sequence");
        bucket.push_back(std::move(rec));
    }
    return store;
}

MemoryStore MemoryStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return load(in);
}

}  // namespace forgesim
