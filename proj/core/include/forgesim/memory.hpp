#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forgesim/backends.hpp"
#include "forgesim/jsonio.hpp"

namespace forgesim {

enum class MemoryKind { Factual, Evaluative };
const char* to_string(MemoryKind kind);
MemoryKind memory_kind_from_string(const std::string& name);

struct MemoryRecord {
    std::uint64_t seq = 0;  // strictly increasing per agent, gap-free from 1
    std::string agent_id;
    MemoryKind kind = MemoryKind::Factual;
    std::uint64_t tick = 0;
    Json payload;

    Json to_json() const;
    static MemoryRecord from_json(const Json& doc);
};

struct ReflectionSummary {
    std::string agent_id;
    std::uint64_t seq_from = 0;
    std::uint64_t seq_to = 0;
    std::string guidance_text;
    std::uint64_t produced_at = 0;

    Json to_json() const;
};

/// Append-only per-agent memory. Records are never mutated or deleted;
/// retrieval is strict recency. Writers must be one-per-agent; readers may
/// run concurrently with writers for other agents.
class MemoryStore {
public:
    MemoryStore() = default;
    // Moves require exclusive access to both stores.
    MemoryStore(MemoryStore&& other) noexcept
        : records_(std::move(other.records_)), reflections_(std::move(other.reflections_)) {}
    MemoryStore& operator=(MemoryStore&& other) noexcept {
        records_ = std::move(other.records_);
        reflections_ = std::move(other.reflections_);
        return *this;
    }

    /// Persist one record; returns its seq (= previous max + 1).
    std::uint64_t write(const std::string& agent_id, MemoryKind kind, Json payload,
                        std::uint64_t tick);

    /// Up to last_n records, newest first, optionally filtered by kind.
    std::vector<MemoryRecord> retrieve(const std::string& agent_id,
                                       std::optional<MemoryKind> kind_filter,
                                       std::uint64_t last_n) const;

    /// Digest the newest `window` records through the cognition backend.
    /// Throws InsufficientDataError when the agent has no records.
    ReflectionSummary reflect(const std::string& agent_id, std::uint64_t window,
                              CognitionBackend& cognition, std::uint64_t tick);

    /// Newest evaluative record whose payload carries the given op_id.
    std::optional<MemoryRecord> latest_evaluative_for_op(const std::string& agent_id,
                                                         const std::string& op_id) const;

    std::uint64_t record_count(const std::string& agent_id) const;
    std::map<std::string, std::uint64_t> offsets() const;  // per-agent record counts
    std::vector<std::string> agent_ids() const;            // sorted

    const std::vector<ReflectionSummary>& reflections() const { return reflections_; }

    /// One record per line, fields (seq, agent_id, kind, tick, payload).
    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    static MemoryStore load(std::istream& in);
    static MemoryStore load(const std::string& path);

private:
    const std::deque<MemoryRecord>* bucket(const std::string& agent_id) const;

    std::map<std::string, std::deque<MemoryRecord>> records_;
    std::vector<ReflectionSummary> reflections_;
    mutable std::mutex map_mutex_;  // guards bucket creation only
};

}  // namespace forgesim
