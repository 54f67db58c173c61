#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forgesim/errors.hpp"
#include "forgesim/rng.hpp"

namespace forgesim {

// All emitted artifacts use ordered_json: object fields serialize in
// insertion order, so every file format keeps its declared field order and
// reruns are byte-identical.
using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text, const std::string& what) {
    Json parsed = Json::parse(text, nullptr, false);
    if (parsed.is_discarded()) throw ConfigError("malformed JSON in " + what);
    return parsed;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out.good()) throw IoError("write failed for '" + path + "'");
}

/// Visit each non-empty line of a file. Line numbers are 1-based.
inline void for_each_line(const std::string& path,
                          const std::function<void(std::size_t, const std::string&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(lineno, line);
    }
}

/// Rewrite a file keeping only its first `keep` non-empty lines. Used when
/// resuming from a checkpoint to drop output written after the snapshot.
inline void truncate_lines(const std::string& path, std::size_t keep) {
    std::vector<std::string> kept;
    for_each_line(path, [&](std::size_t, const std::string& line) {
        if (kept.size() < keep) kept.push_back(line);
    });
    if (kept.size() < keep)
        throw CorruptCheckpointError("'" + path + "' has fewer lines than the checkpoint recorded");
    std::string out;
    for (const auto& line : kept) {
        out += line;
        out += '\n';
    }
    write_text_file(path, out);
}

/// Append-mode JSONL sink, one document per line.
class JsonlWriter {
public:
    JsonlWriter() = default;

    void open(const std::string& path, bool append) {
        path_ = path;
        out_.open(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
        if (!out_) throw IoError("cannot open '" + path + "' for writing");
    }

    void write(const Json& doc) {
        out_ << doc.dump() << '\n';
        if (!out_.good()) throw IoError("write failed for '" + path_ + "'");
    }

    void write_raw(const std::string& line) {
        out_ << line << '\n';
        if (!out_.good()) throw IoError("write failed for '" + path_ + "'");
    }

    void flush() { out_.flush(); }
    bool is_open() const { return out_.is_open(); }

private:
    std::string path_;
    std::ofstream out_;
};

}  // namespace forgesim
