#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "forgesim/jsonio.hpp"
#include "forgesim/rational.hpp"

namespace forgesim {

struct BackendConfig {
    std::string endpoint_url;
    std::uint32_t timeout_ms = 5000;
    std::uint32_t max_retries = 2;
    std::uint32_t retry_backoff_ms = 100;
    std::optional<std::string> auth_token;
};

// One entry per HTTP attempt, successful or not.
struct CallLog {
    std::string backend;
    std::string path;
    std::uint32_t attempt = 0;
    int status = 0;
    double latency_ms = 0.0;
    bool ok = false;
};
using CallLogSink = std::function<void(const CallLog&)>;

enum class CognitionTask {
    StyleDescription,  // summarize a creator's stylistic taste from sampled records
    Describe,          // caption an image reference
    Reflect,           // digest a memory window into guidance
    RoleUtterance,     // produce a social-role utterance with a target stance
    StanceClassify,    // map free text onto a stance token
    SelfScore,         // agent's own quality estimate; response carries a score
};

const char* to_string(CognitionTask task);
CognitionTask cognition_task_from_string(const std::string& name);

struct CognitionRequest {
    CognitionTask task = CognitionTask::Describe;
    Json context;  // structured task-specific document
};

struct CognitionResponse {
    std::string text;
    std::optional<Rational> score;  // present for SelfScore; range [0,1]
};

struct DetectorRequest {
    std::string image_ref;
};

struct DetectorResponse {
    Rational forgery_confidence;  // [0,1]
};

struct EditRequest {
    std::string image_ref;
    std::string op_id;
    Json params;
};

struct EditResponse {
    std::string image_ref;
};

// Contract shared by the HTTP clients and the seeded stubs. Implementations
// must be safe for concurrent calls.
class CognitionBackend {
public:
    virtual ~CognitionBackend() = default;
    virtual CognitionResponse call(const CognitionRequest& request) = 0;
};

class DetectorBackend {
public:
    virtual ~DetectorBackend() = default;
    virtual DetectorResponse call(const DetectorRequest& request) = 0;
};

class EditBackend {
public:
    virtual ~EditBackend() = default;
    virtual EditResponse call(const EditRequest& request) = 0;
};

/// Deterministic stand-ins. Responses are pure functions of (seed, request
/// content), so concurrent callers see the same stream as serial ones.
std::shared_ptr<CognitionBackend> make_stub_cognition(std::uint64_t seed);
std::shared_ptr<DetectorBackend> make_stub_detector(std::uint64_t seed);
std::shared_ptr<EditBackend> make_stub_edit(std::uint64_t seed);

/// Production clients: POST /v1/cognition, /v1/detect, /v1/edit with JSON
/// bodies. Transient failures (timeout, transport, non-200) are retried with
/// exponential backoff up to 1 + max_retries attempts; schema violations
/// throw ProtocolError immediately.
std::shared_ptr<CognitionBackend> make_http_cognition(const BackendConfig& cfg,
                                                      CallLogSink log = nullptr);
std::shared_ptr<DetectorBackend> make_http_detector(const BackendConfig& cfg,
                                                    CallLogSink log = nullptr);
std::shared_ptr<EditBackend> make_http_edit(const BackendConfig& cfg,
                                            CallLogSink log = nullptr);

// The three capabilities a run needs, stub or HTTP, interchangeable.
struct BackendSet {
    std::shared_ptr<CognitionBackend> cognition;
    std::shared_ptr<DetectorBackend> detector;
    std::shared_ptr<EditBackend> edit;

    static BackendSet stubs(std::uint64_t seed) {
        return BackendSet{make_stub_cognition(seed), make_stub_detector(seed),
                          make_stub_edit(seed)};
    }
};

/// Parse a score field from a wire document: "n/d" or decimal strings parse
/// exactly; JSON numbers are quantized onto the 1e-9 grid so fused-score
/// arithmetic stays exact. Throws ProtocolError-style BackendError on
/// malformed or out-of-range values.
Rational parse_wire_score(const Json& value, const std::string& field);

}  // namespace forgesim
