#include <chrono>
#include <thread>

#include <httplib.h>

#include "forgesim/backends.hpp"

namespace forgesim {
namespace {

bool is_timeout(httplib::Error err) {
    return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
           err == httplib::Error::Write;
}

// POST one JSON document, retrying transient failures (timeout, transport,
// non-200) with exponential backoff. Protocol errors are never retried.
Json post_with_retry(const BackendConfig& cfg, const std::string& backend_name,
                     const std::string& path, const Json& body, const CallLogSink& log) {
    const std::uint32_t attempts_allowed = 1 + cfg.max_retries;
    BackendErrorKind last_kind = BackendErrorKind::Transport;
    std::string last_message;

    for (std::uint32_t attempt = 1; attempt <= attempts_allowed; ++attempt) {
        const auto start = std::chrono::steady_clock::now();
        httplib::Client client(cfg.endpoint_url);
        const auto timeout_s = std::chrono::milliseconds(cfg.timeout_ms);
        client.set_connection_timeout(timeout_s);
        client.set_read_timeout(timeout_s);
        client.set_write_timeout(timeout_s);

        httplib::Headers headers;
        if (cfg.auth_token) headers.emplace("Authorization", "Bearer " + *cfg.auth_token);

        auto result = client.Post(path, headers, body.dump(), "application/json");

        CallLog entry;
        entry.backend = backend_name;
        entry.path = path;
        entry.attempt = attempt;
        entry.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();

        if (!result) {
            last_kind = is_timeout(result.error()) ? BackendErrorKind::Timeout
                                                   : BackendErrorKind::Transport;
            last_message = backend_name + " " + path + ": " + httplib::to_string(result.error());
            entry.status = 0;
            entry.ok = false;
        } else if (result->status != 200) {
            last_kind = BackendErrorKind::Transport;
            last_message =
                backend_name + " " + path + ": status " + std::to_string(result->status);
            entry.status = result->status;
            entry.ok = false;
        } else {
            entry.status = 200;
            entry.ok = true;
            if (log) log(entry);
            Json parsed = Json::parse(result->body, nullptr, false);
            if (parsed.is_discarded() || !parsed.is_object())
                throw BackendError(BackendErrorKind::Protocol,
                                   backend_name + " " + path + ": malformed response body",
                                   attempt);
            return parsed;
        }
        if (log) log(entry);

        if (attempt < attempts_allowed) {
            const std::uint64_t backoff =
                static_cast<std::uint64_t>(cfg.retry_backoff_ms) << (attempt - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        }
    }

    if (attempts_allowed == 1) throw BackendError(last_kind, last_message, 1);
    throw BackendError(BackendErrorKind::Exhausted,
                       last_message + " (" + std::string(to_string(last_kind)) + " after " +
                           std::to_string(attempts_allowed) + " attempts)",
                       attempts_allowed);
}

class HttpCognition final : public CognitionBackend {
public:
    HttpCognition(BackendConfig cfg, CallLogSink log)
        : cfg_(std::move(cfg)), log_(std::move(log)) {}

    CognitionResponse call(const CognitionRequest& request) override {
        Json body;
        body["task"] = to_string(request.task);
        body["context"] = request.context;
        const Json reply = post_with_retry(cfg_, "cognition", "/v1/cognition", body, log_);
        if (!reply.contains("text") || !reply["text"].is_string())
            throw BackendError(BackendErrorKind::Protocol, "cognition: missing text field");
        CognitionResponse response;
        response.text = reply["text"].get<std::string>();
        if (reply.contains("score") && !reply["score"].is_null())
            response.score = parse_wire_score(reply["score"], "cognition score");
        if (request.task == CognitionTask::SelfScore && !response.score)
            throw BackendError(BackendErrorKind::Protocol, "cognition: SelfScore without score");
        return response;
    }

private:
    BackendConfig cfg_;
    CallLogSink log_;
};

class HttpDetector final : public DetectorBackend {
public:
    HttpDetector(BackendConfig cfg, CallLogSink log)
        : cfg_(std::move(cfg)), log_(std::move(log)) {}

    DetectorResponse call(const DetectorRequest& request) override {
        Json body;
        body["image_ref"] = request.image_ref;
        const Json reply = post_with_retry(cfg_, "detector", "/v1/detect", body, log_);
        if (!reply.contains("forgery_confidence"))
            throw BackendError(BackendErrorKind::Protocol, "detector: missing forgery_confidence");
        return DetectorResponse{parse_wire_score(reply["forgery_confidence"], "forgery_confidence")};
    }

private:
    BackendConfig cfg_;
    CallLogSink log_;
};

class HttpEdit final : public EditBackend {
public:
    HttpEdit(BackendConfig cfg, CallLogSink log) : cfg_(std::move(cfg)), log_(std::move(log)) {}

    EditResponse call(const EditRequest& request) override {
        Json body;
        body["image_ref"] = request.image_ref;
        body["op_id"] = request.op_id;
        body["params"] = request.params;
        const Json reply = post_with_retry(cfg_, "edit", "/v1/edit", body, log_);
        if (!reply.contains("image_ref") || !reply["image_ref"].is_string() ||
            reply["image_ref"].get<std::string>().empty())
            throw BackendError(BackendErrorKind::Protocol, "edit: missing image_ref");
        return EditResponse{reply["image_ref"].get<std::string>()};
    }

private:
    BackendConfig cfg_;
    CallLogSink log_;
};

}  // namespace

std::shared_ptr<CognitionBackend> make_http_cognition(const BackendConfig& cfg, CallLogSink log) {
    return std::make_shared<HttpCognition>(cfg, std::move(log));
}

std::shared_ptr<DetectorBackend> make_http_detector(const BackendConfig& cfg, CallLogSink log) {
    return std::make_shared<HttpDetector>(cfg, std::move(log));
}

std::shared_ptr<EditBackend> make_http_edit(const BackendConfig& cfg, CallLogSink log) {
    return std::make_shared<HttpEdit>(cfg, std::move(log));
}

}  // namespace forgesim
