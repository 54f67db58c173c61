#include "forgesim/backends.hpp"

#include <array>
#include <cctype>

namespace forgesim {

const char* to_string(CognitionTask task) {
    switch (task) {
        case CognitionTask::StyleDescription: return "StyleDescription";
        case CognitionTask::Describe: return "Describe";
        case CognitionTask::Reflect: return "Reflect";
        case CognitionTask::RoleUtterance: return "RoleUtterance";
        case CognitionTask::StanceClassify: return "StanceClassify";
        case CognitionTask::SelfScore: return "SelfScore";
    }
    return "?";
}

CognitionTask cognition_task_from_string(const std::string& name) {
    if (name == "StyleDescription") return CognitionTask::StyleDescription;
    if (name == "Describe") return CognitionTask::Describe;
    if (name == "Reflect") return CognitionTask::Reflect;
    if (name == "RoleUtterance") return CognitionTask::RoleUtterance;
    if (name == "StanceClassify") return CognitionTask::StanceClassify;
    if (name == "SelfScore") return CognitionTask::SelfScore;
    throw ConfigError("unknown cognition task '" + name + "'");
}

Rational parse_wire_score(const Json& value, const std::string& field) {
    Rational score;
    if (value.is_string()) {
        try {
            score = Rational::parse(value.get<std::string>());
        } catch (const OutOfRangeError& e) {
            throw BackendError(BackendErrorKind::Protocol,
                               field + ": " + std::string(e.what()));
        }
    } else if (value.is_number()) {
        score = Rational::from_double_quantized(value.get<double>());
    } else {
        throw BackendError(BackendErrorKind::Protocol, field + " must be a number or string");
    }
    if (score < Rational(0) || score > Rational(1))
        throw BackendError(BackendErrorKind::Protocol, field + " out of [0,1]: " + score.to_string());
    return score;
}

namespace {

// Hash-to-[0,1] grid with denominator 1e6; keeps fused-score arithmetic
// comfortably inside int64.
Rational hash_score(std::uint64_t h) {
    return Rational(static_cast<std::int64_t>(h % 1000001ULL), 1000000LL);
}

const std::array<const char*, 10> kStyleWords = {
    "identity", "swap", "attribute", "expression", "style",
    "blend", "texture", "synthesis", "smile", "likeness",
};

std::string stance_token_for(const std::string& text) {
    std::string lower;
    lower.reserve(text.size());
    for (const char c : text)
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    // Fake-keywords take precedence over real-keywords in mixed text.
    if (lower.find("fake") != std::string::npos || lower.find("forgery") != std::string::npos ||
        lower.find("forged") != std::string::npos)
        return "AssertsFake";
    if (lower.find("real") != std::string::npos || lower.find("authentic") != std::string::npos)
        return "AssertsReal";
    return "Neutral";
}

std::string utterance_for(const std::string& role, const std::string& stance) {
    if (stance == "AssertsReal") {
        if (role == "Watcher") return "Love this, clearly a real moment.";
        if (role == "Explorer") return "Compared with other posts from the event, this one reads as real.";
        if (role == "Critic") return "Checked the edges and lighting; I'd call this one real.";
        if (role == "Chatter") return "Everyone says this is real, so it must be.";
        if (role == "Poster") return "Reposting, this one is real.";
        if (role == "Auditor") return "Verified: this photograph is authentic and unedited.";
        return "Looks completely real to me.";
    }
    if (stance == "AssertsFake") {
        if (role == "Watcher") return "Hmm, someone said this might be a fake.";
        if (role == "Explorer") return "Cross-checking similar posts, this looks like a forgery.";
        if (role == "Critic") return "Artifacts around the jawline and hairline; obvious forgery.";
        if (role == "Chatter") return "People in the thread are calling it fake.";
        if (role == "Poster") return "Sharing with a warning: likely forged.";
        if (role == "Auditor") return "Verified: this image is a fabricated forgery.";
        return "This looks like an obvious forgery.";
    }
    if (role == "Watcher") return "Interesting shot, liked.";
    if (role == "Explorer") return "Seen a few posts about this event today.";
    if (role == "Critic") return "Hard to judge from this resolution alone.";
    if (role == "Chatter") return "What do you all think of this one?";
    if (role == "Poster") return "Sharing for visibility.";
    return "Noted.";
}

class StubCognition final : public CognitionBackend {
public:
    explicit StubCognition(std::uint64_t seed) : seed_(seed) {}

    CognitionResponse call(const CognitionRequest& request) override {
        const std::uint64_t h =
            fnv1a64(request.context.dump(), seed_ ^ fnv1a64(to_string(request.task)));
        switch (request.task) {
            case CognitionTask::StyleDescription: return style_description(request.context, h);
            case CognitionTask::Describe: return describe(request.context);
            case CognitionTask::Reflect: return reflect(request.context, h);
            case CognitionTask::RoleUtterance: return role_utterance(request.context);
            case CognitionTask::StanceClassify: return stance_classify(request.context);
            case CognitionTask::SelfScore: return self_score(h);
        }
        throw BackendError(BackendErrorKind::Protocol, "unknown cognition task");
    }

private:
    static CognitionResponse style_description(const Json& context, std::uint64_t h) {
        const char* first = kStyleWords[h % kStyleWords.size()];
        const char* second = kStyleWords[(h / kStyleWords.size() + 1) % kStyleWords.size()];
        std::string methods;
        if (context.contains("records")) {
            for (const auto& rec : context["records"]) {
                if (!methods.empty()) methods += ", ";
                methods += rec.value("method_id", "?");
            }
        }
        CognitionResponse r;
        r.text = std::string("Favors ") + first + " and " + second + " work";
        if (!methods.empty()) r.text += "; frequently uses " + methods;
        r.text += ".";
        return r;
    }

    static CognitionResponse describe(const Json& context) {
        CognitionResponse r;
        if (context.value("kind", "") == "forgery") {
            if (context.value("intent", "") == "Misleading") {
                r.text = "Untouched original photo, completely real, no edits here.";
            } else {
                std::string cats;
                for (const auto& c : context["categories"]) {
                    if (!cats.empty()) cats += ", ";
                    cats += c.get<std::string>();
                }
                r.text = "Edited portrait: applied " + cats + " in " +
                         std::to_string(context.value("steps", 0)) + " step(s).";
            }
        } else {
            r.text = "Portrait photo: " + context.value("image_ref", "") + ".";
        }
        return r;
    }

    static CognitionResponse reflect(const Json& context, std::uint64_t h) {
        std::size_t accepted = 0;
        std::size_t total = 0;
        if (context.contains("window")) {
            for (const auto& payload : context["window"]) {
                ++total;
                if (payload.value("decision", "") == "Accept" ||
                    payload.value("assessment", "") == "accepted")
                    ++accepted;
            }
        }
        CognitionResponse r;
        r.text = "Reviewed " + std::to_string(total) + " memories (" + std::to_string(accepted) +
                 " accepted); refine " + kStyleWords[h % kStyleWords.size()] + " next.";
        return r;
    }

    static CognitionResponse role_utterance(const Json& context) {
        CognitionResponse r;
        r.text = utterance_for(context.value("role", ""), context.value("stance", "Neutral"));
        return r;
    }

    static CognitionResponse stance_classify(const Json& context) {
        CognitionResponse r;
        r.text = stance_token_for(context.value("text", ""));
        return r;
    }

    static CognitionResponse self_score(std::uint64_t h) {
        CognitionResponse r;
        r.score = hash_score(h);
        r.text = "Self-assessment " + r.score->to_string() + ".";
        return r;
    }

    std::uint64_t seed_;
};

class StubDetector final : public DetectorBackend {
public:
    explicit StubDetector(std::uint64_t seed) : seed_(seed) {}

    DetectorResponse call(const DetectorRequest& request) override {
        return DetectorResponse{hash_score(fnv1a64(request.image_ref, seed_))};
    }

private:
    std::uint64_t seed_;
};

// Output reference encodes the applied operator, so a chain's provenance is
// the left-fold of op ids over the source reference.
class StubEdit final : public EditBackend {
public:
    explicit StubEdit(std::uint64_t seed) : seed_(seed) {}

    EditResponse call(const EditRequest& request) override {
        if (request.image_ref.empty())
            throw BackendError(BackendErrorKind::Protocol, "edit: empty image_ref");
        return EditResponse{request.image_ref + ">" + request.op_id};
    }

private:
    std::uint64_t seed_;  // unused: edits are content-determined
};

}  // namespace

std::shared_ptr<CognitionBackend> make_stub_cognition(std::uint64_t seed) {
    return std::make_shared<StubCognition>(seed);
}

std::shared_ptr<DetectorBackend> make_stub_detector(std::uint64_t seed) {
    return std::make_shared<StubDetector>(seed);
}

std::shared_ptr<EditBackend> make_stub_edit(std::uint64_t seed) {
    return std::make_shared<StubEdit>(seed);
}

}  // namespace forgesim
