#pragma once

// Shared builders: toy metadata tables, a small toolbox, synthetic profiles
// and blueprints, and call-recording backend decorators.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "forgesim/actions.hpp"
#include "forgesim/backends.hpp"
#include "forgesim/profile.hpp"
#include "forgesim/rng.hpp"

namespace fixtures {

using namespace forgesim;

// The 4-record toy table behind the conformity examples:
// Pop(X)=3, Pop(Y)=1; c1 -> 7/3, c2 -> 3.
inline std::vector<ForgeryRecord> toy_table() {
    return {
        {"r1", "c1", "mA", "X"},
        {"r2", "c1", "mB", "X"},
        {"r3", "c1", "mA", "Y"},
        {"r4", "c2", "mC", "X"},
    };
}

// Seeded synthetic table: `creators` creators, method/target pools, `rows` rows.
inline std::vector<ForgeryRecord> synthetic_table(std::size_t rows, std::size_t creators,
                                                  std::size_t methods, std::size_t targets,
                                                  std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ForgeryRecord> records;
    records.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        ForgeryRecord rec;
        rec.record_id = "rec-" + std::to_string(i + 1);
        rec.creator_id = "c" + std::to_string(1 + rng.next_index(creators));
        rec.method_id = "m" + std::to_string(1 + rng.next_index(methods));
        rec.target_id = "t" + std::to_string(1 + rng.next_index(targets));
        records.push_back(std::move(rec));
    }
    return records;
}

inline Toolbox small_toolbox() {
    Toolbox toolbox;
    EditOperator swap;
    swap.op_id = "face_swap";
    swap.category = ToolCategory::IdentityManipulation;
    swap.params.push_back({"blend", ParamRange{0.0, 1.0}});
    EditOperator reenact;
    reenact.op_id = "reenact";
    reenact.category = ToolCategory::IdentityManipulation;
    EditOperator age;
    age.op_id = "age_edit";
    age.category = ToolCategory::AttributeExpressionEditing;
    age.params.push_back({"delta_years", ParamRange{-20.0, 20.0}});
    EditOperator smile;
    smile.op_id = "smile_edit";
    smile.category = ToolCategory::AttributeExpressionEditing;
    smile.params.push_back({"mode", ParamChoice{{"subtle", "broad"}}});
    EditOperator style;
    style.op_id = "style_blend";
    style.category = ToolCategory::StyleBasedSynthesis;
    style.params.push_back({"strength", ParamRange{0.0, 1.0}});
    toolbox.operators = {swap, reenact, age, smile, style};
    return toolbox;
}

inline AgentProfile plain_profile(const std::string& agent_id = "c1") {
    AgentProfile profile;
    profile.agent_id = agent_id;
    profile.frequency = 4;
    profile.diversity = 2;
    profile.conformity = Rational(7, 3);
    profile.style_text = "No particular preferences.";
    return profile;
}

inline ForgeryBlueprint stub_blueprint(const std::string& id = "bp-000001",
                                       Intent intent = Intent::Accurate) {
    ForgeryBlueprint bp;
    bp.blueprint_id = id;
    bp.source_image_ref = "real-000001";
    bp.result_image_ref = "real-000001>face_swap";
    bp.description = "Edited portrait: applied identity manipulation in 1 step(s).";
    bp.y = 1;
    bp.delta_prime = intent == Intent::Accurate ? 1 : 0;
    bp.action.intent = intent;
    bp.action.chain.steps.push_back({"face_swap", Json{{"blend", 0.5}}});
    bp.action.description = bp.description;
    bp.agent_id = "c1";
    bp.created_tick = 1;
    bp.s_llm = Rational(1, 2);
    bp.s_disc = Rational(1, 2);
    bp.fused = Rational(1, 2);
    bp.tau_accept = Rational(3, 10);
    return bp;
}

// Decorators that count calls and keep requests for inspection.
class RecordingCognition : public CognitionBackend {
public:
    explicit RecordingCognition(std::shared_ptr<CognitionBackend> inner)
        : inner_(std::move(inner)) {}
    CognitionResponse call(const CognitionRequest& request) override {
        requests.push_back(request);
        return inner_->call(request);
    }
    std::vector<CognitionRequest> requests;

private:
    std::shared_ptr<CognitionBackend> inner_;
};

class RecordingEdit : public EditBackend {
public:
    explicit RecordingEdit(std::shared_ptr<EditBackend> inner) : inner_(std::move(inner)) {}
    EditResponse call(const EditRequest& request) override {
        ++calls;
        requests.push_back(request);
        return inner_->call(request);
    }
    std::size_t calls = 0;
    std::vector<EditRequest> requests;

private:
    std::shared_ptr<EditBackend> inner_;
};

}  // namespace fixtures
