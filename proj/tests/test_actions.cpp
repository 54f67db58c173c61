#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "forgesim/actions.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace forgesim;

TEST_CASE("toolbox parsing validates structure") {
    const Json good = Json::parse(R"({
      "operators": [
        {"op_id": "face_swap", "category": "IdentityManipulation",
         "params": [{"name": "blend", "min": 0.0, "max": 1.0}]},
        {"op_id": "smile_edit", "category": "AttributeExpressionEditing",
         "params": [{"name": "mode", "choices": ["subtle", "broad"]}]}
      ]})");
    const Toolbox toolbox = Toolbox::parse(good);
    REQUIRE(toolbox.operators.size() == 2);
    CHECK(toolbox.find("face_swap") != nullptr);
    CHECK(toolbox.find("missing") == nullptr);
    CHECK(toolbox.categories().size() == 2);

    CHECK_THROWS_AS(Toolbox::parse(Json::parse(R"({"operators": []})")), ConfigError);
    CHECK_THROWS_AS(Toolbox::parse(Json::parse(
                        R"({"operators": [{"op_id": "a", "category": "Nope"}]})")),
                    ConfigError);
    CHECK_THROWS_AS(
        Toolbox::parse(Json::parse(
            R"({"operators": [{"op_id": "a", "category": "IdentityManipulation"},
                              {"op_id": "a", "category": "IdentityManipulation"}]})")),
        ConfigError);
}

TEST_CASE("chain sampling is deterministic under a fixed seed") {
    const auto toolbox = fixtures::small_toolbox();
    const auto profile = fixtures::plain_profile();
    MemoryStore memory;
    const auto first = sample_operator_chain(profile, toolbox, memory, 42);
    const auto second = sample_operator_chain(profile, toolbox, memory, 42);
    CHECK(first.to_json().dump() == second.to_json().dump());

    const auto other_seed = sample_operator_chain(profile, toolbox, memory, 43);
    // Not a hard guarantee per-seed, but across the fixture it differs.
    CHECK(first.to_json().dump() != other_seed.to_json().dump());
}

TEST_CASE("chain lengths respect the configured law") {
    const auto toolbox = fixtures::small_toolbox();
    const auto profile = fixtures::plain_profile();
    MemoryStore memory;
    ChainLengthDist lengths;
    lengths.weights = {{2, 1.0}};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto chain = sample_operator_chain(profile, toolbox, memory, seed, lengths);
        CHECK(chain.steps.size() == 2);
    }
    CHECK(lengths.max_length() == 2);
}

TEST_CASE("10k single-step draws pass chi-square uniformity over categories") {
    const auto toolbox = fixtures::small_toolbox();
    const auto profile = fixtures::plain_profile();  // uniform weights
    MemoryStore memory;
    ChainLengthDist one_step;
    one_step.weights = {{1, 1.0}};

    std::map<std::string, std::uint64_t> observed;
    const std::uint64_t draws = 10000;
    for (std::uint64_t seed = 1; seed <= draws; ++seed) {
        const auto chain = sample_operator_chain(profile, toolbox, memory, seed, one_step);
        REQUIRE(chain.steps.size() == 1);
        observed[to_string(toolbox.find(chain.steps[0].op_id)->category)]++;
    }
    const std::map<std::string, double> expected = {
        {"IdentityManipulation", 1.0 / 3},
        {"AttributeExpressionEditing", 1.0 / 3},
        {"StyleBasedSynthesis", 1.0 / 3},
    };
    const double stat = oracle::chi_square(observed, expected, draws);
    CHECK(stat < oracle::kChiSq99Df2);
}

TEST_CASE("a zero-weight category never appears in 10k draws") {
    const auto toolbox = fixtures::small_toolbox();
    const auto profile = fixtures::plain_profile();
    MemoryStore memory;
    ToolWeightPolicy policy = ToolWeightPolicy::defaults();
    policy.base_weights[ToolCategory::IdentityManipulation] = 0.0;
    ChainLengthDist one_step;
    one_step.weights = {{1, 1.0}};

    for (std::uint64_t seed = 1; seed <= 10000; ++seed) {
        const auto chain =
            sample_operator_chain(profile, toolbox, memory, seed, one_step, policy);
        CHECK(toolbox.find(chain.steps[0].op_id)->category != ToolCategory::IdentityManipulation);
    }
}

TEST_CASE("memory-preferred parameters are reused when in domain") {
    const auto toolbox = fixtures::small_toolbox();
    const auto profile = fixtures::plain_profile();
    ChainLengthDist one_step;
    one_step.weights = {{1, 1.0}};
    ToolWeightPolicy identity_only = ToolWeightPolicy::defaults();
    identity_only.base_weights[ToolCategory::AttributeExpressionEditing] = 0.0;
    identity_only.base_weights[ToolCategory::StyleBasedSynthesis] = 0.0;

    MemoryStore memory;
    memory.write("c1", MemoryKind::Evaluative,
                 Json{{"op_id", "face_swap"}, {"preferred_params", Json{{"blend", 0.125}}}}, 1);

    bool saw_face_swap = false;
    for (std::uint64_t seed = 1; seed <= 64; ++seed) {
        const auto chain =
            sample_operator_chain(profile, toolbox, memory, seed, one_step, identity_only);
        if (chain.steps[0].op_id == "face_swap") {
            saw_face_swap = true;
            CHECK(chain.steps[0].params["blend"] == 0.125);
        }
    }
    CHECK(saw_face_swap);

    // Out-of-domain preference is ignored and freshly sampled.
    MemoryStore bad_memory;
    bad_memory.write("c1", MemoryKind::Evaluative,
                     Json{{"op_id", "face_swap"}, {"preferred_params", Json{{"blend", 7.0}}}}, 1);
    for (std::uint64_t seed = 1; seed <= 64; ++seed) {
        const auto chain =
            sample_operator_chain(profile, toolbox, bad_memory, seed, one_step, identity_only);
        if (chain.steps[0].op_id == "face_swap") {
            const double blend = chain.steps[0].params["blend"].get<double>();
            CHECK(blend >= 0.0);
            CHECK(blend <= 1.0);
        }
    }
}

TEST_CASE("apply_chain: single application and order sensitivity") {
    const auto toolbox = fixtures::small_toolbox();
    auto edit = make_stub_edit(1);

    OperatorChain one;
    one.steps.push_back({"reenact", Json::object()});
    CHECK(apply_chain("src", one, toolbox, *edit) == "src>reenact");

    OperatorChain ab;
    ab.steps.push_back({"reenact", Json::object()});
    ab.steps.push_back({"smile_edit", Json{{"mode", "subtle"}}});
    OperatorChain ba;
    ba.steps.push_back({"smile_edit", Json{{"mode", "subtle"}}});
    ba.steps.push_back({"reenact", Json::object()});
    CHECK(apply_chain("src", ab, toolbox, *edit) != apply_chain("src", ba, toolbox, *edit));
}

TEST_CASE("apply_chain provenance equals the left fold of op ids") {
    const auto toolbox = fixtures::small_toolbox();
    auto edit = make_stub_edit(1);
    OperatorChain chain;
    chain.steps.push_back({"reenact", Json::object()});
    chain.steps.push_back({"face_swap", Json{{"blend", 0.5}}});
    chain.steps.push_back({"style_blend", Json{{"strength", 0.1}}});

    std::string folded = "src";
    for (const auto& step : chain.steps) folded += ">" + step.op_id;
    CHECK(apply_chain("src", chain, toolbox, *edit) == folded);
}

TEST_CASE("apply_chain invokes the backend once per step, in order") {
    const auto toolbox = fixtures::small_toolbox();
    fixtures::RecordingEdit recording(make_stub_edit(1));
    OperatorChain chain;
    chain.steps.push_back({"reenact", Json::object()});
    chain.steps.push_back({"face_swap", Json{{"blend", 0.5}}});
    chain.steps.push_back({"style_blend", Json{{"strength", 0.9}}});
    (void)apply_chain("src", chain, toolbox, recording);
    REQUIRE(recording.calls == 3);
    CHECK(recording.requests[0].image_ref == "src");
    CHECK(recording.requests[1].image_ref == "src>reenact");
    CHECK(recording.requests[2].image_ref == "src>reenact>face_swap");
}

TEST_CASE("apply_chain validates ops and parameters") {
    const auto toolbox = fixtures::small_toolbox();
    auto edit = make_stub_edit(1);

    OperatorChain empty;
    CHECK_THROWS_AS(apply_chain("src", empty, toolbox, *edit), InvalidParamsError);

    OperatorChain unknown;
    unknown.steps.push_back({"not_a_tool", Json::object()});
    CHECK_THROWS_AS(apply_chain("src", unknown, toolbox, *edit), InvalidParamsError);

    OperatorChain out_of_range;
    out_of_range.steps.push_back({"face_swap", Json{{"blend", 2.0}}});
    CHECK_THROWS_AS(apply_chain("src", out_of_range, toolbox, *edit), InvalidParamsError);

    OperatorChain missing_param;
    missing_param.steps.push_back({"face_swap", Json::object()});
    CHECK_THROWS_AS(apply_chain("src", missing_param, toolbox, *edit), InvalidParamsError);

    OperatorChain bad_choice;
    bad_choice.steps.push_back({"smile_edit", Json{{"mode", "huge"}}});
    CHECK_THROWS_AS(apply_chain("src", bad_choice, toolbox, *edit), InvalidParamsError);
}

TEST_CASE("backend failures carry the failing step index") {
    struct FailingEdit : EditBackend {
        EditResponse call(const EditRequest& request) override {
            if (++calls == 2) throw BackendError(BackendErrorKind::Transport, "boom");
            return {request.image_ref + ">" + request.op_id};
        }
        int calls = 0;
    } failing;

    const auto toolbox = fixtures::small_toolbox();
    OperatorChain chain;
    chain.steps.push_back({"reenact", Json::object()});
    chain.steps.push_back({"reenact", Json::object()});
    try {
        (void)apply_chain("src", chain, toolbox, failing);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("step 2") != std::string::npos);
        CHECK(e.kind == BackendErrorKind::Transport);
    }
}

TEST_CASE("descriptions follow intent") {
    const auto toolbox = fixtures::small_toolbox();
    auto cognition = make_stub_cognition(1);
    OperatorChain chain;
    chain.steps.push_back({"face_swap", Json{{"blend", 0.5}}});
    chain.steps.push_back({"style_blend", Json{{"strength", 0.3}}});

    const auto accurate =
        generate_description(chain, toolbox, "ref", Intent::Accurate, *cognition);
    CHECK(accurate.find(display_name(ToolCategory::IdentityManipulation)) != std::string::npos);
    CHECK(accurate.find(display_name(ToolCategory::StyleBasedSynthesis)) != std::string::npos);

    const auto misleading =
        generate_description(chain, toolbox, "ref", Intent::Misleading, *cognition);
    CHECK(misleading.find("real") != std::string::npos);
}

TEST_CASE("assembler: delta' mirrors intent, ids are unique") {
    BlueprintAssembler assembler;
    OperatorChain chain;
    chain.steps.push_back({"face_swap", Json{{"blend", 0.5}}});

    const auto accurate = assembler.assemble("src", chain, "src>face_swap", "desc",
                                             Intent::Accurate, "c1", 7);
    CHECK(accurate.y == 1);
    CHECK(accurate.delta_prime == 1);
    CHECK(accurate.created_tick == 7);

    const auto misleading = assembler.assemble("src", chain, "src>face_swap", "desc",
                                               Intent::Misleading, "c1", 8);
    CHECK(misleading.delta_prime == 0);
    CHECK(accurate.blueprint_id != misleading.blueprint_id);
    CHECK(accurate.blueprint_id == "bp-000001");
    CHECK(misleading.blueprint_id == "bp-000002");
}

TEST_CASE("blueprints round-trip through json") {
    const auto bp = fixtures::stub_blueprint("bp-000042", Intent::Misleading);
    const auto doc = bp.to_json();
    const auto restored = ForgeryBlueprint::from_json(doc);
    CHECK(restored.to_json().dump() == doc.dump());
    CHECK(restored.delta_prime == 0);
    CHECK(restored.action.intent == Intent::Misleading);
    CHECK(restored.fused == Rational(1, 2));
}
