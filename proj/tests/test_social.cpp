#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "forgesim/social.hpp"
#include "support/fixtures.hpp"

using namespace forgesim;

TEST_CASE("labeling truth table matches the piecewise law, all six cases") {
    // (y, stance) -> (mismatch_flag, consistency)
    struct Case {
        int y;
        Stance stance;
        int mismatch;
    };
    const Case cases[] = {
        {1, Stance::AssertsReal, 1},  // forged claimed real: hard negative
        {1, Stance::AssertsFake, 0},
        {1, Stance::Neutral, 0},
        {0, Stance::AssertsReal, 0},
        {0, Stance::AssertsFake, 1},  // real declared forged
        {0, Stance::Neutral, 0},
    };
    for (const auto& c : cases) {
        const auto verdict = label_consistency(c.y, c.stance);
        CHECK(verdict.mismatch_flag == c.mismatch);
        CHECK(verdict.consistency == 1 - c.mismatch);
        CHECK(verdict.consistency + verdict.mismatch_flag == 1);
    }
}

TEST_CASE("consistency plus mismatch is 1 under randomized inputs") {
    Rng rng(99);
    const Stance stances[] = {Stance::AssertsReal, Stance::AssertsFake, Stance::Neutral};
    for (int i = 0; i < 1000; ++i) {
        const int y = static_cast<int>(rng.next_index(2));
        const Stance stance = stances[rng.next_index(3)];
        const auto verdict = label_consistency(y, stance, "text");
        CHECK(verdict.consistency + verdict.mismatch_flag == 1);
        CHECK(verdict.y == y);
    }
}

TEST_CASE("stance classification via stub keyword rules") {
    auto cognition = make_stub_cognition(1);
    CHECK(classify_stance("perfectly real", *cognition) == Stance::AssertsReal);
    CHECK(classify_stance("obvious forgery", *cognition) == Stance::AssertsFake);
    CHECK(classify_stance("interesting photo", *cognition) == Stance::Neutral);
    CHECK(classify_stance("This is authentic.", *cognition) == Stance::AssertsReal);
    CHECK(classify_stance("Looks forged to me", *cognition) == Stance::AssertsFake);
    // Mixed text: fake-keywords win.
    CHECK(classify_stance("claimed real but clearly fake", *cognition) == Stance::AssertsFake);
    CHECK_THROWS_AS(classify_stance("", *cognition), InsufficientDataError);
}

TEST_CASE("auditor stance always contradicts ground truth") {
    CHECK(auditor_stance_for(1) == Stance::AssertsReal);
    CHECK(auditor_stance_for(0) == Stance::AssertsFake);

    auto cognition = make_stub_cognition(5);
    const auto bp = fixtures::stub_blueprint();  // y = 1
    const auto claim = auditor_claim(bp, *cognition);
    CHECK(claim.role == Role::Auditor);
    CHECK(claim.action == EventAction::Claim);
    CHECK(claim.stance == Stance::AssertsReal);
    CHECK(!claim.text.empty());

    const auto again = auditor_claim(bp, *cognition);
    CHECK(again.text == claim.text);  // stub reproducibility
}

TEST_CASE("run_round: one event per roster slot, default roster of six") {
    auto cognition = make_stub_cognition(2);
    const auto bp = fixtures::stub_blueprint();
    const SocialConfig cfg = SocialConfig::defaults();
    REQUIRE(cfg.roster.size() == 6);

    const auto events = run_round(bp, cfg.roster, 1, *cognition, 42, cfg);
    REQUIRE(events.size() == 6);
    for (const auto& event : events) {
        CHECK(event.blueprint_id == bp.blueprint_id);
        CHECK(event.tick == 1);
    }
    // Canonical slot order follows the role enum.
    CHECK(events[0].role == Role::Watcher);
    CHECK(events[5].role == Role::Auditor);
    CHECK(events[5].action == EventAction::Claim);
    CHECK(events[5].stance == Stance::AssertsReal);

    CHECK_THROWS_AS(run_round(bp, {}, 1, *cognition, 42, cfg), InsufficientDataError);
}

TEST_CASE("run_round is deterministic under a fixed seed") {
    auto cognition = make_stub_cognition(2);
    const auto bp = fixtures::stub_blueprint();
    const SocialConfig cfg = SocialConfig::defaults();

    auto dump = [&](const std::vector<InteractionEvent>& events) {
        std::string out;
        for (const auto& e : events) out += e.to_json().dump() + "\n";
        return out;
    };
    CHECK(dump(run_round(bp, cfg.roster, 1, *cognition, 7, cfg)) ==
          dump(run_round(bp, cfg.roster, 1, *cognition, 7, cfg)));
}

TEST_CASE("critic asserts fake on forged blueprints per its bias") {
    auto cognition = make_stub_cognition(2);
    const auto bp = fixtures::stub_blueprint();
    SocialConfig cfg = SocialConfig::defaults();
    cfg.critic_asserts_fake_prob = 1.0;
    cfg.roster = {Role::Critic};

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto events = run_round(bp, cfg.roster, 1, *cognition, seed, cfg);
        REQUIRE(events.size() == 1);
        CHECK(events[0].stance == Stance::AssertsFake);
    }
}

TEST_CASE("chatter follows the majority stance of earlier events in the round") {
    auto cognition = make_stub_cognition(2);
    const auto bp = fixtures::stub_blueprint();
    SocialConfig cfg = SocialConfig::defaults();
    // Critic always flags fake and always speaks; chatter comes after.
    cfg.critic_asserts_fake_prob = 1.0;
    cfg.roster = {Role::Critic, Role::Chatter};

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto events = run_round(bp, cfg.roster, 1, *cognition, seed, cfg);
        REQUIRE(events.size() == 2);
        CHECK(events[0].role == Role::Critic);
        CHECK(events[1].role == Role::Chatter);
        CHECK(events[1].stance == Stance::AssertsFake);
    }
}

TEST_CASE("non-verbal actions carry no text and stay neutral") {
    auto cognition = make_stub_cognition(2);
    const auto bp = fixtures::stub_blueprint();
    SocialConfig cfg = SocialConfig::defaults();
    cfg.roster = {Role::Poster};  // Share/Repost only

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto events = run_round(bp, cfg.roster, 1, *cognition, seed, cfg);
        REQUIRE(events.size() == 1);
        CHECK(events[0].text.empty());
        CHECK(events[0].stance == Stance::Neutral);
        const bool non_verbal = events[0].action == EventAction::Share ||
                                events[0].action == EventAction::Repost;
        CHECK(non_verbal);
    }
}

TEST_CASE("trajectory shape: rounds x roster size, byte-identical reruns") {
    auto cognition = make_stub_cognition(2);
    const auto bp = fixtures::stub_blueprint();
    SocialConfig cfg = SocialConfig::defaults();
    cfg.rounds = 3;

    const auto trajectory = run_trajectory(bp, *cognition, 11, cfg);
    CHECK(trajectory.rounds == 3);
    CHECK(trajectory.events.size() == 3 * cfg.roster.size());
    for (std::size_t i = 0; i < trajectory.events.size(); ++i) {
        const auto& event = trajectory.events[i];
        CHECK(event.tick == 1 + i / cfg.roster.size());
    }

    const auto rerun = run_trajectory(bp, *cognition, 11, cfg);
    REQUIRE(rerun.events.size() == trajectory.events.size());
    for (std::size_t i = 0; i < rerun.events.size(); ++i)
        CHECK(rerun.events[i].to_json().dump() == trajectory.events[i].to_json().dump());

    // Event ids are unique within the trajectory.
    std::set<std::string> ids;
    for (const auto& event : trajectory.events) CHECK(ids.insert(event.event_id).second);
}

TEST_CASE("build_sample_pairs: own sample plus one per verbal event") {
    auto cognition = make_stub_cognition(2);
    const auto bp = fixtures::stub_blueprint("bp-000009", Intent::Misleading);
    SocialConfig cfg = SocialConfig::defaults();
    const auto trajectory = run_trajectory(bp, *cognition, 4, cfg);

    std::size_t verbal = 0;
    for (const auto& event : trajectory.events)
        if (event.action == EventAction::Comment || event.action == EventAction::Flag ||
            event.action == EventAction::Claim)
            ++verbal;

    const auto samples = build_sample_pairs(bp, trajectory);
    REQUIRE(samples.size() == 1 + verbal);
    CHECK(samples.size() <= 1 + trajectory.events.size());

    // Blueprint's own sample carries delta' from intent (Misleading -> 0).
    CHECK(samples[0].sample_id == "b-bp-000009");
    CHECK(samples[0].y == 1);
    CHECK(samples[0].delta == 0);
    CHECK(samples[0].mismatch_flag == 1);
    CHECK(!samples[0].provenance.trajectory_event_ref.has_value());

    for (std::size_t i = 1; i < samples.size(); ++i) {
        CHECK(samples[i].y == 1);
        CHECK(samples[i].provenance.trajectory_event_ref.has_value());
        CHECK(samples[i].provenance.role.has_value());
        CHECK(samples[i].delta + samples[i].mismatch_flag == 1);
    }

    // The auditor's deceptive claim yields at least one hard negative.
    bool saw_auditor_negative = false;
    for (const auto& sample : samples)
        if (sample.provenance.role && *sample.provenance.role == "Auditor")
            saw_auditor_negative = sample.delta == 0;
    CHECK(saw_auditor_negative);
}

TEST_CASE("all-neutral trajectories yield only consistent samples") {
    auto cognition = make_stub_cognition(2);
    const auto bp = fixtures::stub_blueprint("bp-000010", Intent::Accurate);
    SocialConfig cfg = SocialConfig::defaults();
    cfg.roster = {Role::Chatter};  // no prior events: chatter stays neutral
    cfg.rounds = 2;

    const auto trajectory = run_trajectory(bp, *cognition, 5, cfg);
    const auto samples = build_sample_pairs(bp, trajectory);
    for (const auto& sample : samples) CHECK(sample.delta == 1);
}

TEST_CASE("role and enum names round-trip") {
    for (const auto* name : {"Watcher", "Explorer", "Critic", "Chatter", "Poster", "Auditor"})
        CHECK(std::string(to_string(role_from_string(name))) == name);
    for (const auto* name : {"View", "Comment", "Share", "Flag", "Repost", "Claim"})
        CHECK(std::string(to_string(event_action_from_string(name))) == name);
    for (const auto* name : {"AssertsReal", "AssertsFake", "Neutral"})
        CHECK(std::string(to_string(stance_from_string(name))) == name);
    CHECK_THROWS_AS(role_from_string("Gnome"), ConfigError);
}

TEST_CASE("social config round-trips through json") {
    SocialConfig cfg = SocialConfig::defaults();
    cfg.rounds = 4;
    cfg.roster = {Role::Watcher, Role::Watcher, Role::Auditor};
    cfg.critic_asserts_fake_prob = 0.9;
    const auto restored = SocialConfig::from_json(cfg.to_json());
    CHECK(restored.rounds == 4);
    CHECK(restored.roster.size() == 3);
    CHECK(restored.critic_asserts_fake_prob == doctest::Approx(0.9));
    CHECK(restored.to_json().dump() == cfg.to_json().dump());

    CHECK_THROWS_AS(SocialConfig::from_json(Json{{"roster", Json::array()}}), ConfigError);
    CHECK_THROWS_AS(SocialConfig::from_json(Json{{"rounds", 0}}), ConfigError);
}
