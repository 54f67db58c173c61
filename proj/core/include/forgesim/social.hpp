#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "forgesim/actions.hpp"
#include "forgesim/backends.hpp"
#include "forgesim/dataset.hpp"

namespace forgesim {

enum class Role { Watcher, Explorer, Critic, Chatter, Poster, Auditor };
const char* to_string(Role role);
Role role_from_string(const std::string& name);
inline constexpr std::size_t kRoleCount = 6;

enum class EventAction { View, Comment, Share, Flag, Repost, Claim };
const char* to_string(EventAction action);
EventAction event_action_from_string(const std::string& name);

enum class Stance { AssertsReal, AssertsFake, Neutral };
const char* to_string(Stance stance);
Stance stance_from_string(const std::string& name);

struct InteractionEvent {
    std::string event_id;
    std::string blueprint_id;
    Role role = Role::Watcher;
    EventAction action = EventAction::View;
    std::string text;  // empty for non-verbal actions (View, Share, Repost)
    Stance stance = Stance::Neutral;
    std::uint64_t tick = 0;

    Json to_json() const;
};

struct SocialTrajectory {
    std::string blueprint_id;
    std::vector<InteractionEvent> events;  // ordered by (round, slot order)
    std::uint32_t rounds = 0;
};

// Phase-2 labeling output. mismatch_flag marks a text-image contradiction;
// the emitted delta is the consistency convention (1 = accurate match).
struct ConsistencyVerdict {
    int mismatch_flag = 0;
    int consistency = 1;
    std::string claim_text;
    int y = 0;
};

struct SocialConfig {
    std::vector<Role> roster = {Role::Watcher, Role::Explorer, Role::Critic,
                                Role::Chatter, Role::Poster, Role::Auditor};
    std::uint32_t rounds = 2;
    // Per-role action laws; weights need not be normalized.
    std::map<Role, std::map<EventAction, double>> action_weights;
    double critic_asserts_fake_prob = 0.8;  // on forged blueprints
    double lean_neutral_prob = 0.8;         // Watcher/Explorer/Poster stance law:
    double lean_real_prob = 0.1;            // neutral-leaning with symmetric tails

    static SocialConfig defaults();
    void validate() const;
    Json to_json() const;
    static SocialConfig from_json(const Json& doc);
};

/// The deceptive stance an auditor takes against ground truth y.
Stance auditor_stance_for(int y);

/// One auditor Claim event contradicting the blueprint's authenticity.
InteractionEvent auditor_claim(const ForgeryBlueprint& blueprint, CognitionBackend& cognition);

/// Map free text onto a stance. Throws InsufficientDataError on empty text.
Stance classify_stance(const std::string& text, CognitionBackend& cognition);

/// The labeling law: mismatch iff (y=1 and AssertsReal) or (y=0 and
/// AssertsFake); Neutral never mismatches; consistency = 1 - mismatch_flag.
ConsistencyVerdict label_consistency(int y, Stance stance, const std::string& claim_text = "");

/// One event per roster slot, slots in canonical role order. Actions follow
/// the per-role law, utterances come from the cognition backend, and each
/// text-bearing event's stance is re-derived from its text via
/// classify_stance. Deterministic under (seed, stub backend).
std::vector<InteractionEvent> run_round(const ForgeryBlueprint& blueprint,
                                        const std::vector<Role>& roster, std::uint32_t round_index,
                                        CognitionBackend& cognition, std::uint64_t seed,
                                        const SocialConfig& cfg = SocialConfig::defaults());

SocialTrajectory run_trajectory(const ForgeryBlueprint& blueprint, CognitionBackend& cognition,
                                std::uint64_t seed, const SocialConfig& cfg);

/// One DatasetSample per text-bearing event (Claim/Comment/Flag), labeled by
/// label_consistency, plus the blueprint's own (description, delta') sample.
std::vector<DatasetSample> build_sample_pairs(const ForgeryBlueprint& blueprint,
                                              const SocialTrajectory& trajectory);

}  // namespace forgesim
