#include "forgesim/social.hpp"

#include <algorithm>
#include <cstdio>

#include "forgesim/rng.hpp"

namespace forgesim {

const char* to_string(Role role) {
    switch (role) {
        case Role::Watcher: return "Watcher";
        case Role::Explorer: return "Explorer";
        case Role::Critic: return "Critic";
        case Role::Chatter: return "Chatter";
        case Role::Poster: return "Poster";
        case Role::Auditor: return "Auditor";
    }
    return "?";
}

Role role_from_string(const std::string& name) {
    if (name == "Watcher") return Role::Watcher;
    if (name == "Explorer") return Role::Explorer;
    if (name == "Critic") return Role::Critic;
    if (name == "Chatter") return Role::Chatter;
    if (name == "Poster") return Role::Poster;
    if (name == "Auditor") return Role::Auditor;
    throw ConfigError("unknown role '" + name + "'");
}

const char* to_string(EventAction action) {
    switch (action) {
        case EventAction::View: return "View";
        case EventAction::Comment: return "Comment";
        case EventAction::Share: return "Share";
        case EventAction::Flag: return "Flag";
        case EventAction::Repost: return "Repost";
        case EventAction::Claim: return "Claim";
    }
    return "?";
}

EventAction event_action_from_string(const std::string& name) {
    if (name == "View") return EventAction::View;
    if (name == "Comment") return EventAction::Comment;
    if (name == "Share") return EventAction::Share;
    if (name == "Flag") return EventAction::Flag;
    if (name == "Repost") return EventAction::Repost;
    if (name == "Claim") return EventAction::Claim;
    throw ConfigError("unknown event action '" + name + "'");
}

const char* to_string(Stance stance) {
    switch (stance) {
        case Stance::AssertsReal: return "AssertsReal";
        case Stance::AssertsFake: return "AssertsFake";
        case Stance::Neutral: return "Neutral";
    }
    return "?";
}

Stance stance_from_string(const std::string& name) {
    if (name == "AssertsReal") return Stance::AssertsReal;
    if (name == "AssertsFake") return Stance::AssertsFake;
    if (name == "Neutral") return Stance::Neutral;
    throw ConfigError("unknown stance '" + name + "'");
}

Json InteractionEvent::to_json() const {
    Json doc;
    doc["event_id"] = event_id;
    doc["blueprint_id"] = blueprint_id;
    doc["role"] = to_string(role);
    doc["action"] = to_string(action);
    doc["text"] = text;
    doc["stance"] = to_string(stance);
    doc["tick"] = tick;
    return doc;
}

SocialConfig SocialConfig::defaults() {
    SocialConfig cfg;
    cfg.action_weights = {
        {Role::Watcher, {{EventAction::View, 0.7}, {EventAction::Comment, 0.3}}},
        {Role::Explorer,
         {{EventAction::View, 0.4}, {EventAction::Comment, 0.4}, {EventAction::Flag, 0.2}}},
        {Role::Critic, {{EventAction::Comment, 0.5}, {EventAction::Flag, 0.5}}},
        {Role::Chatter, {{EventAction::Comment, 1.0}}},
        {Role::Poster, {{EventAction::Share, 0.5}, {EventAction::Repost, 0.5}}},
        {Role::Auditor, {{EventAction::Claim, 1.0}}},
    };
    return cfg;
}

void SocialConfig::validate() const {
    if (roster.empty()) throw ConfigError("social: empty roster");
    if (rounds == 0) throw ConfigError("social: rounds must be >= 1");
    for (const Role role : roster) {
        const auto it = action_weights.find(role);
        if (it == action_weights.end() || it->second.empty())
            throw ConfigError(std::string("social: no action law for role ") + to_string(role));
        double total = 0.0;
        for (const auto& [action, w] : it->second) {
            if (w < 0.0) throw ConfigError("social: negative action weight");
            total += w;
        }
        if (total <= 0.0)
            throw ConfigError(std::string("social: zero action mass for role ") + to_string(role));
    }
}

Json SocialConfig::to_json() const {
    Json doc;
    Json roster_doc = Json::array();
    for (const Role role : roster) roster_doc.push_back(to_string(role));
    doc["roster"] = std::move(roster_doc);
    doc["rounds"] = rounds;
    Json weights_doc;
    for (const auto& [role, weights] : action_weights) {
        Json law;
        for (const auto& [action, w] : weights) law[to_string(action)] = w;
        weights_doc[to_string(role)] = std::move(law);
    }
    doc["action_weights"] = std::move(weights_doc);
    doc["critic_asserts_fake_prob"] = critic_asserts_fake_prob;
    doc["lean_neutral_prob"] = lean_neutral_prob;
    doc["lean_real_prob"] = lean_real_prob;
    return doc;
}

SocialConfig SocialConfig::from_json(const Json& doc) {
    SocialConfig cfg = defaults();
    if (doc.contains("roster")) {
        cfg.roster.clear();
        for (const auto& name : doc["roster"])
            cfg.roster.push_back(role_from_string(name.get<std::string>()));
    }
    cfg.rounds = doc.value("rounds", cfg.rounds);
    if (doc.contains("action_weights") && doc["action_weights"].is_object()) {
        for (const auto& [role_name, law] : doc["action_weights"].items()) {
            std::map<EventAction, double> weights;
            for (const auto& [action_name, w] : law.items())
                weights[event_action_from_string(action_name)] = w.get<double>();
            cfg.action_weights[role_from_string(role_name)] = std::move(weights);
        }
    }
    cfg.critic_asserts_fake_prob =
        doc.value("critic_asserts_fake_prob", cfg.critic_asserts_fake_prob);
    cfg.lean_neutral_prob = doc.value("lean_neutral_prob", cfg.lean_neutral_prob);
    cfg.lean_real_prob = doc.value("lean_real_prob", cfg.lean_real_prob);
    cfg.validate();
    return cfg;
}

Stance auditor_stance_for(int y) { return y == 1 ? Stance::AssertsReal : Stance::AssertsFake; }

namespace {

bool action_is_verbal(EventAction action) {
    return action == EventAction::Comment || action == EventAction::Flag ||
           action == EventAction::Claim;
}

EventAction sample_action(const std::map<EventAction, double>& weights, Rng& rng) {
    double total = 0.0;
    for (const auto& [action, w] : weights) total += w;
    double u = rng.next_double() * total;
    for (const auto& [action, w] : weights) {
        u -= w;
        if (u < 0.0) return action;
    }
    return weights.rbegin()->first;
}

Stance majority_stance(const std::vector<InteractionEvent>& prior) {
    std::int64_t balance = 0;  // +1 real, -1 fake
    for (const auto& event : prior) {
        if (event.stance == Stance::AssertsReal) ++balance;
        if (event.stance == Stance::AssertsFake) --balance;
    }
    if (balance > 0) return Stance::AssertsReal;
    if (balance < 0) return Stance::AssertsFake;
    return Stance::Neutral;
}

// The stance a role aims for; the utterance carries it, classification
// recovers it.
Stance pick_stance(Role role, int y, const std::vector<InteractionEvent>& prior_in_round,
                   const SocialConfig& cfg, Rng& rng) {
    switch (role) {
        case Role::Auditor:
            return auditor_stance_for(y);
        case Role::Critic:
            if (y == 1 && rng.next_double() < cfg.critic_asserts_fake_prob)
                return Stance::AssertsFake;
            return Stance::Neutral;
        case Role::Chatter:
            return majority_stance(prior_in_round);
        default: {
            const double u = rng.next_double();
            if (u < cfg.lean_neutral_prob) return Stance::Neutral;
            if (u < cfg.lean_neutral_prob + cfg.lean_real_prob) return Stance::AssertsReal;
            return Stance::AssertsFake;
        }
    }
}

std::string utterance(Role role, Stance stance, const ForgeryBlueprint& blueprint,
                      CognitionBackend& cognition) {
    Json context;
    context["role"] = to_string(role);
    context["stance"] = to_string(stance);
    context["blueprint_id"] = blueprint.blueprint_id;
    context["image_ref"] = blueprint.result_image_ref;
    const auto response = cognition.call({CognitionTask::RoleUtterance, std::move(context)});
    if (response.text.empty())
        throw BackendError(BackendErrorKind::Protocol, "empty role utterance");
    return response.text;
}

std::string event_id_for(const std::string& blueprint_id, std::uint32_t round_index,
                         std::size_t slot) {
    char suffix[40];
    std::snprintf(suffix, sizeof(suffix), "-r%02u-s%02u", round_index,
                  static_cast<unsigned>(slot));
    return "ev-" + blueprint_id + suffix;
}

}  // namespace

InteractionEvent auditor_claim(const ForgeryBlueprint& blueprint, CognitionBackend& cognition) {
    const Stance stance = auditor_stance_for(blueprint.y);
    InteractionEvent event;
    event.blueprint_id = blueprint.blueprint_id;
    event.role = Role::Auditor;
    event.action = EventAction::Claim;
    event.text = utterance(Role::Auditor, stance, blueprint, cognition);
    event.stance = classify_stance(event.text, cognition);
    return event;
}

Stance classify_stance(const std::string& text, CognitionBackend& cognition) {
    if (text.empty()) throw InsufficientDataError("classify_stance on empty text");
    Json context;
    context["text"] = text;
    const auto response = cognition.call({CognitionTask::StanceClassify, std::move(context)});
    return stance_from_string(response.text);
}

ConsistencyVerdict label_consistency(int y, Stance stance, const std::string& claim_text) {
    ConsistencyVerdict verdict;
    verdict.y = y;
    verdict.claim_text = claim_text;
    const bool mismatch = (y == 1 && stance == Stance::AssertsReal) ||
                          (y == 0 && stance == Stance::AssertsFake);
    verdict.mismatch_flag = mismatch ? 1 : 0;
    verdict.consistency = 1 - verdict.mismatch_flag;
    return verdict;
}

std::vector<InteractionEvent> run_round(const ForgeryBlueprint& blueprint,
                                        const std::vector<Role>& roster,
                                        std::uint32_t round_index, CognitionBackend& cognition,
                                        std::uint64_t seed, const SocialConfig& cfg) {
    if (roster.empty()) throw InsufficientDataError("run_round with empty roster");

    // Canonical slot order: roles in enum order, duplicates adjacent.
    std::vector<Role> slots = roster;
    std::stable_sort(slots.begin(), slots.end(),
                     [](Role a, Role b) { return static_cast<int>(a) < static_cast<int>(b); });

    Rng rng(seed);
    std::vector<InteractionEvent> events;
    events.reserve(slots.size());
    for (std::size_t slot = 0; slot < slots.size(); ++slot) {
        const Role role = slots[slot];
        const auto law = cfg.action_weights.find(role);
        if (law == cfg.action_weights.end() || law->second.empty())
            throw ConfigError(std::string("social: no action law for role ") + to_string(role));

        InteractionEvent event;
        event.event_id = event_id_for(blueprint.blueprint_id, round_index, slot + 1);
        event.blueprint_id = blueprint.blueprint_id;
        event.role = role;
        event.action = role == Role::Auditor ? EventAction::Claim : sample_action(law->second, rng);
        event.tick = round_index;

        if (action_is_verbal(event.action)) {
            const Stance target = pick_stance(role, blueprint.y, events, cfg, rng);
            event.text = utterance(role, target, blueprint, cognition);
            event.stance = classify_stance(event.text, cognition);
        } else {
            event.text.clear();
            event.stance = Stance::Neutral;
        }
        events.push_back(std::move(event));
    }
    return events;
}

SocialTrajectory run_trajectory(const ForgeryBlueprint& blueprint, CognitionBackend& cognition,
                                std::uint64_t seed, const SocialConfig& cfg) {
    cfg.validate();
    SocialTrajectory trajectory;
    trajectory.blueprint_id = blueprint.blueprint_id;
    trajectory.rounds = cfg.rounds;
    Rng rng(seed);
    for (std::uint32_t round = 1; round <= cfg.rounds; ++round) {
        auto events = run_round(blueprint, cfg.roster, round, cognition, rng.next_u64(), cfg);
        trajectory.events.insert(trajectory.events.end(),
                                 std::make_move_iterator(events.begin()),
                                 std::make_move_iterator(events.end()));
    }
    return trajectory;
}

std::vector<DatasetSample> build_sample_pairs(const ForgeryBlueprint& blueprint,
                                              const SocialTrajectory& trajectory) {
    std::vector<DatasetSample> samples;

    // The blueprint's own description, labeled by the creator's intent.
    DatasetSample own;
    own.sample_id = "b-" + blueprint.blueprint_id;
    own.image_ref = blueprint.result_image_ref;
    own.text = blueprint.description;
    own.y = blueprint.y;
    own.delta = blueprint.delta_prime;
    own.mismatch_flag = 1 - blueprint.delta_prime;
    own.provenance.agent_id = blueprint.agent_id;
    own.provenance.chain_summary = blueprint.action.chain.summary();
    own.provenance.s_llm = blueprint.s_llm;
    own.provenance.s_disc = blueprint.s_disc;
    own.provenance.fused = blueprint.fused;
    own.provenance.tau_accept = blueprint.tau_accept;
    own.provenance.is_challenge = blueprint.is_challenge;
    samples.push_back(std::move(own));

    for (const auto& event : trajectory.events) {
        if (!action_is_verbal(event.action)) continue;
        const ConsistencyVerdict verdict =
            label_consistency(blueprint.y, event.stance, event.text);
        DatasetSample sample;
        sample.sample_id = "e-" + event.event_id;
        sample.image_ref = blueprint.result_image_ref;
        sample.text = event.text;
        sample.y = blueprint.y;
        sample.delta = verdict.consistency;
        sample.mismatch_flag = verdict.mismatch_flag;
        sample.provenance.agent_id = blueprint.agent_id;
        sample.provenance.chain_summary = blueprint.action.chain.summary();
        sample.provenance.s_llm = blueprint.s_llm;
        sample.provenance.s_disc = blueprint.s_disc;
        sample.provenance.fused = blueprint.fused;
        sample.provenance.tau_accept = blueprint.tau_accept;
        sample.provenance.is_challenge = blueprint.is_challenge;
        sample.provenance.trajectory_event_ref = event.event_id;
        sample.provenance.role = to_string(event.role);
        samples.push_back(std::move(sample));
    }
    return samples;
}

}  // namespace forgesim
