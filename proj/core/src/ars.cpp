#include "forgesim/ars.hpp"

#include <algorithm>

namespace forgesim {

void ArsConfig::validate() const {
    const Rational zero(0);
    const Rational one(1);
    if (lambda < zero || lambda > one) throw OutOfRangeError("ars: lambda outside [0,1]");
    if (q < zero || q > one) throw OutOfRangeError("ars: q outside [0,1]");
    if (tau_warmup < zero || tau_warmup > one) throw OutOfRangeError("ars: tau_warmup outside [0,1]");
    if (n_warmup == 0) throw OutOfRangeError("ars: n_warmup must be >= 1");
    if (update_period == 0) throw OutOfRangeError("ars: update_period must be >= 1");
}

Json ArsConfig::to_json() const {
    Json doc;
    doc["lambda"] = lambda.to_string();
    doc["q"] = q.to_string();
    doc["n_warmup"] = n_warmup;
    doc["tau_warmup"] = tau_warmup.to_string();
    doc["update_period"] = update_period;
    return doc;
}

ArsConfig ArsConfig::from_json(const Json& doc) {
    ArsConfig cfg;
    auto ratio = [&doc](const char* key, const Rational& fallback) {
        if (!doc.contains(key)) return fallback;
        const Json& v = doc[key];
        if (v.is_string()) return Rational::parse(v.get<std::string>());
        if (v.is_number()) return Rational::from_double_quantized(v.get<double>());
        throw ConfigError(std::string("ars: ") + key + " must be a number or string");
    };
    cfg.lambda = ratio("lambda", cfg.lambda);
    cfg.q = ratio("q", cfg.q);
    cfg.tau_warmup = ratio("tau_warmup", cfg.tau_warmup);
    cfg.n_warmup = doc.value("n_warmup", cfg.n_warmup);
    cfg.update_period = doc.value("update_period", cfg.update_period);
    cfg.validate();
    return cfg;
}

Rational fuse_score(const Rational& s_llm, const Rational& s_disc, const ArsConfig& cfg) {
    const Rational zero(0);
    const Rational one(1);
    if (s_llm < zero || s_llm > one) throw OutOfRangeError("fuse: s_llm outside [0,1]");
    if (s_disc < zero || s_disc > one) throw OutOfRangeError("fuse: s_disc outside [0,1]");
    if (cfg.lambda < zero || cfg.lambda > one) throw OutOfRangeError("fuse: lambda outside [0,1]");
    return cfg.lambda * s_llm + (one - cfg.lambda) * s_disc;
}

CandidateScore score_candidate(const Rational& s_llm, const Rational& s_disc,
                               const ArsConfig& cfg) {
    return CandidateScore{s_llm, s_disc, fuse_score(s_llm, s_disc, cfg)};
}

Rational quantile(const std::vector<Rational>& values, const Rational& q) {
    if (values.empty()) throw EmptySetError("quantile of empty multiset");
    if (q < Rational(0) || q > Rational(1)) throw OutOfRangeError("quantile: q outside [0,1]");
    std::vector<Rational> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    // 1-based nearest rank: max(1, ceil(q * n)).
    const std::int64_t n = static_cast<std::int64_t>(sorted.size());
    const std::int64_t rank =
        std::max<std::int64_t>(1, (q.num() * n + q.den() - 1) / q.den());
    return sorted[static_cast<std::size_t>(rank - 1)];
}

const char* to_string(ArsPhase phase) { return phase == ArsPhase::Warmup ? "Warmup" : "Adaptive"; }

const char* to_string(ArsDecision decision) {
    return decision == ArsDecision::Accept ? "Accept" : "Reject";
}

Json ArsState::to_json() const {
    Json doc;
    doc["n_seen"] = n_seen;
    doc["phase"] = to_string(phase);
    doc["tau"] = tau.to_string();
    doc["accepts_since_update"] = accepts_since_update;
    Json scores = Json::array();
    for (const auto& s : accepted_scores) scores.push_back(s.to_string());
    doc["accepted_scores"] = std::move(scores);
    return doc;
}

ArsState ArsState::from_json(const Json& doc) {
    ArsState state;
    state.n_seen = doc.at("n_seen").get<std::uint64_t>();
    state.phase = doc.at("phase").get<std::string>() == "Warmup" ? ArsPhase::Warmup
                                                                 : ArsPhase::Adaptive;
    state.tau = Rational::parse(doc.at("tau").get<std::string>());
    state.accepts_since_update = doc.at("accepts_since_update").get<std::uint64_t>();
    for (const auto& s : doc.at("accepted_scores"))
        state.accepted_scores.push_back(Rational::parse(s.get<std::string>()));
    if (!std::is_sorted(state.accepted_scores.begin(), state.accepted_scores.end()))
        throw CorruptCheckpointError("ars state: accepted scores not sorted");
    return state;
}

ArsGate::ArsGate(ArsConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    state_.tau = cfg_.tau_warmup;
}

ArsGate::ArsGate(ArsConfig cfg, ArsState state) : cfg_(std::move(cfg)), state_(std::move(state)) {
    cfg_.validate();
}

void ArsGate::recompute_tau() {
    if (state_.accepted_scores.empty()) return;  // threshold stays in force
    state_.tau = quantile(state_.accepted_scores, cfg_.q);
}

ArsOutcome ArsGate::evaluate(const Rational& fused) {
    ++state_.n_seen;
    const bool warmup = state_.n_seen <= cfg_.n_warmup;

    if (!warmup && state_.phase == ArsPhase::Warmup) {
        // First post-warmup candidate: pin the data-driven threshold.
        state_.phase = ArsPhase::Adaptive;
        state_.accepts_since_update = 0;
        recompute_tau();
    }
    const Rational tau_in_force = warmup ? cfg_.tau_warmup : state_.tau;

    ArsOutcome outcome;
    outcome.phase = warmup ? ArsPhase::Warmup : ArsPhase::Adaptive;
    outcome.tau = tau_in_force;
    outcome.n_seen = state_.n_seen;
    outcome.is_challenge = fused >= tau_in_force && fused < tau_in_force + Rational(1, 10);

    if (fused > tau_in_force) {
        outcome.decision = ArsDecision::Accept;
        const auto pos =
            std::upper_bound(state_.accepted_scores.begin(), state_.accepted_scores.end(), fused);
        state_.accepted_scores.insert(pos, fused);
        if (!warmup) {
            ++state_.accepts_since_update;
            if (state_.accepts_since_update >= cfg_.update_period) {
                recompute_tau();
                state_.accepts_since_update = 0;
            }
        }
    } else {
        outcome.decision = ArsDecision::Reject;
    }
    return outcome;
}

std::string ars_trace_header() { return "n_seen,phase,tau,decision"; }

std::string ars_trace_row(const ArsOutcome& outcome) {
    return std::to_string(outcome.n_seen) + "," + to_string(outcome.phase) + "," +
           outcome.tau.to_string() + "," + to_string(outcome.decision);
}

}  // namespace forgesim
