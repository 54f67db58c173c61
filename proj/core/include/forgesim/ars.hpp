#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forgesim/jsonio.hpp"
#include "forgesim/rational.hpp"

namespace forgesim {

struct ArsConfig {
    Rational lambda{1, 2};      // weight of the agent's self-score in the fusion
    Rational q{1, 2};           // quantile defining the adaptive threshold
    std::uint64_t n_warmup = 50;
    Rational tau_warmup{3, 10};
    std::uint64_t update_period = 10;  // threshold recompute cadence, in acceptances

    void validate() const;
    Json to_json() const;
    static ArsConfig from_json(const Json& doc);
};

struct CandidateScore {
    Rational s_llm;
    Rational s_disc;
    Rational fused;  // always lambda*s_llm + (1-lambda)*s_disc, exactly
};

/// Exact convex combination lambda*s_llm + (1-lambda)*s_disc.
/// Inputs outside [0,1] throw OutOfRangeError.
Rational fuse_score(const Rational& s_llm, const Rational& s_disc, const ArsConfig& cfg);

/// Bundle the two raw scores with their fusion; the only way to build a
/// CandidateScore, so the fused invariant holds by construction.
CandidateScore score_candidate(const Rational& s_llm, const Rational& s_disc,
                               const ArsConfig& cfg);

/// Nearest-rank quantile: sorted ascending, 1-based index max(1, ceil(q*n)).
/// Throws EmptySetError on an empty multiset.
Rational quantile(const std::vector<Rational>& values, const Rational& q);

enum class ArsPhase { Warmup, Adaptive };
const char* to_string(ArsPhase phase);

enum class ArsDecision { Accept, Reject };
const char* to_string(ArsDecision decision);

struct ArsState {
    std::vector<Rational> accepted_scores;  // kept sorted ascending
    std::uint64_t n_seen = 0;
    Rational tau;                       // threshold in force
    ArsPhase phase = ArsPhase::Warmup;  // phase used by the most recent evaluate
    std::uint64_t accepts_since_update = 0;

    Json to_json() const;
    static ArsState from_json(const Json& doc);
};

struct ArsOutcome {
    ArsDecision decision = ArsDecision::Reject;
    ArsPhase phase = ArsPhase::Warmup;  // phase in force for this candidate
    Rational tau;                       // threshold in force for this candidate
    bool is_challenge = false;          // fused in [tau, tau + 1/10)
    std::uint64_t n_seen = 0;           // candidate index, 1-based
};

/// The quality gate. Candidates 1..n_warmup compare against the fixed lenient
/// tau_warmup; later candidates against the q-th nearest-rank quantile of all
/// accepted scores, recomputed at the warmup/adaptive transition and then
/// after every update_period-th acceptance. "Exceeds" is strict `>`
/// throughout. While the accepted pool is empty the threshold stays at
/// tau_warmup. Recomputed thresholds never decrease: every pool element was
/// accepted above the threshold then in force.
class ArsGate {
public:
    explicit ArsGate(ArsConfig cfg);
    ArsGate(ArsConfig cfg, ArsState state);

    /// Not thread-safe; callers serialize (the pipeline does).
    ArsOutcome evaluate(const Rational& fused);

    const ArsState& state() const { return state_; }
    const ArsConfig& config() const { return cfg_; }

private:
    void recompute_tau();

    ArsConfig cfg_;
    ArsState state_;
};

/// One trace row per evaluate call, exported as delimited text
/// (n_seen, phase, tau, decision) for plotting and the stats command.
std::string ars_trace_header();
std::string ars_trace_row(const ArsOutcome& outcome);

}  // namespace forgesim
