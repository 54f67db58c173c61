#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "forgesim/backends.hpp"
#include "forgesim/memory.hpp"
#include "forgesim/profile.hpp"
#include "forgesim/rational.hpp"

namespace forgesim {

// Parameter domain of an operator slot: a numeric range or a choice list.
struct ParamRange {
    double lo = 0.0;
    double hi = 1.0;
};
struct ParamChoice {
    std::vector<std::string> options;
};

struct ParamSpec {
    std::string name;
    std::variant<ParamRange, ParamChoice> domain;
};

struct EditOperator {
    std::string op_id;
    ToolCategory category = ToolCategory::IdentityManipulation;
    std::vector<ParamSpec> params;
};

struct Toolbox {
    std::vector<EditOperator> operators;

    const EditOperator* find(const std::string& op_id) const;
    std::vector<ToolCategory> categories() const;  // distinct, in enum order

    /// Declarative JSON file: {"operators":[{"op_id","category","params":[...]}]}.
    static Toolbox load(const std::string& path);
    static Toolbox parse(const Json& doc);
};

struct ChainStep {
    std::string op_id;
    Json params;  // bound values keyed by param name
};

struct OperatorChain {
    std::vector<ChainStep> steps;

    Json to_json() const;
    static OperatorChain from_json(const Json& doc);
    std::string summary() const;  // "op_a+op_b"
};

// Length law for sampled chains; weights need not be normalized.
struct ChainLengthDist {
    std::map<std::uint32_t, double> weights = {{1, 0.5}, {2, 0.35}, {3, 0.15}};
    std::uint32_t max_length() const;
};

enum class Intent { Accurate, Misleading };
const char* to_string(Intent intent);
Intent intent_from_string(const std::string& name);

struct AgentAction {
    OperatorChain chain;
    std::string description;
    Intent intent = Intent::Accurate;
};

/// Phase-1 output: one curated forged image reference plus its
/// creator-written description and consistency flag.
struct ForgeryBlueprint {
    std::string blueprint_id;
    std::string source_image_ref;
    std::string result_image_ref;
    std::string description;
    int y = 1;                 // blueprints are forged by construction
    int delta_prime = 1;       // 1 iff intent == Accurate
    AgentAction action;
    std::string agent_id;
    std::uint64_t created_tick = 0;

    // Gate provenance, filled by the pipeline at acceptance.
    Rational s_llm;
    Rational s_disc;
    Rational fused;
    Rational tau_accept;
    bool is_challenge = false;

    Json to_json() const;
    static ForgeryBlueprint from_json(const Json& doc);
};

std::vector<ForgeryBlueprint> load_blueprints(const std::string& path);

/// Chain sampler: length from the length law, each step's category from
/// derive_tool_distribution, operator uniform within the category, parameters
/// uniform over their domains unless the agent's evaluative memory records a
/// preferred value for that operator. Pure function of its inputs.
OperatorChain sample_operator_chain(const AgentProfile& profile, const Toolbox& toolbox,
                                    const MemoryStore& memory, std::uint64_t seed,
                                    const ChainLengthDist& lengths = {},
                                    const ToolWeightPolicy& policy = ToolWeightPolicy::defaults());

/// Sequential application: each step's output feeds the next. Validates ops
/// and bound params against the toolbox first (InvalidParamsError), and tags
/// BackendError with the failing step index.
std::string apply_chain(const std::string& source_image_ref, const OperatorChain& chain,
                        const Toolbox& toolbox, EditBackend& edit);

/// Accurate -> text summarizing the actual edits; Misleading -> text
/// asserting authenticity.
std::string generate_description(const OperatorChain& chain, const Toolbox& toolbox,
                                 const std::string& result_image_ref, Intent intent,
                                 CognitionBackend& cognition);

/// Mints blueprint ids ("bp-000001", ...). Owned by the pipeline so the
/// counter can be checkpointed.
class BlueprintAssembler {
public:
    ForgeryBlueprint assemble(const std::string& source_image_ref, const OperatorChain& chain,
                              const std::string& result_image_ref, const std::string& description,
                              Intent intent, const std::string& agent_id, std::uint64_t tick);

    std::uint64_t next_index() const { return next_; }
    void set_next_index(std::uint64_t next) { next_ = next; }

private:
    std::uint64_t next_ = 1;
};

}  // namespace forgesim
