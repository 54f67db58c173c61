#include "forgesim/actions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "forgesim/rng.hpp"

namespace forgesim {

const char* to_string(Intent intent) {
    return intent == Intent::Accurate ? "Accurate" : "Misleading";
}

Intent intent_from_string(const std::string& name) {
    if (name == "Accurate") return Intent::Accurate;
    if (name == "Misleading") return Intent::Misleading;
    throw ConfigError("unknown intent '" + name + "'");
}

const EditOperator* Toolbox::find(const std::string& op_id) const {
    for (const auto& op : operators)
        if (op.op_id == op_id) return &op;
    return nullptr;
}

std::vector<ToolCategory> Toolbox::categories() const {
    std::set<ToolCategory> seen;
    for (const auto& op : operators) seen.insert(op.category);
    return {seen.begin(), seen.end()};
}

Toolbox Toolbox::parse(const Json& doc) {
    if (!doc.is_object() || !doc.contains("operators") || !doc["operators"].is_array())
        throw ConfigError("toolbox: expected {\"operators\": [...]}");
    Toolbox toolbox;
    std::set<std::string> ids;
    for (const auto& entry : doc["operators"]) {
        EditOperator op;
        op.op_id = entry.at("op_id").get<std::string>();
        if (op.op_id.empty()) throw ConfigError("toolbox: empty op_id");
        if (!ids.insert(op.op_id).second)
            throw ConfigError("toolbox: duplicate op_id '" + op.op_id + "'");
        op.category = tool_category_from_string(entry.at("category").get<std::string>());
        if (entry.contains("params")) {
            for (const auto& p : entry["params"]) {
                ParamSpec spec;
                spec.name = p.at("name").get<std::string>();
                if (p.contains("choices")) {
                    ParamChoice choice;
                    for (const auto& option : p["choices"])
                        choice.options.push_back(option.get<std::string>());
                    if (choice.options.empty())
                        throw ConfigError("toolbox: empty choices for '" + spec.name + "'");
                    spec.domain = std::move(choice);
                } else {
                    ParamRange range;
                    range.lo = p.at("min").get<double>();
                    range.hi = p.at("max").get<double>();
                    if (!(range.lo <= range.hi))
                        throw ConfigError("toolbox: bad range for '" + spec.name + "'");
                    spec.domain = range;
                }
                op.params.push_back(std::move(spec));
            }
        }
        toolbox.operators.push_back(std::move(op));
    }
    if (toolbox.operators.empty()) throw ConfigError("toolbox: no operators");
    return toolbox;
}

Toolbox Toolbox::load(const std::string& path) {
    try {
        return parse(parse_json(read_text_file(path), path));
    } catch (const Json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

Json OperatorChain::to_json() const {
    Json arr = Json::array();
    for (const auto& step : steps) {
        Json s;
        s["op_id"] = step.op_id;
        s["params"] = step.params;
        arr.push_back(std::move(s));
    }
    return arr;
}

OperatorChain OperatorChain::from_json(const Json& doc) {
    OperatorChain chain;
    for (const auto& s : doc) {
        ChainStep step;
        step.op_id = s.at("op_id").get<std::string>();
        step.params = s.value("params", Json::object());
        chain.steps.push_back(std::move(step));
    }
    return chain;
}

std::string OperatorChain::summary() const {
    std::string out;
    for (const auto& step : steps) {
        if (!out.empty()) out += "+";
        out += step.op_id;
    }
    return out;
}

std::uint32_t ChainLengthDist::max_length() const {
    std::uint32_t max_len = 0;
    for (const auto& [len, w] : weights)
        if (w > 0.0) max_len = std::max(max_len, len);
    return max_len;
}

namespace {

std::uint32_t sample_length(const ChainLengthDist& lengths, Rng& rng) {
    double total = 0.0;
    for (const auto& [len, w] : lengths.weights) {
        if (len == 0 || w < 0.0) throw ConfigError("chain length law: lengths >= 1, weights >= 0");
        total += w;
    }
    if (total <= 0.0) throw ConfigError("chain length law: all weights zero");
    double u = rng.next_double() * total;
    for (const auto& [len, w] : lengths.weights) {
        u -= w;
        if (u < 0.0) return len;
    }
    return lengths.weights.rbegin()->first;
}

ToolCategory sample_category(const std::map<ToolCategory, double>& dist, Rng& rng) {
    double u = rng.next_double();
    for (const auto& [category, p] : dist) {
        u -= p;
        if (u < 0.0) return category;
    }
    return dist.rbegin()->first;
}

Json sample_params(const EditOperator& op, const MemoryStore& memory,
                   const std::string& agent_id, Rng& rng) {
    // Evaluative memory naming this operator pins preferred values.
    Json preferred = Json::object();
    if (const auto rec = memory.latest_evaluative_for_op(agent_id, op.op_id))
        preferred = rec->payload.value("preferred_params", Json::object());

    Json params = Json::object();
    for (const auto& spec : op.params) {
        if (preferred.contains(spec.name)) {
            const Json& value = preferred[spec.name];
            if (const auto* range = std::get_if<ParamRange>(&spec.domain)) {
                if (value.is_number()) {
                    const double v = value.get<double>();
                    if (v >= range->lo && v <= range->hi) {
                        params[spec.name] = v;
                        continue;
                    }
                }
            } else if (const auto* choice = std::get_if<ParamChoice>(&spec.domain)) {
                if (value.is_string() &&
                    std::find(choice->options.begin(), choice->options.end(),
                              value.get<std::string>()) != choice->options.end()) {
                    params[spec.name] = value;
                    continue;
                }
            }
        }
        if (const auto* range = std::get_if<ParamRange>(&spec.domain)) {
            params[spec.name] = range->lo + rng.next_double() * (range->hi - range->lo);
        } else {
            const auto& options = std::get<ParamChoice>(spec.domain).options;
            params[spec.name] = options[rng.next_index(options.size())];
        }
    }
    return params;
}

}  // namespace

OperatorChain sample_operator_chain(const AgentProfile& profile, const Toolbox& toolbox,
                                    const MemoryStore& memory, std::uint64_t seed,
                                    const ChainLengthDist& lengths,
                                    const ToolWeightPolicy& policy) {
    if (toolbox.operators.empty()) throw EmptyToolboxError("toolbox has no operators");
    const auto dist = derive_tool_distribution(profile, toolbox, policy);

    Rng rng(seed);
    const std::uint32_t length = sample_length(lengths, rng);

    OperatorChain chain;
    for (std::uint32_t i = 0; i < length; ++i) {
        const ToolCategory category = sample_category(dist, rng);
        std::vector<const EditOperator*> pool;
        for (const auto& op : toolbox.operators)
            if (op.category == category) pool.push_back(&op);
        if (pool.empty()) throw EmptyToolboxError(std::string("no operators in category ") +
                                                  to_string(category));
        const EditOperator& op = *pool[rng.next_index(pool.size())];
        chain.steps.push_back({op.op_id, sample_params(op, memory, profile.agent_id, rng)});
    }
    return chain;
}

namespace {

void validate_step_params(const EditOperator& op, const Json& params) {
    for (const auto& spec : op.params) {
        if (!params.contains(spec.name))
            throw InvalidParamsError("op '" + op.op_id + "': missing param '" + spec.name + "'");
        const Json& value = params[spec.name];
        if (const auto* range = std::get_if<ParamRange>(&spec.domain)) {
            if (!value.is_number())
                throw InvalidParamsError("op '" + op.op_id + "': param '" + spec.name +
                                         "' must be numeric");
            const double v = value.get<double>();
            if (v < range->lo || v > range->hi)
                throw InvalidParamsError("op '" + op.op_id + "': param '" + spec.name +
                                         "' outside [" + std::to_string(range->lo) + ", " +
                                         std::to_string(range->hi) + "]");
        } else {
            const auto& options = std::get<ParamChoice>(spec.domain).options;
            if (!value.is_string() || std::find(options.begin(), options.end(),
                                                value.get<std::string>()) == options.end())
                throw InvalidParamsError("op '" + op.op_id + "': param '" + spec.name +
                                         "' not a declared choice");
        }
    }
}

}  // namespace

std::string apply_chain(const std::string& source_image_ref, const OperatorChain& chain,
                        const Toolbox& toolbox, EditBackend& edit) {
    if (chain.steps.empty()) throw InvalidParamsError("empty operator chain");
    for (const auto& step : chain.steps) {
        const EditOperator* op = toolbox.find(step.op_id);
        if (!op) throw InvalidParamsError("op '" + step.op_id + "' not in toolbox");
        validate_step_params(*op, step.params);
    }

    std::string current = source_image_ref;
    for (std::size_t i = 0; i < chain.steps.size(); ++i) {
        const auto& step = chain.steps[i];
        try {
            current = edit.call({current, step.op_id, step.params}).image_ref;
        } catch (const BackendError& e) {
            throw BackendError(e.kind,
                               "chain step " + std::to_string(i + 1) + " (" + step.op_id +
                                   "): " + e.what(),
                               e.attempts);
        }
        if (current.empty())
            throw BackendError(BackendErrorKind::Protocol,
                               "chain step " + std::to_string(i + 1) + ": empty result reference");
    }
    return current;
}

std::string generate_description(const OperatorChain& chain, const Toolbox& toolbox,
                                 const std::string& result_image_ref, Intent intent,
                                 CognitionBackend& cognition) {
    Json context;
    context["kind"] = "forgery";
    context["intent"] = to_string(intent);
    Json categories = Json::array();
    std::set<std::string> seen;
    for (const auto& step : chain.steps) {
        const EditOperator* op = toolbox.find(step.op_id);
        const std::string name = op ? display_name(op->category) : step.op_id;
        if (seen.insert(name).second) categories.push_back(name);
    }
    context["categories"] = std::move(categories);
    context["steps"] = chain.steps.size();
    context["result_ref"] = result_image_ref;

    const auto response = cognition.call({CognitionTask::Describe, std::move(context)});
    if (response.text.empty())
        throw BackendError(BackendErrorKind::Protocol, "empty description from cognition backend");
    return response.text;
}

ForgeryBlueprint BlueprintAssembler::assemble(const std::string& source_image_ref,
                                              const OperatorChain& chain,
                                              const std::string& result_image_ref,
                                              const std::string& description, Intent intent,
                                              const std::string& agent_id, std::uint64_t tick) {
    ForgeryBlueprint bp;
    char id[16];
    std::snprintf(id, sizeof(id), "bp-%06llu", static_cast<unsigned long long>(next_++));
    bp.blueprint_id = id;
    bp.source_image_ref = source_image_ref;
    bp.result_image_ref = result_image_ref;
    bp.description = description;
    bp.y = 1;
    bp.delta_prime = intent == Intent::Accurate ? 1 : 0;
    bp.action = AgentAction{chain, description, intent};
    bp.agent_id = agent_id;
    bp.created_tick = tick;
    return bp;
}

Json ForgeryBlueprint::to_json() const {
    Json doc;
    doc["blueprint_id"] = blueprint_id;
    doc["source_image_ref"] = source_image_ref;
    doc["result_image_ref"] = result_image_ref;
    doc["description"] = description;
    doc["y"] = y;
    doc["delta_prime"] = delta_prime;
    doc["agent_id"] = agent_id;
    doc["created_tick"] = created_tick;
    Json action_doc;
    action_doc["intent"] = to_string(action.intent);
    action_doc["chain"] = action.chain.to_json();
    doc["action"] = std::move(action_doc);
    Json prov;
    prov["s_llm"] = s_llm.to_string();
    prov["s_disc"] = s_disc.to_string();
    prov["fused"] = fused.to_string();
    prov["tau_accept"] = tau_accept.to_string();
    prov["is_challenge"] = is_challenge;
    doc["provenance"] = std::move(prov);
    return doc;
}

ForgeryBlueprint ForgeryBlueprint::from_json(const Json& doc) {
    ForgeryBlueprint bp;
    bp.blueprint_id = doc.at("blueprint_id").get<std::string>();
    bp.source_image_ref = doc.at("source_image_ref").get<std::string>();
    bp.result_image_ref = doc.at("result_image_ref").get<std::string>();
    bp.description = doc.at("description").get<std::string>();
    bp.y = doc.at("y").get<int>();
    bp.delta_prime = doc.at("delta_prime").get<int>();
    bp.agent_id = doc.at("agent_id").get<std::string>();
    bp.created_tick = doc.at("created_tick").get<std::uint64_t>();
    const Json& action_doc = doc.at("action");
    bp.action.intent = intent_from_string(action_doc.at("intent").get<std::string>());
    bp.action.chain = OperatorChain::from_json(action_doc.at("chain"));
    bp.action.description = bp.description;
    const Json& prov = doc.at("provenance");
    bp.s_llm = Rational::parse(prov.at("s_llm").get<std::string>());
    bp.s_disc = Rational::parse(prov.at("s_disc").get<std::string>());
    bp.fused = Rational::parse(prov.at("fused").get<std::string>());
    bp.tau_accept = Rational::parse(prov.at("tau_accept").get<std::string>());
    bp.is_challenge = prov.value("is_challenge", false);
    return bp;
}

std::vector<ForgeryBlueprint> load_blueprints(const std::string& path) {
    std::vector<ForgeryBlueprint> blueprints;
    for_each_line(path, [&](std::size_t lineno, const std::string& line) {
        try {
            blueprints.push_back(
                ForgeryBlueprint::from_json(parse_json(line, path + ":" + std::to_string(lineno))));
        } catch (const Json::exception& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    });
    return blueprints;
}

}  // namespace forgesim
