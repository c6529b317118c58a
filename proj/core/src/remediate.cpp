#include "capforge/remediate.hpp"

#include "capforge/docjson.hpp"
#include "capforge/errors.hpp"

#include <algorithm>
#include <sstream>

namespace capforge::remediate {

using docjson::json;
using landscape::Hlp;
using landscape::Landscape;

// --- Threat reports -----------------------------------------------------------

ThreatReport load_report(const nlohmann::json& document, const std::string& origin) {
    docjson::require_object(document, origin);
    docjson::reject_unknown_keys(document,
                                 {"threatType", "impactedHosts", "attackerAddresses", "ports",
                                  "urlPatterns", "walletIds", "distributedIds"},
                                 origin);
    ThreatReport r;
    r.threat_type = docjson::get_string(document, "threatType", origin);
    static const std::set<std::string> known{"crypto_miner", "ddos_botnet", "auth_bruteforce", "generic"};
    if (!known.count(r.threat_type))
        throw Error(errc::parse_error, origin + ".threatType: unknown threat type " + r.threat_type);
    r.impacted_hosts = docjson::string_array(document, "impactedHosts", origin);
    r.attacker_addresses = docjson::string_array(document, "attackerAddresses", origin);
    r.ports = docjson::string_array(document, "ports", origin);
    r.url_patterns = docjson::string_array(document, "urlPatterns", origin);
    r.wallet_ids = docjson::string_array(document, "walletIds", origin);
    r.distributed_ids = docjson::string_array(document, "distributedIds", origin);
    if (r.impacted_hosts.empty() && r.attacker_addresses.empty())
        throw Error(errc::parse_error,
                    origin + ": a report needs impacted hosts or attacker addresses");
    return r;
}

ThreatReport load_report_file(const std::string& path) {
    return load_report(docjson::load_file(path), path);
}

// --- Recipe grammar -------------------------------------------------------------
//
//   filter l4 from <addr|$var> to <addr|$var> [proto <p>] [ports <list>]
//   filter l7 url <pattern|$var> <allow|deny>
//   isolate host <entity|$var>
//   deploy nsf requiring <cap[,cap...]> near <entity|$var>
//   ban <wallet|did> <id-list|$var>
//
// `#` starts a comment; blank lines are ignored.

namespace {

struct Token {
    std::string text;
    int column = 0; // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        if (line[i] == '#') break;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

[[noreturn]] void grammar_error(int line, int column, const std::string& message) {
    throw Error(errc::grammar_error,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message);
}

class LineParser {
public:
    LineParser(std::vector<Token> tokens, int line) : tokens_(std::move(tokens)), line_(line) {}

    bool done() const { return pos_ >= tokens_.size(); }

    const Token& peek() const {
        if (done()) grammar_error(line_, end_column(), "unexpected end of line");
        return tokens_[pos_];
    }

    Token next() {
        const Token& t = peek();
        ++pos_;
        return t;
    }

    void expect(const std::string& keyword) {
        const Token& t = peek();
        if (t.text != keyword)
            grammar_error(line_, t.column, "expected \"" + keyword + "\", found \"" + t.text + "\"");
        ++pos_;
    }

    bool accept(const std::string& keyword) {
        if (!done() && tokens_[pos_].text == keyword) {
            ++pos_;
            return true;
        }
        return false;
    }

    Arg arg(const char* what) {
        if (done()) grammar_error(line_, end_column(), std::string("expected ") + what);
        Token t = next();
        if (t.text.size() > 1 && t.text[0] == '$') return Arg{t.text.substr(1), true};
        if (t.text == "$") grammar_error(line_, t.column, "empty variable name");
        return Arg{t.text, false};
    }

    void finish() {
        if (!done()) grammar_error(line_, tokens_[pos_].column, "trailing input \"" + tokens_[pos_].text + "\"");
    }

    int line() const { return line_; }
    int end_column() const { return tokens_.empty() ? 1 : tokens_.back().column + int(tokens_.back().text.size()); }

private:
    std::vector<Token> tokens_;
    int line_;
    std::size_t pos_ = 0;
};

Step parse_step(LineParser& p) {
    const Token& head = p.peek();
    if (p.accept("filter")) {
        const Token& layer = p.peek();
        if (p.accept("l4")) {
            FilterL4 s;
            p.expect("from");
            s.from = p.arg("a source address or variable");
            p.expect("to");
            s.to = p.arg("a destination address or variable");
            if (p.accept("proto")) s.proto = p.arg("a protocol");
            if (p.accept("ports")) s.ports = p.arg("a port list");
            p.finish();
            return s;
        }
        if (p.accept("l7")) {
            FilterL7 s;
            p.expect("url");
            s.url_pattern = p.arg("a url pattern or variable");
            const Token& d = p.peek();
            if (p.accept("allow")) s.decision = "allow";
            else if (p.accept("deny")) s.decision = "deny";
            else grammar_error(p.line(), d.column, "expected \"allow\" or \"deny\"");
            p.finish();
            return s;
        }
        grammar_error(p.line(), layer.column, "expected \"l4\" or \"l7\" after \"filter\"");
    }
    if (p.accept("isolate")) {
        p.expect("host");
        IsolateHost s;
        s.host = p.arg("an entity or variable");
        p.finish();
        return s;
    }
    if (p.accept("deploy")) {
        p.expect("nsf");
        p.expect("requiring");
        DeployNsf s;
        Arg caps = p.arg("a capability list");
        if (caps.is_variable) grammar_error(p.line(), 1, "capability requirements must be literal");
        std::stringstream ss(caps.text);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) s.required_capabilities.push_back(item);
        if (s.required_capabilities.empty()) grammar_error(p.line(), 1, "empty capability list");
        p.expect("near");
        s.near = p.arg("an entity or variable");
        p.finish();
        return s;
    }
    if (p.accept("ban")) {
        Ban s;
        const Token& kind = p.peek();
        if (p.accept("wallet")) s.id_kind = "wallet";
        else if (p.accept("did")) s.id_kind = "did";
        else grammar_error(p.line(), kind.column, "expected \"wallet\" or \"did\"");
        s.ids = p.arg("an id list or variable");
        p.finish();
        return s;
    }
    grammar_error(p.line(), head.column, "unknown step keyword \"" + head.text + "\"");
}

} // namespace

Recipe parse_recipe(const std::string& text) {
    Recipe recipe;
    recipe.text = text;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        LineParser p(std::move(tokens), line_no);
        recipe.steps.push_back(parse_step(p));
    }
    if (recipe.steps.empty())
        throw Error(errc::grammar_error, "line 1, column 1: a recipe must contain at least one step");
    return recipe;
}

std::string describe(const Step& step) {
    struct Visitor {
        std::string operator()(const FilterL4& s) const {
            std::string out = "filter l4 from " + spell(s.from) + " to " + spell(s.to);
            if (s.proto) out += " proto " + spell(*s.proto);
            if (s.ports) out += " ports " + spell(*s.ports);
            return out;
        }
        std::string operator()(const FilterL7& s) const {
            return "filter l7 url " + spell(s.url_pattern) + " " + s.decision;
        }
        std::string operator()(const IsolateHost& s) const { return "isolate host " + spell(s.host); }
        std::string operator()(const DeployNsf& s) const {
            std::string caps;
            for (const auto& c : s.required_capabilities) caps += (caps.empty() ? "" : ",") + c;
            return "deploy nsf requiring " + caps + " near " + spell(s.near);
        }
        std::string operator()(const Ban& s) const { return "ban " + s.id_kind + " " + spell(s.ids); }

        static std::string spell(const Arg& a) { return a.is_variable ? "$" + a.text : a.text; }
    };
    return std::visit(Visitor{}, step);
}

// --- Recipe book -----------------------------------------------------------------

RecipeBook load_recipe_book(const nlohmann::json& document, const std::string& origin) {
    docjson::require_object(document, origin);
    docjson::reject_unknown_keys(document, {"recipes"}, origin);
    RecipeBook book;
    const auto& arr = docjson::require_array(document.at("recipes"), origin + ".recipes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string path = docjson::index_path(origin + ".recipes", i);
        const auto& rj = docjson::require_object(arr[i], path);
        docjson::reject_unknown_keys(rj, {"id", "applicableThreats", "effectiveness", "text"}, path);
        Recipe r = parse_recipe(docjson::get_string(rj, "text", path));
        r.id = docjson::get_string(rj, "id", path);
        for (const auto& t : docjson::string_array(rj, "applicableThreats", path))
            r.applicable_threats.insert(t);
        if (rj.contains("effectiveness")) {
            const auto& ej = docjson::require_object(rj.at("effectiveness"), path + ".effectiveness");
            for (auto it = ej.begin(); it != ej.end(); ++it) {
                if (!it.value().is_number())
                    throw Error(errc::parse_error, path + ".effectiveness: scores must be numbers");
                double score = it.value().get<double>();
                if (score < 0.0 || score > 1.0)
                    throw Error(errc::parse_error, path + ".effectiveness: score out of [0,1]");
                r.effectiveness[it.key()] = score;
            }
        }
        book.recipes.push_back(std::move(r));
    }
    return book;
}

RecipeBook load_recipe_book_file(const std::string& path) {
    return load_recipe_book(docjson::load_file(path), path);
}

const Recipe& select_recipe(const ThreatReport& report, const RecipeBook& book, SelectionMode mode,
                            const RecipeCallback& callback) {
    std::vector<const Recipe*> applicable;
    for (const auto& r : book.recipes)
        if (r.applicable_threats.count(report.threat_type)) applicable.push_back(&r);
    if (applicable.empty())
        throw Error(errc::no_applicable_recipe, "no recipe applies to " + report.threat_type,
                    report.threat_type);
    std::sort(applicable.begin(), applicable.end(),
              [](const Recipe* a, const Recipe* b) { return a->id < b->id; });

    if (mode == SelectionMode::Manual) {
        if (!callback)
            throw Error(errc::no_applicable_recipe, "manual selection requires a callback");
        std::size_t pick = callback(applicable);
        if (pick >= applicable.size())
            throw Error(errc::no_applicable_recipe, "selection out of range");
        return *applicable[pick];
    }

    const Recipe* best = applicable.front();
    double best_score = -1.0;
    for (const Recipe* r : applicable) {
        auto it = r->effectiveness.find(report.threat_type);
        double score = it == r->effectiveness.end() ? 0.0 : it->second;
        if (score > best_score) { // strict: ties keep the lexicographically first id
            best = r;
            best_score = score;
        }
    }
    return *best;
}

// --- Execution --------------------------------------------------------------------

namespace {

// Expands a step argument against the report. Returns one string per bound
// value (lists stay comma-joined only where the consumer expects a list).
std::vector<std::string> bind_values(const Arg& arg, const ThreatReport& report) {
    if (!arg.is_variable) return {arg.text};
    const std::vector<std::string>* source = nullptr;
    if (arg.text == "attacker") source = &report.attacker_addresses;
    else if (arg.text == "victim") source = &report.impacted_hosts;
    else if (arg.text == "ports") source = &report.ports;
    else if (arg.text == "urls") source = &report.url_patterns;
    else if (arg.text == "wallets") source = &report.wallet_ids;
    else if (arg.text == "dids") source = &report.distributed_ids;
    else
        throw Error(errc::unbound_variable, "$" + arg.text + " is not a report variable", arg.text);
    if (source->empty())
        throw Error(errc::unbound_variable, "$" + arg.text + " has no value in this report", arg.text);
    return *source;
}

std::string bind_joined(const Arg& arg, const ThreatReport& report) {
    auto values = bind_values(arg, report);
    std::string out;
    for (const auto& v : values) out += (out.empty() ? "" : ",") + v;
    return out;
}

// Entity naming an address: an exact entity name passes through, a raw
// address resolves to the most specific covering entity.
std::string to_entity(const std::string& token, const Landscape& ls) {
    if (ls.entities().count(token)) return token;
    if (auto covered = ls.entity_covering(token)) return *covered;
    throw Error(errc::unknown_entity, "no landscape entity covers " + token, token);
}

struct Execution {
    const ThreatReport& report;
    const catalogue::Catalogue& cat;
    const refine::Mapping& mapping;
    Landscape current;
    RemediationPlan plan;
    int next_priority = 1;
    int step_index = 0;

    void merge_mlps(std::map<std::string, mlp::MlpPolicy>&& mlps) {
        for (auto& [nsf, policy] : mlps) {
            auto& merged = plan.mlps[nsf];
            if (merged.nsf_name.empty()) {
                merged.nsf_name = policy.nsf_name;
                merged.policy_attributes = policy.policy_attributes;
            }
            for (auto& rule : policy.rules) {
                rule.id = "s" + std::to_string(step_index) + "-" + rule.id;
                if (rule.external_data.count("priority"))
                    rule.external_data["priority"] = std::to_string(next_priority);
                merged.rules.push_back(std::move(rule));
            }
            ++next_priority;
        }
    }

    // Refines one HLP; on Uncoverable applies the first proposal and retries
    // once. Returns false when the step stays unresolved.
    bool enforce(const Hlp& hlp, const std::string& step_text) {
        plan.hlps.push_back(hlp);
        plan.required_capabilities.merge(refine::required_capabilities(hlp, mapping));
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto outcome = refine::refine_hlps({hlp}, current, cat, mapping, refine::Strategy::MinControls);
            const auto& result = outcome.results.front();
            if (result.status == refine::Status::Enforced) {
                for (const auto& ctl : result.selection) plan.chosen_nodes.push_back(ctl.node_id);
                merge_mlps(std::move(outcome.mlps));
                return true;
            }
            if (result.status == refine::Status::UnenforceableWithProposal && attempt == 0) {
                const auto& proposal = result.proposals.front();
                current = current.with_nsf(proposal.node_id, proposal.nsf_id);
                plan.landscape_changes.push_back({"add_nsf", proposal.node_id, proposal.nsf_id});
                continue;
            }
            plan.unresolved.push_back({step_text, result.note.empty() ? "refinement failed" : result.note});
            return false;
        }
        return false;
    }

    void run(const Step& step) {
        ++step_index;
        std::string text = describe(step);
        try {
            std::visit([&](const auto& s) { this->apply(s, text); }, step);
        } catch (const Error& e) {
            if (e.code() == errc::unbound_variable) throw;
            plan.unresolved.push_back({text, e.what()});
        }
    }

    void apply(const FilterL4& s, const std::string& text) {
        auto froms = bind_values(s.from, report);
        auto tos = bind_values(s.to, report);
        for (const auto& from : froms)
            for (const auto& to : tos) {
                Hlp hlp;
                hlp.subject = to_entity(from, current);
                hlp.action = "is_not_authorized_to_access";
                hlp.object = to_entity(to, current);
                if (s.proto) hlp.options["protocol"] = bind_joined(*s.proto, report);
                if (s.ports) hlp.options["ports"] = bind_joined(*s.ports, report);
                enforce(hlp, text);
            }
    }

    void apply(const FilterL7& s, const std::string& text) {
        auto patterns = bind_values(s.url_pattern, report);
        for (const auto& pattern : patterns) {
            Hlp hlp;
            hlp.subject = attacker_entity();
            hlp.action = s.decision == "allow" ? "is_authorized_to_access" : "is_not_authorized_to_access";
            hlp.object = victim_entity();
            hlp.options["url_pattern"] = pattern;
            enforce(hlp, text);
        }
    }

    void apply(const IsolateHost& s, const std::string& text) {
        for (const auto& host : bind_values(s.host, report)) {
            std::string entity = to_entity(host, current);
            plan.landscape_changes.push_back({"isolate", current.entity(entity).node_id, ""});
            Hlp outbound;
            outbound.subject = entity;
            outbound.action = "is_not_authorized_to_access";
            outbound.object = "internet_traffic";
            enforce(outbound, text);
            Hlp inbound;
            inbound.subject = "internet_traffic";
            inbound.action = "is_not_authorized_to_access";
            inbound.object = entity;
            enforce(inbound, text);
        }
    }

    void apply(const DeployNsf& s, const std::string& text) {
        for (const auto& cap : s.required_capabilities) cat.capability(cap); // UnknownCapability
        std::vector<std::string> capable;
        for (const auto& nsf_id : cat.nsf_ids()) {
            auto resolved = cat.resolve(nsf_id);
            if (std::all_of(s.required_capabilities.begin(), s.required_capabilities.end(),
                            [&](const std::string& c) { return resolved.owns(c); }))
                capable.push_back(nsf_id);
        }
        if (capable.empty()) {
            plan.unresolved.push_back({text, "no catalogue NSF owns the required capabilities"});
            return;
        }
        std::string entity = to_entity(bind_values(s.near, report).front(), current);
        std::string host_node = current.entity(entity).node_id;
        // Prefer an adjacent nsf-node; fall back to the hosting node.
        std::string placement = host_node;
        for (const auto& nbr : current.neighbours(host_node)) {
            const auto* node = current.find_node(nbr);
            if (node && node->kind == landscape::NodeKind::NsfNode) {
                placement = nbr;
                break;
            }
        }
        current = current.with_nsf(placement, capable.front());
        plan.landscape_changes.push_back({"add_nsf", placement, capable.front()});
    }

    void apply(const Ban& s, const std::string& text) {
        Hlp hlp;
        hlp.subject = "internet_traffic";
        hlp.action = "is_not_authorized_to_access";
        hlp.object = victim_entity();
        hlp.options[s.id_kind == "wallet" ? "wallet_ids" : "distributed_ids"] = bind_joined(s.ids, report);
        enforce(hlp, text);
    }

    std::string attacker_entity() {
        if (report.attacker_addresses.empty())
            throw Error(errc::unbound_variable, "$attacker has no value in this report", "attacker");
        return to_entity(report.attacker_addresses.front(), current);
    }

    std::string victim_entity() {
        if (report.impacted_hosts.empty())
            throw Error(errc::unbound_variable, "$victim has no value in this report", "victim");
        return to_entity(report.impacted_hosts.front(), current);
    }
};

} // namespace

RemediationPlan execute_recipe(const Recipe& recipe, const ThreatReport& report, const Landscape& ls,
                               const catalogue::Catalogue& cat, const refine::Mapping& mapping) {
    Execution exec{report, cat, mapping, ls, {}, 1, 0};
    exec.plan.recipe_id = recipe.id;
    exec.plan.recipe_text = recipe.text;
    for (const auto& step : recipe.steps) exec.run(step);
    return exec.plan;
}

// --- Share reports --------------------------------------------------------------------

nlohmann::json plan_to_json(const RemediationPlan& plan) {
    json hlps = json::array();
    for (const auto& h : plan.hlps)
        hlps.push_back({{"subject", h.subject}, {"action", h.action}, {"object", h.object},
                        {"options", h.options}});
    json changes = json::array();
    for (const auto& c : plan.landscape_changes) {
        json entry = {{"kind", c.kind}, {"node", c.node_id}};
        if (!c.nsf_id.empty()) entry["nsf"] = c.nsf_id;
        changes.push_back(std::move(entry));
    }
    json mlps = json::object();
    for (const auto& [nsf, policy] : plan.mlps) mlps[nsf] = mlp::to_document(policy);
    json unresolved = json::array();
    for (const auto& u : plan.unresolved) unresolved.push_back({{"step", u.step}, {"reason", u.reason}});
    return {{"recipe", plan.recipe_id}, {"hlps", hlps}, {"landscapeChanges", changes},
            {"mlps", mlps}, {"unresolved", unresolved}};
}

nlohmann::json emit_share_report(const RemediationPlan& plan, const ThreatReport& report) {
    json actions = json::array();
    for (const auto& c : plan.landscape_changes) {
        if (c.kind == "add_nsf")
            actions.push_back({{"type", "deployNsf"}, {"node", c.node_id}, {"nsf", c.nsf_id}});
        else
            actions.push_back({{"type", "isolate"}, {"node", c.node_id}});
    }
    for (const auto& [nsf, policy] : plan.mlps)
        actions.push_back(
            {{"type", "configureNsf"}, {"nsf", nsf}, {"rules", policy.rules.size()}});

    json parameters = json::object();
    parameters["threatType"] = report.threat_type;
    if (!report.attacker_addresses.empty()) parameters["attackerAddresses"] = report.attacker_addresses;
    if (!report.impacted_hosts.empty()) parameters["impactedHosts"] = report.impacted_hosts;
    if (!report.ports.empty()) parameters["ports"] = report.ports;
    if (!report.url_patterns.empty()) parameters["urlPatterns"] = report.url_patterns;
    if (!report.wallet_ids.empty()) parameters["walletIds"] = report.wallet_ids;
    if (!report.distributed_ids.empty()) parameters["distributedIds"] = report.distributed_ids;
    if (!plan.chosen_nodes.empty()) {
        std::vector<std::string> nodes = plan.chosen_nodes;
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        parameters["enforcementNodes"] = nodes;
    }

    std::vector<std::string> constraints;
    for (const auto& c : plan.landscape_changes)
        if (c.kind == "add_nsf")
            constraints.push_back("deploy " + c.nsf_id + " at " + c.node_id +
                                  " before applying its policy");
    for (const auto& [nsf, policy] : plan.mlps)
        for (const auto& [attr, value] : policy.policy_attributes)
            constraints.push_back(nsf + " requires policy attribute " + attr + "=" + value);
    for (const auto& u : plan.unresolved) constraints.push_back("unresolved: " + u.step + " (" + u.reason + ")");

    return {{"recipe", {{"id", plan.recipe_id}, {"text", plan.recipe_text}}},
            {"capabilities", plan.required_capabilities},
            {"actions", actions},
            {"deploymentParameters", parameters},
            {"enablingConstraints", constraints}};
}

} // namespace capforge::remediate
