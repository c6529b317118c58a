#pragma once

#include "capforge/catalogue.hpp"
#include "capforge/landscape.hpp"
#include "capforge/mlp.hpp"
#include "capforge/refine.hpp"

#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace capforge::remediate {

struct ThreatReport {
    std::string threat_type; // crypto_miner | ddos_botnet | auth_bruteforce | generic
    std::vector<std::string> impacted_hosts;     // entity names
    std::vector<std::string> attacker_addresses; // ipv4 or CIDR
    std::vector<std::string> ports;
    std::vector<std::string> url_patterns;
    std::vector<std::string> wallet_ids;
    std::vector<std::string> distributed_ids;
};

ThreatReport load_report(const nlohmann::json& document, const std::string& origin = "$");
ThreatReport load_report_file(const std::string& path);

// Step arguments hold either a literal or a report-bound $variable.
struct Arg {
    std::string text;
    bool is_variable = false;
};

struct FilterL4 {
    Arg from;
    Arg to;
    std::optional<Arg> proto;
    std::optional<Arg> ports;
};

struct FilterL7 {
    Arg url_pattern;
    std::string decision; // allow | deny
};

struct IsolateHost {
    Arg host;
};

struct DeployNsf {
    std::vector<std::string> required_capabilities;
    Arg near;
};

struct Ban {
    std::string id_kind; // wallet | did
    Arg ids;
};

using Step = std::variant<FilterL4, FilterL7, IsolateHost, DeployNsf, Ban>;

std::string describe(const Step& step);

struct Recipe {
    std::string id;
    std::set<std::string> applicable_threats;
    std::map<std::string, double> effectiveness; // threat type -> [0,1]
    std::vector<Step> steps;
    std::string text;
};

// Parses the line-oriented recipe grammar; GrammarError carries line/column.
Recipe parse_recipe(const std::string& text);

struct RecipeBook {
    std::vector<Recipe> recipes;
};

RecipeBook load_recipe_book(const nlohmann::json& document, const std::string& origin = "$");
RecipeBook load_recipe_book_file(const std::string& path);

enum class SelectionMode { Auto, Manual };

using RecipeCallback = std::function<std::size_t(const std::vector<const Recipe*>&)>;

// Auto picks the highest effectiveness for the report's threat type (ties go
// to the lexicographically first id); manual delegates to the callback.
const Recipe& select_recipe(const ThreatReport& report, const RecipeBook& book,
                            SelectionMode mode = SelectionMode::Auto,
                            const RecipeCallback& callback = {});

struct LandscapeChange {
    std::string kind; // add_nsf | isolate
    std::string node_id;
    std::string nsf_id; // empty for isolate
};

struct UnresolvedStep {
    std::string step;
    std::string reason;
};

struct RemediationPlan {
    std::string recipe_id;
    std::string recipe_text;
    std::vector<landscape::Hlp> hlps;
    std::vector<LandscapeChange> landscape_changes;
    std::map<std::string, mlp::MlpPolicy> mlps;
    std::vector<UnresolvedStep> unresolved;
    std::set<std::string> required_capabilities; // union across enacted steps
    std::vector<std::string> chosen_nodes;       // node ids carrying new rules, step order
};

// Runs the recipe stepwise: filters and bans become deny HLPs refined over
// the (possibly changed) landscape; an uncoverable refinement applies the
// first catalogue proposal and retries once. Refinement failures land in
// `unresolved`; the plan is partial rather than empty.
RemediationPlan execute_recipe(const Recipe& recipe, const ThreatReport& report,
                               const landscape::Landscape& ls, const catalogue::Catalogue& cat,
                               const refine::Mapping& mapping);

// Shareable remediation report with deterministic field order.
nlohmann::json emit_share_report(const RemediationPlan& plan, const ThreatReport& report);

nlohmann::json plan_to_json(const RemediationPlan& plan);

} // namespace capforge::remediate
