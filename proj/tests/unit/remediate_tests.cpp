#include <doctest.h>

#include "capforge/errors.hpp"
#include "capforge/refine.hpp"
#include "capforge/remediate.hpp"
#include "test_support.hpp"

#include <algorithm>

using namespace capforge;
using namespace capforge::remediate;
using testsupport::fixture_catalogue;
using testsupport::fixture_landscape;

namespace {

const refine::Mapping& fixture_mapping() {
    static auto m = refine::load_mapping_file(testsupport::fixture_path("mapping/default-mapping.json"));
    return m;
}

const RecipeBook& fixture_book() {
    static auto book = load_recipe_book_file(testsupport::fixture_path("recipes/default-recipes.json"));
    return book;
}

ThreatReport report_from_fixture(const std::string& name) {
    return load_report_file(testsupport::fixture_path("reports/" + name));
}

} // namespace

TEST_CASE("recipe grammar: one-step filter recipe round-trips") {
    auto recipe = parse_recipe("filter l4 from $attacker to $victim\n");
    REQUIRE(recipe.steps.size() == 1);
    const auto& step = std::get<FilterL4>(recipe.steps.front());
    CHECK(step.from.is_variable);
    CHECK(step.from.text == "attacker");
    CHECK(step.to.text == "victim");
    CHECK_FALSE(step.proto.has_value());
    CHECK(describe(recipe.steps.front()) == "filter l4 from $attacker to $victim");
}

TEST_CASE("recipe grammar: full vocabulary") {
    auto recipe = parse_recipe(
        "# comment line\n"
        "filter l4 from 10.0.0.1 to $victim proto TCP ports 80,443\n"
        "filter l7 url $urls deny\n"
        "isolate host $victim\n"
        "deploy nsf requiring urlConditionCapability,denyActionCapability near $victim\n"
        "ban wallet $wallets\n");
    REQUIRE(recipe.steps.size() == 5);
    CHECK(std::holds_alternative<FilterL4>(recipe.steps[0]));
    CHECK(std::holds_alternative<FilterL7>(recipe.steps[1]));
    CHECK(std::holds_alternative<IsolateHost>(recipe.steps[2]));
    CHECK(std::holds_alternative<DeployNsf>(recipe.steps[3]));
    CHECK(std::holds_alternative<Ban>(recipe.steps[4]));
    CHECK(std::get<DeployNsf>(recipe.steps[3]).required_capabilities.size() == 2);
}

TEST_CASE("recipe grammar errors carry line and column") {
    SUBCASE("empty recipes must act") {
        try {
            parse_recipe("# only a comment\n\n");
            FAIL("expected GrammarError");
        } catch (const Error& e) {
            CHECK(e.code() == errc::grammar_error);
        }
    }
    SUBCASE("unknown keyword") {
        try {
            parse_recipe("obliterate host $victim\n");
            FAIL("expected GrammarError");
        } catch (const Error& e) {
            CHECK(e.code() == errc::grammar_error);
            CHECK(std::string(e.what()).find("obliterate") != std::string::npos);
            CHECK(std::string(e.what()).find("line 1") != std::string::npos);
        }
    }
    SUBCASE("truncated step") {
        try {
            parse_recipe("filter l4 from $attacker\n");
            FAIL("expected GrammarError");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("line 1") != std::string::npos);
        }
    }
    SUBCASE("trailing tokens") {
        CHECK_THROWS_AS(parse_recipe("isolate host $victim now\n"), Error);
    }
}

TEST_CASE("select_recipe: argmax with lexicographic ties, manual delegation") {
    const auto& book = fixture_book();

    ThreatReport miner;
    miner.threat_type = "crypto_miner";
    miner.impacted_hosts = {"Bob"};
    CHECK(select_recipe(miner, book).id == "quarantine-attacker-l4"); // 0.9 beats 0.6

    RecipeBook tie;
    {
        Recipe a = parse_recipe("isolate host $victim\n");
        a.id = "r-b";
        a.applicable_threats = {"generic"};
        a.effectiveness["generic"] = 0.8;
        Recipe b = a;
        b.id = "r-a";
        tie.recipes = {a, b};
    }
    ThreatReport generic;
    generic.threat_type = "generic";
    generic.impacted_hosts = {"Bob"};
    CHECK(select_recipe(generic, tie).id == "r-a");

    ThreatReport unknown;
    unknown.threat_type = "ddos_botnet";
    unknown.impacted_hosts = {"Bob"};
    RecipeBook empty_for{{}};
    try {
        select_recipe(unknown, empty_for);
        FAIL("expected NoApplicableRecipe");
    } catch (const Error& e) {
        CHECK(e.code() == errc::no_applicable_recipe);
    }

    auto manual = select_recipe(miner, book, SelectionMode::Manual,
                                [](const std::vector<const Recipe*>& options) {
                                    return options.size() - 1; // the last, lexicographically
                                });
    CHECK(manual.id == "quarantine-attacker-l4");
}

TEST_CASE("argmax selection is invariant under positive scaling of all scores") {
    const auto& book = fixture_book();
    ThreatReport miner;
    miner.threat_type = "crypto_miner";
    miner.impacted_hosts = {"Bob"};
    auto baseline = select_recipe(miner, book).id;

    for (double scale : {0.1, 0.5, 0.9}) {
        RecipeBook scaled = book;
        for (auto& r : scaled.recipes)
            for (auto& [k, v] : r.effectiveness) v *= scale;
        CHECK(select_recipe(miner, scaled).id == baseline);
    }
}

TEST_CASE("crypto-miner with a capable filter on the path: plan with no landscape changes") {
    const auto& book = fixture_book();
    auto report = report_from_fixture("crypto-miner-external.json");
    const auto& recipe = select_recipe(report, book);
    auto plan = execute_recipe(recipe, report, fixture_landscape(), fixture_catalogue(), fixture_mapping());

    CHECK(plan.recipe_id == "quarantine-attacker-l4");
    CHECK(plan.landscape_changes.empty());
    CHECK(plan.unresolved.empty());
    REQUIRE(plan.hlps.size() == 1);
    CHECK(plan.hlps[0].subject == "Malicious_User");
    CHECK(plan.hlps[0].object == "Alice");
    REQUIRE(plan.mlps.count("IpTables") == 1);

    const auto& cat = fixture_catalogue();
    const auto& policy = plan.mlps.at("IpTables");
    CHECK_FALSE(mlp::has_errors(mlp::validate_mlp(policy, cat.resolve("IpTables"), cat)));

    // Plan soundness: the reported attacker-victim pair is denied.
    mlp::Packet bad;
    bad.attributes = {{"ipSourceAddressConditionCapability", "203.0.113.66"},
                      {"ipDestinationAddressConditionCapability", "10.0.1.10"}};
    auto outcome = mlp::match_policy(policy, bad, cat, cat.resolve("IpTables").strategy_details);
    REQUIRE(outcome.decided);
    CHECK(std::any_of(outcome.actions.begin(), outcome.actions.end(), [](const mlp::ActionInstance& a) {
        return a.capability == "rejectActionCapability";
    }));
}

TEST_CASE("crypto-miner with no L4 filter on the path: deploy at the cut node, then enforce") {
    const auto& book = fixture_book();
    auto report = report_from_fixture("crypto-miner-wifi.json");
    const auto& recipe = select_recipe(report, book);
    auto plan = execute_recipe(recipe, report, fixture_landscape(), fixture_catalogue(), fixture_mapping());

    REQUIRE(plan.landscape_changes.size() == 1);
    CHECK(plan.landscape_changes[0].kind == "add_nsf");
    CHECK(plan.landscape_changes[0].node_id == "vpn-gateway-2"); // the only cut node
    CHECK(plan.landscape_changes[0].nsf_id == "IpTables");
    CHECK(plan.unresolved.empty());
    REQUIRE(plan.mlps.count("IpTables") == 1);

    const auto& cat = fixture_catalogue();
    CHECK_FALSE(mlp::has_errors(
        mlp::validate_mlp(plan.mlps.at("IpTables"), cat.resolve("IpTables"), cat)));
}

TEST_CASE("ban steps produce ledger MLPs keyed on the reported ids") {
    const auto& book = fixture_book();
    auto report = report_from_fixture("auth-bruteforce.json");
    const auto& recipe = select_recipe(report, book);
    CHECK(recipe.id == "ban-ledger-ids"); // 0.95 beats 0.8

    auto plan = execute_recipe(recipe, report, fixture_landscape(), fixture_catalogue(), fixture_mapping());
    CHECK(plan.unresolved.empty());
    REQUIRE(plan.mlps.count("ledgerAuth") == 1);
    const auto& policy = plan.mlps.at("ledgerAuth");
    REQUIRE(policy.rules.size() == 2); // wallet rule + did rule

    const auto& wallet_rule = policy.rules.front();
    REQUIRE(wallet_rule.conditions.size() == 1);
    CHECK(wallet_rule.conditions[0].capability == "walletIdConditionCapability");
    REQUIRE(wallet_rule.conditions[0].values.size() == 2);
    CHECK(std::get<SingleValue>(wallet_rule.conditions[0].values[0]).literal == "0xDEAD");
    CHECK(std::get<SingleValue>(wallet_rule.conditions[0].values[1]).literal == "0xBEEF");
    bool bans = std::any_of(wallet_rule.actions.begin(), wallet_rule.actions.end(),
                            [](const mlp::ActionInstance& a) { return a.capability == "banActionCapability"; });
    CHECK(bans);

    const auto& cat = fixture_catalogue();
    CHECK_FALSE(mlp::has_errors(mlp::validate_mlp(policy, cat.resolve("ledgerAuth"), cat)));
}

TEST_CASE("isolation denies both directions and records the intent") {
    auto recipe = parse_recipe("isolate host $victim\n");
    recipe.id = "isolate";
    ThreatReport report;
    report.threat_type = "generic";
    report.impacted_hosts = {"Bob"};
    auto plan = execute_recipe(recipe, report, fixture_landscape(), fixture_catalogue(), fixture_mapping());

    REQUIRE(plan.hlps.size() == 2);
    CHECK(plan.hlps[0].subject == "Bob");
    CHECK(plan.hlps[0].object == "internet_traffic");
    CHECK(plan.hlps[1].subject == "internet_traffic");
    CHECK(plan.hlps[1].object == "Bob");
    REQUIRE_FALSE(plan.landscape_changes.empty());
    CHECK(plan.landscape_changes[0].kind == "isolate");
    CHECK(plan.landscape_changes[0].node_id == "subnet-lab");
    CHECK(plan.unresolved.empty());
}

TEST_CASE("unbound variables are hard errors; refine failures are recorded as unresolved") {
    auto recipe = parse_recipe("ban wallet $wallets\n");
    recipe.id = "needs-wallets";
    ThreatReport no_wallets;
    no_wallets.threat_type = "generic";
    no_wallets.impacted_hosts = {"Bob"};
    try {
        execute_recipe(recipe, no_wallets, fixture_landscape(), fixture_catalogue(), fixture_mapping());
        FAIL("expected UnboundVariable");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unbound_variable);
    }

    // A step that refines nowhere (no path) lands in `unresolved`.
    auto disconnected = parse_recipe("filter l4 from $attacker to $victim\n");
    disconnected.id = "r";
    ThreatReport report;
    report.threat_type = "generic";
    report.impacted_hosts = {"IsolatedHost"};
    report.attacker_addresses = {"203.0.113.66"};

    std::vector<landscape::Node> nodes{{"island", landscape::NodeKind::Subnet, {}},
                                       {"ext", landscape::NodeKind::Subnet, {}}};
    std::map<std::string, landscape::Entity> entities{
        {"IsolatedHost", {"island", "10.9.0.1"}},
        {"Malicious_User", {"ext", "203.0.113.0/24"}}};
    auto tiny = landscape::Landscape::build(nodes, {}, entities);
    auto plan = execute_recipe(disconnected, report, tiny, fixture_catalogue(), fixture_mapping());
    CHECK(plan.mlps.empty());
    REQUIRE(plan.unresolved.size() == 1);
    CHECK(plan.unresolved[0].step.find("filter l4") != std::string::npos);
}

TEST_CASE("deploy steps install near the target and changes stay in step order") {
    const auto& book = fixture_book();
    ThreatReport report;
    report.threat_type = "generic";
    report.impacted_hosts = {"Bob"};
    report.attacker_addresses = {"203.0.113.66"};

    auto recipe = select_recipe(report, book);
    CHECK(recipe.id == "deploy-filter-near-victim"); // 0.7 beats isolate-victim's 0.5

    auto plan = execute_recipe(recipe, report, fixture_landscape(), fixture_catalogue(), fixture_mapping());
    CHECK(plan.unresolved.empty());
    // Step 1 deployed next to Bob's subnet (an adjacent nsf-node), step 2
    // produced the deny statement; the order is preserved.
    REQUIRE(plan.landscape_changes.size() == 1);
    CHECK(plan.landscape_changes[0].kind == "add_nsf");
    CHECK(plan.landscape_changes[0].node_id == "firewall-1");
    CHECK(plan.landscape_changes[0].nsf_id == "IpTables");
    REQUIRE(plan.hlps.size() == 1);
    CHECK(plan.hlps[0].subject == "Malicious_User");
    CHECK(plan.hlps[0].object == "Bob");
    CHECK_FALSE(plan.mlps.empty());
}

TEST_CASE("share reports are deterministic projections of the plan") {
    const auto& book = fixture_book();
    auto report = report_from_fixture("crypto-miner-external.json");
    const auto& recipe = select_recipe(report, book);
    auto plan1 = execute_recipe(recipe, report, fixture_landscape(), fixture_catalogue(), fixture_mapping());
    auto plan2 = execute_recipe(recipe, report, fixture_landscape(), fixture_catalogue(), fixture_mapping());

    auto doc1 = emit_share_report(plan1, report);
    auto doc2 = emit_share_report(plan2, report);
    CHECK(doc1.dump(2) == doc2.dump(2));

    for (const char* field : {"recipe", "capabilities", "actions", "deploymentParameters",
                              "enablingConstraints"})
        CHECK(doc1.contains(field));
    CHECK(doc1.at("recipe").at("id") == "quarantine-attacker-l4");
    // Required capability ids are projected.
    bool has_reject = false;
    for (const auto& c : doc1.at("capabilities")) has_reject |= c == "rejectActionCapability";
    CHECK(has_reject);
}

TEST_CASE("a plan with only unresolved steps yields an empty action section") {
    auto recipe = parse_recipe("filter l4 from $attacker to $victim\n");
    recipe.id = "r";
    ThreatReport report;
    report.threat_type = "generic";
    report.impacted_hosts = {"A"};
    report.attacker_addresses = {"203.0.113.66"};

    std::vector<landscape::Node> nodes{{"n1", landscape::NodeKind::Subnet, {}},
                                       {"n2", landscape::NodeKind::Subnet, {}}};
    std::map<std::string, landscape::Entity> entities{{"A", {"n1", "10.0.0.1"}},
                                                      {"Mal", {"n2", "203.0.113.0/24"}}};
    auto tiny = landscape::Landscape::build(nodes, {}, entities);
    auto plan = execute_recipe(recipe, report, tiny, fixture_catalogue(), fixture_mapping());
    auto doc = emit_share_report(plan, report);
    CHECK(doc.at("actions").empty());
    CHECK_FALSE(doc.at("enablingConstraints").empty());
}

TEST_CASE("reports without hosts or attackers are rejected") {
    nlohmann::json doc = {{"threatType", "generic"}};
    CHECK_THROWS_AS(load_report(doc), Error);
    nlohmann::json bad_type = {{"threatType", "alien"}, {"impactedHosts", {"Bob"}}};
    CHECK_THROWS_AS(load_report(bad_type), Error);
}
