// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Self-contained; runs against the shipped fixtures.

#include "capforge/abstract_language.hpp"
#include "capforge/cli.hpp"
#include "capforge/docjson.hpp"
#include "capforge/errors.hpp"
#include "capforge/json_schema.hpp"
#include "capforge/landscape.hpp"
#include "capforge/mlp.hpp"
#include "capforge/refine.hpp"
#include "capforge/remediate.hpp"
#include "capforge/service.hpp"
#include "capforge/translator.hpp"

#include "mlp_generator.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace capforge;
using nlohmann::json;

namespace {

std::string fixture(const std::string& rel) { return std::string(CAPFORGE_FIXTURE_DIR) + "/" + rel; }

const catalogue::Catalogue& cat() {
    static auto c = catalogue::load_catalogue_file(fixture("catalogue/capforge-catalogue.json"));
    return c;
}

const landscape::Landscape& reference_landscape() {
    static auto ls = landscape::load_landscape_file(fixture("landscape/reference.json"), &cat());
    return ls;
}

const refine::Mapping& mapping() {
    static auto m = refine::load_mapping_file(fixture("mapping/default-mapping.json"));
    return m;
}

struct Failure {
    std::string what;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw Failure{what};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --- 1. Golden translation ------------------------------------------------------

void golden_translation() {
    auto start = std::chrono::steady_clock::now();
    auto policy = mlp::parse_mlp_file(fixture("mlp/iptables-output-drop.json"));
    auto llc = translator::translate(policy, cat().resolve("IpTables"), cat());
    require(llc ==
                "iptables -A OUTPUT -i eth0 -p TCP -s 192.168.1.1 -j DROP\n"
                "iptables -P OUTPUT ACCEPT\n",
            "LLC differs from the reference listing:\n" + llc);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    require(ms.count() < 1000, "translation took " + std::to_string(ms.count()) + " ms (budget 1000)");
}

// --- 2. Vendor comparison --------------------------------------------------------

void vendor_comparison() {
    auto result = catalogue::compare(cat(), "PF", "IpTables");
    require(result.relation == catalogue::Relation::Overlapping,
            std::string("relation is ") + to_string(result.relation));

    const std::set<std::string> generic_filter{
        "ipProtocolTypeConditionCapability",  "ipSourceAddressConditionCapability",
        "ipDestinationAddressConditionCapability", "sourcePortConditionCapability",
        "destinationPortConditionCapability", "acceptActionCapability",
        "rejectActionCapability",             "defaultActionCapabilitySpec"};
    const std::set<std::string> pf_specific{
        "stateInterfaceBoundConditionCapability", "outputInterfaceConditionCapability",
        "inputInterfaceConditionCapability", "maxRateConnectionsConditionCapability"};
    // Hand-listed expectation for the fixture catalogue.
    std::set<std::string> expected = generic_filter;
    expected.insert({"tcpFlagsConditionCapability", "interfaceConditionCapability",
                     "numberConnectionsConditionCapability", "limitSAddrConditionCapability",
                     "fmrResolutionStrategyCapability"});

    require(result.shared == expected, "shared set differs from the hand-listed expectation");
    for (const auto& c : generic_filter)
        require(result.shared.count(c) == 1, "shared set misses " + c);
    for (const auto& c : pf_specific)
        require(result.shared.count(c) == 0, "shared set wrongly contains " + c);
}

// --- 3. Expansion semantics --------------------------------------------------------

void expansion_semantics() {
    auto start = std::chrono::steady_clock::now();

    // Variant of the fixture NSF without concatenators, so unions expand.
    auto doc = docjson::load_file(fixture("catalogue/capforge-catalogue.json"));
    for (auto& nsf : doc.at("nsfs"))
        if (nsf.at("id") == "IpTables")
            for (auto& det : nsf.at("translationDetails")) det.erase("bodyConcatenator");
    auto plain = catalogue::load_catalogue(doc);
    auto nsf = plain.resolve("IpTables");

    const std::vector<std::string> addresses{"10.0.0.1", "10.0.0.2", "10.0.0.3", "10.0.0.4"};
    const std::vector<std::string> protocols{"TCP", "UDP", "ICMP"};
    std::mt19937 rng(2024);

    auto random_rule = [&]() {
        mlp::MlpRule rule;
        rule.id = "r";
        rule.external_data["priority"] = "1";
        int nconds = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < nconds; ++i) {
            mlp::ConditionInstance c;
            int which = static_cast<int>(rng() % 4);
            c.capability = which == 0   ? "ipSourceAddressConditionCapability"
                           : which == 1 ? "sourcePortConditionCapability"
                           : which == 2 ? "destinationPortConditionCapability"
                                        : "ipProtocolTypeConditionCapability";
            bool negatable = which != 3;
            c.operation = (negatable && rng() % 4 == 0) ? mlp::Operation::NotEqualTo : mlp::Operation::Equal;
            int nvals = 1 + static_cast<int>(rng() % 3);
            for (int v = 0; v < nvals; ++v) {
                if (which == 0) {
                    c.values.push_back(SingleValue{addresses[rng() % 4]});
                } else if (which == 3) {
                    c.values.push_back(SingleValue{protocols[rng() % 3]});
                } else if (rng() % 4 == 0) {
                    int lo = static_cast<int>(rng() % 12);
                    c.values.push_back(RangeValue{std::to_string(lo), std::to_string(lo + int(rng() % 4))});
                } else {
                    c.values.push_back(SingleValue{std::to_string(rng() % 16)});
                }
            }
            rule.conditions.push_back(std::move(c));
        }
        rule.actions.push_back(mlp::ActionInstance{"rejectActionCapability", std::nullopt});
        return rule;
    };

    for (int round = 0; round < 1000; ++round) {
        auto rule = random_rule();
        auto plan = translator::plan_expansion(rule, nsf);

        // The analytic product over expanded multi-value conditions.
        std::size_t product = 1;
        for (std::size_t i = 0; i < rule.conditions.size(); ++i)
            if (plan.decisions[i] == translator::Decision::Expand && rule.conditions[i].values.size() > 1)
                product *= rule.conditions[i].values.size();
        require(plan.expected_rule_count == product, "planned count differs from the analytic product");

        auto expanded = translator::expand_rule(rule, plan);
        require(expanded.size() == plan.expected_rule_count, "expansion count differs from the plan");

        for (const auto& src : addresses)
            for (int sport = 0; sport < 16; ++sport)
                for (const auto& proto : protocols) {
                    mlp::Packet p;
                    p.attributes = {{"ipSourceAddressConditionCapability", src},
                                    {"sourcePortConditionCapability", std::to_string(sport)},
                                    {"destinationPortConditionCapability", std::to_string(15 - sport)},
                                    {"ipProtocolTypeConditionCapability", proto}};
                    bool original = mlp::match_rule(rule, p, plain);
                    bool any = std::any_of(expanded.begin(), expanded.end(), [&](const mlp::MlpRule& r) {
                        return mlp::match_rule(r, p, plain);
                    });
                    if (original != any) {
                        require(false, "match sets diverge for a generated rule");
                    }
                }
    }

    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    require(ms.count() < 30000, "expansion check took " + std::to_string(ms.count()) + " ms (budget 30000)");
}

// --- 4. Multiport inlining ------------------------------------------------------------

void multiport_inlining() {
    mlp::MlpPolicy policy;
    policy.nsf_name = "IpTables";
    policy.policy_attributes["targetRuleSet"] = "INPUT";
    mlp::MlpRule rule;
    rule.id = "r";
    rule.external_data["priority"] = "1";
    rule.conditions = {
        mlp::ConditionInstance{"ipProtocolTypeConditionCapability", mlp::Operation::Equal,
                               {SingleValue{"TCP"}}},
        mlp::ConditionInstance{"sourcePortConditionCapability", mlp::Operation::Equal,
                               {SingleValue{"80"}, SingleValue{"443"}}}};
    rule.actions = {mlp::ActionInstance{"appendRuleActionCapability", "INPUT"},
                    mlp::ActionInstance{"rejectActionCapability", std::nullopt}};
    policy.rules = {rule};

    auto llc = translator::translate(policy, cat().resolve("IpTables"), cat());
    auto lines = std::count(llc.begin(), llc.end(), '\n');
    require(lines == 1, "expected exactly one rule line, got " + std::to_string(lines));
    require(llc.find("-m multiport --sports 80,443") != std::string::npos,
            "joined token missing from: " + llc);

    auto doc = docjson::load_file(fixture("catalogue/capforge-catalogue.json"));
    for (auto& nsf : doc.at("nsfs"))
        if (nsf.at("id") == "IpTables")
            for (auto& det : nsf.at("translationDetails")) det.erase("bodyConcatenator");
    auto plain = catalogue::load_catalogue(doc);
    auto expanded = translator::translate(policy, plain.resolve("IpTables"), plain);
    require(std::count(expanded.begin(), expanded.end(), '\n') == 2,
            "expected |values| rules without the concatenator:\n" + expanded);
}

// --- 5. Dependency enforcement -----------------------------------------------------------

void dependency_enforcement() {
    mlp::MlpPolicy icmp;
    icmp.nsf_name = "IpTables";
    icmp.policy_attributes["targetRuleSet"] = "INPUT";
    mlp::MlpRule rule;
    rule.id = "icmp-ports";
    rule.external_data["priority"] = "1";
    rule.conditions = {
        mlp::ConditionInstance{"ipProtocolTypeConditionCapability", mlp::Operation::Equal,
                               {SingleValue{"ICMP"}}},
        mlp::ConditionInstance{"sourcePortConditionCapability", mlp::Operation::Equal, {SingleValue{"80"}}}};
    rule.actions = {mlp::ActionInstance{"appendRuleActionCapability", "INPUT"},
                    mlp::ActionInstance{"rejectActionCapability", std::nullopt}};
    icmp.rules = {rule};

    bool threw = false;
    try {
        translator::translate(icmp, cat().resolve("IpTables"), cat());
    } catch (const Error& e) {
        threw = true;
        require(e.code() == errc::dependency_violation, std::string("unexpected error code ") + e.code());
        require(std::string(e.what()).find("ipProtocolTypeConditionCapability") != std::string::npos,
                "the violation does not name the protocol capability");
    }
    require(threw, "ICMP + source port translated without a DependencyViolation");

    // Single-valued dependency (tcp flags -> protocol TCP) with --auto-satisfy.
    mlp::MlpPolicy flags;
    flags.nsf_name = "IpTables";
    flags.policy_attributes["targetRuleSet"] = "INPUT";
    mlp::MlpRule frule;
    frule.id = "flags";
    frule.external_data["priority"] = "1";
    frule.conditions = {mlp::ConditionInstance{"tcpFlagsConditionCapability", mlp::Operation::Equal,
                                               {SingleValue{"SYN"}}}};
    frule.actions = {mlp::ActionInstance{"appendRuleActionCapability", "INPUT"},
                     mlp::ActionInstance{"rejectActionCapability", std::nullopt}};
    flags.rules = {frule};

    translator::TranslateOptions options;
    options.auto_satisfy = true;
    auto llc = translator::translate(flags, cat().resolve("IpTables"), cat(), {}, options);
    require(llc.find("-p TCP") != std::string::npos, "injected condition missing from: " + llc);
}

// --- 6. Refinement scenario ------------------------------------------------------------

void refinement_scenario() {
    auto hlps = landscape::parse_hlps_file(fixture("landscape/sample-hlps.json"));
    require(hlps.size() == 3, "sample document must hold the three statements");

    auto sets_of = [](const refine::Candidates& c) {
        std::vector<std::set<std::string>> out;
        for (const auto& pc : c.per_path) {
            std::set<std::string> nodes;
            for (const auto& ctl : pc.controls) nodes.insert(ctl.node_id);
            out.push_back(std::move(nodes));
        }
        return out;
    };

    // Row 1: Bob -> internet traffic.
    auto row1 = refine::candidate_controls(hlps[0], reference_landscape(), cat(), mapping());
    require(sets_of(row1) == std::vector<std::set<std::string>>{{"firewall-1"}, {"firewall-1", "firewall-2"}},
            "row 1 candidates differ from the expected sets");

    // Row 2: Alice protect integrity Bob.
    auto row2 = refine::candidate_controls(hlps[1], reference_landscape(), cat(), mapping());
    require(row2.pairs.size() == 1, "row 2 expects a single endpoint pair");
    require(row2.pairs[0].subject_side.node_id == "vpn-gateway-1" &&
                row2.pairs[0].subject_side.nsf_id == "StrongSwan" &&
                row2.pairs[0].object_side.node_id == "firewall-1" &&
                row2.pairs[0].object_side.nsf_id == "Xfrm",
            "row 2 pair differs from the expected pair");

    // Row 3: Malicious_User denied to Alice.
    auto row3 = refine::candidate_controls(hlps[2], reference_landscape(), cat(), mapping());
    require(sets_of(row3) == std::vector<std::set<std::string>>{{"firewall-2"}, {"firewall-1", "firewall-2"}},
            "row 3 candidates differ from the expected sets");

    auto selection = refine::select_controls(hlps[2], row3, refine::Strategy::MinControls);
    require(selection.size() == 1 && selection[0].node_id == "firewall-2",
            "min_controls on row 3 must select exactly {firewall-2}");

    // Full run: every generated MLP validates, and the deny policy holds on
    // every Malicious_User -> Alice path under the match oracle.
    auto outcome = refine::refine_hlps(hlps, reference_landscape(), cat(), mapping(),
                                       refine::Strategy::MinControls);
    for (const auto& r : outcome.results)
        require(r.status == refine::Status::Enforced, "a sample statement failed to refine");
    for (const auto& [nsf, policy] : outcome.mlps) {
        auto diags = mlp::validate_mlp(policy, cat().resolve(nsf), cat());
        require(!mlp::has_errors(diags), "generated MLP for " + nsf + " does not validate");
    }

    std::set<std::string> deny_nodes;
    for (const auto& ctl : outcome.results[2].selection) deny_nodes.insert(ctl.node_id);
    mlp::Packet attack;
    attack.attributes = {{"ipSourceAddressConditionCapability", "203.0.113.200"},
                         {"ipDestinationAddressConditionCapability", "10.0.1.10"},
                         {"destinationPortConditionCapability", "443"}};
    for (const auto& path : landscape::paths(reference_landscape(), "Malicious_User", "Alice")) {
        bool covered = false;
        for (const auto& node : path) {
            if (!deny_nodes.count(node)) continue;
            for (const auto& nsf : reference_landscape().find_node(node)->installed_nsfs) {
                auto it = outcome.mlps.find(nsf);
                if (it == outcome.mlps.end()) continue;
                auto verdict =
                    mlp::match_policy(it->second, attack, cat(), cat().resolve(nsf).strategy_details);
                if (verdict.decided &&
                    std::any_of(verdict.actions.begin(), verdict.actions.end(),
                                [](const mlp::ActionInstance& a) {
                                    return a.capability == "rejectActionCapability";
                                }))
                    covered = true;
            }
        }
        require(covered, "a Malicious_User -> Alice path is not denied");
    }
}

// --- 7. Remediation pipeline -------------------------------------------------------------

void remediation_pipeline() {
    auto book = remediate::load_recipe_book_file(fixture("recipes/default-recipes.json"));

    // No L4 filter between the wifi client and Bob: expect one deployment at
    // the cut node, then a validating policy on the added NSF.
    auto wifi = remediate::load_report_file(fixture("reports/crypto-miner-wifi.json"));
    const auto& recipe = remediate::select_recipe(wifi, book);
    auto plan = remediate::execute_recipe(recipe, wifi, reference_landscape(), cat(), mapping());

    require(plan.landscape_changes.size() == 1, "expected exactly one landscape change");
    require(plan.landscape_changes[0].kind == "add_nsf", "expected an add_nsf change");
    auto cut = landscape::cut_nodes(reference_landscape(), "Wifi_Client", "Bob");
    require(cut.count(plan.landscape_changes[0].node_id) == 1,
            "the proposed node " + plan.landscape_changes[0].node_id + " is not a cut node");
    auto added = plan.landscape_changes[0].nsf_id;
    require(plan.mlps.count(added) == 1, "no MLP was generated for the added NSF");
    auto diags = mlp::validate_mlp(plan.mlps.at(added), cat().resolve(added), cat());
    require(!mlp::has_errors(diags), "the MLP for the added NSF does not validate");

    // A capable filter on the path: zero landscape changes.
    auto external = remediate::load_report_file(fixture("reports/crypto-miner-external.json"));
    const auto& recipe2 = remediate::select_recipe(external, book);
    auto plan2 = remediate::execute_recipe(recipe2, external, reference_landscape(), cat(), mapping());
    require(plan2.landscape_changes.empty(), "expected no landscape changes with a capable filter");
    require(!plan2.mlps.empty(), "the capable-path plan generated no MLPs");

    // Share-report determinism: two runs are byte-identical.
    auto run1 = remediate::emit_share_report(
        remediate::execute_recipe(recipe2, external, reference_landscape(), cat(), mapping()), external);
    auto run2 = remediate::emit_share_report(
        remediate::execute_recipe(recipe2, external, reference_landscape(), cat(), mapping()), external);
    require(run1.dump(2) == run2.dump(2), "share reports differ across runs");
}

// --- 8. Property suites ---------------------------------------------------------------------

void property_suites() {
    std::mt19937 rng(77);

    // Negation involution over random conditions and packets.
    const std::vector<std::string> addresses{"10.0.0.1", "10.0.0.2", "10.0.0.3", "10.0.0.4"};
    for (int round = 0; round < 300; ++round) {
        mlp::ConditionInstance c;
        c.capability = round % 2 ? "sourcePortConditionCapability" : "ipSourceAddressConditionCapability";
        int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) {
            if (c.capability == "sourcePortConditionCapability")
                c.values.push_back(SingleValue{std::to_string(rng() % 16)});
            else
                c.values.push_back(SingleValue{addresses[rng() % 4]});
        }
        mlp::Packet p;
        p.attributes["sourcePortConditionCapability"] = std::to_string(rng() % 16);
        p.attributes["ipSourceAddressConditionCapability"] = addresses[rng() % 4];
        c.operation = mlp::Operation::Equal;
        bool eq = mlp::matches(c, p, cat());
        c.operation = mlp::Operation::NotEqualTo;
        bool ne = mlp::matches(c, p, cat());
        require(eq == !ne, "negation involution failed");
    }

    // FMR ordering: emitted line order follows ascending priority.
    for (int round = 0; round < 50; ++round) {
        mlp::MlpPolicy policy;
        policy.nsf_name = "IpTables";
        policy.policy_attributes["targetRuleSet"] = "INPUT";
        int n = 2 + static_cast<int>(rng() % 5);
        std::vector<int> priorities;
        for (int i = 0; i < n; ++i) priorities.push_back(i + 1);
        std::shuffle(priorities.begin(), priorities.end(), rng);
        for (int i = 0; i < n; ++i) {
            mlp::MlpRule r;
            r.id = "r" + std::to_string(i);
            r.external_data["priority"] = std::to_string(priorities[i]);
            r.conditions = {mlp::ConditionInstance{"ipSourceAddressConditionCapability",
                                                   mlp::Operation::Equal,
                                                   {SingleValue{"10.9.0." + std::to_string(priorities[i])}}}};
            r.actions = {mlp::ActionInstance{"appendRuleActionCapability", "INPUT"},
                         mlp::ActionInstance{"rejectActionCapability", std::nullopt}};
            policy.rules.push_back(std::move(r));
        }
        auto llc = translator::translate(policy, cat().resolve("IpTables"), cat());
        std::size_t last = 0;
        for (int pri = 1; pri <= n; ++pri) {
            auto at = llc.find("10.9.0." + std::to_string(pri) + " ");
            require(at != std::string::npos, "a rule line is missing");
            require(at >= last, "line order does not follow priorities");
            last = at;
        }
    }

    // Schema/validator agreement: 200 generated MLP documents per fixture NSF.
    std::uint32_t seed = 4242;
    for (const auto& nsf_id : cat().nsf_ids()) {
        auto resolved = cat().resolve(nsf_id);
        auto schema = mlp::emit_abstract_language(resolved, cat());
        testsupport::MlpGenerator gen(cat(), resolved, seed++);
        for (int i = 0; i < 200; ++i) {
            auto doc = gen.document();
            bool schema_ok = json_schema::validate(schema, doc).valid;
            auto policy = mlp::parse_mlp(doc);
            bool validator_ok = mlp::schema_expressible_clean(mlp::validate_mlp(policy, resolved, cat()));
            require(schema_ok == validator_ok,
                    "schema and validator disagree for " + nsf_id + " on: " + doc.dump());
        }
    }

    // Cut nodes equal the brute-force path intersection on graphs <= 12 nodes.
    for (int round = 0; round < 40; ++round) {
        int n = 4 + static_cast<int>(rng() % 9);
        std::vector<landscape::Node> nodes;
        std::map<std::string, std::set<std::string>> adj;
        for (int i = 0; i < n; ++i) {
            std::string id = "n" + std::to_string(i);
            nodes.push_back(landscape::Node{id, landscape::NodeKind::Subnet, {}});
            adj[id];
        }
        std::vector<std::pair<std::string, std::string>> links;
        for (int i = 0; i < n; ++i)
            for (int k = i + 1; k < n; ++k)
                if (rng() % 100 < 35) {
                    links.emplace_back("n" + std::to_string(i), "n" + std::to_string(k));
                    adj["n" + std::to_string(i)].insert("n" + std::to_string(k));
                    adj["n" + std::to_string(k)].insert("n" + std::to_string(i));
                }
        std::map<std::string, landscape::Entity> entities{
            {"s", {"n0", "10.0.0.1"}}, {"t", {"n" + std::to_string(n - 1), "10.0.0.2"}}};
        auto ls = landscape::Landscape::build(nodes, links, entities);

        // Independent enumeration.
        std::vector<std::vector<std::string>> all;
        std::vector<std::string> current{"n0"};
        std::set<std::string> seen{"n0"};
        std::string goal = "n" + std::to_string(n - 1);
        std::function<void(const std::string&)> walk = [&](const std::string& at) {
            if (at == goal) {
                all.push_back(current);
                return;
            }
            for (const auto& next : adj[at]) {
                if (seen.count(next)) continue;
                seen.insert(next);
                current.push_back(next);
                walk(next);
                current.pop_back();
                seen.erase(next);
            }
        };
        walk("n0");

        if (all.empty()) continue;
        std::set<std::string> expected(all.front().begin(), all.front().end());
        for (const auto& p : all) {
            std::set<std::string> interior(p.begin(), p.end());
            std::set<std::string> merged;
            std::set_intersection(expected.begin(), expected.end(), interior.begin(), interior.end(),
                                  std::inserter(merged, merged.begin()));
            expected = std::move(merged);
        }
        expected.erase("n0");
        expected.erase(goal);
        require(landscape::cut_nodes(ls, "s", "t") == expected, "cut nodes differ from brute force");
    }

    // Argmax scaling invariance.
    auto book = remediate::load_recipe_book_file(fixture("recipes/default-recipes.json"));
    remediate::ThreatReport miner;
    miner.threat_type = "crypto_miner";
    miner.impacted_hosts = {"Bob"};
    auto baseline = remediate::select_recipe(miner, book).id;
    for (double scale : {0.25, 0.5, 0.75}) {
        auto scaled = book;
        for (auto& r : scaled.recipes)
            for (auto& [k, v] : r.effectiveness) v *= scale;
        require(remediate::select_recipe(miner, scaled).id == baseline,
                "recipe selection changed under score scaling");
    }
}

// --- 9. CLI/service parity ---------------------------------------------------------------------

void cli_service_parity() {
    service::Config config{catalogue::load_catalogue_file(fixture("catalogue/capforge-catalogue.json")),
                           refine::load_mapping_file(fixture("mapping/default-mapping.json")),
                           remediate::load_recipe_book_file(fixture("recipes/default-recipes.json")),
                           landscape::load_landscape_file(fixture("landscape/reference.json")),
                           std::chrono::seconds{3600}};
    service::Service service(std::move(config));
    httplib::Server server;
    service.register_routes(server);
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto run_cli = [](std::vector<std::string> args) {
        std::ostringstream out, err;
        args.insert(args.begin() + 1, {"--catalogue", fixture("catalogue/capforge-catalogue.json")});
        int status = cli::dispatch(args, out, err);
        require(status == 0, "CLI exited " + std::to_string(status) + ": " + err.str());
        return out.str();
    };

    try {
        httplib::Client client("127.0.0.1", port);

        struct Case {
            std::vector<std::string> cli;
            std::string method;
            std::string target;
            std::string body;
            bool text = false;
        };
        std::vector<Case> cases = {
            {{"compare", "--a", "PF", "--b", "IpTables"}, "GET", "/compare?a=PF&b=IpTables", ""},
            {{"substitute", "--nsf", "genericPacketFilter"}, "GET", "/substitute?nsf=genericPacketFilter",
             ""},
            {{"search", "--caps", "acceptActionCapability"}, "GET", "/search?caps=acceptActionCapability",
             ""},
            {{"enforcers", "--mlp", fixture("mlp/gpf-allow.json")}, "POST", "/enforcers",
             slurp(fixture("mlp/gpf-allow.json"))},
            {{"translate", "--nsf", "IpTables", "--mlp", fixture("mlp/iptables-output-drop.json"),
              "--attr", "targetRuleSet=OUTPUT"},
             "POST", "/translate?nsf=IpTables&targetRuleSet=OUTPUT",
             slurp(fixture("mlp/iptables-output-drop.json")), true},
        };

        for (const auto& c : cases) {
            auto cli_out = run_cli(c.cli);
            auto res = c.method == "GET" ? client.Get(c.target)
                                         : client.Post(c.target, c.body, "application/json");
            require(res && res->status == 200, "HTTP request failed for " + c.target);
            if (c.text) {
                require(cli_out == res->body, "text payloads differ for " + c.target);
            } else {
                require(json::parse(cli_out) == json::parse(res->body),
                        "payloads differ for " + c.target);
            }
        }
    } catch (...) {
        server.stop();
        thread.join();
        throw;
    }
    server.stop();
    thread.join();
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void()> run;
    };
    const std::vector<Criterion> criteria = {
        {"1 golden translation", golden_translation},
        {"2 vendor comparison", vendor_comparison},
        {"3 expansion semantics", expansion_semantics},
        {"4 multiport inlining", multiport_inlining},
        {"5 dependency enforcement", dependency_enforcement},
        {"6 refinement scenario", refinement_scenario},
        {"7 remediation pipeline", remediation_pipeline},
        {"8 property suites", property_suites},
        {"9 cli/service parity", cli_service_parity},
    };

    int failures = 0;
    auto suite_start = std::chrono::steady_clock::now();
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string verdict = "PASS";
        std::string detail;
        try {
            c.run();
        } catch (const Failure& f) {
            verdict = "FAIL";
            detail = f.what;
            ++failures;
        } catch (const std::exception& e) {
            verdict = "FAIL";
            detail = e.what();
            ++failures;
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                        start);
        std::cout << verdict << " criterion " << c.name << " (" << ms.count() << " ms)";
        if (!detail.empty()) std::cout << " - " << detail;
        std::cout << "\n";
    }
    auto total = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                       suite_start);
    std::cout << (failures ? "FAILED" : "OK") << " - " << criteria.size() - failures << "/"
              << criteria.size() << " criteria passed in " << total.count() << " ms\n";
    return failures == 0 ? 0 : 1;
}
