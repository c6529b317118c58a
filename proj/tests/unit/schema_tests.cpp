#include <doctest.h>

#include "capforge/abstract_language.hpp"
#include "capforge/docjson.hpp"
#include "capforge/json_schema.hpp"
#include "capforge/mlp.hpp"
#include "mlp_generator.hpp"
#include "test_support.hpp"

#include <random>

using namespace capforge;
using testsupport::fixture_catalogue;

namespace {
using nlohmann::json;
using testsupport::MlpGenerator;
} // namespace

TEST_CASE("generic packet filter schema exposes exactly its capability set") {
    const auto& cat = fixture_catalogue();
    auto schema = mlp::emit_abstract_language(cat.resolve("genericPacketFilter"), cat);
    const auto& defs = schema.at("$defs");

    std::set<std::string> exposed;
    for (auto it = defs.begin(); it != defs.end(); ++it) exposed.insert(it.key());
    CHECK(exposed == std::set<std::string>{
                         "condition_ipSourceAddressConditionCapability",
                         "condition_ipDestinationAddressConditionCapability",
                         "condition_sourcePortConditionCapability",
                         "condition_destinationPortConditionCapability",
                         "condition_ipProtocolTypeConditionCapability",
                         "action_acceptActionCapability",
                         "action_rejectActionCapability",
                         "rule",
                     });

    // Rule metadata fields are present.
    const auto& props = defs.at("rule").at("properties");
    for (const char* field : {"id", "ruleType", "description", "label", "externalData"})
        CHECK(props.contains(field));
}

TEST_CASE("schema emission is deterministic") {
    const auto& cat = fixture_catalogue();
    auto a = mlp::emit_abstract_language_text(cat.resolve("IpTables"), cat);
    auto b = mlp::emit_abstract_language_text(cat.resolve("IpTables"), cat);
    CHECK(a == b);
}

TEST_CASE("an NSF with zero capabilities still yields the policy/rule skeleton") {
    auto cat = catalogue::Catalogue::build({}, {[] {
                                               catalogue::NsfDescriptor n;
                                               n.id = "bare";
                                               return n;
                                           }()});
    auto schema = mlp::emit_abstract_language(cat.resolve("bare"), cat);
    CHECK(schema.at("$defs").contains("rule"));
    // A policy with no rules validates; any rule with actions cannot.
    CHECK(json_schema::validate(schema, {{"nsfName", "bare"}}).valid);
    nlohmann::json with_rule = {{"nsfName", "bare"},
                                {"rules", {{{"id", "0"}, {"actions", {{{"capability", "x"}}}}}}}};
    CHECK_FALSE(json_schema::validate(schema, with_rule).valid);
}

TEST_CASE("IpTables schema accepts the reference MLP; the GPF schema rejects it") {
    const auto& cat = fixture_catalogue();
    auto doc = docjson::load_file(testsupport::fixture_path("mlp/iptables-output-drop.json"));

    auto iptables_schema = mlp::emit_abstract_language(cat.resolve("IpTables"), cat);
    auto gpf_schema = mlp::emit_abstract_language(cat.resolve("genericPacketFilter"), cat);

    CHECK(json_schema::validate(iptables_schema, doc).valid);
    CHECK_FALSE(json_schema::validate(gpf_schema, doc).valid);
}

TEST_CASE("schema acceptance agrees with validate_mlp on 200 random MLPs per fixture NSF") {
    const auto& cat = fixture_catalogue();
    std::uint32_t seed = 1000;
    for (const auto& nsf_id : cat.nsf_ids()) {
        auto nsf = cat.resolve(nsf_id);
        auto schema = mlp::emit_abstract_language(nsf, cat);
        MlpGenerator gen(cat, nsf, seed++);

        int disagreements = 0;
        for (int i = 0; i < 200; ++i) {
            auto doc = gen.document();
            bool schema_ok = json_schema::validate(schema, doc).valid;
            auto policy = mlp::parse_mlp(doc);
            bool validator_ok = mlp::schema_expressible_clean(mlp::validate_mlp(policy, nsf, cat));
            if (schema_ok != validator_ok) {
                ++disagreements;
                if (disagreements <= 3) {
                    CAPTURE(nsf_id);
                    CAPTURE(doc.dump());
                    CHECK(schema_ok == validator_ok);
                }
            }
        }
        CHECK(disagreements == 0);
    }
}
