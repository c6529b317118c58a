#include <benchmark/benchmark.h>

#include "capforge/catalogue.hpp"
#include "capforge/landscape.hpp"
#include "capforge/mlp.hpp"
#include "capforge/translator.hpp"

#include <random>

namespace {

using namespace capforge;

const catalogue::Catalogue& fixture_catalogue() {
    static auto cat = catalogue::load_catalogue_file(std::string(CAPFORGE_FIXTURE_DIR) +
                                                     "/catalogue/capforge-catalogue.json");
    return cat;
}

const landscape::Landscape& fixture_landscape() {
    static auto ls = landscape::load_landscape_file(std::string(CAPFORGE_FIXTURE_DIR) +
                                                    "/landscape/reference.json");
    return ls;
}

mlp::MlpPolicy paper_policy() {
    return mlp::parse_mlp_file(std::string(CAPFORGE_FIXTURE_DIR) + "/mlp/iptables-output-drop.json");
}

void BM_TranslatePaperPolicy(benchmark::State& state) {
    const auto& cat = fixture_catalogue();
    auto nsf = cat.resolve("IpTables");
    auto policy = paper_policy();
    for (auto _ : state) {
        auto llc = translator::translate(policy, nsf, cat);
        benchmark::DoNotOptimize(llc);
    }
}
BENCHMARK(BM_TranslatePaperPolicy);

void BM_TranslateMultiValueExpansion(benchmark::State& state) {
    const auto& cat = fixture_catalogue();
    auto nsf = cat.resolve("IpTables");
    auto policy = paper_policy();
    auto& rule = policy.rules.front();
    mlp::ConditionInstance dst;
    dst.capability = "ipDestinationAddressConditionCapability";
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i)
        dst.values.push_back(SingleValue{"10.0.0." + std::to_string(i + 1)});
    rule.conditions.push_back(dst);
    for (auto _ : state) {
        auto llc = translator::translate(policy, nsf, cat);
        benchmark::DoNotOptimize(llc);
    }
}
BENCHMARK(BM_TranslateMultiValueExpansion)->Arg(4)->Arg(16)->Arg(64);

void BM_MatchPolicy(benchmark::State& state) {
    const auto& cat = fixture_catalogue();
    auto nsf = cat.resolve("IpTables");
    auto policy = paper_policy();
    mlp::Packet packet;
    packet.attributes["ipProtocolTypeConditionCapability"] = "TCP";
    packet.attributes["ipSourceAddressConditionCapability"] = "192.168.1.1";
    for (auto _ : state) {
        auto outcome = mlp::match_policy(policy, packet, cat, nsf.strategy_details);
        benchmark::DoNotOptimize(outcome);
    }
}
BENCHMARK(BM_MatchPolicy);

void BM_PathsBobToInternet(benchmark::State& state) {
    const auto& ls = fixture_landscape();
    for (auto _ : state) {
        auto ps = landscape::paths(ls, "Bob", "internet_traffic");
        benchmark::DoNotOptimize(ps);
    }
}
BENCHMARK(BM_PathsBobToInternet);

void BM_ResolveNsf(benchmark::State& state) {
    const auto& cat = fixture_catalogue();
    for (auto _ : state) {
        auto r = cat.resolve("IpTables");
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_ResolveNsf);

} // namespace

BENCHMARK_MAIN();
