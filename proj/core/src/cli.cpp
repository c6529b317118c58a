#include "capforge/cli.hpp"

#include "capforge/abstract_language.hpp"
#include "capforge/catalogue.hpp"
#include "capforge/docjson.hpp"
#include "capforge/errors.hpp"
#include "capforge/landscape.hpp"
#include "capforge/mlp.hpp"
#include "capforge/refine.hpp"
#include "capforge/remediate.hpp"
#include "capforge/service.hpp"
#include "capforge/translator.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <unistd.h>

namespace capforge::cli {

using docjson::json;

namespace {

json diagnostics_to_json(const std::vector<mlp::Diagnostic>& diags) {
    json out = json::array();
    for (const auto& d : diags)
        out.push_back({{"severity", d.severity == mlp::Severity::Error ? "error" : "warning"},
                       {"code", d.code},
                       {"rule", d.rule_id},
                       {"capability", d.capability},
                       {"message", d.message}});
    return out;
}

std::map<std::string, std::string> parse_attrs(const std::vector<std::string>& pairs) {
    std::map<std::string, std::string> out;
    for (const auto& kv : pairs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(errc::parse_error, "--attr wants key=value, got \"" + kv + "\"");
        out[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return out;
}

void print(std::ostream& out, const json& body) { out << body.dump(2) << "\n"; }

struct Paths {
    std::string catalogue;
    std::string landscape;
    std::string mapping;
    std::string recipes;
};

catalogue::Catalogue need_catalogue(const Paths& paths) {
    if (paths.catalogue.empty())
        throw Error(errc::parse_error, "a catalogue is required (--catalogue or CAPFORGE_CATALOGUE)");
    return catalogue::load_catalogue_file(paths.catalogue);
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"capforge - capability-model toolkit for security policy refinement and translation"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    Paths paths;
    app.add_option("--catalogue", paths.catalogue, "catalogue document (file or directory)")
        ->envname("CAPFORGE_CATALOGUE");
    app.add_option("--landscape", paths.landscape, "network landscape document")
        ->envname("CAPFORGE_LANDSCAPE");
    app.add_option("--mapping", paths.mapping, "verb mapping document")->envname("CAPFORGE_MAPPING");
    app.add_option("--recipes", paths.recipes, "recipe book document")->envname("CAPFORGE_RECIPES");

    // catalogue validate
    auto* cat_cmd = app.add_subcommand("catalogue", "catalogue maintenance");
    cat_cmd->require_subcommand(1);
    cat_cmd->add_subcommand("validate", "parse and validate the catalogue document");

    // compare
    std::string cmp_a, cmp_b;
    auto* cmp = app.add_subcommand("compare", "compare the capability sets of two NSFs");
    cmp->add_option("--a", cmp_a, "first NSF id")->required();
    cmp->add_option("--b", cmp_b, "second NSF id")->required();

    // substitute
    std::string sub_nsf;
    auto* sub = app.add_subcommand("substitute", "NSFs able to stand in for the given one");
    sub->add_option("--nsf", sub_nsf, "NSF id")->required();

    // search
    std::string search_caps;
    auto* sea = app.add_subcommand("search", "NSFs owning all listed capabilities");
    sea->add_option("--caps", search_caps, "comma-separated capability ids")->required();

    // enforcers
    std::string enf_mlp;
    auto* enf = app.add_subcommand("enforcers", "NSFs able to enforce an MLP");
    enf->add_option("--mlp", enf_mlp, "MLP document path")->required();

    // langgen
    std::string lang_nsf;
    auto* lang = app.add_subcommand("langgen", "emit the NSF's abstract-language schema");
    lang->add_option("--nsf", lang_nsf, "NSF id")->required();

    // translate
    std::string tr_nsf, tr_mlp;
    std::vector<std::string> tr_attrs;
    bool tr_auto_satisfy = false;
    auto* tr = app.add_subcommand("translate", "compile an MLP into the NSF's native configuration");
    tr->add_option("--nsf", tr_nsf, "target NSF id")->required();
    tr->add_option("--mlp", tr_mlp, "MLP document path")->required();
    tr->add_option("--attr", tr_attrs, "policy attribute key=value (repeatable)");
    tr->add_flag("--auto-satisfy", tr_auto_satisfy, "inject single-valued dependency targets");

    // refine
    std::string ref_hlp, ref_strategy = "min-controls";
    auto* ref = app.add_subcommand("refine", "refine HLP statements into MLPs over a landscape");
    ref->add_option("--hlp", ref_hlp, "HLP document path")->required();
    ref->add_option("--strategy", ref_strategy, "min-controls | defense-in-depth | interactive")
        ->envname("CAPFORGE_STRATEGY");

    // remediate
    std::string rem_report, rem_mode = "auto";
    auto* rem = app.add_subcommand("remediate", "interpret a threat report against the recipe book");
    rem->add_option("--report", rem_report, "threat report path")->required();
    rem->add_option("--mode", rem_mode, "auto | manual");

    // serve
    int port = 8080;
    auto* srv = app.add_subcommand("serve", "expose the toolkit as an HTTP service");
    srv->add_option("--port", port, "listen port")->envname("CAPFORGE_PORT");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return 0;
        }
        err << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (cmp->parsed()) {
            auto cat = need_catalogue(paths);
            print(out, catalogue::comparison_to_json(catalogue::compare(cat, cmp_a, cmp_b)));
            return 0;
        }
        if (sub->parsed()) {
            auto cat = need_catalogue(paths);
            print(out, {{"substitutes", catalogue::substitutes(cat, sub_nsf)}});
            return 0;
        }
        if (sea->parsed()) {
            auto cat = need_catalogue(paths);
            std::vector<std::string> caps;
            std::size_t pos = 0;
            while (pos <= search_caps.size()) {
                auto next = search_caps.find(',', pos);
                std::string part = search_caps.substr(
                    pos, next == std::string::npos ? std::string::npos : next - pos);
                if (!part.empty()) caps.push_back(part);
                if (next == std::string::npos) break;
                pos = next + 1;
            }
            if (caps.empty()) throw Error(errc::parse_error, "--caps needs at least one capability");
            print(out, {{"nsfs", catalogue::search(cat, caps)}});
            return 0;
        }
        if (enf->parsed()) {
            auto cat = need_catalogue(paths);
            auto policy = mlp::parse_mlp_file(enf_mlp);
            print(out, {{"enforcers", catalogue::enforcers(cat, policy)}});
            return 0;
        }
        if (lang->parsed()) {
            auto cat = need_catalogue(paths);
            out << mlp::emit_abstract_language_text(cat.resolve(lang_nsf), cat);
            return 0;
        }
        if (tr->parsed()) {
            auto cat = need_catalogue(paths);
            auto resolved = cat.resolve(tr_nsf);
            auto policy = mlp::parse_mlp_file(tr_mlp);
            auto diags = mlp::validate_mlp(policy, resolved, cat);
            if (mlp::has_errors(diags)) {
                print(err, {{"code", "ValidationFailed"},
                            {"message", "the policy does not validate against " + tr_nsf},
                            {"diagnostics", diagnostics_to_json(diags)}});
                return 1;
            }
            translator::TranslateOptions options;
            options.auto_satisfy = tr_auto_satisfy;
            out << translator::translate(policy, resolved, cat, parse_attrs(tr_attrs), options);
            return 0;
        }
        if (cat_cmd->parsed()) {
            auto cat = need_catalogue(paths);
            print(out, {{"status", "ok"},
                        {"nsfs", cat.nsf_ids().size()},
                        {"capabilities", cat.capability_ids().size()}});
            return 0;
        }
        if (ref->parsed()) {
            auto cat = need_catalogue(paths);
            if (paths.landscape.empty()) throw Error(errc::parse_error, "refine requires --landscape");
            if (paths.mapping.empty()) throw Error(errc::parse_error, "refine requires --mapping");
            auto ls = landscape::load_landscape_file(paths.landscape, &cat);
            auto mapping = refine::load_mapping_file(paths.mapping);
            auto hlps = landscape::parse_hlps_file(ref_hlp);
            auto strategy = refine::strategy_from_string(ref_strategy);
            if (!strategy) throw Error(errc::parse_error, "unknown strategy " + ref_strategy);

            refine::DecisionCallback callback;
            if (*strategy == refine::Strategy::Interactive) {
                if (!isatty(STDIN_FILENO))
                    throw Error(errc::invalid_policy,
                                "interactive refinement needs a terminal on stdin");
                callback = [&](const landscape::Hlp& hlp, const landscape::Path& path,
                               const std::vector<refine::CandidateControl>& options) {
                    std::cerr << "Select a control for \"" << hlp.subject << " " << hlp.action << " "
                              << hlp.object << "\" on path";
                    for (const auto& node : path) std::cerr << " " << node;
                    std::cerr << "\n";
                    for (std::size_t i = 0; i < options.size(); ++i)
                        std::cerr << "  [" << i + 1 << "] " << options[i].node_id << " ("
                                  << options[i].nsf_id << ")\n";
                    std::size_t pick = 0;
                    while (true) {
                        std::cerr << "choice> " << std::flush;
                        std::string line;
                        if (!std::getline(std::cin, line))
                            throw Error(errc::invalid_policy, "interactive selection aborted");
                        try {
                            pick = std::stoul(line);
                        } catch (...) {
                            continue;
                        }
                        if (pick >= 1 && pick <= options.size()) return pick - 1;
                    }
                };
            }
            auto outcome = refine::refine_hlps(hlps, ls, cat, mapping, *strategy, callback);
            print(out, refine::outcome_to_json(outcome));
            bool all_enforced = std::all_of(
                outcome.results.begin(), outcome.results.end(),
                [](const refine::HlpRefinement& r) { return r.status == refine::Status::Enforced; });
            return all_enforced ? 0 : 1;
        }
        if (rem->parsed()) {
            auto cat = need_catalogue(paths);
            if (paths.landscape.empty()) throw Error(errc::parse_error, "remediate requires --landscape");
            if (paths.mapping.empty()) throw Error(errc::parse_error, "remediate requires --mapping");
            if (paths.recipes.empty()) throw Error(errc::parse_error, "remediate requires --recipes");
            auto ls = landscape::load_landscape_file(paths.landscape, &cat);
            auto mapping = refine::load_mapping_file(paths.mapping);
            auto book = remediate::load_recipe_book_file(paths.recipes);
            auto report = remediate::load_report_file(rem_report);

            remediate::SelectionMode mode = remediate::SelectionMode::Auto;
            remediate::RecipeCallback callback;
            if (rem_mode == "manual") {
                mode = remediate::SelectionMode::Manual;
                if (!isatty(STDIN_FILENO))
                    throw Error(errc::invalid_policy, "manual recipe selection needs a terminal");
                callback = [](const std::vector<const remediate::Recipe*>& options) {
                    for (std::size_t i = 0; i < options.size(); ++i)
                        std::cerr << "  [" << i + 1 << "] " << options[i]->id << "\n";
                    std::size_t pick = 0;
                    while (true) {
                        std::cerr << "recipe> " << std::flush;
                        std::string line;
                        if (!std::getline(std::cin, line))
                            throw Error(errc::invalid_policy, "recipe selection aborted");
                        try {
                            pick = std::stoul(line);
                        } catch (...) {
                            continue;
                        }
                        if (pick >= 1 && pick <= options.size()) return pick - 1;
                    }
                };
            } else if (rem_mode != "auto") {
                throw Error(errc::parse_error, "--mode must be auto or manual");
            }
            const auto& recipe = remediate::select_recipe(report, book, mode, callback);
            auto plan = remediate::execute_recipe(recipe, report, ls, cat, mapping);
            print(out, {{"plan", remediate::plan_to_json(plan)},
                        {"shareReport", remediate::emit_share_report(plan, report)}});
            return plan.unresolved.empty() ? 0 : 1;
        }
        if (srv->parsed()) {
            service::Config config{need_catalogue(paths), std::nullopt, std::nullopt, std::nullopt,
                                   std::chrono::seconds{3600}};
            if (!paths.mapping.empty()) config.mapping = refine::load_mapping_file(paths.mapping);
            if (!paths.recipes.empty()) config.recipe_book = remediate::load_recipe_book_file(paths.recipes);
            if (!paths.landscape.empty())
                config.landscape = landscape::load_landscape_file(paths.landscape);
            err << "capforge service listening on 0.0.0.0:" << port << "\n";
            service::Service service(std::move(config));
            if (!service.serve("0.0.0.0", port)) {
                print(err, {{"code", "BindError"}, {"message", "cannot bind port"}, {"detail", std::to_string(port)}});
                return 1;
            }
            return 0;
        }
    } catch (const Error& e) {
        print(err, {{"code", e.code()}, {"message", e.what()}, {"detail", e.detail()}});
        return 1;
    }
    err << app.help();
    return 2;
}

} // namespace capforge::cli
