#include "capforge/service.hpp"

#include "capforge/abstract_language.hpp"
#include "capforge/docjson.hpp"
#include "capforge/errors.hpp"
#include "capforge/mlp.hpp"
#include "capforge/translator.hpp"

#include <httplib.h>

#include <algorithm>

namespace capforge::service {

using docjson::json;

namespace {

int status_for(const std::string& code) {
    if (code == errc::unknown_nsf || code == errc::unknown_capability || code == errc::unknown_entity)
        return 404;
    if (code == "UnknownSession") return 404;
    if (code == "MissingPrerequisite") return 409;
    if (code == "ValidationFailed") return 422;
    return 400;
}

void reply_error(httplib::Response& res, const Error& e, const json& extra = {}) {
    json body = {{"code", e.code()}, {"message", e.what()}, {"detail", e.detail()}};
    if (!extra.is_null()) body["diagnostics"] = extra;
    res.status = status_for(e.code());
    res.set_content(body.dump(2) + "\n", "application/json");
}

void reply_json(httplib::Response& res, const json& body) {
    res.set_content(body.dump(2) + "\n", "application/json");
}

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

} // namespace

struct Service::Session {
    std::optional<std::vector<landscape::Hlp>> hlps;
    std::optional<landscape::Landscape> landscape;
    std::optional<refine::RefinementOutcome> outcome;
    std::chrono::steady_clock::time_point last_access = std::chrono::steady_clock::now();
};

struct Service::State {
    Config config;
    std::mutex sessions_mutex;
    std::map<std::string, Session> sessions;

    explicit State(Config c) : config(std::move(c)) {}

    // Callers hold sessions_mutex.
    Session& session(const std::string& id, bool create) {
        auto now = std::chrono::steady_clock::now();
        for (auto it = sessions.begin(); it != sessions.end();) {
            if (now - it->second.last_access > config.session_ttl) it = sessions.erase(it);
            else ++it;
        }
        auto it = sessions.find(id);
        if (it == sessions.end()) {
            if (!create) throw Error("UnknownSession", "no session " + id, id);
            it = sessions.emplace(id, Session{}).first;
        }
        it->second.last_access = now;
        return it->second;
    }
};

Service::Service(Config config) : state_(std::make_unique<State>(std::move(config))) {}
Service::~Service() = default;

void Service::register_routes(httplib::Server& server) {
    State* state = state_.get();
    const auto& cat = state->config.catalogue;

    auto guarded = [state](auto&& handler) {
        return [state, handler](const httplib::Request& req, httplib::Response& res) {
            try {
                handler(req, res);
            } catch (const Error& e) {
                reply_error(res, e);
            } catch (const std::exception& e) {
                reply_error(res, Error("InternalError", e.what()));
                res.status = 500;
            }
        };
    };

    server.Get("/nsfs", guarded([&cat](const httplib::Request&, httplib::Response& res) {
                   reply_json(res, {{"nsfs", cat.nsf_ids()}});
               }));

    server.Get("/compare", guarded([&cat](const httplib::Request& req, httplib::Response& res) {
                   if (!req.has_param("a") || !req.has_param("b"))
                       throw Error(errc::parse_error, "compare requires ?a= and ?b=");
                   auto result = catalogue::compare(cat, req.get_param_value("a"), req.get_param_value("b"));
                   reply_json(res, catalogue::comparison_to_json(result));
               }));

    server.Get("/substitute", guarded([&cat](const httplib::Request& req, httplib::Response& res) {
                   if (!req.has_param("nsf")) throw Error(errc::parse_error, "substitute requires ?nsf=");
                   reply_json(res, {{"substitutes", catalogue::substitutes(cat, req.get_param_value("nsf"))}});
               }));

    server.Get("/search", guarded([&cat](const httplib::Request& req, httplib::Response& res) {
                   if (!req.has_param("caps")) throw Error(errc::parse_error, "search requires ?caps=");
                   std::vector<std::string> caps;
                   std::string raw = req.get_param_value("caps");
                   std::size_t pos = 0;
                   while (pos <= raw.size()) {
                       auto next = raw.find(',', pos);
                       std::string part =
                           raw.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
                       if (!part.empty()) caps.push_back(part);
                       if (next == std::string::npos) break;
                       pos = next + 1;
                   }
                   if (caps.empty()) throw Error(errc::parse_error, "search needs at least one capability");
                   reply_json(res, {{"nsfs", catalogue::search(cat, caps)}});
               }));

    server.Post("/enforcers", guarded([&cat](const httplib::Request& req, httplib::Response& res) {
                    auto policy = mlp::parse_mlp(docjson::parse_text(req.body, "body"), "body");
                    reply_json(res, {{"enforcers", catalogue::enforcers(cat, policy)}});
                }));

    server.Get("/langgen", guarded([&cat](const httplib::Request& req, httplib::Response& res) {
                   if (!req.has_param("nsf")) throw Error(errc::parse_error, "langgen requires ?nsf=");
                   auto resolved = cat.resolve(req.get_param_value("nsf"));
                   res.set_content(mlp::emit_abstract_language_text(resolved, cat), "application/json");
               }));

    server.Post("/translate", guarded([&cat](const httplib::Request& req, httplib::Response& res) {
                    if (!req.has_param("nsf")) throw Error(errc::parse_error, "translate requires ?nsf=");
                    auto resolved = cat.resolve(req.get_param_value("nsf"));
                    auto policy = mlp::parse_mlp(docjson::parse_text(req.body, "body"), "body");

                    auto diags = mlp::validate_mlp(policy, resolved, cat);
                    if (mlp::has_errors(diags)) {
                        reply_error(res, Error("ValidationFailed", "the policy does not validate"),
                                    diagnostics_to_json(diags));
                        return;
                    }

                    translator::TranslateOptions options;
                    std::map<std::string, std::string> attributes;
                    for (const auto& [key, value] : req.params) {
                        if (key == "nsf") continue;
                        if (key == "autoSatisfy") options.auto_satisfy = value == "true" || value == "1";
                        else attributes[key] = value;
                    }
                    auto llc = translator::translate(policy, resolved, cat, attributes, options);
                    res.set_content(llc, "text/plain");
                }));

    server.Post(R"(/sessions/([^/]+)/hlp)",
                guarded([state](const httplib::Request& req, httplib::Response& res) {
                    auto hlps = landscape::parse_hlps(docjson::parse_text(req.body, "body"), "body");
                    std::lock_guard<std::mutex> lock(state->sessions_mutex);
                    state->session(req.matches[1], true).hlps = std::move(hlps);
                    reply_json(res, {{"status", "stored"}, {"hlps", req.matches[1].str()}});
                }));

    server.Post(R"(/sessions/([^/]+)/landscape)",
                guarded([state, &cat](const httplib::Request& req, httplib::Response& res) {
                    auto ls = landscape::load_landscape(docjson::parse_text(req.body, "body"), "body", &cat);
                    std::lock_guard<std::mutex> lock(state->sessions_mutex);
                    state->session(req.matches[1], true).landscape = std::move(ls);
                    reply_json(res, {{"status", "stored"}});
                }));

    server.Post(R"(/sessions/([^/]+)/refine)",
                guarded([state, &cat](const httplib::Request& req, httplib::Response& res) {
                    if (!state->config.mapping)
                        throw Error("MissingPrerequisite", "the service was started without a verb mapping");
                    auto strategy_name =
                        req.has_param("strategy") ? req.get_param_value("strategy") : "min-controls";
                    auto strategy = refine::strategy_from_string(strategy_name);
                    if (!strategy || *strategy == refine::Strategy::Interactive)
                        throw Error(errc::parse_error,
                                    "strategy must be min-controls or defense-in-depth");

                    std::vector<landscape::Hlp> hlps;
                    landscape::Landscape ls = [&] {
                        std::lock_guard<std::mutex> lock(state->sessions_mutex);
                        auto& session = state->session(req.matches[1], false);
                        if (!session.hlps)
                            throw Error("MissingPrerequisite", "upload an HLP document first");
                        if (!session.landscape)
                            throw Error("MissingPrerequisite", "upload a landscape first");
                        hlps = *session.hlps;
                        return *session.landscape;
                    }();

                    auto outcome = refine::refine_hlps(hlps, ls, cat, *state->config.mapping, *strategy);
                    auto body = refine::outcome_to_json(outcome);
                    {
                        std::lock_guard<std::mutex> lock(state->sessions_mutex);
                        state->session(req.matches[1], false).outcome = std::move(outcome);
                    }
                    reply_json(res, body);
                }));

    server.Get(R"(/sessions/([^/]+)/mlp)",
               guarded([state](const httplib::Request& req, httplib::Response& res) {
                   std::lock_guard<std::mutex> lock(state->sessions_mutex);
                   auto& session = state->session(req.matches[1], false);
                   if (!session.outcome)
                       throw Error("MissingPrerequisite", "run a refinement before downloading MLPs");
                   const auto& mlps = session.outcome->mlps;
                   if (req.has_param("nsf")) {
                       auto nsf = req.get_param_value("nsf");
                       auto it = mlps.find(nsf);
                       if (it == mlps.end())
                           throw Error(errc::unknown_nsf, "no MLP was generated for " + nsf, nsf);
                       reply_json(res, mlp::to_document(it->second));
                       return;
                   }
                   json all = json::object();
                   for (const auto& [nsf, policy] : mlps) all[nsf] = mlp::to_document(policy);
                   reply_json(res, {{"mlps", all}});
               }));

    server.Post("/remediate", guarded([state, &cat](const httplib::Request& req, httplib::Response& res) {
                    if (!state->config.mapping || !state->config.recipe_book || !state->config.landscape)
                        throw Error("MissingPrerequisite",
                                    "remediation needs --mapping, --recipes and --landscape at startup");
                    auto report = remediate::load_report(docjson::parse_text(req.body, "body"), "body");
                    const auto& recipe =
                        remediate::select_recipe(report, *state->config.recipe_book);
                    auto plan = remediate::execute_recipe(recipe, report, *state->config.landscape, cat,
                                                          *state->config.mapping);
                    reply_json(res, {{"plan", remediate::plan_to_json(plan)},
                                     {"shareReport", remediate::emit_share_report(plan, report)}});
                }));
}

bool Service::serve(const std::string& host, int port) {
    httplib::Server server;
    register_routes(server);
    return server.listen(host, port);
}

} // namespace capforge::service
