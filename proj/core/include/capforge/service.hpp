#pragma once

#include "capforge/catalogue.hpp"
#include "capforge/landscape.hpp"
#include "capforge/refine.hpp"
#include "capforge/remediate.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace capforge::service {

struct Config {
    catalogue::Catalogue catalogue;
    std::optional<refine::Mapping> mapping;
    std::optional<remediate::RecipeBook> recipe_book;
    std::optional<landscape::Landscape> landscape; // default for /remediate
    std::chrono::seconds session_ttl{3600};
};

// HTTP face of the toolkit. The catalogue is immutable and shared across
// requests; per-session state (uploaded HLPs, landscape, last refinement) is
// in-memory with TTL eviction.
class Service {
public:
    explicit Service(Config config);
    ~Service();

    void register_routes(httplib::Server& server);

    // Binds and serves until the process ends. Returns false when the port
    // cannot be bound.
    bool serve(const std::string& host, int port);

private:
    struct Session;
    struct State;
    std::unique_ptr<State> state_;
};

} // namespace capforge::service
