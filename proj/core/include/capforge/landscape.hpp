#pragma once

#include "capforge/catalogue.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace capforge::landscape {

enum class NodeKind { Host, Subnet, NsfNode };

const char* to_string(NodeKind k);

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Subnet;
    std::vector<std::string> installed_nsfs;
};

struct Entity {
    std::string node_id;
    std::string address; // ipv4 or CIDR
};

// High-level policy statement: subject-action-object(-options).
struct Hlp {
    std::string subject;
    std::string action;
    std::string object;
    std::map<std::string, std::string> options;
};

using Path = std::vector<std::string>; // node ids, endpoints included

class Landscape {
public:
    static Landscape build(std::vector<Node> nodes, std::vector<std::pair<std::string, std::string>> links,
                           std::map<std::string, Entity> entities,
                           const catalogue::Catalogue* cat = nullptr);

    const Node* find_node(const std::string& id) const;
    const Entity& entity(const std::string& name) const; // throws UnknownEntity
    const std::map<std::string, Entity>& entities() const { return entities_; }
    std::vector<std::string> node_ids() const;
    const std::vector<std::string>& neighbours(const std::string& node_id) const;

    // Copy-on-write helper for remediation: a new landscape with one more NSF
    // installed on `node_id`.
    Landscape with_nsf(const std::string& node_id, const std::string& nsf_id) const;

    // Entity whose address (or CIDR) covers `address`; most specific wins.
    std::optional<std::string> entity_covering(const std::string& address) const;

private:
    std::map<std::string, Node> nodes_;
    std::map<std::string, std::vector<std::string>> adjacency_;
    std::map<std::string, Entity> entities_;
};

Landscape load_landscape(const nlohmann::json& document, const std::string& origin = "$",
                         const catalogue::Catalogue* cat = nullptr);
Landscape load_landscape_file(const std::string& path, const catalogue::Catalogue* cat = nullptr);

std::vector<Hlp> parse_hlps(const nlohmann::json& document, const std::string& origin = "$");
std::vector<Hlp> parse_hlps_file(const std::string& path);

// All simple paths between the entities' hosting nodes, shortest first, ties
// lexicographic. Hard-capped (PathExplosion) at 10000 paths.
std::vector<Path> paths(const Landscape& ls, const std::string& src_entity,
                        const std::string& dst_entity);

// Nodes on every simple path, endpoints excluded. NoPath when none exists.
std::set<std::string> cut_nodes(const Landscape& ls, const std::string& src_entity,
                                const std::string& dst_entity);

} // namespace capforge::landscape
