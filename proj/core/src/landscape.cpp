#include "capforge/landscape.hpp"

#include "capforge/docjson.hpp"
#include "capforge/errors.hpp"
#include "capforge/values.hpp"

#include <algorithm>
#include <functional>

namespace capforge::landscape {

using docjson::json;

namespace {
constexpr std::size_t kPathCap = 10000;
}

const char* to_string(NodeKind k) {
    switch (k) {
    case NodeKind::Host: return "host";
    case NodeKind::Subnet: return "subnet";
    case NodeKind::NsfNode: return "nsf-node";
    }
    return "subnet";
}

Landscape Landscape::build(std::vector<Node> nodes, std::vector<std::pair<std::string, std::string>> links,
                           std::map<std::string, Entity> entities, const catalogue::Catalogue* cat) {
    Landscape ls;
    for (auto& n : nodes) {
        std::string id = n.id;
        if (id.empty()) throw Error(errc::parse_error, "node with empty id");
        if (cat)
            for (const auto& nsf : n.installed_nsfs)
                if (!cat->find_nsf(nsf))
                    throw Error(errc::unknown_nsf, "node " + id + " installs unknown NSF " + nsf, nsf);
        if (!ls.nodes_.emplace(id, std::move(n)).second)
            throw Error(errc::parse_error, "duplicate node id " + id);
        ls.adjacency_[id]; // ensure entry
    }
    for (const auto& [a, b] : links) {
        if (!ls.nodes_.count(a)) throw Error(errc::dangling_link, "link references missing node " + a, a);
        if (!ls.nodes_.count(b)) throw Error(errc::dangling_link, "link references missing node " + b, b);
        ls.adjacency_[a].push_back(b);
        ls.adjacency_[b].push_back(a);
    }
    for (auto& [id, nbrs] : ls.adjacency_) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    for (const auto& [name, e] : entities) {
        if (!ls.nodes_.count(e.node_id))
            throw Error(errc::dangling_link, "entity " + name + " maps to missing node " + e.node_id,
                        e.node_id);
        bool ok = e.address.find('/') != std::string::npos ? parse_cidr(e.address).has_value()
                                                           : parse_ipv4(e.address).has_value();
        if (!ok) throw Error(errc::parse_error, "entity " + name + " has a malformed address " + e.address);
    }
    ls.entities_ = std::move(entities);
    return ls;
}

const Node* Landscape::find_node(const std::string& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const Entity& Landscape::entity(const std::string& name) const {
    auto it = entities_.find(name);
    if (it == entities_.end()) throw Error(errc::unknown_entity, "unknown entity " + name, name);
    return it->second;
}

std::vector<std::string> Landscape::node_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : nodes_) out.push_back(id);
    return out;
}

const std::vector<std::string>& Landscape::neighbours(const std::string& node_id) const {
    auto it = adjacency_.find(node_id);
    if (it == adjacency_.end()) throw Error(errc::unknown_entity, "unknown node " + node_id, node_id);
    return it->second;
}

Landscape Landscape::with_nsf(const std::string& node_id, const std::string& nsf_id) const {
    Landscape copy = *this;
    auto it = copy.nodes_.find(node_id);
    if (it == copy.nodes_.end()) throw Error(errc::unknown_entity, "unknown node " + node_id, node_id);
    it->second.installed_nsfs.push_back(nsf_id);
    return copy;
}

std::optional<std::string> Landscape::entity_covering(const std::string& address) const {
    auto addr = parse_ipv4(address);
    if (!addr) return std::nullopt;
    std::optional<std::string> best;
    std::uint64_t best_span = ~std::uint64_t(0);
    for (const auto& [name, e] : entities_) {
        std::uint32_t lo, hi;
        if (auto cidr = parse_cidr(e.address)) {
            lo = cidr->first;
            hi = cidr->second;
        } else if (auto single = parse_ipv4(e.address)) {
            lo = hi = *single;
        } else {
            continue;
        }
        if (*addr < lo || *addr > hi) continue;
        std::uint64_t span = std::uint64_t(hi) - lo;
        if (span < best_span) {
            best_span = span;
            best = name;
        }
    }
    return best;
}

Landscape load_landscape(const nlohmann::json& document, const std::string& origin,
                         const catalogue::Catalogue* cat) {
    docjson::require_object(document, origin);
    docjson::reject_unknown_keys(document, {"nodes", "links", "entities"}, origin);

    std::vector<Node> nodes;
    if (document.contains("nodes")) {
        const auto& arr = docjson::require_array(document.at("nodes"), origin + ".nodes");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& nj = docjson::require_object(arr[i], docjson::index_path(origin + ".nodes", i));
            docjson::reject_unknown_keys(nj, {"id", "kind", "nsfs"},
                                         docjson::index_path(origin + ".nodes", i));
            Node n;
            n.id = docjson::get_string(nj, "id", origin + ".nodes");
            std::string kind = docjson::get_string(nj, "kind", origin + ".nodes");
            if (kind == "host") n.kind = NodeKind::Host;
            else if (kind == "subnet") n.kind = NodeKind::Subnet;
            else if (kind == "nsf-node") n.kind = NodeKind::NsfNode;
            else throw Error(errc::parse_error, origin + ".nodes: unknown kind " + kind);
            n.installed_nsfs = docjson::string_array(nj, "nsfs", origin + ".nodes");
            nodes.push_back(std::move(n));
        }
    }

    std::vector<std::pair<std::string, std::string>> links;
    if (document.contains("links")) {
        const auto& arr = docjson::require_array(document.at("links"), origin + ".links");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& lj = docjson::require_array(arr[i], docjson::index_path(origin + ".links", i));
            if (lj.size() != 2)
                throw Error(errc::parse_error, docjson::index_path(origin + ".links", i) + ": expected a pair");
            links.emplace_back(docjson::require_string(lj[0], origin + ".links"),
                               docjson::require_string(lj[1], origin + ".links"));
        }
    }

    std::map<std::string, Entity> entities;
    if (document.contains("entities")) {
        const auto& ej = docjson::require_object(document.at("entities"), origin + ".entities");
        for (auto it = ej.begin(); it != ej.end(); ++it) {
            const auto& vj = docjson::require_object(it.value(),
                                                     docjson::join_path(origin + ".entities", it.key()));
            docjson::reject_unknown_keys(vj, {"node", "address"},
                                         docjson::join_path(origin + ".entities", it.key()));
            entities[it.key()] = Entity{docjson::get_string(vj, "node", origin + ".entities"),
                                        docjson::get_string(vj, "address", origin + ".entities")};
        }
    }
    return Landscape::build(std::move(nodes), std::move(links), std::move(entities), cat);
}

Landscape load_landscape_file(const std::string& path, const catalogue::Catalogue* cat) {
    return load_landscape(docjson::load_file(path), path, cat);
}

std::vector<Hlp> parse_hlps(const nlohmann::json& document, const std::string& origin) {
    const auto& arr = docjson::require_array(document, origin);
    std::vector<Hlp> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& hj = docjson::require_object(arr[i], docjson::index_path(origin, i));
        docjson::reject_unknown_keys(hj, {"subject", "action", "object", "options"},
                                     docjson::index_path(origin, i));
        Hlp h;
        h.subject = docjson::get_string(hj, "subject", origin);
        h.action = docjson::get_string(hj, "action", origin);
        h.object = docjson::get_string(hj, "object", origin);
        if (hj.contains("options")) {
            const auto& oj = docjson::require_object(hj.at("options"), origin + ".options");
            for (auto it = oj.begin(); it != oj.end(); ++it)
                h.options[it.key()] =
                    docjson::require_string(it.value(), docjson::join_path(origin + ".options", it.key()));
        }
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<Hlp> parse_hlps_file(const std::string& path) {
    return parse_hlps(docjson::load_file(path), path);
}

std::vector<Path> paths(const Landscape& ls, const std::string& src_entity,
                        const std::string& dst_entity) {
    const std::string src = ls.entity(src_entity).node_id;
    const std::string dst = ls.entity(dst_entity).node_id;

    std::vector<Path> out;
    if (src == dst) {
        out.push_back({src});
        return out;
    }

    Path current{src};
    std::set<std::string> visited{src};
    std::function<void(const std::string&)> dfs = [&](const std::string& node) {
        for (const auto& next : ls.neighbours(node)) {
            if (visited.count(next)) continue;
            current.push_back(next);
            if (next == dst) {
                if (out.size() >= kPathCap)
                    throw Error(errc::path_explosion, "more than " + std::to_string(kPathCap) +
                                                          " simple paths between " + src_entity + " and " +
                                                          dst_entity);
                out.push_back(current);
            } else {
                visited.insert(next);
                dfs(next);
                visited.erase(next);
            }
            current.pop_back();
        }
    };
    dfs(src);

    std::sort(out.begin(), out.end(), [](const Path& a, const Path& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

std::set<std::string> cut_nodes(const Landscape& ls, const std::string& src_entity,
                                const std::string& dst_entity) {
    auto all = paths(ls, src_entity, dst_entity);
    if (all.empty())
        throw Error(errc::no_path, "no path between " + src_entity + " and " + dst_entity);

    std::set<std::string> cut(all.front().begin(), all.front().end());
    for (const auto& p : all) {
        std::set<std::string> interior(p.begin(), p.end());
        std::set<std::string> next;
        std::set_intersection(cut.begin(), cut.end(), interior.begin(), interior.end(),
                              std::inserter(next, next.begin()));
        cut = std::move(next);
    }
    cut.erase(ls.entity(src_entity).node_id);
    cut.erase(ls.entity(dst_entity).node_id);
    return cut;
}

} // namespace capforge::landscape
