#pragma once

// Graph index over a populated store: coordinate chains, point nodes,
// probabilistic intersection nodes, sibling order/shortcut links, and
// randomized node splitting. Construction is single-writer; a finished
// index is immutable and safe for unrestricted concurrent readers.
//
// Node ids share one namespace: a coordinate node's id is its path, a point
// node's id is the canonical point key "<a, b>", and an intersection node's
// id is "<a * b>" (the separator keeps two-dimensional point ids and
// intersection ids distinct).
//
// All randomness comes from the caller's Rng. Draw order is fixed:
// insert_resource rolls one uniform per absent candidate intersection pair,
// walking adjacent dimension pairs in schema order and each root path from
// the root down; maybe_split draws the split gate, then the child pick,
// then the resource pick. Identical store + seed + policy therefore yields
// a byte-identical serialized index.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsm/link_stats.hpp"
#include "rsm/rng.hpp"
#include "rsm/space.hpp"
#include "rsm/store.hpp"

namespace rsm {

struct IndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class NodeKind { Coordinate, Point, Intersection };
enum class LinkKind { Inclusion, Intersection, Order, Shortcut };

const char* node_kind_name(NodeKind k);
const char* link_kind_name(LinkKind k);

std::string intersection_id(const Path& a, const Path& b);

struct IndexNode {
    std::string id;
    NodeKind kind = NodeKind::Coordinate;
    long long count = 0;  // distinct resources reachable below this node

    // derived from the id against the schema, not serialized
    int dim = -1;  // Coordinate: owning dimension
    Path path;     // Coordinate: its path
    Point point;   // Point: parsed coordinates
    Path side_a, side_b;
    int dim_a = -1, dim_b = -1;  // Intersection: its two sides
};

struct IndexLink {
    std::string from, to;
    LinkKind kind = LinkKind::Inclusion;
    long long weight = 0;  // target's count at creation; audit refreshes
    std::string rel;       // relation tag, ORDER/SHORTCUT only
};

struct IndexStats {
    long long coordinate_nodes = 0, point_nodes = 0, intersection_nodes = 0;
    long long inclusion_links = 0, intersection_links = 0, order_links = 0, shortcut_links = 0;
    long long splits_performed = 0;
};

class GraphIndex {
public:
    // Dimension roots are materialized immediately; everything else appears
    // as resources are inserted.
    GraphIndex(const ResourceSpace* space, const Store* store, LinkPolicy policy);

    // The resource must already be in the store. Ensures its coordinate
    // chains and point node, bumps counts, maintains matching intersection
    // nodes, and (unless with_intersections is false) rolls a link draw for
    // every absent intersection candidate: each coordinate pair on the two
    // root paths of every adjacent dimension pair. A created intersection
    // node links back to every existing point it covers, so its point set
    // is complete from birth.
    void insert_resource(const Resource& r, Rng& rng, bool with_intersections = true);

    // Rebuilds ORDER links between adjacent materialized siblings and
    // SHORTCUT links to each materialized coordinate's nearest materialized
    // predecessor and successor across its level, for every level-order
    // relation. Idempotent.
    void add_shortcut_links();

    // Split gate: no split with probability 1 - 1/count(v). Past the gate a
    // child is drawn by resource share, a resource under it is drawn
    // uniformly, and the splitting coordinate is the resource coordinate
    // with the widest schema fanout (ties to the smaller path). The child's
    // direct points regroup into per-subcoordinate intersection sub-nodes
    // attached under v, draining the child while leaving the resource set
    // under v unchanged. Returns whether any point actually moved.
    bool maybe_split(const std::string& v_id, Rng& rng);

    const IndexNode* locate_point(const Point& p) const;

    // Checks id shapes, link typing, count caches, and root reachability
    // against the store; returns violations (empty when healthy) and
    // repairs count caches and link weights to match.
    std::vector<std::string> audit();

    std::string serialize() const;  // canonical XML, round-trip exact
    static GraphIndex parse(const ResourceSpace* space, const Store* store,
                            const std::string& text);

    const IndexNode* find(const std::string& id) const;
    const std::vector<IndexLink>& out(const std::string& id) const;
    const std::map<std::string, IndexNode>& nodes() const { return nodes_; }
    const ResourceSpace& space() const { return *space_; }
    const LinkPolicy& policy() const { return policy_; }
    IndexStats stats() const;

    // Point nodes reachable from `id` over INCLUSION and INTERSECTION
    // links, sorted by id. The resource-sampling order for splits.
    std::vector<std::string> reachable_point_ids(const std::string& id) const;

    // test hook for audit fault injection
    void corrupt_count(const std::string& id, long long delta);

private:
    IndexNode& ensure_coordinate(int dim, const Path& p);
    IndexNode& ensure_intersection(const Path& a, const Path& b);
    bool add_link(const std::string& from, const std::string& to, LinkKind kind,
                  long long weight, const std::string& rel = "");
    // add_link without the duplicate check, for links that cannot exist yet
    // (either endpoint was created in the current step)
    IndexLink& append_link(const std::string& from, const std::string& to, LinkKind kind,
                           long long weight);
    void remove_link(const std::string& from, const std::string& to, LinkKind kind);
    void register_point(const IndexNode& p);
    const std::vector<const IndexNode*>& points_under(int dim, const Path& c) const;
    void bump_reachers(const std::string& point_id);
    void settle_upstream(const std::vector<std::string>& seeds);
    long long recompute_count(const std::string& id) const;
    void recount(const std::vector<std::string>& ids);
    const Covariance2& pair_covariance(int dim_i);

    const ResourceSpace* space_;
    const Store* store_;
    LinkPolicy policy_;
    std::map<std::string, IndexNode> nodes_;
    std::map<std::string, std::vector<IndexLink>> out_;
    // reverse adjacency over inclusion and intersection links, so an insert
    // can credit exactly the nodes the point is reachable from (a split may
    // have detached it from parts of its coordinate chains)
    std::map<std::string, std::vector<std::string>> in_;
    std::vector<std::string> intersection_ids_;  // creation order
    // per dimension: coordinate path -> point nodes whose coordinate lies in
    // that subtree. Pure geometry, so splits never invalidate it; it answers
    // "which existing points does this region cover" without a node sweep.
    std::vector<std::map<Path, std::vector<const IndexNode*>>> points_under_;
    // coordinates a split has drained: they no longer link their exact-host
    // points, so they are the only nodes a later intersection can re-credit
    std::set<Path> drained_;
    std::map<int, Covariance2> cov_cache_;  // keyed by the left dimension
    size_t cov_cache_store_size_ = 0;
    long long splits_ = 0;
};

// Coordinate chains and point nodes only: no intersection draws, no
// shortcuts, no splits. The comparison baseline.
GraphIndex build_basic_index(const ResourceSpace& space, const Store& store);

// Full pipeline over a pre-filled store: per-resource insertion with
// intersection draws, an optional split attempt per dimension (at the
// parent of each coordinate), then shortcut links.
GraphIndex build_graph_index(const ResourceSpace& space, const Store& store, LinkPolicy policy,
                             bool with_splits = true);

}  // namespace rsm
