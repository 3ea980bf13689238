#pragma once

// Coordinate trees, points, ranges, and reachability for a multidimensional
// classification space. A space is a list of dimensions; each dimension is a
// tree of coordinates addressed by slash-joined paths whose first segment is
// the dimension name. Dimensions carry named relations: hierarchical ones
// (subclass/inclusion along the tree) and level-order ones (a total order
// among siblings at one level, e.g. a year sequence).
//
// Everything here is immutable after ResourceSpace::finalize(), so concurrent
// readers need no locking.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsm {

struct SpaceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Path = std::string;

std::vector<std::string> path_segments(const Path& p);
Path parent_path(const Path& p);  // "" when p is a single-segment root
int path_level(const Path& p);    // segment count minus one

// Pure string test: a equals b or lies in b's subtree. No validation; the
// tree encodes ancestry directly in the path, so this is a prefix check.
inline bool path_descends(const Path& a, const Path& b) {
    if (a.size() == b.size()) return a == b;
    return a.size() > b.size() && a.compare(0, b.size(), b) == 0 && a[b.size()] == '/';
}

struct Relation {
    std::string name;
    bool level_order = false;  // false: hierarchical (subclass/inclusion)
    int level = -1;            // affected sibling level, level-order only
    bool operator==(const Relation&) const = default;
};

struct Coordinate {
    Path path;
    Path parent;  // "" for the root
    int level = 0;
    int order = -1;              // declared sibling position, -1 when absent
    std::vector<Path> children;  // sorted by declared order, then by name
};

struct Dimension {
    std::string name;  // equals the root coordinate's path
    std::map<Path, Coordinate> coords;
    std::vector<Relation> relations;
    int max_level = 0;

    bool has(const Path& p) const { return coords.find(p) != coords.end(); }
    const Coordinate& at(const Path& p) const;  // throws SpaceError when absent
    const Relation* find_relation(const std::string& rel) const;

    // Creates the node; the parent (everything but the last segment) must
    // already exist. Duplicate paths are an error.
    void add(const Path& p, int order = -1);
};

struct ReachabilityMatrix {
    std::string dimension;
    std::vector<Path> paths;  // sorted; defines the bit index space
    std::map<Path, int> index;
    int n = 0;
    int words = 0;                // 64-bit words per row
    std::vector<uint64_t> bits;   // row-major; bit (a,b) set ⇔ a descends-or-equals b

    bool get(int a, int b) const {
        return (bits[static_cast<size_t>(a) * words + b / 64] >> (b % 64)) & 1;
    }
    bool get(const Path& a, const Path& b) const;  // throws on unknown path
};

// Row-parallel build: each coordinate's row is its ancestor chain.
ReachabilityMatrix build_reachability(const Dimension& dim);
// Serial reference with a different shape (per-column subtree DFS), kept as
// the comparison baseline for the parallel build.
ReachabilityMatrix build_reachability_serial(const Dimension& dim);

struct Point {
    std::vector<Path> coords;  // one per dimension, schema order
    std::string key() const;   // "<path_1, ..., path_n>"
    bool operator==(const Point&) const = default;
};

struct Range {
    std::string dimension;
    std::optional<Path> lower;  // nullopt: entire subtree under upper
    Path upper;
    std::string relation;
    bool operator==(const Range&) const = default;
};

struct ResourceSpace {
    std::string name;
    std::vector<Dimension> dims;
    std::vector<ReachabilityMatrix> reach;  // one per dimension, set by finalize

    int dim_index(const std::string& dname) const;  // -1 when absent
    const Dimension& dim(const std::string& dname) const;
    int max_level() const;

    // Validates the schema (linkage, sibling orders, level-order relations),
    // sorts child lists, and builds the reachability matrices.
    void finalize();

    bool descends(int dim_idx, const Path& a, const Path& b) const {
        return reach[dim_idx].get(a, b);
    }
};

// Descendant-or-equal under the hierarchical relation; both paths must exist.
bool is_descendant(const Dimension& dim, const Path& a, const Path& b);

int level_of(const Dimension& dim, const Path& c);

// Same-parent coordinates in sibling order (declared order when present,
// path order otherwise). The root has no siblings, so it returns {c}.
std::vector<Path> ordered_siblings(const Dimension& dim, const Path& c);

// Pre-order walk of c's subtree, c included.
std::vector<Path> subtree(const Dimension& dim, const Path& c);

// Child indices along the root path; lexicographic comparison of these
// tuples orders coordinates of one level left to right across the tree,
// which is how level-order ranges compare bounds under different parents.
std::vector<int> position_tuple(const Dimension& dim, const Path& c);

// Hierarchical relation: every c with lower ⊆ c ⊆ upper (lower NONE means
// upper's whole subtree, upper included). Level-order relation: all
// coordinates at the bounds' level positioned between them inclusive.
// Sorted by path. Incomparable or reversed bounds are errors, as are
// unknown coordinates and relations. An empty relation name is accepted
// internally and means plain hierarchical containment.
std::vector<Path> resolve_range(const ResourceSpace& space, const Range& r);

// True iff s sits at or below p on every dimension (reflexive).
bool point_subsumes(const ResourceSpace& space, const Point& s, const Point& p);

Point parse_point_key(const ResourceSpace& space, const std::string& key);

ResourceSpace parse_space_xml(const std::string& text);
std::string serialize_space_xml(const ResourceSpace& space);

}  // namespace rsm
