#pragma once

// Subspace aggregation queries, two ways: a full-scan reference executor
// that tests every stored point directly against the range bounds, and a
// graph-index traversal that walks one dimension's tree, follows
// intersection links, and verifies candidates against resolved coordinate
// sets. Both produce identical ResultSets; only the metrics differ.
//
// Semantics in one place:
//  - a stored point contributes iff every specified dimension's coordinate
//    lies in the union of that dimension's resolved ranges;
//  - a contributor's resources are copied to every grid point whose
//    coordinate is an in-range ancestor-or-self on aggregated dimensions
//    and exactly equal on non-aggregated ones;
//  - a dimension the spec leaves out is unconstrained and never aggregated;
//  - grid points that would end up with no resources are dropped;
//  - the query's source name is not interpreted (one space per run).
//
// Metrics contract (fixed so engines are comparable): comparisons counts
// every containment primitive (descendant-or-equal test, level-order
// position test, resolved-set membership probe) plus one per candidate
// point inspected; probes the index walk answers from its per-query memo
// are not re-executed and so not re-counted. nodes_visited counts index
// nodes dequeued or probed;
// intersections_computed counts intersection nodes engaged during the
// traversal (or, for set-based engines, point-set intersections). The
// stages after execution (vars, top-k, projection) add nothing.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsm/index.hpp"
#include "rsm/query.hpp"
#include "rsm/space.hpp"
#include "rsm/store.hpp"

namespace rsm {

struct ExecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExecMetrics {
    long long comparisons = 0;
    long long nodes_visited = 0;
    long long intersections_computed = 0;
};

struct ResultResource {
    std::string id;
    std::map<std::string, double> vars;  // evaluated resource vars
    bool operator==(const ResultResource&) const = default;
};

struct ResultPoint {
    Point point;
    std::vector<ResultResource> resources;  // sorted by id, never empty
    std::map<std::string, double> point_vars;
    bool operator==(const ResultPoint&) const = default;
};

struct ResultSet {
    // Key-ascending out of the executors; top_point reorders to measure
    // order. Equality of two engines' outputs is points == points.
    std::vector<ResultPoint> points;
    ExecMetrics metrics;
};

struct RowTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    bool operator==(const RowTable&) const = default;
};

// RFC 4180 escaping (quotes around fields holding commas, quotes, or line
// breaks; embedded quotes doubled), LF line ends, header first.
std::string to_csv(const RowTable& t);

// Unknown dimensions/relations/coordinates, reversed or incomparable
// bounds, and duplicate dimension specs all throw ExecError.
void validate_spec(const ResourceSpace& space, const SubspaceSpec& spec);

// Scan every stored point; containment tested directly against the bounds
// with reachability-matrix descendant tests and position-tuple compares.
ResultSet exec_bruteforce(const ResourceSpace& space, const Store& store,
                          const SubspaceSpec& spec);

// Same result via the scan partitioned across OpenMP threads with
// per-thread accumulators merged in thread order. Byte-identical output.
ResultSet exec_bruteforce_parallel(const ResourceSpace& space, const Store& store,
                                   const SubspaceSpec& spec);

// Resolve each dimension's ranges to materialized coordinate sets by
// walking the index (shortcut links drive level-order ranges), then BFS
// from the most selective dimension's root. A node is entered only while
// every scope coordinate (its path, or both intersection sides) is an
// ancestor-or-member of the matching resolved set; collected points are
// verified per dimension, except where a predecessor whose scope sits
// inside a whole-subtree range already guarantees the dimension. Works on
// basic and full graph indexes alike.
ResultSet exec_indexed(const GraphIndex& index, const Store& store, const SubspaceSpec& spec);

// Fills resource vars (function VAL copies a numeric attribute; any other
// function name is an error) and point vars (SUM/COUNT/MAX/MIN/AVG over
// the point's post-aggregation resources). Attributes that are absent or
// non-numeric contribute nothing; a fold over no values yields 0.
ResultSet eval_vars(ResultSet rs, const SubspaceSpec& spec, const Store& store);

// Keep the k best points by point var `measure`, reordered to (measure
// descending, point key ascending). A point without the measure ranks
// below every measured point.
ResultSet top_point(ResultSet rs, const TopSpec& spec);

// Within each point independently, keep the k best resources by resource
// var or numeric attribute `measure`, reordered to (measure descending,
// id ascending); missing measures rank last. Points left empty are
// dropped.
ResultSet top_resource(ResultSet rs, const TopSpec& spec, const Store& store);

// One row per (point, resource) in the result's current order. A name
// resolves, in order, to: dimension (full coordinate path), point var,
// resource var, resource attribute; attributes missing on one resource
// leave an empty cell. A name that resolves nowhere in a non-empty result
// is an error.
RowTable project(const ResultSet& rs, const std::vector<std::string>& select,
                 const ResourceSpace& space, const Store& store);

struct RunOutput {
    RowTable table;
    ExecMetrics metrics;
};

// eval_vars, then top_point and top_resource when the query names them,
// then projection. Every engine shares this tail.
RunOutput finish_pipeline(ResultSet rs, const QueryAst& ast, const ResourceSpace& space,
                          const Store& store);

RunOutput run(const QueryAst& ast, const GraphIndex& index, const Store& store);
RunOutput run_scan(const QueryAst& ast, const ResourceSpace& space, const Store& store);

}  // namespace rsm
