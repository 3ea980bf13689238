#pragma once

// Deterministic synthetic schemas, corpora, and query specs. Everything is
// a pure function of its config (seed included), so regenerating with the
// same inputs reproduces files byte for byte. Shared by the command-line
// generator, the benchmarks, and the randomized tests.

#include <cstdint>
#include <string>
#include <vector>

#include "rsm/link_stats.hpp"
#include "rsm/query.hpp"
#include "rsm/rng.hpp"
#include "rsm/space.hpp"
#include "rsm/store.hpp"

namespace rsm {

struct GenDim {
    std::string name;
    int max_depth = 3;          // levels below the root
    int max_fanout = 4;         // children per internal node, drawn uniformly
    bool level_order = false;   // adds relation "<name>_order" over level 1
};

struct GenAttr {
    std::string name;
    long long lo = 0, hi = 1000;  // uniform integer value
};

struct GenConfig {
    std::vector<GenDim> dims;
    long long resources = 0;
    std::vector<GenAttr> attrs;
    std::string title_attr;  // when set, each resource gets a string title
    uint64_t seed = 0;
    // growth stops once a dimension reaches this many coordinates, so a
    // deep/wide config cannot blow up the schema
    size_t max_coords_per_dim = 20000;
};

// Every dimension gets a hierarchical "subclass" relation; level_order dims
// get "<name>_order" over their first level. The first level always has at
// least one child, deeper nodes may be leaves.
ResourceSpace gen_space(const GenConfig& cfg);

// Resources r00000, r00001, ... placed uniformly over each dimension's
// coordinates (any level), with uniform integer attributes.
std::vector<Resource> gen_corpus(const ResourceSpace& space, const GenConfig& cfg);

// A well-formed random spec covering every dimension. Each dimension draws
// either a level-order window (when the schema has such a relation) or one
// to two hierarchical ranges (whole subtrees or root-path chains), plus an
// aggregation coin. Always passes validate_spec by construction.
SubspaceSpec gen_spec(const ResourceSpace& space, Rng& rng);

// The worked-example schema: a topic tree (CS with DB/AI subtrees, MATH,
// PHYS) under a "subclass" relation, and a date tree of years 2020-2024
// with twelve months each, ordered by a level-order "year" relation.
ResourceSpace citation_space();

// One cross pair of the synthetic link-count experiment.
struct LinkPairRow {
    double distance = 0;     // Mahalanobis distance between the two vectors
    double probability = 0;  // the policy's link probability at it
    bool sampled = false;    // one Bernoulli draw against that probability
    bool operator==(const LinkPairRow&) const = default;
};

struct LinkCountResult {
    std::vector<LinkPairRow> pairs;  // first dimension major, 100 x 100
    double expected = 0;             // sum of the probabilities
    long long sampled = 0;           // links the draws actually produced
    bool operator==(const LinkCountResult&) const = default;
};

// Synthetic two-dimension link experiment: 100 coordinates per dimension
// with levels uniform on 1..14 (weight = level / 14) and resource counts
// uniform on 0..1000, one covariance fit over all 200 vectors, then a
// probability and one sample for each of the 10^4 cross pairs. The
// distance/probability sweep runs across threads; the draws stay serial,
// so the result is a pure function of policy and seed.
LinkCountResult link_count_experiment(const LinkPolicy& policy, uint64_t seed);
// Single-threaded reference, identical output.
LinkCountResult link_count_experiment_serial(const LinkPolicy& policy, uint64_t seed);

}  // namespace rsm
