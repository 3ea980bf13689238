#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "rsm/exec.hpp"
#include "rsm/gen.hpp"

// The OpenMP kernels must be drop-in replacements for their serial
// references: not close, identical. Every case here builds both sides on
// inputs large enough that chunking actually kicks in and compares the
// complete output, metrics included.

using namespace rsm;

namespace {

GenConfig wide_config(uint64_t seed) {
    GenConfig cfg;
    cfg.dims = {{"alpha", 5, 6, false}, {"beta", 4, 5, true}, {"gamma", 6, 4, false}};
    cfg.resources = 3000;
    cfg.attrs = {{"score", 0, 500}};
    cfg.seed = seed;
    return cfg;
}

bool same_matrix(const ReachabilityMatrix& a, const ReachabilityMatrix& b) {
    return a.dimension == b.dimension && a.paths == b.paths && a.index == b.index &&
           a.n == b.n && a.words == b.words && a.bits == b.bits;
}

}  // namespace

TEST_CASE("the partitioned scan reproduces the serial scan exactly") {
    for (uint64_t seed : {101, 202, 303}) {
        GenConfig cfg = wide_config(seed);
        ResourceSpace space = gen_space(cfg);
        Store store(&space);
        for (const Resource& r : gen_corpus(space, cfg)) store.put(r);

        Rng rng(seed * 13 + 1);
        for (int q = 0; q < 20; ++q) {
            SubspaceSpec spec = gen_spec(space, rng);
            CAPTURE(seed);
            CAPTURE(q);
            ResultSet serial = exec_bruteforce(space, store, spec);
            ResultSet parallel = exec_bruteforce_parallel(space, store, spec);
            CHECK(parallel.points == serial.points);
            CHECK(parallel.metrics.comparisons == serial.metrics.comparisons);
            CHECK(parallel.metrics.nodes_visited == serial.metrics.nodes_visited);
            CHECK(parallel.metrics.intersections_computed ==
                  serial.metrics.intersections_computed);
        }
    }
}

TEST_CASE("row-parallel reachability equals the per-column reference") {
    GenConfig cfg = wide_config(7);
    cfg.dims.push_back({"deep", 8, 3, false});
    ResourceSpace space = gen_space(cfg);
    for (const Dimension& dim : space.dims) {
        CAPTURE(dim.name);
        CHECK(same_matrix(build_reachability(dim), build_reachability_serial(dim)));
    }
    for (const Dimension& dim : citation_space().dims)
        CHECK(same_matrix(build_reachability(dim), build_reachability_serial(dim)));
}

TEST_CASE("the threaded link sweep matches its serial reference") {
    for (auto kind : {PolicyKind::Logistic, PolicyKind::Bounded}) {
        LinkPolicy policy{kind, 2.0, 0};
        for (uint64_t seed : {0, 5}) {
            LinkCountResult par = link_count_experiment(policy, seed);
            LinkCountResult ser = link_count_experiment_serial(policy, seed);
            CAPTURE(seed);
            REQUIRE(par.pairs.size() == ser.pairs.size());
            // both sides sum in index order, so even the floats must agree
            // bit for bit
            CHECK(par.pairs == ser.pairs);
            CHECK(par.expected == ser.expected);
            CHECK(par.sampled == ser.sampled);
        }
    }
}
