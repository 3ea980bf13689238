// Times the OpenMP kernels against their serial reference implementations:
// the brute-force scan executor, the reachability closure build, and the
// link-probability sweep. Each row reports both times and whether the two
// variants produced identical output (they must; a mismatch exits 3).

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "rsm/exec.hpp"
#include "rsm/gen.hpp"

using namespace rsm;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

bool same_matrix(const ReachabilityMatrix& a, const ReachabilityMatrix& b) {
    return a.dimension == b.dimension && a.paths == b.paths && a.n == b.n &&
           a.words == b.words && a.bits == b.bits;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OpenMP kernels vs their serial references"};
    long long resources = 20000;
    uint64_t seed = 1;
    int repeat = 3;
    app.add_option("--resources", resources, "corpus size for the scan kernel");
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--repeat", repeat, "timed repetitions, best run reported");
    CLI11_PARSE(app, argc, argv);
    if (resources < 1 || repeat < 1) {
        std::cerr << "error: --resources and --repeat must be positive\n";
        return 2;
    }

    RowTable t;
    t.header = {"kernel", "serial_ms", "parallel_ms", "speedup", "identical"};
    bool all_same = true;
    auto report = [&](const std::string& kernel, double ser, double par, bool same) {
        all_same = all_same && same;
        t.rows.push_back(
            {kernel, fixed3(ser), fixed3(par), fixed3(ser / par), same ? "yes" : "NO"});
    };
    auto best = [&](auto&& fn) {
        double best_ms = 0;
        for (int i = 0; i < repeat; ++i) {
            auto t0 = std::chrono::steady_clock::now();
            fn();
            double ms = ms_since(t0);
            if (i == 0 || ms < best_ms) best_ms = ms;
        }
        return best_ms;
    };

    // scan: the full-corpus executor under a handful of generated specs
    {
        GenConfig cfg;
        cfg.dims = {{"d1", 5, 6, false}, {"d2", 4, 6, true}, {"d3", 4, 5, false}};
        cfg.resources = resources;
        cfg.attrs = {{"score", 0, 1000}};
        cfg.seed = seed;
        ResourceSpace space = gen_space(cfg);
        Store store(&space);
        for (const Resource& r : gen_corpus(space, cfg)) store.put(r);
        Rng rng(seed + 17);
        std::vector<SubspaceSpec> specs;
        for (int i = 0; i < 3; ++i) specs.push_back(gen_spec(space, rng));

        std::vector<ResultSet> serial, parallel;
        double ser = best([&] {
            serial.clear();
            for (const SubspaceSpec& s : specs) serial.push_back(exec_bruteforce(space, store, s));
        });
        double par = best([&] {
            parallel.clear();
            for (const SubspaceSpec& s : specs)
                parallel.push_back(exec_bruteforce_parallel(space, store, s));
        });
        bool same = serial.size() == parallel.size();
        for (size_t i = 0; same && i < serial.size(); ++i)
            same = serial[i].points == parallel[i].points &&
                   serial[i].metrics.comparisons == parallel[i].metrics.comparisons;
        report("scan", ser, par, same);
    }

    // reachability closure over one deep dimension
    {
        GenConfig cfg;
        cfg.dims = {{"deep", 8, 5, false}};
        cfg.seed = seed;
        ResourceSpace space = gen_space(cfg);
        const Dimension& dim = space.dims[0];
        ReachabilityMatrix a, b;
        double ser = best([&] { a = build_reachability_serial(dim); });
        double par = best([&] { b = build_reachability(dim); });
        report("reachability(" + std::to_string(dim.coords.size()) + ")", ser, par,
               same_matrix(a, b));
    }

    // link-probability sweep (the synthetic link-count experiment)
    {
        LinkPolicy policy{PolicyKind::Logistic, 2.0, 0};
        LinkCountResult a, b;
        double ser = best([&] { a = link_count_experiment_serial(policy, seed); });
        double par = best([&] { b = link_count_experiment(policy, seed); });
        report("link_sweep", ser, par, a == b);
    }

    std::cout << to_csv(t);
    if (!all_same) {
        std::cerr << "internal: a parallel kernel diverged from its serial reference\n";
        return 3;
    }
    return 0;
}
