// Command-line harness around the library: synthetic space/corpus
// generation, index building, single-query runs, four-engine benchmark
// sweeps, and the synthetic link-count experiment. All output is CSV on
// stdout (or --out); diagnostics go to stderr. Exit codes: 0 ok, 2 user
// error, 3 internal assertion (cross-engine mismatch, failed audit).

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsm/exec.hpp"
#include "rsm/gen.hpp"
#include "rsm/index.hpp"
#include "rsm/query.hpp"

using namespace rsm;

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError("cannot write " + path);
    out << text;
    out.flush();
    if (!out) throw CliError("short write to " + path);
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        spit(out_path, text);
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            int v = std::stoi(item, &used);
            if (used != item.size() || v < 1) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw CliError(std::string(what) + ": '" + item + "' is not a positive integer");
        }
    }
    if (out.empty()) throw CliError(std::string(what) + " is empty");
    return out;
}

int pick(const std::vector<int>& list, size_t i, const char* what, size_t dims) {
    if (list.size() == 1) return list[0];
    if (list.size() != dims)
        throw CliError(std::string(what) + " needs 1 or " + std::to_string(dims) + " values");
    return list[i];
}

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

LinkPolicy policy_from(const std::string& text, uint64_t seed) {
    LinkPolicy p = LinkPolicy::parse(text);  // throws StatsError on junk
    p.rng_seed = seed;
    return p;
}

// ---- inverted-index baseline ------------------------------------------
//
// Postings straight off the resource store: one list per exact coordinate.
// A range expands to its resolved coordinate set, the per-dimension row
// sets come from unioning those postings, and specified dimensions are
// intersected. Comparisons count posting entries touched plus the usual
// candidate inspections and membership probes during routing.

ResultSet exec_inverted(const ResourceSpace& space, const Store& store,
                        const SubspaceSpec& spec) {
    validate_spec(space, spec);
    const size_t nd = space.dims.size();
    std::vector<std::set<Path>> members(nd);
    std::vector<char> specified(nd, 0), agg(nd, 0);
    for (const DimSpec& ds : spec.dims) {
        int di = space.dim_index(ds.dimension);
        specified[di] = 1;
        agg[di] = ds.agg;
        for (const Range& r : ds.ranges)
            for (const Path& p : resolve_range(space, r)) members[di].insert(p);
    }

    ExecMetrics m;
    std::set<uint32_t> rows;
    bool first = true;
    for (size_t d = 0; d < nd; ++d) {
        if (!specified[d]) continue;
        std::set<uint32_t> mine;
        for (const Path& c : members[d]) {
            const std::vector<uint32_t>* post = store.coordinate_bucket(c);
            if (!post) continue;
            m.nodes_visited += 1;  // posting list opened
            for (uint32_t i : *post) {
                m.comparisons += 1;  // posting entry touched
                mine.insert(i);
            }
        }
        if (first) {
            rows = std::move(mine);
            first = false;
        } else {
            m.intersections_computed += 1;
            std::set<uint32_t> both;
            std::set_intersection(rows.begin(), rows.end(), mine.begin(), mine.end(),
                                  std::inserter(both, both.begin()));
            rows = std::move(both);
        }
        if (rows.empty()) break;
    }
    if (first)  // nothing specified: every stored resource contributes
        for (uint32_t i = 0; i < store.size(); ++i) rows.insert(i);

    // group by point, then route into the aggregation grid
    std::map<std::string, std::vector<uint32_t>> by_point;
    for (uint32_t i : rows) by_point[store.at(i).point.key()].push_back(i);

    auto member = [&](size_t d, const Path& c) {
        m.comparisons += 1;
        return members[d].count(c) > 0;
    };
    std::map<std::string, std::pair<Point, std::set<std::string>>> acc;
    for (const auto& [key, bucket] : by_point) {
        (void)key;
        m.comparisons += 1;  // candidate point inspected
        const Point& sp = store.at(bucket.front()).point;
        std::vector<std::vector<Path>> recv(nd);
        for (size_t d = 0; d < nd; ++d) {
            if (!specified[d] || !agg[d]) {
                recv[d] = {sp.coords[d]};
                continue;
            }
            for (Path c = sp.coords[d];; c = c.substr(0, c.rfind('/'))) {
                if (member(d, c)) recv[d].push_back(c);
                if (c.find('/') == std::string::npos) break;
            }
        }
        std::vector<size_t> pos(nd, 0);
        for (;;) {
            Point q;
            q.coords.resize(nd);
            for (size_t d = 0; d < nd; ++d) q.coords[d] = recv[d][pos[d]];
            auto& slot = acc[q.key()];
            if (slot.second.empty()) slot.first = std::move(q);
            for (uint32_t i : bucket) slot.second.insert(store.at(i).id);
            size_t d = 0;
            while (d < nd && ++pos[d] == recv[d].size()) pos[d++] = 0;
            if (d == nd) break;
        }
    }

    ResultSet rs;
    rs.metrics = m;
    for (const auto& [key, slot] : acc) {
        (void)key;
        ResultPoint rp;
        rp.point = slot.first;
        for (const std::string& id : slot.second) rp.resources.push_back({id, {}});
        rs.points.push_back(std::move(rp));
    }
    return rs;
}

// ---- subcommands -------------------------------------------------------

struct GenArgs {
    std::string out_dir;
    int dims = 2;
    std::string depth = "4";
    std::string fanout = "6";
    int ordered = 0;
    long long resources = 1000;
    uint64_t seed = 0;
};

int run_gen(const GenArgs& a) {
    if (a.dims < 1) throw CliError("--dims must be at least 1");
    if (a.resources < 0) throw CliError("--resources must not be negative");
    if (a.ordered < 0 || a.ordered > a.dims)
        throw CliError("--ordered must lie between 0 and --dims");
    std::vector<int> depths = parse_int_list(a.depth, "--depth");
    std::vector<int> fans = parse_int_list(a.fanout, "--fanout");

    GenConfig cfg;
    cfg.seed = a.seed;
    cfg.resources = a.resources;
    cfg.attrs = {{"paper_citation_count", 0, 1000}};
    cfg.title_attr = "paper_title";
    for (int i = 0; i < a.dims; ++i) {
        GenDim gd;
        gd.name = "d" + std::to_string(i + 1);
        gd.max_depth = pick(depths, static_cast<size_t>(i), "--depth", a.dims);
        gd.max_fanout = pick(fans, static_cast<size_t>(i), "--fanout", a.dims);
        gd.level_order = i < a.ordered;
        cfg.dims.push_back(std::move(gd));
    }

    ResourceSpace space = gen_space(cfg);
    std::vector<Resource> corpus = gen_corpus(space, cfg);

    std::error_code ec;
    std::filesystem::create_directories(a.out_dir, ec);
    if (ec) throw CliError("cannot create " + a.out_dir + ": " + ec.message());
    spit(a.out_dir + "/space.xml", serialize_space_xml(space));
    spit(a.out_dir + "/corpus.xml", serialize_corpus_xml(space, corpus));
    return 0;
}

struct BuildArgs {
    std::string space_path, corpus_path, out_path;
    std::string policy = "bounded";
    uint64_t seed = 0;
    bool basic = false;
    bool no_splits = false;
};

int run_build(const BuildArgs& a) {
    ResourceSpace space = parse_space_xml(slurp(a.space_path));
    Store store(&space);
    for (const Resource& r : parse_corpus_xml(space, slurp(a.corpus_path))) store.put(r);

    GraphIndex idx = a.basic
                         ? build_basic_index(space, store)
                         : build_graph_index(space, store, policy_from(a.policy, a.seed),
                                             !a.no_splits);
    std::vector<std::string> faults = idx.audit();
    if (!faults.empty())
        throw InternalError("index audit failed: " + faults.front() + " (and " +
                            std::to_string(faults.size() - 1) + " more)");
    if (!a.out_path.empty()) spit(a.out_path, idx.serialize());

    IndexStats s = idx.stats();
    RowTable t;
    t.header = {"stat", "value"};
    auto row = [&](const char* k, long long v) {
        t.rows.push_back({k, std::to_string(v)});
    };
    row("coordinate_nodes", s.coordinate_nodes);
    row("point_nodes", s.point_nodes);
    row("intersection_nodes", s.intersection_nodes);
    row("inclusion_links", s.inclusion_links);
    row("intersection_links", s.intersection_links);
    row("order_links", s.order_links);
    row("shortcut_links", s.shortcut_links);
    row("splits_performed", s.splits_performed);
    std::cout << to_csv(t);
    return 0;
}

struct QueryArgs {
    std::string space_path, corpus_path, index_path, out_path;
    std::string query_text, query_file;
    std::string engine = "graph";
    std::string policy = "bounded";
    uint64_t seed = 0;
};

int run_query(const QueryArgs& a) {
    if (a.query_text.empty() == a.query_file.empty())
        throw CliError("pass exactly one of --query or --query-file");
    std::string text = a.query_text.empty() ? slurp(a.query_file) : a.query_text;

    ResourceSpace space = parse_space_xml(slurp(a.space_path));
    Store store(&space);
    for (const Resource& r : parse_corpus_xml(space, slurp(a.corpus_path))) store.put(r);
    QueryAst ast = parse_query(text);

    auto t0 = std::chrono::steady_clock::now();
    RunOutput out;
    if (a.engine == "scan") {
        out = run_scan(ast, space, store);
    } else if (a.engine == "inverted") {
        out = finish_pipeline(exec_inverted(space, store, ast.subspace), ast, space, store);
    } else if (a.engine == "basic" || a.engine == "graph") {
        GraphIndex idx =
            !a.index_path.empty()
                ? GraphIndex::parse(&space, &store, slurp(a.index_path))
                : (a.engine == "basic"
                       ? build_basic_index(space, store)
                       : build_graph_index(space, store, policy_from(a.policy, a.seed)));
        t0 = std::chrono::steady_clock::now();  // charge the build to setup
        out = run(ast, idx, store);
    } else {
        throw CliError("unknown engine '" + a.engine + "'");
    }
    double ms = wall_since(t0);

    std::string body = to_csv(out.table);
    body += "# engine=" + a.engine + " comparisons=" + std::to_string(out.metrics.comparisons) +
            " nodes_visited=" + std::to_string(out.metrics.nodes_visited) +
            " intersections=" + std::to_string(out.metrics.intersections_computed) +
            " wall_ms=" + fixed3(ms) + "\n";
    emit(a.out_path, body);
    return 0;
}

struct BenchArgs {
    std::string space_path, corpus_path, workload_path, out_path;
    std::string policy = "bounded";
    uint64_t seed = 0;
};

std::vector<std::string> split_workload(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        cur += c;
        if (c == ';') {
            size_t start = cur.find_first_not_of(" \t\r\n");
            if (start != std::string::npos) out.push_back(cur.substr(start));
            cur.clear();
        }
    }
    if (cur.find_first_not_of(" \t\r\n") != std::string::npos)
        throw CliError("workload has trailing text without a terminating ';'");
    return out;
}

int run_bench(const BenchArgs& a) {
    ResourceSpace space = parse_space_xml(slurp(a.space_path));
    Store store(&space);
    for (const Resource& r : parse_corpus_xml(space, slurp(a.corpus_path))) store.put(r);
    std::vector<std::string> queries = split_workload(slurp(a.workload_path));
    if (queries.empty()) throw CliError("workload is empty");

    GraphIndex graph = build_graph_index(space, store, policy_from(a.policy, a.seed));
    GraphIndex basic = build_basic_index(space, store);

    RowTable report;
    report.header = {"query",        "engine",  "comparisons", "nodes_visited",
                     "intersections", "wall_ms", "result_points"};
    for (size_t qi = 0; qi < queries.size(); ++qi) {
        QueryAst ast = parse_query(queries[qi]);
        const std::string qid = "q" + std::to_string(qi + 1);

        ResultSet reference;
        for (const char* engine : {"scan", "inverted", "basic", "graph"}) {
            auto t0 = std::chrono::steady_clock::now();
            ResultSet rs;
            if (engine == std::string("scan"))
                rs = exec_bruteforce(space, store, ast.subspace);
            else if (engine == std::string("inverted"))
                rs = exec_inverted(space, store, ast.subspace);
            else if (engine == std::string("basic"))
                rs = exec_indexed(basic, store, ast.subspace);
            else
                rs = exec_indexed(graph, store, ast.subspace);
            double ms = wall_since(t0);

            if (engine == std::string("scan"))
                reference = rs;
            else if (!(rs.points == reference.points))
                throw InternalError("engine " + std::string(engine) + " disagrees with scan on " +
                                    qid + ": " + queries[qi]);
            report.rows.push_back({qid, engine, std::to_string(rs.metrics.comparisons),
                                   std::to_string(rs.metrics.nodes_visited),
                                   std::to_string(rs.metrics.intersections_computed), fixed3(ms),
                                   std::to_string(rs.points.size())});
        }
    }
    emit(a.out_path, to_csv(report));
    return 0;
}

struct LinkexpArgs {
    std::string policy;  // empty: logistic and bounded
    std::string out_path;
    uint64_t seed = 0;
};

int run_linkexp(const LinkexpArgs& a) {
    std::vector<LinkPolicy> policies;
    if (a.policy.empty()) {
        policies.push_back(LinkPolicy{PolicyKind::Logistic, 2.0, 0});
        policies.push_back(LinkPolicy{PolicyKind::Bounded, 2.0, 0});
    } else {
        policies.push_back(policy_from(a.policy, 0));
    }

    RowTable t;
    t.header = {"policy", "pair", "distance", "probability", "sampled", "expected"};
    for (const LinkPolicy& p : policies) {
        LinkCountResult r = link_count_experiment(p, a.seed);
        for (size_t i = 0; i < r.pairs.size(); ++i) {
            const LinkPairRow& row = r.pairs[i];
            t.rows.push_back({p.to_string(), std::to_string(i), format_number(row.distance),
                              format_number(row.probability), row.sampled ? "1" : "0",
                              format_number(row.probability)});
        }
        t.rows.push_back({p.to_string(), "total", "", "", std::to_string(r.sampled),
                          format_number(r.expected)});
    }
    emit(a.out_path, to_csv(t));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"resource space index and query harness"};
    app.require_subcommand(1);

    GenArgs g;
    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic space and corpus");
    gen->add_option("--out", g.out_dir, "directory for space.xml and corpus.xml")->required();
    gen->add_option("--dims", g.dims, "number of dimensions");
    gen->add_option("--depth", g.depth, "max depth, one value or one per dimension");
    gen->add_option("--fanout", g.fanout, "max fanout, one value or one per dimension");
    gen->add_option("--ordered", g.ordered, "how many leading dimensions get an order relation");
    gen->add_option("--resources", g.resources, "resource count");
    gen->add_option("--seed", g.seed, "generator seed");

    BuildArgs b;
    CLI::App* build = app.add_subcommand("build", "build and serialize an index");
    build->add_option("--space", b.space_path, "space XML")->required();
    build->add_option("--corpus", b.corpus_path, "corpus XML")->required();
    build->add_option("--out", b.out_path, "index XML output path");
    build->add_option("--policy", b.policy, "logistic | bounded | general:<a>");
    build->add_option("--seed", b.seed, "link/split draw seed");
    build->add_flag("--basic", b.basic, "chains and points only");
    build->add_flag("--no-splits", b.no_splits, "skip split attempts");

    QueryArgs q;
    CLI::App* query = app.add_subcommand("query", "run one query");
    query->add_option("--space", q.space_path, "space XML")->required();
    query->add_option("--corpus", q.corpus_path, "corpus XML")->required();
    query->add_option("--index", q.index_path, "index XML (basic/graph engines)");
    query->add_option("--query", q.query_text, "query text");
    query->add_option("--query-file", q.query_file, "file holding the query");
    query->add_option("--engine", q.engine, "scan | inverted | basic | graph");
    query->add_option("--policy", q.policy, "policy when building in-process");
    query->add_option("--seed", q.seed, "seed when building in-process");
    query->add_option("--out", q.out_path, "write CSV here instead of stdout");

    BenchArgs bn;
    CLI::App* bench = app.add_subcommand("bench", "run a workload under all four engines");
    bench->add_option("--space", bn.space_path, "space XML")->required();
    bench->add_option("--corpus", bn.corpus_path, "corpus XML")->required();
    bench->add_option("--workload", bn.workload_path, "queries, each terminated by ';'")
        ->required();
    bench->add_option("--policy", bn.policy, "graph index policy");
    bench->add_option("--seed", bn.seed, "graph index seed");
    bench->add_option("--out", bn.out_path, "write CSV here instead of stdout");

    LinkexpArgs lx;
    CLI::App* linkexp = app.add_subcommand("linkexp", "synthetic link-count experiment");
    linkexp->add_option("--policy", lx.policy, "restrict to one policy");
    linkexp->add_option("--seed", lx.seed, "generator seed");
    linkexp->add_option("--out", lx.out_path, "write CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) return run_gen(g);
        if (*build) return run_build(b);
        if (*query) return run_query(q);
        if (*bench) return run_bench(bn);
        return run_linkexp(lx);
    } catch (const InternalError& e) {
        std::cerr << "internal: " << e.what() << "\n";
        return 3;
    } catch (const QueryError& e) {
        std::cerr << "error: " << e.what() << " (byte " << e.offset << ")\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal: " << e.what() << "\n";
        return 3;
    }
}
