#include "rsm/exec.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <set>

namespace rsm {

namespace {

struct PreparedRange {
    const Range* r = nullptr;
    bool level_order = false;
    bool subtree = false;  // hierarchical, no lower bound
    int level = -1;
    std::vector<int> lo_pos, hi_pos;
    std::string rel_name;
};

struct PreparedDim {
    int dim = -1;
    bool agg = false;
    std::vector<PreparedRange> ranges;
    std::set<Path> members;  // materialized in-range coordinates (indexed engine)
};

std::vector<PreparedDim> prepare(const ResourceSpace& space, const SubspaceSpec& spec) {
    std::vector<PreparedDim> plans;
    std::set<std::string> seen;
    for (const DimSpec& ds : spec.dims) {
        int di = space.dim_index(ds.dimension);
        if (di < 0) throw ExecError("unknown dimension '" + ds.dimension + "'");
        if (!seen.insert(ds.dimension).second)
            throw ExecError("duplicate dimension spec '" + ds.dimension + "'");
        if (ds.ranges.empty()) throw ExecError("dimension spec '" + ds.dimension + "' has no ranges");
        PreparedDim pd;
        pd.dim = di;
        pd.agg = ds.agg;
        const Dimension& d = space.dims[di];
        for (const Range& r : ds.ranges) {
            if (r.dimension != ds.dimension)
                throw ExecError("range dimension '" + r.dimension + "' does not match spec '" +
                                ds.dimension + "'");
            // borrow the resolver's validation (and its messages)
            try {
                resolve_range(space, r);
            } catch (const SpaceError& e) {
                throw ExecError(e.what());
            }
            PreparedRange pr;
            pr.r = &r;
            const Relation* rel = r.relation.empty() ? nullptr : d.find_relation(r.relation);
            if (rel && rel->level_order) {
                pr.level_order = true;
                pr.rel_name = rel->name;
                pr.level = level_of(d, r.upper);
                pr.lo_pos = position_tuple(d, *r.lower);
                pr.hi_pos = position_tuple(d, r.upper);
            } else {
                pr.subtree = !r.lower.has_value();
            }
            pd.ranges.push_back(std::move(pr));
        }
        plans.push_back(std::move(pd));
    }
    return plans;
}

// Direct containment test against the bounds, one comparison per primitive.
bool contains(const ResourceSpace& space, const PreparedDim& pd, const Path& c, ExecMetrics& m) {
    const Dimension& d = space.dims[pd.dim];
    for (const PreparedRange& pr : pd.ranges) {
        if (pr.level_order) {
            m.comparisons += 1;
            if (level_of(d, c) != pr.level) continue;
            std::vector<int> pos = position_tuple(d, c);
            if (pr.lo_pos <= pos && pos <= pr.hi_pos) return true;
            continue;
        }
        m.comparisons += 1;
        if (!space.descends(pd.dim, c, pr.r->upper)) continue;
        if (pr.subtree) return true;
        m.comparisons += 1;
        if (space.descends(pd.dim, *pr.r->lower, c)) return true;
    }
    return false;
}

using Accumulator = std::map<std::string, std::pair<Point, std::set<std::string>>>;
using MemberFn = std::function<bool(const PreparedDim&, const Path&)>;

// Copy one contributor's resources to every receiver point: in-range
// ancestors-or-self on aggregated dimensions, the contributor's own
// coordinate elsewhere.
void route(const ResourceSpace& space, const std::vector<const PreparedDim*>& by_dim,
           const Point& sp, const std::vector<std::string>& rids, const MemberFn& member,
           Accumulator& acc) {
    const size_t nd = space.dims.size();
    std::vector<std::vector<Path>> recv(nd);
    for (size_t d = 0; d < nd; ++d) {
        const PreparedDim* pd = by_dim[d];
        if (!pd || !pd->agg) {
            recv[d] = {sp.coords[d]};
            continue;
        }
        for (Path a = sp.coords[d];; a = parent_path(a)) {
            if (member(*pd, a)) recv[d].push_back(a);
            if (path_level(a) == 0) break;
        }
    }
    std::vector<size_t> pick(nd, 0);
    for (;;) {
        Point q;
        q.coords.resize(nd);
        for (size_t d = 0; d < nd; ++d) q.coords[d] = recv[d][pick[d]];
        auto& slot = acc[q.key()];
        if (slot.second.empty()) slot.first = std::move(q);
        slot.second.insert(rids.begin(), rids.end());
        size_t d = 0;
        while (d < nd && ++pick[d] == recv[d].size()) pick[d++] = 0;
        if (d == nd) break;
    }
}

ResultSet materialize(const Accumulator& acc, ExecMetrics m) {
    ResultSet rs;
    rs.metrics = m;
    rs.points.reserve(acc.size());
    for (const auto& [key, slot] : acc) {
        (void)key;
        ResultPoint rp;
        rp.point = slot.first;
        rp.resources.reserve(slot.second.size());
        for (const std::string& id : slot.second) rp.resources.push_back({id, {}});
        rs.points.push_back(std::move(rp));
    }
    return rs;
}

void merge_into(Accumulator& into, Accumulator&& from) {
    for (auto& [key, slot] : from) {
        auto& dst = into[key];
        if (dst.second.empty()) dst.first = std::move(slot.first);
        dst.second.insert(slot.second.begin(), slot.second.end());
    }
}

// Scan body shared by the serial and parallel variants: one stored point.
void scan_point(const ResourceSpace& space, const Store& store,
                const std::vector<PreparedDim>& plans,
                const std::vector<const PreparedDim*>& by_dim,
                const std::vector<uint32_t>& bucket, ExecMetrics& m, Accumulator& acc) {
    const Point& sp = store.at(bucket.front()).point;
    m.comparisons += 1;  // candidate point inspected
    for (const PreparedDim& pd : plans)
        if (!contains(space, pd, sp.coords[pd.dim], m)) return;
    std::vector<std::string> rids;
    rids.reserve(bucket.size());
    for (uint32_t i : bucket) rids.push_back(store.at(i).id);
    MemberFn member = [&](const PreparedDim& pd, const Path& a) {
        return contains(space, pd, a, m);
    };
    route(space, by_dim, sp, rids, member, acc);
}

std::vector<const PreparedDim*> index_by_dim(const ResourceSpace& space,
                                             const std::vector<PreparedDim>& plans) {
    std::vector<const PreparedDim*> by_dim(space.dims.size(), nullptr);
    for (const PreparedDim& pd : plans) by_dim[pd.dim] = &pd;
    return by_dim;
}

std::vector<Path> prefix_paths(const Path& p) {
    std::vector<Path> out;
    for (size_t i = 0; i < p.size(); ++i)
        if (p[i] == '/') out.push_back(p.substr(0, i));
    out.push_back(p);
    return out;
}

// Materialized coordinates inside one level-order range. The walk descends
// to the window's leftmost materialized coordinate, pruning subtrees whose
// position prefix falls outside the window, then rides the level's
// shortcut chain rightward. Without a chain (basic index, or a lone
// coordinate at the level) it sweeps the window by descent instead.
void walk_level(const GraphIndex& idx, const Dimension& d, const PreparedRange& pr,
                std::set<Path>& out, ExecMetrics& m) {
    std::map<Path, std::vector<int>> cache;
    auto pos = [&](const Path& c) -> const std::vector<int>& {
        auto it = cache.find(c);
        if (it == cache.end()) it = cache.emplace(c, position_tuple(d, c)).first;
        return it->second;
    };
    auto prefix_ok = [&](const Path& c) {
        m.comparisons += 1;
        const std::vector<int>& t = pos(c);
        std::vector<int> lo(pr.lo_pos.begin(), pr.lo_pos.begin() + t.size());
        std::vector<int> hi(pr.hi_pos.begin(), pr.hi_pos.begin() + t.size());
        return !(t < lo) && !(t > hi);
    };
    auto at_level_in = [&](const Path& c) {
        m.comparisons += 1;
        const std::vector<int>& t = pos(c);
        return pr.lo_pos <= t && t <= pr.hi_pos;
    };

    Path leftmost;
    std::function<bool(const Path&)> dfs = [&](const Path& c) -> bool {
        m.nodes_visited += 1;
        if (path_level(c) == pr.level) {
            if (at_level_in(c)) {
                leftmost = c;
                return true;
            }
            return false;
        }
        for (const Path& ch : d.at(c).children) {
            m.comparisons += 1;  // index probe
            if (!idx.find(ch)) continue;
            if (!prefix_ok(ch)) continue;
            if (dfs(ch)) return true;
        }
        return false;
    };
    if (!dfs(d.name)) return;
    out.insert(leftmost);

    bool chained = false;
    for (const IndexLink& l : idx.out(leftmost))
        if (l.kind == LinkKind::Shortcut && l.rel == pr.rel_name) chained = true;
    if (chained) {
        Path cur = leftmost;
        for (;;) {
            const Path* next = nullptr;
            for (const IndexLink& l : idx.out(cur)) {
                if (l.kind != LinkKind::Shortcut || l.rel != pr.rel_name) continue;
                m.comparisons += 1;  // direction test
                if (pos(l.to) > pos(cur)) {
                    next = &l.to;
                    break;
                }
            }
            if (!next) break;
            m.nodes_visited += 1;
            m.comparisons += 1;  // window test
            if (!(pos(*next) <= pr.hi_pos)) break;
            out.insert(*next);
            cur = *next;
        }
        return;
    }
    std::function<void(const Path&)> sweep = [&](const Path& c) {
        m.nodes_visited += 1;
        if (path_level(c) == pr.level) {
            if (at_level_in(c)) out.insert(c);
            return;
        }
        for (const Path& ch : d.at(c).children) {
            m.comparisons += 1;
            if (!idx.find(ch)) continue;
            if (prefix_ok(ch)) sweep(ch);
        }
    };
    sweep(d.name);
}

void walk_range(const GraphIndex& idx, const ResourceSpace& space, const PreparedDim& pd,
                const PreparedRange& pr, std::set<Path>& out, ExecMetrics& m) {
    const Dimension& d = space.dims[pd.dim];
    if (pr.level_order) {
        walk_level(idx, d, pr, out, m);
        return;
    }
    // root chain down to the upper bound; a missing prefix means nothing
    // below it is materialized either
    for (const Path& p : prefix_paths(pr.r->upper)) {
        m.comparisons += 1;
        if (!idx.find(p)) return;
        m.nodes_visited += 1;
    }
    if (pr.subtree) {
        std::deque<Path> q{pr.r->upper};
        std::set<Path> seen{pr.r->upper};
        out.insert(pr.r->upper);
        while (!q.empty()) {
            Path cur = std::move(q.front());
            q.pop_front();
            for (const IndexLink& l : idx.out(cur)) {
                if (l.kind != LinkKind::Inclusion) continue;
                const IndexNode* t = idx.find(l.to);
                if (!t || t->kind != NodeKind::Coordinate || t->dim != pd.dim) continue;
                if (!seen.insert(l.to).second) continue;
                m.nodes_visited += 1;
                out.insert(t->path);
                q.push_back(l.to);
            }
        }
        return;
    }
    // bounded chain: keep probing ever-deeper prefixes of the lower bound
    out.insert(pr.r->upper);
    for (const Path& p : prefix_paths(*pr.r->lower)) {
        if (p.size() <= pr.r->upper.size()) continue;
        m.comparisons += 1;
        if (!idx.find(p)) return;
        m.nodes_visited += 1;
        out.insert(p);
    }
}

double ninf() { return -std::numeric_limits<double>::infinity(); }

bool numeric_attr(const AttrValue& v, double& out) {
    if (const double* d = std::get_if<double>(&v)) {
        out = *d;
        return true;
    }
    return parse_number(std::get<std::string>(v), out);
}

}  // namespace

void validate_spec(const ResourceSpace& space, const SubspaceSpec& spec) { prepare(space, spec); }

ResultSet exec_bruteforce(const ResourceSpace& space, const Store& store,
                          const SubspaceSpec& spec) {
    std::vector<PreparedDim> plans = prepare(space, spec);
    std::vector<const PreparedDim*> by_dim = index_by_dim(space, plans);
    ExecMetrics m;
    Accumulator acc;
    for (const auto& [key, bucket] : store.point_map()) {
        (void)key;
        scan_point(space, store, plans, by_dim, bucket, m, acc);
    }
    return materialize(acc, m);
}

ResultSet exec_bruteforce_parallel(const ResourceSpace& space, const Store& store,
                                   const SubspaceSpec& spec) {
    std::vector<PreparedDim> plans = prepare(space, spec);
    std::vector<const PreparedDim*> by_dim = index_by_dim(space, plans);
    std::vector<const std::vector<uint32_t>*> buckets;
    buckets.reserve(store.point_map().size());
    for (const auto& [key, bucket] : store.point_map()) {
        (void)key;
        buckets.push_back(&bucket);
    }
    // Fixed chunking, not thread count, so the merge is identical however
    // many threads actually run. Set unions commute, so the result matches
    // the serial scan exactly; the counters are plain sums and match too.
    const int chunks = 32;
    std::vector<Accumulator> accs(chunks);
    std::vector<ExecMetrics> ms(chunks);
    const long long n = static_cast<long long>(buckets.size());
#pragma omp parallel for schedule(static)
    for (int c = 0; c < chunks; ++c) {
        for (long long i = c; i < n; i += chunks)
            scan_point(space, store, plans, by_dim, *buckets[i], ms[c], accs[c]);
    }
    Accumulator acc;
    ExecMetrics m;
    for (int c = 0; c < chunks; ++c) {
        merge_into(acc, std::move(accs[c]));
        m.comparisons += ms[c].comparisons;
        m.nodes_visited += ms[c].nodes_visited;
        m.intersections_computed += ms[c].intersections_computed;
    }
    return materialize(acc, m);
}

ResultSet exec_indexed(const GraphIndex& index, const Store& store, const SubspaceSpec& spec) {
    const ResourceSpace& space = index.space();
    std::vector<PreparedDim> plans = prepare(space, spec);
    ExecMetrics m;
    for (PreparedDim& pd : plans) {
        for (const PreparedRange& pr : pd.ranges) walk_range(index, space, pd, pr, pd.members, m);
        if (pd.members.empty()) {
            ResultSet rs;
            rs.metrics = m;
            return rs;
        }
    }
    std::vector<const PreparedDim*> by_dim = index_by_dim(space, plans);

    // greedy: start from the most selective dimension's root
    const PreparedDim* pivot = nullptr;
    for (const PreparedDim& pd : plans)
        if (!pivot || pd.members.size() < pivot->members.size()) pivot = &pd;
    const std::string root_id = space.dims[pivot ? pivot->dim : 0].name;

    // Nodes around the walked cone probe the same side coordinates over and
    // over (every intersection under one chain coordinate shares it), so
    // each predicate is computed once per coordinate and memoized; only the
    // actual computations count as comparisons.
    std::vector<std::map<Path, bool>> exact_cache(space.dims.size());
    std::vector<std::map<Path, bool>> cone_cache(space.dims.size());
    std::vector<std::map<Path, bool>> cover_cache(space.dims.size());
    auto exact_member = [&](const PreparedDim& pd, const Path& c) {
        auto& cache = exact_cache[pd.dim];
        auto it = cache.find(c);
        if (it != cache.end()) return it->second;
        m.comparisons += 1;
        bool r = pd.members.count(c) > 0;
        cache.emplace(c, r);
        return r;
    };
    auto comparable_up = [&](const PreparedDim& pd, const Path& c) {
        if (exact_member(pd, c)) return true;
        auto& cache = cone_cache[pd.dim];
        auto it = cache.find(c);
        if (it != cache.end()) return it->second;
        m.comparisons += 1;
        auto lb = pd.members.lower_bound(c + "/");
        bool r = lb != pd.members.end() && path_descends(*lb, c);
        cache.emplace(c, r);
        return r;
    };
    // Enter a node only while its scope coordinates can still lead to an
    // in-range point: every maintained path to a point runs through nodes
    // whose scopes are ancestors-or-equal of the point's coordinates, so
    // this prune never loses a contributor.
    auto scope_ok = [&](const IndexNode& n) {
        if (n.kind == NodeKind::Coordinate) {
            const PreparedDim* pd = by_dim[n.dim];
            return !pd || comparable_up(*pd, n.path);
        }
        const PreparedDim* pa = by_dim[n.dim_a];
        if (pa && !comparable_up(*pa, n.side_a)) return false;
        const PreparedDim* pb = by_dim[n.dim_b];
        return !pb || comparable_up(*pb, n.side_b);
    };
    // A scope sitting inside a whole-subtree range pins every point below
    // it in-range on that dimension, so those probes can be skipped later.
    auto cover_mask = [&](const IndexNode& n) {
        uint32_t mask = 0;
        auto side = [&](int dim, const Path& c) {
            const PreparedDim* pd = by_dim[dim];
            if (!pd) return;
            auto& cache = cover_cache[dim];
            auto it = cache.find(c);
            if (it == cache.end()) {
                bool covered = false;
                for (const PreparedRange& pr : pd->ranges) {
                    if (!pr.subtree) continue;
                    m.comparisons += 1;
                    if (path_descends(c, pr.r->upper)) {
                        covered = true;
                        break;
                    }
                }
                it = cache.emplace(c, covered).first;
            }
            if (it->second) mask |= 1u << dim;
        };
        if (n.kind == NodeKind::Coordinate)
            side(n.dim, n.path);
        else {
            side(n.dim_a, n.side_a);
            side(n.dim_b, n.side_b);
        }
        return mask;
    };

    std::deque<std::string> frontier{root_id};
    std::set<std::string> seen{root_id};
    std::map<std::string, uint32_t> cand;  // point id → dimensions already guaranteed
    while (!frontier.empty()) {
        std::string cur = std::move(frontier.front());
        frontier.pop_front();
        const IndexNode* np = index.find(cur);
        if (!np) continue;  // nothing materialized yet under this root
        const IndexNode& n = *np;
        m.nodes_visited += 1;
        if (n.kind == NodeKind::Intersection) m.intersections_computed += 1;
        uint32_t mask = cover_mask(n);
        for (const IndexLink& l : index.out(cur)) {
            if (l.kind == LinkKind::Order || l.kind == LinkKind::Shortcut) continue;
            const IndexNode* t = index.find(l.to);
            if (!t) continue;
            if (t->kind == NodeKind::Point) {
                cand[l.to] |= mask;
                continue;
            }
            if (seen.count(l.to)) continue;
            if (!scope_ok(*t)) continue;
            seen.insert(l.to);
            frontier.push_back(l.to);
        }
    }

    Accumulator acc;
    MemberFn member = [&](const PreparedDim& pd, const Path& a) {
        return exact_member(pd, a);
    };
    for (const auto& [pid, mask] : cand) {
        m.comparisons += 1;  // candidate point inspected
        const Point& sp = index.find(pid)->point;
        bool in = true;
        for (const PreparedDim& pd : plans) {
            if (mask & (1u << pd.dim)) continue;
            if (!exact_member(pd, sp.coords[pd.dim])) {
                in = false;
                break;
            }
        }
        if (!in) continue;
        const std::vector<uint32_t>* bucket = store.point_bucket(pid);
        if (!bucket) throw ExecError("index point missing from store: " + pid);
        std::vector<std::string> rids;
        rids.reserve(bucket->size());
        for (uint32_t i : *bucket) rids.push_back(store.at(i).id);
        route(space, by_dim, sp, rids, member, acc);
    }
    return materialize(acc, m);
}

ResultSet eval_vars(ResultSet rs, const SubspaceSpec& spec, const Store& store) {
    for (ResultPoint& rp : rs.points) {
        for (ResultResource& rr : rp.resources) {
            const Resource* res = store.get(rr.id);
            if (!res) throw ExecError("result resource missing from store: " + rr.id);
            for (const DimSpec& ds : spec.dims)
                for (const ResourceVar& rv : ds.resource_vars) {
                    if (rv.func != "VAL") throw ExecError("unknown function name: " + rv.func);
                    auto it = res->attrs.find(rv.attr);
                    double v;
                    if (it != res->attrs.end() && numeric_attr(it->second, v)) rr.vars[rv.name] = v;
                }
        }
        for (const DimSpec& ds : spec.dims)
            for (const PointVar& pv : ds.point_vars) {
                double sum = 0, mx = 0, mn = 0;
                long long n = 0;
                for (const ResultResource& rr : rp.resources) {
                    const Resource* res = store.get(rr.id);
                    auto it = res->attrs.find(pv.attr);
                    double v;
                    if (it == res->attrs.end() || !numeric_attr(it->second, v)) continue;
                    if (n == 0)
                        mx = mn = v;
                    else {
                        mx = std::max(mx, v);
                        mn = std::min(mn, v);
                    }
                    sum += v;
                    n += 1;
                }
                double out = 0;
                switch (pv.func) {
                    case AggFunc::Sum: out = sum; break;
                    case AggFunc::Count: out = static_cast<double>(n); break;
                    case AggFunc::Max: out = mx; break;
                    case AggFunc::Min: out = mn; break;
                    case AggFunc::Avg: out = n ? sum / static_cast<double>(n) : 0; break;
                }
                rp.point_vars[pv.name] = out;
            }
    }
    return rs;
}

ResultSet top_point(ResultSet rs, const TopSpec& spec) {
    auto measure = [&](const ResultPoint& p) {
        auto it = p.point_vars.find(spec.measure);
        return it == p.point_vars.end() ? ninf() : it->second;
    };
    std::stable_sort(rs.points.begin(), rs.points.end(),
                     [&](const ResultPoint& a, const ResultPoint& b) {
                         double ma = measure(a), mb = measure(b);
                         if (ma != mb) return ma > mb;
                         return a.point.key() < b.point.key();
                     });
    size_t keep = spec.topk < 0 ? 0 : static_cast<size_t>(spec.topk);
    if (rs.points.size() > keep) rs.points.resize(keep);
    return rs;
}

ResultSet top_resource(ResultSet rs, const TopSpec& spec, const Store& store) {
    auto measure = [&](const ResultResource& r) {
        auto it = r.vars.find(spec.measure);
        if (it != r.vars.end()) return it->second;
        const Resource* res = store.get(r.id);
        if (res) {
            auto at = res->attrs.find(spec.measure);
            double v;
            if (at != res->attrs.end() && numeric_attr(at->second, v)) return v;
        }
        return ninf();
    };
    for (ResultPoint& rp : rs.points) {
        std::stable_sort(rp.resources.begin(), rp.resources.end(),
                         [&](const ResultResource& a, const ResultResource& b) {
                             double ma = measure(a), mb = measure(b);
                             if (ma != mb) return ma > mb;
                             return a.id < b.id;
                         });
        size_t keep = spec.topk < 0 ? 0 : static_cast<size_t>(spec.topk);
        if (rp.resources.size() > keep) rp.resources.resize(keep);
    }
    rs.points.erase(std::remove_if(rs.points.begin(), rs.points.end(),
                                   [](const ResultPoint& p) { return p.resources.empty(); }),
                    rs.points.end());
    return rs;
}

RowTable project(const ResultSet& rs, const std::vector<std::string>& select,
                 const ResourceSpace& space, const Store& store) {
    for (const std::string& name : select) {
        if (rs.points.empty()) break;
        bool known = space.dim_index(name) >= 0;
        for (const ResultPoint& rp : rs.points) {
            if (known) break;
            if (rp.point_vars.count(name)) known = true;
            for (const ResultResource& rr : rp.resources) {
                if (known) break;
                if (rr.vars.count(name)) known = true;
                const Resource* res = store.get(rr.id);
                if (res && res->attrs.count(name)) known = true;
            }
        }
        if (!known) throw ExecError("unknown name in SELECT: " + name);
    }
    RowTable t;
    t.header = select;
    for (const ResultPoint& rp : rs.points) {
        for (const ResultResource& rr : rp.resources) {
            const Resource* res = store.get(rr.id);
            std::vector<std::string> row;
            row.reserve(select.size());
            for (const std::string& name : select) {
                int di = space.dim_index(name);
                if (di >= 0) {
                    row.push_back(rp.point.coords[di]);
                    continue;
                }
                auto pv = rp.point_vars.find(name);
                if (pv != rp.point_vars.end()) {
                    row.push_back(format_number(pv->second));
                    continue;
                }
                auto rv = rr.vars.find(name);
                if (rv != rr.vars.end()) {
                    row.push_back(format_number(rv->second));
                    continue;
                }
                if (res) {
                    auto at = res->attrs.find(name);
                    if (at != res->attrs.end()) {
                        if (const double* d = std::get_if<double>(&at->second))
                            row.push_back(format_number(*d));
                        else
                            row.push_back(std::get<std::string>(at->second));
                        continue;
                    }
                }
                row.push_back("");
            }
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

std::string to_csv(const RowTable& t) {
    auto escape = [](const std::string& s) {
        if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        out += '"';
        return out;
    };
    std::string out;
    auto emit = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += escape(row[i]);
        }
        out += '\n';
    };
    emit(t.header);
    for (const auto& row : t.rows) emit(row);
    return out;
}

RunOutput finish_pipeline(ResultSet rs, const QueryAst& ast, const ResourceSpace& space,
                          const Store& store) {
    rs = eval_vars(std::move(rs), ast.subspace, store);
    if (ast.top_point) rs = top_point(std::move(rs), *ast.top_point);
    if (ast.top_resource) rs = top_resource(std::move(rs), *ast.top_resource, store);
    RunOutput out;
    out.metrics = rs.metrics;
    out.table = project(rs, ast.select, space, store);
    return out;
}

RunOutput run(const QueryAst& ast, const GraphIndex& index, const Store& store) {
    return finish_pipeline(exec_indexed(index, store, ast.subspace), ast, index.space(), store);
}

RunOutput run_scan(const QueryAst& ast, const ResourceSpace& space, const Store& store) {
    return finish_pipeline(exec_bruteforce(space, store, ast.subspace), ast, space, store);
}

}  // namespace rsm
