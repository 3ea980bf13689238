#include "rsm/index.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <functional>
#include <set>

#include "rsm/xml.hpp"

namespace rsm {

namespace {

// "a/b/c" -> {"a", "a/b", "a/b/c"}
std::vector<Path> root_chain(const Path& p) {
    std::vector<Path> out;
    for (size_t i = 0; i < p.size(); ++i)
        if (p[i] == '/') out.push_back(p.substr(0, i));
    out.push_back(p);
    return out;
}

std::string first_segment(const Path& p) { return p.substr(0, p.find('/')); }

long long parse_integer(const std::string& s, const char* what) {
    try {
        size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw IndexError("");
        return v;
    } catch (const std::exception&) {
        throw IndexError(std::string("malformed ") + what + ": " + s);
    }
}

NodeKind shape_of(const std::string& id) {
    if (id.empty() || id.front() != '<') return NodeKind::Coordinate;
    return id.find(" * ") != std::string::npos ? NodeKind::Intersection : NodeKind::Point;
}

// Fills the schema-derived fields from the id; throws when the id does not
// resolve against the space or its shape contradicts the declared kind.
void derive_node(IndexNode& n, const ResourceSpace& space) {
    if (n.id.empty()) throw IndexError("empty node id");
    if (shape_of(n.id) != n.kind)
        throw IndexError("node id does not match its kind: " + n.id);
    switch (n.kind) {
        case NodeKind::Coordinate: {
            n.dim = space.dim_index(first_segment(n.id));
            if (n.dim < 0) throw IndexError("unknown dimension in node id: " + n.id);
            space.dims[n.dim].at(n.id);  // throws when off the schema
            n.path = n.id;
            return;
        }
        case NodeKind::Point:
            n.point = parse_point_key(space, n.id);
            return;
        case NodeKind::Intersection: {
            if (n.id.back() != '>') throw IndexError("malformed intersection id: " + n.id);
            std::string body = n.id.substr(1, n.id.size() - 2);
            size_t cut = body.find(" * ");
            n.side_a = body.substr(0, cut);
            n.side_b = body.substr(cut + 3);
            n.dim_a = space.dim_index(first_segment(n.side_a));
            n.dim_b = space.dim_index(first_segment(n.side_b));
            if (n.dim_a < 0 || n.dim_b < 0)
                throw IndexError("unknown dimension in intersection id: " + n.id);
            if (n.dim_a >= n.dim_b)
                throw IndexError("intersection sides out of dimension order: " + n.id);
            space.dims[n.dim_a].at(n.side_a);
            space.dims[n.dim_b].at(n.side_b);
            return;
        }
    }
}

}  // namespace

const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Coordinate: return "COORDINATE";
        case NodeKind::Point: return "POINT";
        case NodeKind::Intersection: return "INTERSECTION";
    }
    return "?";
}

const char* link_kind_name(LinkKind k) {
    switch (k) {
        case LinkKind::Inclusion: return "INCLUSION";
        case LinkKind::Intersection: return "INTERSECTION";
        case LinkKind::Order: return "ORDER";
        case LinkKind::Shortcut: return "SHORTCUT";
    }
    return "?";
}

static NodeKind parse_node_kind(const std::string& s) {
    if (s == "COORDINATE") return NodeKind::Coordinate;
    if (s == "POINT") return NodeKind::Point;
    if (s == "INTERSECTION") return NodeKind::Intersection;
    throw IndexError("unknown node kind: " + s);
}

static LinkKind parse_link_kind(const std::string& s) {
    if (s == "INCLUSION") return LinkKind::Inclusion;
    if (s == "INTERSECTION") return LinkKind::Intersection;
    if (s == "ORDER") return LinkKind::Order;
    if (s == "SHORTCUT") return LinkKind::Shortcut;
    throw IndexError("unknown link kind: " + s);
}

std::string intersection_id(const Path& a, const Path& b) {
    return "<" + a + " * " + b + ">";
}

GraphIndex::GraphIndex(const ResourceSpace* space, const Store* store, LinkPolicy policy)
    : space_(space), store_(store), policy_(policy) {
    points_under_.resize(space_->dims.size());
    for (size_t d = 0; d < space_->dims.size(); ++d)
        ensure_coordinate(static_cast<int>(d), space_->dims[d].name);
}

const IndexNode* GraphIndex::find(const std::string& id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

const std::vector<IndexLink>& GraphIndex::out(const std::string& id) const {
    static const std::vector<IndexLink> none;
    auto it = out_.find(id);
    return it == out_.end() ? none : it->second;
}

static bool counts_resources(LinkKind kind) {
    return kind == LinkKind::Inclusion || kind == LinkKind::Intersection;
}

bool GraphIndex::add_link(const std::string& from, const std::string& to, LinkKind kind,
                          long long weight, const std::string& rel) {
    auto& links = out_[from];
    for (const IndexLink& l : links)
        if (l.to == to && l.kind == kind) return false;
    links.push_back({from, to, kind, weight, rel});
    if (counts_resources(kind)) in_[to].push_back(from);
    return true;
}

IndexLink& GraphIndex::append_link(const std::string& from, const std::string& to, LinkKind kind,
                                   long long weight) {
    auto& links = out_[from];
    links.push_back({from, to, kind, weight, ""});
    if (counts_resources(kind)) in_[to].push_back(from);
    return links.back();
}

void GraphIndex::register_point(const IndexNode& p) {
    for (size_t d = 0; d < space_->dims.size(); ++d)
        for (const Path& a : root_chain(p.point.coords[d])) points_under_[d][a].push_back(&p);
}

const std::vector<const IndexNode*>& GraphIndex::points_under(int dim, const Path& c) const {
    static const std::vector<const IndexNode*> none;
    const auto& m = points_under_[dim];
    auto it = m.find(c);
    return it == m.end() ? none : it->second;
}

void GraphIndex::remove_link(const std::string& from, const std::string& to, LinkKind kind) {
    auto it = out_.find(from);
    if (it == out_.end()) return;
    auto& links = it->second;
    links.erase(std::remove_if(links.begin(), links.end(),
                               [&](const IndexLink& l) { return l.to == to && l.kind == kind; }),
                links.end());
    if (counts_resources(kind)) {
        auto rit = in_.find(to);
        if (rit != in_.end()) {
            auto& rs = rit->second;
            auto pos = std::find(rs.begin(), rs.end(), from);
            if (pos != rs.end()) rs.erase(pos);
        }
    }
}

// One more resource now sits at the point: credit the point node and every
// node with a downward path to it. Splits may have detached the point from
// the lower part of a coordinate chain, in which case those nodes must not
// be credited, which is exactly what reverse reachability gives us.
void GraphIndex::bump_reachers(const std::string& point_id) {
    std::set<std::string> seen{point_id};
    std::vector<std::string> work{point_id};
    while (!work.empty()) {
        std::string cur = std::move(work.back());
        work.pop_back();
        nodes_.at(cur).count += 1;
        auto it = in_.find(cur);
        if (it == in_.end()) continue;
        for (const std::string& q : it->second)
            if (seen.insert(q).second) work.push_back(q);
    }
}

IndexNode& GraphIndex::ensure_coordinate(int dim, const Path& p) {
    auto it = nodes_.find(p);
    if (it != nodes_.end()) return it->second;
    space_->dims[dim].at(p);  // throws when the path is off the schema
    Path par = parent_path(p);
    if (!par.empty()) ensure_coordinate(dim, par);
    IndexNode n;
    n.id = p;
    n.kind = NodeKind::Coordinate;
    n.dim = dim;
    n.path = p;
    IndexNode& ref = nodes_.emplace(p, std::move(n)).first->second;
    if (!par.empty()) add_link(par, p, LinkKind::Inclusion, 0);
    return ref;
}

IndexNode& GraphIndex::ensure_intersection(const Path& a, const Path& b) {
    int da = space_->dim_index(first_segment(a));
    int db = space_->dim_index(first_segment(b));
    if (da < 0 || db < 0) throw IndexError("intersection side off the schema");
    if (da == db) throw IndexError("intersection sides share a dimension");
    const Path& x = da < db ? a : b;
    const Path& y = da < db ? b : a;
    std::string id = intersection_id(x, y);
    auto it = nodes_.find(id);
    if (it != nodes_.end()) return it->second;
    IndexNode n;
    n.id = id;
    n.kind = NodeKind::Intersection;
    n.side_a = x;
    n.side_b = y;
    n.dim_a = std::min(da, db);
    n.dim_b = std::max(da, db);
    IndexNode& ref = nodes_.emplace(id, std::move(n)).first->second;
    intersection_ids_.push_back(id);
    return ref;
}

const Covariance2& GraphIndex::pair_covariance(int dim_i) {
    if (cov_cache_store_size_ != store_->size()) {
        cov_cache_.clear();
        cov_cache_store_size_ = store_->size();
    }
    auto it = cov_cache_.find(dim_i);
    if (it == cov_cache_.end()) {
        auto samples = pair_samples(*space_, *store_, dim_i, dim_i + 1);
        it = cov_cache_.emplace(dim_i, covariance_inverse(samples)).first;
    }
    return it->second;
}

void GraphIndex::insert_resource(const Resource& r, Rng& rng, bool with_intersections) {
    if (!store_->get(r.id)) throw IndexError("resource not in store: " + r.id);
    const size_t ndims = space_->dims.size();
    if (r.point.coords.size() != ndims)
        throw IndexError("point arity mismatch for resource: " + r.id);

    const std::string pk = r.point.key();
    auto pit = nodes_.find(pk);
    const bool new_point = pit == nodes_.end();
    if (new_point) {
        IndexNode n;
        n.id = pk;
        n.kind = NodeKind::Point;
        n.point = r.point;
        pit = nodes_.emplace(pk, std::move(n)).first;
        register_point(pit->second);
    }

    for (size_t d = 0; d < ndims; ++d) {
        const Path& c = r.point.coords[d];
        ensure_coordinate(static_cast<int>(d), c);
        if (new_point) append_link(c, pk, LinkKind::Inclusion, 0);
    }

    // A new point also joins every intersection node whose region covers it,
    // whatever dimension pair the node spans. A covering node's sides are
    // ancestors of the point's coordinates in the node's two dimensions, so
    // probing every ancestor pair finds them all without a node sweep. An
    // existing point is already attached wherever it belongs, and re-linking
    // would undo the detachments a split made on purpose.
    if (new_point) {
        for (size_t i = 0; i + 1 < ndims; ++i) {
            std::vector<Path> as = root_chain(r.point.coords[i]);
            for (size_t j = i + 1; j < ndims; ++j) {
                std::vector<Path> bs = root_chain(r.point.coords[j]);
                for (const Path& a : as)
                    for (const Path& b : bs) {
                        std::string iid = intersection_id(a, b);
                        auto nit = nodes_.find(iid);
                        if (nit == nodes_.end() || nit->second.kind != NodeKind::Intersection)
                            continue;
                        append_link(iid, pk, LinkKind::Inclusion, 0);
                    }
            }
        }
    }

    if (!with_intersections) {
        bump_reachers(pk);
        return;
    }

    // Creation pass: one link draw per absent candidate, over every
    // coordinate pair on the two root paths of each adjacent dimension pair.
    for (size_t i = 0; i + 1 < ndims; ++i) {
        std::vector<Path> as = root_chain(r.point.coords[i]);
        std::vector<Path> bs = root_chain(r.point.coords[i + 1]);
        const Covariance2* cov = nullptr;
        for (const Path& a : as) {
            for (const Path& b : bs) {
                if (nodes_.find(intersection_id(a, b)) != nodes_.end()) continue;
                if (!cov) cov = &pair_covariance(static_cast<int>(i));
                WeightVector wa = weight_vector(space_->dims[i], a, *store_);
                WeightVector wb = weight_vector(space_->dims[i + 1], b, *store_);
                if (!sample_link(mahalanobis(wa, wb, *cov), policy_, rng)) continue;

                IndexNode& node = ensure_intersection(a, b);
                append_link(a, node.id, LinkKind::Intersection, 0);
                append_link(b, node.id, LinkKind::Intersection, 0);
                // A fresh intersection adopts every point it already covers,
                // so its reach never depends on insertion order. Candidates
                // come from the smaller side's subtree postings, filtered by
                // the other side.
                const auto& pa = points_under(node.dim_a, node.side_a);
                const auto& pb = points_under(node.dim_b, node.side_b);
                const bool from_a = pa.size() <= pb.size();
                const int od = from_a ? node.dim_b : node.dim_a;
                const Path& oc = from_a ? node.side_b : node.side_a;
                std::vector<const IndexNode*> covered;
                for (const IndexNode* q : from_a ? pa : pb)
                    if (space_->descends(od, q->point.coords[od], oc)) covered.push_back(q);
                std::sort(covered.begin(), covered.end(),
                          [](const IndexNode* x, const IndexNode* y) { return x->id < y->id; });
                long long total = 0;
                for (const IndexNode* q : covered) {
                    append_link(node.id, q->id, LinkKind::Inclusion, q->count);
                    total += q->count;
                }
                node.count = total;
                out_[a].back().weight = total;
                out_[b].back().weight = total;
                // The new node can only change the reach of a side an
                // earlier split drained: everything above a side still
                // reaches every adopted point through its intact coordinate
                // chain or through the split's sub-nodes, and a drained
                // ancestor never covers the exact-host points it lost.
                std::vector<std::string> recredited;
                if (drained_.count(a)) recredited.push_back(a);
                if (drained_.count(b)) recredited.push_back(b);
                recount(recredited);
            }
        }
    }
    // Counts last: a fresh intersection backfilled with the pre-insert point
    // counts picks up this resource here, along with everything else that can
    // reach the point.
    bump_reachers(pk);
}

void GraphIndex::add_shortcut_links() {
    for (auto& [id, links] : out_)
        links.erase(std::remove_if(links.begin(), links.end(),
                                   [](const IndexLink& l) {
                                       return l.kind == LinkKind::Order ||
                                              l.kind == LinkKind::Shortcut;
                                   }),
                    links.end());
    for (size_t d = 0; d < space_->dims.size(); ++d) {
        const Dimension& dim = space_->dims[d];
        for (const Relation& rel : dim.relations) {
            if (!rel.level_order) continue;
            // materialized coordinates at the relation's level, left to right
            std::vector<std::pair<std::vector<int>, Path>> level;
            for (auto& [id, n] : nodes_) {
                if (n.kind != NodeKind::Coordinate || n.dim != static_cast<int>(d)) continue;
                if (path_level(n.path) != rel.level) continue;
                level.emplace_back(position_tuple(dim, n.path), n.path);
            }
            std::sort(level.begin(), level.end());
            for (size_t k = 0; k + 1 < level.size(); ++k) {
                const Path& x = level[k].second;
                const Path& y = level[k + 1].second;
                add_link(x, y, LinkKind::Shortcut, 0, rel.name);
                add_link(y, x, LinkKind::Shortcut, 0, rel.name);
                if (parent_path(x) == parent_path(y))
                    add_link(x, y, LinkKind::Order, 0, rel.name);
            }
        }
    }
}

std::vector<std::string> GraphIndex::reachable_point_ids(const std::string& id) const {
    std::set<std::string> seen;
    std::set<std::string> points;
    std::vector<std::string> work{id};
    seen.insert(id);
    while (!work.empty()) {
        std::string cur = std::move(work.back());
        work.pop_back();
        auto nit = nodes_.find(cur);
        if (nit == nodes_.end()) continue;
        if (nit->second.kind == NodeKind::Point) {
            points.insert(cur);
            continue;  // points are terminal
        }
        for (const IndexLink& l : out(cur)) {
            if (l.kind != LinkKind::Inclusion && l.kind != LinkKind::Intersection) continue;
            if (seen.insert(l.to).second) work.push_back(l.to);
        }
    }
    return {points.begin(), points.end()};
}

long long GraphIndex::recompute_count(const std::string& id) const {
    long long total = 0;
    for (const std::string& pid : reachable_point_ids(id)) total += nodes_.at(pid).count;
    return total;
}

// Exact counts for every node in `ids`, all in one pass. A memoized walk
// computes each node's reachable point set as a bitset, so downstream
// structure shared between the recounted nodes is traversed once instead of
// once per node. Sums live point-node counts, same as recompute_count, so
// it is correct mid-build when the store is ahead of the index.
void GraphIndex::recount(const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    std::map<std::string, uint32_t> pos;  // point id -> bit position
    std::vector<long long> pcount;
    for (auto& [id, n] : nodes_)
        if (n.kind == NodeKind::Point) {
            pos.emplace(id, static_cast<uint32_t>(pcount.size()));
            pcount.push_back(n.count);
        }
    const size_t words = pcount.size() / 64 + 1;
    std::map<std::string, std::vector<uint64_t>> memo;
    std::map<std::string, int> color;  // 1 in progress, 2 done
    std::function<const std::vector<uint64_t>&(const std::string&)> bits =
        [&](const std::string& id) -> const std::vector<uint64_t>& {
        auto mit = memo.find(id);
        if (mit != memo.end() && color[id] == 2) return mit->second;
        auto& slot = memo[id];
        if (color[id] == 1) return slot;  // cycle; audit reports these
        color[id] = 1;
        slot.assign(words, 0);
        const IndexNode& n = nodes_.at(id);
        if (n.kind == NodeKind::Point) {
            uint32_t b = pos.at(id);
            slot[b / 64] |= uint64_t(1) << (b % 64);
        } else {
            for (const IndexLink& l : out(id)) {
                if (l.kind != LinkKind::Inclusion && l.kind != LinkKind::Intersection) continue;
                if (nodes_.find(l.to) == nodes_.end()) continue;
                const std::vector<uint64_t>& sub = bits(l.to);
                for (size_t w = 0; w < words; ++w) slot[w] |= sub[w];
            }
        }
        color[id] = 2;
        return slot;
    };
    for (const std::string& id : ids) {
        const std::vector<uint64_t>& b = bits(id);
        long long total = 0;
        for (size_t w = 0; w < words; ++w) {
            uint64_t word = b[w];
            while (word) {
                int bit = std::countr_zero(word);
                total += pcount[w * 64 + bit];
                word &= word - 1;
            }
        }
        nodes_.at(id).count = total;
    }
}

// Recount the seeds and everything upstream of them. Needed whenever an edit
// changes what a node can reach: a new intersection can resurface points an
// earlier split detached from its sides, and draining a node shrinks the
// reach of anything that enters it sideways.
void GraphIndex::settle_upstream(const std::vector<std::string>& seeds) {
    std::set<std::string> dirty(seeds.begin(), seeds.end());
    std::vector<std::string> work(seeds.begin(), seeds.end());
    while (!work.empty()) {
        std::string cur = std::move(work.back());
        work.pop_back();
        auto it = in_.find(cur);
        if (it == in_.end()) continue;
        for (const std::string& q : it->second)
            if (dirty.insert(q).second) work.push_back(q);
    }
    std::vector<std::string> ids;
    for (const std::string& q : dirty)
        if (nodes_.at(q).kind != NodeKind::Point) ids.push_back(q);
    recount(ids);
}

bool GraphIndex::maybe_split(const std::string& v_id, Rng& rng) {
    auto vit = nodes_.find(v_id);
    if (vit == nodes_.end()) throw IndexError("unknown node: " + v_id);
    IndexNode& v = vit->second;
    if (v.kind != NodeKind::Coordinate)
        throw IndexError("split target must be a coordinate node: " + v_id);
    if (v.count <= 0) throw IndexError("node has no resources: " + v_id);

    // Child pool: the node's tree children (coordinate chains, direct
    // points, earlier split sub-nodes). The gate passes with probability
    // 1/|children|, so busy nodes split ever more reluctantly.
    std::vector<const IndexLink*> pool;
    for (const IndexLink& l : out(v_id))
        if (l.kind == LinkKind::Inclusion) pool.push_back(&l);
    if (pool.empty()) return false;
    double beta = 1.0 - 1.0 / static_cast<double>(pool.size());
    if (rng.u01() < beta) return false;

    long long pool_total = 0;
    for (const IndexLink* l : pool) pool_total += nodes_.at(l->to).count;
    if (pool_total <= 0) return false;
    long long pick = static_cast<long long>(rng.below(static_cast<uint64_t>(pool_total)));
    std::string si_id;
    for (const IndexLink* l : pool) {
        pick -= nodes_.at(l->to).count;
        if (pick < 0) {
            si_id = l->to;
            break;
        }
    }
    IndexNode& s = nodes_.at(si_id);
    if (s.kind == NodeKind::Point) return false;  // no structure to refine

    // Sample a resource under the child, each resource equally likely; only
    // its point coordinates matter from here on.
    std::vector<std::string> pts = reachable_point_ids(si_id);
    long long res_total = 0;
    for (const std::string& pid : pts) res_total += nodes_.at(pid).count;
    if (res_total <= 0) return false;
    long long rpick = static_cast<long long>(rng.below(static_cast<uint64_t>(res_total)));
    const Point* rpoint = nullptr;
    for (const std::string& pid : pts) {
        rpick -= nodes_.at(pid).count;
        if (rpick < 0) {
            rpoint = &nodes_.at(pid).point;
            break;
        }
    }

    // Splitting coordinate: the sampled point's coordinate with the widest
    // schema fanout, ties to the smaller path. An intersection child only
    // considers its own two dimensions.
    std::vector<int> cand_dims;
    if (s.kind == NodeKind::Intersection)
        cand_dims = {s.dim_a, s.dim_b};
    else
        for (size_t d = 0; d < space_->dims.size(); ++d) cand_dims.push_back(static_cast<int>(d));
    int best_dim = -1;
    size_t best_fanout = 0;
    Path best_path;
    for (int d : cand_dims) {
        const Path& c = rpoint->coords[d];
        size_t fanout = space_->dims[d].at(c).children.size();
        if (fanout > best_fanout || (fanout == best_fanout && fanout > 0 && c < best_path)) {
            best_dim = d;
            best_fanout = fanout;
            best_path = c;
        }
    }
    if (best_fanout == 0) return false;  // nowhere to push points down
    if (s.kind == NodeKind::Coordinate && best_dim == s.dim) return false;

    // Regroup the child's direct points by the splitting coordinate's
    // children; sub-nodes hang under v, next to the drained child.
    const std::vector<Path>& subcoords = space_->dims[best_dim].at(best_path).children;
    std::vector<std::pair<std::string, std::string>> moves;  // (sub id, point id)
    for (const IndexLink& l : out(si_id)) {
        if (l.kind != LinkKind::Inclusion) continue;
        const IndexNode& p = nodes_.at(l.to);
        if (p.kind != NodeKind::Point) continue;
        const Path& pc = p.point.coords[best_dim];
        for (const Path& d : subcoords) {
            if (!path_descends(pc, d)) continue;
            Path own = s.kind == NodeKind::Intersection
                           ? (best_dim == s.dim_a ? s.side_b : s.side_a)
                           : s.path;
            moves.emplace_back(ensure_intersection(own, d).id, l.to);
            break;
        }
    }
    if (moves.empty()) return false;

    std::set<std::string> touched;
    for (auto& [sub_id, point_id] : moves) {
        remove_link(si_id, point_id, LinkKind::Inclusion);
        add_link(sub_id, point_id, LinkKind::Inclusion, nodes_.at(point_id).count);
        add_link(v_id, sub_id, LinkKind::Inclusion, 0);
        touched.insert(sub_id);
    }
    if (s.kind == NodeKind::Coordinate) drained_.insert(si_id);
    std::vector<std::string> seeds(touched.begin(), touched.end());
    seeds.push_back(si_id);
    settle_upstream(seeds);
    for (IndexLink& l : out_[v_id])
        if (touched.count(l.to)) l.weight = nodes_.at(l.to).count;
    splits_ += 1;
    return true;
}

const IndexNode* GraphIndex::locate_point(const Point& p) const {
    const IndexNode* n = find(p.key());
    return n && n->kind == NodeKind::Point ? n : nullptr;
}

void GraphIndex::corrupt_count(const std::string& id, long long delta) {
    nodes_.at(id).count += delta;
}

std::vector<std::string> GraphIndex::audit() {
    std::vector<std::string> bad;
    const size_t nres = store_->size();
    const size_t words = (nres + 63) / 64 + 1;

    for (auto& [pk, bucket] : store_->point_map())
        if (!bucket.empty() && nodes_.find(pk) == nodes_.end())
            bad.push_back("stored point has no node: " + pk);

    // link typing
    for (auto& [from, links] : out_) {
        const IndexNode* f = find(from);
        if (!f) {
            bad.push_back("links from unknown node: " + from);
            continue;
        }
        for (const IndexLink& l : links) {
            const IndexNode* t = find(l.to);
            if (!t) {
                bad.push_back("link to unknown node: " + from + " -> " + l.to);
                continue;
            }
            switch (l.kind) {
                case LinkKind::Inclusion:
                    if (f->kind == NodeKind::Coordinate && t->kind == NodeKind::Coordinate) {
                        if (parent_path(t->path) != f->path)
                            bad.push_back("inclusion link is not parent-to-child: " + from +
                                          " -> " + l.to);
                    } else if (f->kind == NodeKind::Coordinate && t->kind == NodeKind::Point) {
                        if (t->point.coords[f->dim] != f->path)
                            bad.push_back("point linked from a non-exact coordinate: " + from +
                                          " -> " + l.to);
                    } else if (f->kind == NodeKind::Coordinate &&
                               t->kind == NodeKind::Intersection) {
                        const Path& side = t->dim_a == f->dim   ? t->side_a
                                           : t->dim_b == f->dim ? t->side_b
                                                                : Path();
                        if (side.empty() || !path_descends(side, f->path))
                            bad.push_back("sub-node hangs outside its host coordinate: " + from +
                                          " -> " + l.to);
                    } else if (f->kind == NodeKind::Intersection && t->kind == NodeKind::Point) {
                        if (!space_->descends(f->dim_a, t->point.coords[f->dim_a], f->side_a) ||
                            !space_->descends(f->dim_b, t->point.coords[f->dim_b], f->side_b))
                            bad.push_back("intersection holds a point outside its region: " +
                                          from + " -> " + l.to);
                    } else {
                        bad.push_back("inclusion link with invalid endpoint kinds: " + from +
                                      " -> " + l.to);
                    }
                    break;
                case LinkKind::Intersection:
                    if (f->kind != NodeKind::Coordinate || t->kind != NodeKind::Intersection ||
                        !((t->dim_a == f->dim && t->side_a == f->path) ||
                          (t->dim_b == f->dim && t->side_b == f->path)))
                        bad.push_back("intersection link not from one of the node's sides: " +
                                      from + " -> " + l.to);
                    break;
                case LinkKind::Order:
                case LinkKind::Shortcut: {
                    const char* what = l.kind == LinkKind::Order ? "order" : "shortcut";
                    if (f->kind != NodeKind::Coordinate || t->kind != NodeKind::Coordinate ||
                        f->dim != t->dim || path_level(f->path) != path_level(t->path)) {
                        bad.push_back(std::string(what) + " link crosses dimensions or levels: " +
                                      from + " -> " + l.to);
                        break;
                    }
                    const Relation* rel = space_->dims[f->dim].find_relation(l.rel);
                    if (!rel || !rel->level_order || rel->level != path_level(f->path))
                        bad.push_back(std::string(what) +
                                      " link tagged with a relation that does not order its "
                                      "level: " +
                                      from + " -> " + l.to);
                    break;
                }
            }
        }
    }

    // order/shortcut adjacency against the materialized level lists
    for (size_t d = 0; d < space_->dims.size(); ++d) {
        std::map<int, std::map<std::vector<int>, Path>> by_level;
        for (auto& [id, n] : nodes_)
            if (n.kind == NodeKind::Coordinate && n.dim == static_cast<int>(d))
                by_level[path_level(n.path)].emplace(position_tuple(space_->dims[d], n.path),
                                                     n.path);
        for (auto& [lvl, ordered] : by_level) {
            std::map<Path, int> pos;
            int i = 0;
            for (auto& [tup, p] : ordered) pos[p] = i++;
            for (auto& [p, _] : pos) {
                for (const IndexLink& l : out(p)) {
                    if (l.kind == LinkKind::Shortcut) {
                        auto a = pos.find(l.from), b = pos.find(l.to);
                        if (a == pos.end() || b == pos.end() ||
                            std::abs(a->second - b->second) != 1)
                            bad.push_back("shortcut link skips a materialized coordinate: " +
                                          l.from + " -> " + l.to);
                    } else if (l.kind == LinkKind::Order) {
                        auto a = pos.find(l.from), b = pos.find(l.to);
                        if (a == pos.end() || b == pos.end() || b->second != a->second + 1 ||
                            parent_path(l.from) != parent_path(l.to))
                            bad.push_back("order link does not join adjacent materialized "
                                          "siblings: " +
                                          l.from + " -> " + l.to);
                    }
                }
            }
        }
    }

    // count caches: distinct resources reachable below each node, as bitsets
    // over store positions (memoized DAG walk; points are terminal)
    std::map<std::string, std::vector<uint64_t>> memo;
    std::map<std::string, int> color;  // 1 in progress, 2 done
    std::function<const std::vector<uint64_t>&(const std::string&)> bits =
        [&](const std::string& id) -> const std::vector<uint64_t>& {
        auto mit = memo.find(id);
        if (mit != memo.end() && color[id] == 2) return mit->second;
        auto& slot = memo[id];
        if (color[id] == 1) {
            bad.push_back("inclusion cycle through: " + id);
            return slot;
        }
        color[id] = 1;
        slot.assign(words, 0);
        const IndexNode& n = nodes_.at(id);
        if (n.kind == NodeKind::Point) {
            if (const auto* bucket = store_->point_bucket(id))
                for (uint32_t idx : *bucket) slot[idx / 64] |= uint64_t(1) << (idx % 64);
        } else {
            for (const IndexLink& l : out(id)) {
                if (l.kind != LinkKind::Inclusion && l.kind != LinkKind::Intersection) continue;
                if (nodes_.find(l.to) == nodes_.end()) continue;
                const std::vector<uint64_t>& sub = bits(l.to);
                for (size_t w = 0; w < words; ++w) slot[w] |= sub[w];
            }
        }
        color[id] = 2;
        return slot;
    };
    for (auto& [id, n] : nodes_) {
        const std::vector<uint64_t>& b = bits(id);
        long long want = 0;
        for (uint64_t w : b) want += std::popcount(w);
        if (n.count != want) {
            bad.push_back("count cache off at " + id + ": have " + std::to_string(n.count) +
                          ", counted " + std::to_string(want));
            n.count = want;
        }
        if (n.kind == NodeKind::Point && want == 0)
            bad.push_back("point node without stored resources: " + id);
    }

    // every point must be reachable from every dimension root by inclusion
    for (size_t d = 0; d < space_->dims.size(); ++d) {
        std::set<std::string> seen{space_->dims[d].name};
        std::vector<std::string> work{space_->dims[d].name};
        while (!work.empty()) {
            std::string cur = std::move(work.back());
            work.pop_back();
            for (const IndexLink& l : out(cur))
                if (l.kind == LinkKind::Inclusion && nodes_.count(l.to) && seen.insert(l.to).second)
                    work.push_back(l.to);
        }
        for (auto& [id, n] : nodes_)
            if (n.kind == NodeKind::Point && !seen.count(id))
                bad.push_back("point unreachable from " + space_->dims[d].name + ": " + id);
    }

    // refresh cost caches now that counts are settled
    for (auto& [from, links] : out_)
        for (IndexLink& l : links)
            if ((l.kind == LinkKind::Inclusion || l.kind == LinkKind::Intersection) &&
                nodes_.count(l.to))
                l.weight = nodes_.at(l.to).count;
    return bad;
}

IndexStats GraphIndex::stats() const {
    IndexStats st;
    for (auto& [id, n] : nodes_) {
        switch (n.kind) {
            case NodeKind::Coordinate: st.coordinate_nodes++; break;
            case NodeKind::Point: st.point_nodes++; break;
            case NodeKind::Intersection: st.intersection_nodes++; break;
        }
    }
    for (auto& [from, links] : out_) {
        for (const IndexLink& l : links) {
            switch (l.kind) {
                case LinkKind::Inclusion: st.inclusion_links++; break;
                case LinkKind::Intersection: st.intersection_links++; break;
                case LinkKind::Order: st.order_links++; break;
                case LinkKind::Shortcut: st.shortcut_links++; break;
            }
        }
    }
    st.splits_performed = splits_;
    return st;
}

std::string GraphIndex::serialize() const {
    XmlNode root("GraphIndex");
    XmlNode meta("Meta");
    meta.add_attr("seed", std::to_string(policy_.rng_seed));
    meta.add_attr("policy", policy_.to_string());
    root.add_child(std::move(meta));
    for (auto& [id, n] : nodes_) {
        XmlNode e("Node");
        e.add_attr("id", id);
        e.add_attr("kind", node_kind_name(n.kind));
        e.add_attr("count", std::to_string(n.count));
        root.add_child(std::move(e));
    }
    std::vector<const IndexLink*> links;
    for (auto& [from, ls] : out_)
        for (const IndexLink& l : ls) links.push_back(&l);
    std::sort(links.begin(), links.end(), [](const IndexLink* a, const IndexLink* b) {
        if (a->from != b->from) return a->from < b->from;
        if (a->to != b->to) return a->to < b->to;
        return static_cast<int>(a->kind) < static_cast<int>(b->kind);
    });
    for (const IndexLink* l : links) {
        XmlNode e("Link");
        e.add_attr("from", l->from);
        e.add_attr("to", l->to);
        e.add_attr("kind", link_kind_name(l->kind));
        e.add_attr("weight", l->rel.empty() ? std::to_string(l->weight) : l->rel);
        root.add_child(std::move(e));
    }
    return xml_write(root);
}

GraphIndex GraphIndex::parse(const ResourceSpace* space, const Store* store,
                             const std::string& text) {
    XmlNode doc = xml_parse(text);
    if (doc.name != "GraphIndex") throw IndexError("root element must be GraphIndex");
    LinkPolicy policy;
    bool saw_meta = false;
    for (const XmlNode& child : doc.children) {
        if (child.name != "Meta") continue;
        if (saw_meta) throw IndexError("duplicate Meta element");
        saw_meta = true;
        policy = LinkPolicy::parse(child.attr("policy"));
        const std::string& seed = child.attr("seed");
        try {
            size_t pos = 0;
            policy.rng_seed = std::stoull(seed, &pos);
            if (pos != seed.size()) throw IndexError("");
        } catch (const std::exception&) {
            throw IndexError("malformed seed: " + seed);
        }
    }
    if (!saw_meta) throw IndexError("missing Meta element");

    GraphIndex idx(space, store, policy);
    idx.nodes_.clear();
    idx.out_.clear();
    idx.in_.clear();
    idx.intersection_ids_.clear();
    for (const XmlNode& child : doc.children) {
        if (child.name == "Meta") continue;
        if (child.name == "Node") {
            IndexNode n;
            n.id = child.attr("id");
            n.kind = parse_node_kind(child.attr("kind"));
            n.count = parse_integer(child.attr("count"), "count");
            derive_node(n, *space);
            if (!idx.nodes_.emplace(n.id, n).second)
                throw IndexError("duplicate node id: " + n.id);
            if (n.kind == NodeKind::Intersection) idx.intersection_ids_.push_back(n.id);
        } else if (child.name == "Link") {
            IndexLink l;
            l.from = child.attr("from");
            l.to = child.attr("to");
            l.kind = parse_link_kind(child.attr("kind"));
            const std::string& w = child.attr("weight");
            if (l.kind == LinkKind::Order || l.kind == LinkKind::Shortcut)
                l.rel = w;
            else
                l.weight = parse_integer(w, "link weight");
            if (!idx.nodes_.count(l.from) || !idx.nodes_.count(l.to))
                throw IndexError("link references unknown node: " + l.from + " -> " + l.to);
            if (counts_resources(l.kind)) idx.in_[l.to].push_back(l.from);
            idx.out_[l.from].push_back(std::move(l));
        } else {
            throw IndexError("unexpected element: " + child.name);
        }
    }
    for (size_t d = 0; d < space->dims.size(); ++d)
        idx.ensure_coordinate(static_cast<int>(d), space->dims[d].name);
    for (auto& [id, n] : idx.nodes_)
        if (n.kind == NodeKind::Point) idx.register_point(n);
    // Recover which coordinates a split drained: they are the ones missing
    // an inclusion link to a point they host exactly.
    std::set<std::pair<std::string, std::string>> hosted;
    for (auto& [from, links] : idx.out_) {
        if (idx.nodes_.at(from).kind != NodeKind::Coordinate) continue;
        for (const IndexLink& l : links)
            if (l.kind == LinkKind::Inclusion) hosted.emplace(from, l.to);
    }
    for (auto& [id, n] : idx.nodes_) {
        if (n.kind != NodeKind::Point) continue;
        for (const Path& c : n.point.coords)
            if (idx.nodes_.count(c) && !hosted.count({c, id})) idx.drained_.insert(c);
    }
    return idx;
}

GraphIndex build_basic_index(const ResourceSpace& space, const Store& store) {
    GraphIndex idx(&space, &store, LinkPolicy{});
    Rng rng(0);  // never consulted: intersection draws are off
    for (const Resource& r : store.all()) idx.insert_resource(r, rng, false);
    return idx;
}

GraphIndex build_graph_index(const ResourceSpace& space, const Store& store, LinkPolicy policy,
                             bool with_splits) {
    GraphIndex idx(&space, &store, policy);
    Rng rng(policy.rng_seed);
    for (const Resource& r : store.all()) {
        idx.insert_resource(r, rng, true);
        if (!with_splits) continue;
        for (size_t d = 0; d < space.dims.size(); ++d) {
            Path v = parent_path(r.point.coords[d]);
            if (v.empty()) v = r.point.coords[d];
            idx.maybe_split(v, rng);
        }
    }
    idx.add_shortcut_links();
    return idx;
}

}  // namespace rsm
