#include "rsm/gen.hpp"

#include <algorithm>
#include <cstdio>

namespace rsm {

namespace {

std::string child_label(size_t i) {
    // a..z, then a1, b1, ... keeps labels short and distinct
    std::string s(1, static_cast<char>('a' + i % 26));
    if (i >= 26) s += std::to_string(i / 26);
    return s;
}

}  // namespace

ResourceSpace gen_space(const GenConfig& cfg) {
    Rng rng(cfg.seed);
    ResourceSpace space;
    space.name = "gen";
    for (const GenDim& gd : cfg.dims) {
        Dimension d;
        d.name = gd.name;
        d.add(gd.name);
        std::vector<Path> frontier{gd.name};
        for (int lv = 1; lv <= gd.max_depth && !frontier.empty(); ++lv) {
            std::vector<Path> next;
            for (const Path& p : frontier) {
                if (d.coords.size() >= cfg.max_coords_per_dim) break;
                uint64_t fan = static_cast<uint64_t>(gd.max_fanout);
                uint64_t k = lv == 1 ? 1 + rng.below(fan) : rng.below(fan + 1);
                for (uint64_t i = 0; i < k && d.coords.size() < cfg.max_coords_per_dim; ++i) {
                    Path ch = p + "/" + child_label(i);
                    d.add(ch, static_cast<int>(i));
                    next.push_back(ch);
                }
            }
            frontier = std::move(next);
        }
        d.relations.push_back({"subclass", false, -1});
        if (gd.level_order) d.relations.push_back({gd.name + "_order", true, 1});
        space.dims.push_back(std::move(d));
    }
    space.finalize();
    return space;
}

std::vector<Resource> gen_corpus(const ResourceSpace& space, const GenConfig& cfg) {
    // a stream separate from the schema draw, so corpus regeneration over a
    // hand-built space with the same seed stays stable
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::vector<Path>> pool;
    for (const Dimension& d : space.dims) {
        std::vector<Path> ps;
        ps.reserve(d.coords.size());
        for (const auto& [p, c] : d.coords) {
            (void)c;
            ps.push_back(p);
        }
        pool.push_back(std::move(ps));
    }
    std::vector<Resource> out;
    out.reserve(static_cast<size_t>(cfg.resources));
    for (long long i = 0; i < cfg.resources; ++i) {
        Resource r;
        char buf[24];
        std::snprintf(buf, sizeof buf, "r%05lld", i);
        r.id = buf;
        r.point.coords.reserve(space.dims.size());
        for (const auto& ps : pool) r.point.coords.push_back(ps[rng.below(ps.size())]);
        for (const GenAttr& a : cfg.attrs) {
            long long v = a.lo + static_cast<long long>(rng.below(
                                     static_cast<uint64_t>(a.hi - a.lo + 1)));
            r.attrs[a.name] = static_cast<double>(v);
        }
        if (!cfg.title_attr.empty()) r.attrs[cfg.title_attr] = "Title " + r.id;
        out.push_back(std::move(r));
    }
    return out;
}

SubspaceSpec gen_spec(const ResourceSpace& space, Rng& rng) {
    SubspaceSpec out;
    for (const Dimension& dim : space.dims) {
        DimSpec ds;
        ds.dimension = dim.name;
        ds.agg = rng.u01() < 0.5;
        const Relation* lo_rel = nullptr;
        for (const Relation& rel : dim.relations)
            if (rel.level_order) lo_rel = &rel;
        std::vector<Path> all;
        all.reserve(dim.coords.size());
        for (const auto& [p, c] : dim.coords) {
            (void)c;
            all.push_back(p);
        }
        bool level_mode = lo_rel && rng.u01() < 0.4;
        if (level_mode) {
            std::vector<std::pair<std::vector<int>, Path>> lv;
            for (const auto& [p, c] : dim.coords)
                if (c.level == lo_rel->level) lv.emplace_back(position_tuple(dim, p), p);
            std::sort(lv.begin(), lv.end());
            if (lv.empty()) {
                level_mode = false;
            } else {
                ds.relation = lo_rel->name;
                size_t i = rng.below(lv.size());
                size_t j = i + rng.below(lv.size() - i);
                Range r;
                r.dimension = dim.name;
                r.relation = lo_rel->name;
                r.lower = lv[i].second;
                r.upper = lv[j].second;
                ds.ranges.push_back(std::move(r));
            }
        }
        if (!level_mode) {
            ds.relation = dim.find_relation("subclass") ? "subclass" : "";
            size_t nr = 1 + rng.below(2);
            for (size_t k = 0; k < nr; ++k) {
                Range r;
                r.dimension = dim.name;
                r.relation = ds.relation;
                Path c = all[rng.below(all.size())];
                if (rng.u01() < 0.6) {
                    r.upper = c;  // whole subtree
                } else {
                    std::vector<Path> pref;
                    for (size_t t = 0; t < c.size(); ++t)
                        if (c[t] == '/') pref.push_back(c.substr(0, t));
                    pref.push_back(c);
                    r.lower = c;
                    r.upper = pref[rng.below(pref.size())];
                }
                ds.ranges.push_back(std::move(r));
            }
        }
        out.dims.push_back(std::move(ds));
    }
    return out;
}

ResourceSpace citation_space() {
    ResourceSpace space;
    space.name = "RS";
    Dimension topic;
    topic.name = "topic";
    topic.add("topic");
    topic.add("topic/CS", 0);
    topic.add("topic/MATH", 1);
    topic.add("topic/PHYS", 2);
    topic.add("topic/CS/DB", 0);
    topic.add("topic/CS/AI", 1);
    topic.add("topic/CS/OS", 2);
    topic.add("topic/CS/DB/INDEX", 0);
    topic.add("topic/CS/DB/XML", 1);
    topic.add("topic/CS/DB/QUERY", 2);
    topic.add("topic/CS/AI/ML", 0);
    topic.add("topic/CS/AI/NLP", 1);
    topic.add("topic/MATH/ALG", 0);
    topic.add("topic/MATH/STAT", 1);
    topic.relations.push_back({"subclass", false, -1});

    Dimension date;
    date.name = "date";
    date.add("date");
    int order = 0;
    for (int year = 2020; year <= 2024; ++year) {
        std::string ypath = "date/" + std::to_string(year);
        date.add(ypath, order++);
        for (int month = 1; month <= 12; ++month) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "%02d", month);
            date.add(ypath + "/" + buf, month - 1);
        }
    }
    date.relations.push_back({"subclass", false, -1});
    date.relations.push_back({"year", true, 1});
    date.relations.push_back({"month", true, 2});

    space.dims = {std::move(topic), std::move(date)};
    space.finalize();
    return space;
}

namespace {

LinkCountResult link_count_run(const LinkPolicy& policy, uint64_t seed, bool threaded) {
    Rng rng(seed);
    const int per_dim = 100;
    const int max_level = 14;
    std::vector<WeightVector> a(per_dim), b(per_dim);
    auto draw = [&](WeightVector& w) {
        w.rel_level = static_cast<double>(1 + rng.below(max_level)) / max_level;
        w.res_count = static_cast<double>(rng.below(1001));
    };
    for (WeightVector& w : a) draw(w);
    for (WeightVector& w : b) draw(w);
    std::vector<WeightVector> both = a;
    both.insert(both.end(), b.begin(), b.end());
    const Covariance2 cov = covariance_inverse(both);

    LinkCountResult out;
    out.pairs.resize(static_cast<size_t>(per_dim) * per_dim);
    const long long n = static_cast<long long>(out.pairs.size());
    auto fill = [&](long long i) {
        LinkPairRow& row = out.pairs[static_cast<size_t>(i)];
        row.distance = mahalanobis(a[static_cast<size_t>(i) / per_dim],
                                   b[static_cast<size_t>(i) % per_dim], cov);
        row.probability = link_probability(row.distance, policy);
    };
    // every slot is independent and the math is pure, so the two variants
    // fill the identical values
    if (threaded) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i) fill(i);
    } else {
        for (long long i = 0; i < n; ++i) fill(i);
    }
    for (LinkPairRow& row : out.pairs) {
        row.sampled = sample_bernoulli(row.probability, rng);
        out.expected += row.probability;
        out.sampled += row.sampled;
    }
    return out;
}

}  // namespace

LinkCountResult link_count_experiment(const LinkPolicy& policy, uint64_t seed) {
    return link_count_run(policy, seed, true);
}

LinkCountResult link_count_experiment_serial(const LinkPolicy& policy, uint64_t seed) {
    return link_count_run(policy, seed, false);
}

}  // namespace rsm
