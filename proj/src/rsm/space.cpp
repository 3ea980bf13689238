#include "rsm/space.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "rsm/xml.hpp"

namespace rsm {

std::vector<std::string> path_segments(const Path& p) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= p.size()) {
        size_t slash = p.find('/', start);
        if (slash == std::string::npos) {
            out.push_back(p.substr(start));
            break;
        }
        out.push_back(p.substr(start, slash - start));
        start = slash + 1;
    }
    return out;
}

Path parent_path(const Path& p) {
    size_t slash = p.rfind('/');
    return slash == std::string::npos ? Path() : p.substr(0, slash);
}

int path_level(const Path& p) {
    return static_cast<int>(std::count(p.begin(), p.end(), '/'));
}

const Coordinate& Dimension::at(const Path& p) const {
    auto it = coords.find(p);
    if (it == coords.end())
        throw SpaceError("unknown coordinate '" + p + "' in dimension '" + name + "'");
    return it->second;
}

const Relation* Dimension::find_relation(const std::string& rel) const {
    for (const Relation& r : relations)
        if (r.name == rel) return &r;
    return nullptr;
}

void Dimension::add(const Path& p, int order) {
    if (coords.count(p)) throw SpaceError("duplicate coordinate path '" + p + "'");
    Coordinate c;
    c.path = p;
    c.parent = parent_path(p);
    c.level = path_level(p);
    c.order = order;
    if (!c.parent.empty() && !coords.count(c.parent))
        throw SpaceError("coordinate '" + p + "' added before its parent");
    coords.emplace(p, std::move(c));
}

int ResourceSpace::dim_index(const std::string& dname) const {
    for (size_t i = 0; i < dims.size(); i++)
        if (dims[i].name == dname) return static_cast<int>(i);
    return -1;
}

const Dimension& ResourceSpace::dim(const std::string& dname) const {
    int i = dim_index(dname);
    if (i < 0) throw SpaceError("unknown dimension '" + dname + "'");
    return dims[i];
}

int ResourceSpace::max_level() const {
    int m = 0;
    for (const Dimension& d : dims) m = std::max(m, d.max_level);
    return m;
}

namespace {

void validate_segment(const std::string& seg, const Path& full) {
    if (seg.empty()) throw SpaceError("empty segment in coordinate path '" + full + "'");
    for (char c : seg) {
        if (c == '<' || c == '>' || c == ',' || c == '*' ||
            std::isspace(static_cast<unsigned char>(c)))
            throw SpaceError("coordinate segment '" + seg + "' contains a reserved character");
    }
}

void finalize_dimension(Dimension& d) {
    if (d.name.empty()) throw SpaceError("dimension with empty name");
    if (!d.coords.count(d.name))
        throw SpaceError("dimension '" + d.name + "' is missing its root coordinate");
    d.max_level = 0;
    for (auto& [path, c] : d.coords) {
        for (const std::string& seg : path_segments(path)) validate_segment(seg, path);
        if (path_segments(path).front() != d.name)
            throw SpaceError("coordinate '" + path + "' does not start with dimension '" +
                             d.name + "'");
        c.level = path_level(path);
        d.max_level = std::max(d.max_level, c.level);
        c.children.clear();
        if (c.parent.empty()) {
            if (path != d.name)
                throw SpaceError("coordinate '" + path + "' has no parent in dimension '" +
                                 d.name + "'");
        } else if (!d.coords.count(c.parent)) {
            throw SpaceError("coordinate '" + path + "' has no parent in dimension '" + d.name +
                             "'");
        }
    }
    for (const auto& [path, c] : d.coords)
        if (!c.parent.empty()) d.coords.at(c.parent).children.push_back(path);
    for (auto& [path, c] : d.coords) {
        auto rank = [&](const Path& ch) {
            const Coordinate& cc = d.coords.at(ch);
            return std::tuple<int, int, const Path&>(cc.order < 0 ? 1 : 0, cc.order, ch);
        };
        std::sort(c.children.begin(), c.children.end(),
                  [&](const Path& a, const Path& b) { return rank(a) < rank(b); });
        std::set<int> seen;
        for (const Path& ch : c.children) {
            int o = d.coords.at(ch).order;
            if (o >= 0 && !seen.insert(o).second)
                throw SpaceError("duplicate sibling order " + std::to_string(o) + " under '" +
                                 path + "'");
        }
    }
    for (const Relation& r : d.relations) {
        if (r.name.empty()) throw SpaceError("relation with empty name in '" + d.name + "'");
        if (!r.level_order) continue;
        if (r.level < 1)
            throw SpaceError("level-order relation '" + r.name + "' needs a level of 1 or more");
        for (const auto& [path, c] : d.coords) {
            if (c.level != r.level) continue;
            if (c.order < 0)
                throw SpaceError("coordinate '" + path + "' lacks an order attribute required "
                                 "by level-order relation '" + r.name + "'");
        }
    }
}

}  // namespace

void ResourceSpace::finalize() {
    if (name.empty()) throw SpaceError("space with empty name");
    std::set<std::string> names;
    for (Dimension& d : dims) {
        if (!names.insert(d.name).second)
            throw SpaceError("duplicate dimension name '" + d.name + "'");
        finalize_dimension(d);
    }
    reach.clear();
    for (const Dimension& d : dims) reach.push_back(build_reachability(d));
}

bool ReachabilityMatrix::get(const Path& a, const Path& b) const {
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end())
        throw SpaceError("unknown coordinate '" + a + "' in dimension '" + dimension + "'");
    if (ib == index.end())
        throw SpaceError("unknown coordinate '" + b + "' in dimension '" + dimension + "'");
    return get(ia->second, ib->second);
}

namespace {

ReachabilityMatrix matrix_shell(const Dimension& dim) {
    ReachabilityMatrix m;
    m.dimension = dim.name;
    m.paths.reserve(dim.coords.size());
    for (const auto& [path, c] : dim.coords) m.paths.push_back(path);
    m.n = static_cast<int>(m.paths.size());
    for (int i = 0; i < m.n; i++) m.index.emplace(m.paths[i], i);
    m.words = (m.n + 63) / 64;
    m.bits.assign(static_cast<size_t>(m.n) * m.words, 0);
    return m;
}

}  // namespace

ReachabilityMatrix build_reachability(const Dimension& dim) {
    ReachabilityMatrix m = matrix_shell(dim);
    // Row a holds a's ancestor-or-self chain; rows are independent.
#pragma omp parallel for schedule(static)
    for (int a = 0; a < m.n; a++) {
        uint64_t* row = m.bits.data() + static_cast<size_t>(a) * m.words;
        Path cur = m.paths[a];
        for (;;) {
            int b = m.index.at(cur);
            row[b / 64] |= uint64_t(1) << (b % 64);
            if (cur == dim.name) break;
            cur = parent_path(cur);
        }
    }
    return m;
}

ReachabilityMatrix build_reachability_serial(const Dimension& dim) {
    ReachabilityMatrix m = matrix_shell(dim);
    // Column b holds b's subtree, found by walking down from b.
    for (int b = 0; b < m.n; b++) {
        std::vector<Path> stack = {m.paths[b]};
        while (!stack.empty()) {
            Path cur = stack.back();
            stack.pop_back();
            int a = m.index.at(cur);
            m.bits[static_cast<size_t>(a) * m.words + b / 64] |= uint64_t(1) << (b % 64);
            const Coordinate& c = dim.at(cur);
            stack.insert(stack.end(), c.children.begin(), c.children.end());
        }
    }
    return m;
}

std::string Point::key() const {
    std::string out = "<";
    for (size_t i = 0; i < coords.size(); i++) {
        if (i) out += ", ";
        out += coords[i];
    }
    out += ">";
    return out;
}

bool is_descendant(const Dimension& dim, const Path& a, const Path& b) {
    dim.at(a);
    dim.at(b);
    return path_descends(a, b);
}

int level_of(const Dimension& dim, const Path& c) { return dim.at(c).level; }

std::vector<Path> ordered_siblings(const Dimension& dim, const Path& c) {
    const Coordinate& node = dim.at(c);
    if (node.parent.empty()) return {c};
    return dim.at(node.parent).children;
}

std::vector<Path> subtree(const Dimension& dim, const Path& c) {
    std::vector<Path> out;
    std::vector<Path> stack = {dim.at(c).path};
    while (!stack.empty()) {
        Path cur = stack.back();
        stack.pop_back();
        out.push_back(cur);
        const std::vector<Path>& ch = dim.at(cur).children;
        // push reversed so the walk visits children left to right
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

std::vector<int> position_tuple(const Dimension& dim, const Path& c) {
    std::vector<int> out;
    Path cur = dim.at(c).path;
    while (cur != dim.name) {
        Path par = parent_path(cur);
        const std::vector<Path>& sib = dim.at(par).children;
        auto it = std::find(sib.begin(), sib.end(), cur);
        out.push_back(static_cast<int>(it - sib.begin()));
        cur = par;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<Path> resolve_range(const ResourceSpace& space, const Range& r) {
    const Dimension& d = space.dim(r.dimension);
    const Relation* rel = nullptr;
    if (!r.relation.empty()) {
        rel = d.find_relation(r.relation);
        if (!rel)
            throw SpaceError("unknown relation '" + r.relation + "' on dimension '" + d.name +
                             "'");
    }
    d.at(r.upper);
    std::vector<Path> out;
    if (rel && rel->level_order) {
        if (!r.lower)
            throw SpaceError("level-order range on '" + d.name + "' needs both bounds");
        d.at(*r.lower);
        int lv = level_of(d, *r.lower);
        if (lv != level_of(d, r.upper))
            throw SpaceError("level-order range bounds '" + *r.lower + "' and '" + r.upper +
                             "' are at different levels");
        if (rel->level >= 0 && lv != rel->level)
            throw SpaceError("range bounds are at level " + std::to_string(lv) +
                             " but relation '" + rel->name + "' orders level " +
                             std::to_string(rel->level));
        std::vector<int> lo = position_tuple(d, *r.lower);
        std::vector<int> hi = position_tuple(d, r.upper);
        if (lo > hi)
            throw SpaceError("range bounds '" + *r.lower + "' and '" + r.upper +
                             "' are out of order");
        for (const auto& [path, c] : d.coords) {
            if (c.level != lv) continue;
            std::vector<int> pos = position_tuple(d, path);
            if (lo <= pos && pos <= hi) out.push_back(path);
        }
        return out;  // map iteration is already path-sorted
    }
    if (!r.lower) {
        out = subtree(d, r.upper);
    } else {
        d.at(*r.lower);
        if (!path_descends(*r.lower, r.upper))
            throw SpaceError("range bounds '" + *r.lower + "' and '" + r.upper +
                             "' are not on one root path");
        Path cur = *r.lower;
        for (;;) {
            out.push_back(cur);
            if (cur == r.upper) break;
            cur = parent_path(cur);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool point_subsumes(const ResourceSpace& space, const Point& s, const Point& p) {
    if (s.coords.size() != space.dims.size() || p.coords.size() != space.dims.size())
        throw SpaceError("point does not cover every dimension of '" + space.name + "'");
    for (size_t i = 0; i < space.dims.size(); i++) {
        space.dims[i].at(s.coords[i]);
        space.dims[i].at(p.coords[i]);
        if (!path_descends(s.coords[i], p.coords[i])) return false;
    }
    return true;
}

Point parse_point_key(const ResourceSpace& space, const std::string& key) {
    if (key.size() < 2 || key.front() != '<' || key.back() != '>')
        throw SpaceError("malformed point key '" + key + "'");
    Point p;
    std::string body = key.substr(1, key.size() - 2);
    size_t start = 0;
    while (start <= body.size()) {
        size_t sep = body.find(", ", start);
        if (sep == std::string::npos) {
            p.coords.push_back(body.substr(start));
            break;
        }
        p.coords.push_back(body.substr(start, sep - start));
        start = sep + 2;
    }
    if (p.coords.size() != space.dims.size())
        throw SpaceError("point key '" + key + "' does not cover every dimension");
    for (size_t i = 0; i < p.coords.size(); i++) space.dims[i].at(p.coords[i]);
    return p;
}

namespace {

void parse_coordinates(Dimension& d, const XmlNode& parent, const Path& base) {
    for (const XmlNode& child : parent.children) {
        if (child.name == "Relation") {
            Relation rel;
            rel.name = child.attr("name");
            std::string kind = child.attr("kind");
            if (kind == "hierarchical") {
                rel.level_order = false;
            } else if (kind == "level-order") {
                rel.level_order = true;
                rel.level = std::stoi(child.attr("level"));
            } else {
                throw SpaceError("unknown relation kind '" + kind + "'");
            }
            d.relations.push_back(rel);
            continue;
        }
        if (child.name != "Coordinate")
            throw SpaceError("unexpected element <" + child.name + "> in dimension '" + d.name +
                             "'");
        Path p = base + "/" + child.attr("name");
        int order = -1;
        if (const std::string* o = child.find_attr("order")) order = std::stoi(*o);
        d.add(p, order);
        parse_coordinates(d, child, p);
    }
}

void write_coordinates(const Dimension& d, const Path& at, XmlNode& out) {
    for (const Path& ch : d.at(at).children) {
        const Coordinate& c = d.at(ch);
        XmlNode node("Coordinate");
        node.add_attr("name", path_segments(ch).back());
        if (c.order >= 0) node.add_attr("order", std::to_string(c.order));
        write_coordinates(d, ch, node);
        out.add_child(std::move(node));
    }
}

}  // namespace

ResourceSpace parse_space_xml(const std::string& text) {
    XmlNode root = xml_parse(text);
    if (root.name != "ResourceSpace")
        throw SpaceError("expected <ResourceSpace>, found <" + root.name + ">");
    ResourceSpace space;
    space.name = root.attr("name");
    for (const XmlNode& dnode : root.children) {
        if (dnode.name != "Dimension")
            throw SpaceError("unexpected element <" + dnode.name + "> in <ResourceSpace>");
        Dimension d;
        d.name = dnode.attr("name");
        d.add(d.name);
        parse_coordinates(d, dnode, d.name);
        space.dims.push_back(std::move(d));
    }
    space.finalize();
    return space;
}

std::string serialize_space_xml(const ResourceSpace& space) {
    XmlNode root("ResourceSpace");
    root.add_attr("name", space.name);
    for (const Dimension& d : space.dims) {
        XmlNode dnode("Dimension");
        dnode.add_attr("name", d.name);
        for (const Relation& r : d.relations) {
            XmlNode rel("Relation");
            rel.add_attr("name", r.name);
            rel.add_attr("kind", r.level_order ? "level-order" : "hierarchical");
            if (r.level_order) rel.add_attr("level", std::to_string(r.level));
            dnode.add_child(std::move(rel));
        }
        write_coordinates(d, d.name, dnode);
        root.add_child(std::move(dnode));
    }
    return xml_write(root);
}

}  // namespace rsm
