#include "rsm/store.hpp"

#include <charconv>
#include <cstdlib>

#include <json.hpp>

#include "rsm/xml.hpp"

namespace rsm {

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size();
}

Store::Store(const ResourceSpace* space, const std::string& wal_path)
    : space_(space), wal_path_(wal_path) {
    std::ifstream in(wal_path);
    if (in) {
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            lineno++;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded())
                throw StoreError("corrupt log line " + std::to_string(lineno) + " in " +
                                 wal_path);
            Resource r;
            r.id = j.at("id").get<std::string>();
            for (const auto& c : j.at("coords")) r.point.coords.push_back(c.get<std::string>());
            if (j.contains("attrs"))
                for (const auto& [k, v] : j.at("attrs").items()) {
                    if (v.is_number())
                        r.attrs[k] = v.get<double>();
                    else
                        r.attrs[k] = v.get<std::string>();
                }
            if (j.contains("content")) r.content = j.at("content").get<std::string>();
            validate(r);
            apply(std::move(r));
        }
    }
    wal_.emplace(wal_path, std::ios::app);
    if (!*wal_) throw StoreError("cannot open log file " + wal_path);
}

void Store::validate(const Resource& r) const {
    if (r.id.empty()) throw StoreError("resource with empty id");
    if (by_id_.count(r.id)) throw StoreError("duplicate resource id '" + r.id + "'");
    if (r.point.coords.size() != space_->dims.size())
        throw StoreError("resource '" + r.id + "' does not cover every dimension");
    for (size_t i = 0; i < r.point.coords.size(); i++) space_->dims[i].at(r.point.coords[i]);
}

void Store::append_log(const Resource& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["coords"] = r.point.coords;
    if (!r.attrs.empty()) {
        nlohmann::json attrs = nlohmann::json::object();
        for (const auto& [k, v] : r.attrs) {
            if (std::holds_alternative<double>(v))
                attrs[k] = std::get<double>(v);
            else
                attrs[k] = std::get<std::string>(v);
        }
        j["attrs"] = std::move(attrs);
    }
    if (!r.content.empty()) j["content"] = r.content;
    *wal_ << j.dump() << '\n';
    wal_->flush();
    if (!*wal_) throw StoreError("write to log file " + wal_path_ + " failed");
}

void Store::apply(Resource r) {
    uint32_t idx = static_cast<uint32_t>(resources_.size());
    by_id_.emplace(r.id, idx);
    points_[r.point.key()].push_back(idx);
    for (const Path& c : r.point.coords) {
        postings_[StoreKey{StoreKey::Coordinate, c}.encoded()].push_back(idx);
        Path cur = c;
        for (;;) {
            counts_[StoreKey{StoreKey::Coordinate, cur}.encoded()]++;
            Path par = parent_path(cur);
            if (par.empty()) break;
            cur = par;
        }
    }
    resources_.push_back(std::move(r));
}

void Store::put(const Resource& r) {
    validate(r);
    if (wal_) append_log(r);
    apply(r);
}

const Resource* Store::get(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &resources_[it->second];
}

std::vector<const Resource*> Store::get_by_point(const Point& p) const {
    std::vector<const Resource*> out;
    auto it = points_.find(p.key());
    if (it == points_.end()) return out;
    for (uint32_t idx : it->second) out.push_back(&resources_[idx]);
    return out;
}

std::vector<std::string> Store::get_by_coordinate(const Path& c) const {
    std::vector<std::string> out;
    auto it = postings_.find(StoreKey{StoreKey::Coordinate, c}.encoded());
    if (it == postings_.end()) return out;
    for (uint32_t idx : it->second) out.push_back(resources_[idx].id);
    return out;
}

long long Store::count_under(int dim, const Path& c) const {
    if (dim < 0 || static_cast<size_t>(dim) >= space_->dims.size())
        throw StoreError("dimension index " + std::to_string(dim) + " out of range");
    space_->dims[dim].at(c);
    auto it = counts_.find(StoreKey{StoreKey::Coordinate, c}.encoded());
    return it == counts_.end() ? 0 : it->second;
}

const std::vector<uint32_t>* Store::point_bucket(const std::string& point_key) const {
    auto it = points_.find(point_key);
    return it == points_.end() ? nullptr : &it->second;
}

const std::vector<uint32_t>* Store::coordinate_bucket(const Path& c) const {
    auto it = postings_.find(StoreKey{StoreKey::Coordinate, c}.encoded());
    return it == postings_.end() ? nullptr : &it->second;
}

std::vector<std::string> Store::audit() const {
    std::vector<std::string> bad;
    auto contains = [](const std::vector<uint32_t>& v, uint32_t x) {
        for (uint32_t e : v)
            if (e == x) return true;
        return false;
    };
    for (uint32_t idx = 0; idx < resources_.size(); idx++) {
        const Resource& r = resources_[idx];
        auto pit = points_.find(r.point.key());
        if (pit == points_.end() || !contains(pit->second, idx))
            bad.push_back("resource '" + r.id + "' missing from its point bucket");
        for (const Path& c : r.point.coords) {
            auto cit = postings_.find(StoreKey{StoreKey::Coordinate, c}.encoded());
            if (cit == postings_.end() || !contains(cit->second, idx))
                bad.push_back("resource '" + r.id + "' missing from posting '" + c + "'");
        }
    }
    size_t bucket_total = 0;
    for (const auto& [key, v] : points_) bucket_total += v.size();
    if (bucket_total != resources_.size())
        bad.push_back("point buckets hold " + std::to_string(bucket_total) + " entries for " +
                      std::to_string(resources_.size()) + " resources");
    std::map<std::string, long long> expect;
    for (const Resource& r : resources_)
        for (const Path& c : r.point.coords) {
            Path cur = c;
            for (;;) {
                expect[StoreKey{StoreKey::Coordinate, cur}.encoded()]++;
                Path par = parent_path(cur);
                if (par.empty()) break;
                cur = par;
            }
        }
    if (expect != counts_) bad.push_back("cumulative counts disagree with a full recount");
    return bad;
}

std::vector<Resource> parse_corpus_xml(const ResourceSpace& space, const std::string& text) {
    XmlNode root = xml_parse(text);
    if (root.name != "Resources")
        throw StoreError("expected <Resources>, found <" + root.name + ">");
    std::vector<Resource> out;
    for (const XmlNode& rnode : root.children) {
        if (rnode.name != "Resource")
            throw StoreError("unexpected element <" + rnode.name + "> in <Resources>");
        Resource r;
        r.id = rnode.attr("id");
        std::vector<Path> coords(space.dims.size());
        std::vector<bool> seen(space.dims.size(), false);
        for (const XmlNode& child : rnode.children) {
            if (child.name == "At") {
                const std::string& dname = child.attr("dim");
                int di = space.dim_index(dname);
                if (di < 0)
                    throw StoreError("resource '" + r.id + "' uses unknown dimension '" + dname +
                                     "'");
                if (seen[di])
                    throw StoreError("resource '" + r.id + "' repeats dimension '" + dname +
                                     "'");
                seen[di] = true;
                coords[di] = child.attr("path");
            } else if (child.name == "Attr") {
                const std::string& name = child.attr("name");
                const std::string& value = child.attr("value");
                double num = 0;
                if (parse_number(value, num))
                    r.attrs[name] = num;
                else
                    r.attrs[name] = value;
            } else {
                throw StoreError("unexpected element <" + child.name + "> in resource '" + r.id +
                                 "'");
            }
        }
        for (size_t i = 0; i < space.dims.size(); i++)
            if (!seen[i])
                throw StoreError("resource '" + r.id + "' has no coordinate on dimension '" +
                                 space.dims[i].name + "'");
        r.point.coords = std::move(coords);
        out.push_back(std::move(r));
    }
    return out;
}

std::string serialize_corpus_xml(const ResourceSpace& space,
                                 const std::vector<Resource>& resources) {
    XmlNode root("Resources");
    for (const Resource& r : resources) {
        XmlNode rnode("Resource");
        rnode.add_attr("id", r.id);
        for (size_t i = 0; i < space.dims.size(); i++) {
            XmlNode at("At");
            at.add_attr("dim", space.dims[i].name);
            at.add_attr("path", r.point.coords[i]);
            rnode.add_child(std::move(at));
        }
        for (const auto& [name, value] : r.attrs) {
            XmlNode attr("Attr");
            attr.add_attr("name", name);
            attr.add_attr("value", std::holds_alternative<double>(value)
                                       ? format_number(std::get<double>(value))
                                       : std::get<std::string>(value));
            rnode.add_child(std::move(attr));
        }
        root.add_child(std::move(rnode));
    }
    return xml_write(root);
}

}  // namespace rsm
