#pragma once

// Resource storage keyed two ways: by full point (exact location) and by
// each coordinate of the point (one posting list per dimension). Both live
// in a single ordered key space with a kind byte prefixing the payload, so
// point and coordinate entries never collide. An optional write-ahead log
// makes a store directory-persistent: the log is replayed on open and every
// put is appended and flushed before the in-memory maps change.
//
// Single writer, any number of concurrent readers.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rsm/space.hpp"

namespace rsm {

struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using AttrValue = std::variant<double, std::string>;

// Shortest decimal form that parses back to the same double; integers get
// no decimal point. Shared by the corpus format and CSV output.
std::string format_number(double v);
bool parse_number(const std::string& s, double& out);  // full-string parse

struct Resource {
    std::string id;
    Point point;
    std::map<std::string, AttrValue> attrs;
    std::string content;  // opaque reference; not part of the corpus format
};

struct StoreKey {
    enum Kind : char { Point = 'P', Coordinate = 'C' };
    Kind kind;
    std::string payload;  // point key or coordinate path
    std::string encoded() const { return std::string(1, static_cast<char>(kind)) + payload; }
};

class Store {
public:
    explicit Store(const ResourceSpace* space) : space_(space) {}
    Store(const ResourceSpace* space, const std::string& wal_path);

    void put(const Resource& r);

    size_t size() const { return resources_.size(); }
    const std::vector<Resource>& all() const { return resources_; }
    const Resource& at(size_t idx) const { return resources_[idx]; }
    const Resource* get(const std::string& id) const;

    std::vector<const Resource*> get_by_point(const Point& p) const;
    std::vector<std::string> get_by_coordinate(const Path& c) const;

    // Resources whose coordinate on dimension dim descends-or-equals c.
    // Maintained incrementally along the root chain, so it is O(log n).
    long long count_under(int dim, const Path& c) const;

    // Engine-facing views: indices into all(), in insertion order.
    const std::vector<uint32_t>* point_bucket(const std::string& point_key) const;
    const std::vector<uint32_t>* coordinate_bucket(const Path& c) const;
    const std::map<std::string, std::vector<uint32_t>>& point_map() const { return points_; }

    // Cross-checks point buckets, coordinate postings, and cumulative
    // counts against the resource list. Returns violations, empty if clean.
    std::vector<std::string> audit() const;

    const ResourceSpace& space() const { return *space_; }

private:
    void validate(const Resource& r) const;
    void apply(Resource r);
    void append_log(const Resource& r);

    const ResourceSpace* space_;
    std::vector<Resource> resources_;
    std::map<std::string, uint32_t> by_id_;
    std::map<std::string, std::vector<uint32_t>> points_;    // point key → indices
    std::map<std::string, std::vector<uint32_t>> postings_;  // StoreKey('C',path) → indices
    std::map<std::string, long long> counts_;                // StoreKey('C',path) → subtree count
    std::optional<std::ofstream> wal_;
    std::string wal_path_;
};

std::vector<Resource> parse_corpus_xml(const ResourceSpace& space, const std::string& text);
std::string serialize_corpus_xml(const ResourceSpace& space,
                                 const std::vector<Resource>& resources);

}  // namespace rsm
