#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "fixtures.hpp"
#include "rsm/store.hpp"

using namespace rsm;
using rsm::testing::paper_space;

namespace {

Resource make(const std::string& id, const Path& t, const Path& d) {
    Resource r;
    r.id = id;
    r.point.coords = {t, d};
    return r;
}

std::vector<Path> coordinate_pool(const Dimension& dim) {
    std::vector<Path> out;
    for (const auto& [p, c] : dim.coords) out.push_back(p);
    return out;
}

struct TempFile {
    std::string path;
    TempFile() {
        path = (std::filesystem::temp_directory_path() /
                ("store_test_" + std::to_string(std::random_device{}()) + ".log"))
                   .string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("put makes a resource reachable by point and by coordinates") {
    ResourceSpace space = paper_space();
    Store store(&space);
    store.put(make("r1", "topic/CS/DB/INDEX", "date/2020/Spring/01"));
    auto by_point = store.get_by_point(Point{{"topic/CS/DB/INDEX", "date/2020/Spring/01"}});
    REQUIRE(by_point.size() == 1);
    CHECK(by_point[0]->id == "r1");
    CHECK(store.get_by_coordinate("topic/CS/DB/INDEX") == std::vector<std::string>{"r1"});
    CHECK(store.get_by_coordinate("date/2020/Spring/01") == std::vector<std::string>{"r1"});
    // postings are exact, ancestors are the index's job
    CHECK(store.get_by_coordinate("topic/CS/DB").empty());
    CHECK(store.get("r1") != nullptr);
    CHECK(store.get("zzz") == nullptr);
}

TEST_CASE("duplicate and invalid puts fail") {
    ResourceSpace space = paper_space();
    Store store(&space);
    store.put(make("r1", "topic/CS", "date/2020"));
    CHECK_THROWS_WITH_AS(store.put(make("r1", "topic/CS", "date/2021")),
                         doctest::Contains("duplicate resource id"), StoreError);
    CHECK_THROWS_AS(store.put(make("r2", "topic/NOPE", "date/2020")), SpaceError);
    Resource half;
    half.id = "r3";
    half.point.coords = {"topic/CS"};
    CHECK_THROWS_WITH_AS(store.put(half), doctest::Contains("every dimension"), StoreError);
    CHECK(store.size() == 1);
}

TEST_CASE("counting oracles over random corpora") {
    ResourceSpace space = paper_space();
    Store store(&space);
    std::mt19937_64 eng(23);
    std::vector<Path> tpool = coordinate_pool(space.dim("topic"));
    std::vector<Path> dpool = coordinate_pool(space.dim("date"));
    for (int i = 0; i < 1000; i++)
        store.put(make("r" + std::to_string(i), tpool[eng() % tpool.size()],
                       dpool[eng() % dpool.size()]));

    size_t point_total = 0;
    for (const auto& [key, bucket] : store.point_map()) point_total += bucket.size();
    CHECK(point_total == 1000);

    size_t posting_total = 0;
    for (const Path& c : tpool) posting_total += store.get_by_coordinate(c).size();
    for (const Path& c : dpool) posting_total += store.get_by_coordinate(c).size();
    CHECK(posting_total == 2000);

    CHECK(store.audit().empty());
}

TEST_CASE("get_by_point basics") {
    ResourceSpace space = paper_space();
    Store store(&space);
    CHECK(store.get_by_point(Point{{"topic", "date"}}).empty());
    for (int i = 0; i < 3; i++)
        store.put(make("r" + std::to_string(i), "topic/CS/AI", "date/2021"));
    CHECK(store.get_by_point(Point{{"topic/CS/AI", "date/2021"}}).size() == 3);
}

TEST_CASE("count_under") {
    ResourceSpace space = paper_space();
    Store store(&space);
    for (int i = 0; i < 5; i++)
        store.put(make("leaf" + std::to_string(i), "topic/CS/AI/NLP", "date/2020/Spring/01"));
    store.put(make("mid", "topic/CS/DB", "date/2021"));
    store.put(make("root", "topic", "date"));

    CHECK(store.count_under(0, "topic/CS/AI/NLP") == 5);
    CHECK(store.count_under(0, "topic") == 7);
    CHECK(store.count_under(1, "date") == 7);

    SUBCASE("internal coordinates match a brute-force scan") {
        for (const Path& c : coordinate_pool(space.dim("topic"))) {
            long long expect = 0;
            for (const Resource& r : store.all())
                if (path_descends(r.point.coords[0], c)) expect++;
            CHECK(store.count_under(0, c) == expect);
        }
    }
    SUBCASE("monotone non-increasing along root paths") {
        const Dimension& topic = space.dim("topic");
        for (const Path& c : coordinate_pool(topic)) {
            Path cur = c;
            while (cur != topic.name) {
                Path par = parent_path(cur);
                CHECK(store.count_under(0, par) >= store.count_under(0, cur));
                cur = par;
            }
        }
    }
    CHECK_THROWS_AS(store.count_under(5, "topic"), StoreError);
    CHECK_THROWS_AS(store.count_under(0, "topic/NOPE"), SpaceError);
}

TEST_CASE("write-ahead log replays on open") {
    ResourceSpace space = paper_space();
    TempFile wal;
    {
        Store store(&space, wal.path);
        Resource r = make("a", "topic/CS/AI/NLP", "date/2020/Autumn/09");
        r.attrs["n"] = 4.0;
        r.attrs["s"] = std::string("hello, \"world\"");
        r.content = "ref:12345";
        store.put(r);
        store.put(make("b", "topic/MATH", "date/2024/Winter/12"));
    }
    {
        Store store(&space, wal.path);
        REQUIRE(store.size() == 2);
        const Resource* a = store.get("a");
        REQUIRE(a != nullptr);
        CHECK(std::get<double>(a->attrs.at("n")) == 4.0);
        CHECK(std::get<std::string>(a->attrs.at("s")) == "hello, \"world\"");
        CHECK(a->content == "ref:12345");
        CHECK(store.count_under(0, "topic") == 2);
        CHECK(store.audit().empty());
        store.put(make("c", "topic/CS", "date/2022"));
    }
    {
        Store store(&space, wal.path);
        CHECK(store.size() == 3);
        CHECK(store.get("c") != nullptr);
        // replayed duplicates are still rejected
        CHECK_THROWS_AS(store.put(make("a", "topic", "date")), StoreError);
    }
}

TEST_CASE("number formatting") {
    CHECK(format_number(42.0) == "42");
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(-3.25) == "-3.25");
    double v = 0;
    CHECK(parse_number("42", v));
    CHECK(v == 42.0);
    CHECK(parse_number("-1e3", v));
    CHECK(v == -1000.0);
    CHECK_FALSE(parse_number("12abc", v));
    CHECK_FALSE(parse_number("", v));
    CHECK_FALSE(parse_number("one", v));
}

TEST_CASE("corpus xml round trip") {
    ResourceSpace space = paper_space();
    std::vector<Resource> corpus;
    Resource a = make("p1", "topic/CS/DB/INDEX", "date/2020/Spring/01");
    a.attrs["paper_citation_count"] = 42.0;
    a.attrs["paper_title"] = std::string("On B-trees & <stuff>");
    corpus.push_back(a);
    corpus.push_back(make("p2", "topic/CS/AI", "date/2021"));

    std::string once = serialize_corpus_xml(space, corpus);
    std::vector<Resource> back = parse_corpus_xml(space, once);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "p1");
    CHECK(back[0].point.coords[0] == "topic/CS/DB/INDEX");
    CHECK(std::get<double>(back[0].attrs.at("paper_citation_count")) == 42.0);
    CHECK(std::get<std::string>(back[0].attrs.at("paper_title")) == "On B-trees & <stuff>");
    CHECK(serialize_corpus_xml(space, back) == once);

    CHECK_THROWS_WITH_AS(
        parse_corpus_xml(space, "<Resources><Resource id=\"x\">"
                                "<At dim=\"topic\" path=\"topic\"/>"
                                "</Resource></Resources>"),
        doctest::Contains("no coordinate on dimension"), StoreError);
    CHECK_THROWS_WITH_AS(
        parse_corpus_xml(space, "<Resources><Resource id=\"x\">"
                                "<At dim=\"bogus\" path=\"topic\"/>"
                                "<At dim=\"date\" path=\"date\"/>"
                                "</Resource></Resources>"),
        doctest::Contains("unknown dimension"), StoreError);
}
