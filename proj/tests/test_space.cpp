#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "rsm/space.hpp"

using namespace rsm;
using rsm::testing::paper_space;

TEST_CASE("path helpers") {
    CHECK(path_segments("topic/CS/DB") == std::vector<std::string>{"topic", "CS", "DB"});
    CHECK(path_segments("topic") == std::vector<std::string>{"topic"});
    CHECK(parent_path("topic/CS/DB") == "topic/CS");
    CHECK(parent_path("topic") == "");
    CHECK(path_level("topic") == 0);
    CHECK(path_level("date/2020/Spring/01") == 3);
    CHECK(path_descends("topic/CS/DB", "topic/CS"));
    CHECK(path_descends("topic/CS", "topic/CS"));
    CHECK_FALSE(path_descends("topic/CS", "topic/CS/DB"));
    CHECK_FALSE(path_descends("topic/CSX", "topic/CS"));
}

TEST_CASE("fixture schema shape") {
    ResourceSpace space = paper_space();
    REQUIRE(space.dims.size() == 2);
    const Dimension& topic = space.dim("topic");
    const Dimension& date = space.dim("date");
    CHECK(topic.at("topic/CS").children ==
          std::vector<Path>{"topic/CS/AI", "topic/CS/DB", "topic/CS/IR"});
    CHECK(topic.at("topic/CS/DB").children ==
          std::vector<Path>{"topic/CS/DB/INDEX", "topic/CS/DB/MODEL", "topic/CS/DB/RL"});
    CHECK(date.at("date").children ==
          std::vector<Path>{"date/2020", "date/2021", "date/2022", "date/2023", "date/2024"});
    CHECK(date.at("date/2020").children ==
          std::vector<Path>{"date/2020/Spring", "date/2020/Summer", "date/2020/Autumn",
                            "date/2020/Winter"});
    CHECK(date.max_level == 3);
    CHECK(space.max_level() == 3);
}

TEST_CASE("schema xml round trip") {
    ResourceSpace space = paper_space();
    std::string once = serialize_space_xml(space);
    ResourceSpace back = parse_space_xml(once);
    CHECK(serialize_space_xml(back) == once);
    CHECK(back.dim("topic").has("topic/CS/DB/INDEX"));
    CHECK(back.dim("date").find_relation("year")->level_order);
    CHECK(back.dim("date").find_relation("year")->level == 1);
    CHECK(back.dim("date").at("date/2021").order == 1);
}

TEST_CASE("schema parsing errors") {
    CHECK_THROWS_WITH_AS(
        parse_space_xml("<ResourceSpace name=\"S\"><Dimension name=\"topic\">"
                        "<Coordinate name=\"CS\"/><Coordinate name=\"CS\"/>"
                        "</Dimension></ResourceSpace>"),
        doctest::Contains("duplicate coordinate path"), SpaceError);
    // level-order relation over siblings without order attributes
    CHECK_THROWS_WITH_AS(
        parse_space_xml("<ResourceSpace name=\"S\"><Dimension name=\"d\">"
                        "<Relation name=\"year\" kind=\"level-order\" level=\"1\"/>"
                        "<Coordinate name=\"a\"/><Coordinate name=\"b\"/>"
                        "</Dimension></ResourceSpace>"),
        doctest::Contains("order attribute"), SpaceError);
    CHECK_THROWS_AS(parse_space_xml("<Wrong/>"), SpaceError);
    // minimal schema: one dimension, only its root
    ResourceSpace tiny =
        parse_space_xml("<ResourceSpace name=\"S\"><Dimension name=\"d\"/></ResourceSpace>");
    CHECK(tiny.dims.size() == 1);
    CHECK(tiny.dims[0].coords.size() == 1);
}

TEST_CASE("descendant-or-equal") {
    ResourceSpace space = paper_space();
    const Dimension& topic = space.dim("topic");
    const Dimension& date = space.dim("date");
    CHECK(is_descendant(topic, "topic/CS/DB/INDEX", "topic/CS/DB"));
    CHECK(is_descendant(topic, "topic/CS/DB", "topic/CS/DB"));
    CHECK_FALSE(is_descendant(date, "date/2020/Spring/01", "date/2021"));
    CHECK_THROWS_AS(is_descendant(topic, "topic/NOPE", "topic"), SpaceError);
}

TEST_CASE("reachability matrices") {
    ResourceSpace space = paper_space();
    const Dimension& date = space.dim("date");

    SUBCASE("frozen checks") {
        const ReachabilityMatrix& m = space.reach[1];
        CHECK(m.get("date/2020/Spring", "date/2020"));
        CHECK_FALSE(m.get("date/2020", "date/2021"));
        CHECK(m.get("date", "date"));
    }

    SUBCASE("single-root dimension") {
        Dimension d;
        d.name = "solo";
        d.add("solo");
        ReachabilityMatrix m = build_reachability(d);
        CHECK(m.n == 1);
        CHECK(m.get(0, 0));
    }

    SUBCASE("parallel equals serial equals prefix oracle on the fixture") {
        for (const Dimension& d : space.dims) {
            ReachabilityMatrix par = build_reachability(d);
            ReachabilityMatrix ser = build_reachability_serial(d);
            REQUIRE(par.paths == ser.paths);
            CHECK(par.bits == ser.bits);
            for (int a = 0; a < par.n; a++)
                for (int b = 0; b < par.n; b++)
                    CHECK(par.get(a, b) == path_descends(par.paths[a], par.paths[b]));
        }
    }

    SUBCASE("random trees agree with the DFS oracle") {
        std::mt19937_64 eng(7);
        for (int round = 0; round < 10; round++) {
            Dimension d;
            d.name = "r";
            d.add("r");
            std::vector<Path> pool = {"r"};
            int n = 20 + static_cast<int>(eng() % 180);
            for (int i = 0; i < n; i++) {
                Path parent = pool[eng() % pool.size()];
                Path p = parent + "/n" + std::to_string(i);
                d.add(p);
                pool.push_back(p);
            }
            ResourceSpace s;
            s.name = "S";
            s.dims.push_back(d);
            s.finalize();
            ReachabilityMatrix par = build_reachability(s.dims[0]);
            ReachabilityMatrix ser = build_reachability_serial(s.dims[0]);
            REQUIRE(par.bits == ser.bits);
            // DFS oracle: collect each coordinate's subtree by walking children
            for (int b = 0; b < ser.n; b++) {
                std::set<Path> seen;
                std::vector<Path> stack = {ser.paths[b]};
                while (!stack.empty()) {
                    Path cur = stack.back();
                    stack.pop_back();
                    seen.insert(cur);
                    for (const Path& ch : s.dims[0].at(cur).children) stack.push_back(ch);
                }
                for (int a = 0; a < ser.n; a++)
                    CHECK(ser.get(a, b) == (seen.count(ser.paths[a]) != 0));
            }
        }
    }
    (void)date;
}

TEST_CASE("levels and sibling order") {
    ResourceSpace space = paper_space();
    const Dimension& topic = space.dim("topic");
    const Dimension& date = space.dim("date");
    CHECK(level_of(topic, "topic") == 0);
    CHECK(level_of(date, "date/2020/Spring/01") == 3);
    CHECK(ordered_siblings(date, "date/2020") ==
          std::vector<Path>{"date/2020", "date/2021", "date/2022", "date/2023", "date/2024"});
    CHECK(ordered_siblings(topic, "topic") == std::vector<Path>{"topic"});
    CHECK_THROWS_AS(level_of(topic, "topic/NOPE"), SpaceError);
    CHECK(position_tuple(date, "date/2021/Spring/01") == std::vector<int>{1, 0, 0});
    CHECK(position_tuple(date, "date/2020/Winter/10") == std::vector<int>{0, 3, 0});
}

TEST_CASE("resolve_range") {
    ResourceSpace space = paper_space();

    SUBCASE("whole subtree under the upper bound") {
        Range r{"topic", std::nullopt, "topic/CS/DB", "subclass"};
        CHECK(resolve_range(space, r) ==
              std::vector<Path>{"topic/CS/DB", "topic/CS/DB/INDEX", "topic/CS/DB/MODEL",
                                "topic/CS/DB/RL"});
    }
    SUBCASE("year interval") {
        Range r{"date", Path("date/2020"), "date/2021", "year"};
        CHECK(resolve_range(space, r) == std::vector<Path>{"date/2020", "date/2021"});
    }
    SUBCASE("degenerate range") {
        Range r{"topic", Path("topic/CS"), "topic/CS", "subclass"};
        CHECK(resolve_range(space, r) == std::vector<Path>{"topic/CS"});
    }
    SUBCASE("hierarchical bounds give the chain between them") {
        Range r{"topic", Path("topic/CS/DB/INDEX"), "topic/CS", "subclass"};
        CHECK(resolve_range(space, r) ==
              std::vector<Path>{"topic/CS", "topic/CS/DB", "topic/CS/DB/INDEX"});
    }
    SUBCASE("month interval spans seasons and years") {
        Range r{"date", Path("date/2020/Winter/11"), "date/2021/Spring/02", "month"};
        CHECK(resolve_range(space, r) ==
              std::vector<Path>{"date/2020/Winter/11", "date/2020/Winter/12",
                                "date/2021/Spring/01", "date/2021/Spring/02"});
    }
    SUBCASE("errors") {
        CHECK_THROWS_WITH_AS(
            resolve_range(space, Range{"topic", Path("topic/CS/AI"), "topic/CS/DB", "subclass"}),
            doctest::Contains("not on one root path"), SpaceError);
        CHECK_THROWS_WITH_AS(
            resolve_range(space, Range{"date", Path("date/2022"), "date/2020", "year"}),
            doctest::Contains("out of order"), SpaceError);
        CHECK_THROWS_WITH_AS(
            resolve_range(space, Range{"date", Path("date/2020/Spring"), "date/2020", "year"}),
            doctest::Contains("different levels"), SpaceError);
        CHECK_THROWS_WITH_AS(
            resolve_range(space, Range{"date", Path("date/2020/Spring"), "date/2020/Summer",
                                       "year"}),
            doctest::Contains("orders level"), SpaceError);
        CHECK_THROWS_AS(resolve_range(space, Range{"topic", std::nullopt, "topic", "nope"}),
                        SpaceError);
        CHECK_THROWS_AS(resolve_range(space, Range{"nope", std::nullopt, "topic", ""}),
                        SpaceError);
    }
    SUBCASE("scan oracle over many random ranges") {
        std::mt19937_64 eng(11);
        const Dimension& topic = space.dim("topic");
        std::vector<Path> all;
        for (const auto& [p, c] : topic.coords) all.push_back(p);
        for (int round = 0; round < 200; round++) {
            Path u = all[eng() % all.size()];
            if (eng() % 2) {
                Range r{"topic", std::nullopt, u, "subclass"};
                std::vector<Path> expect;
                for (const Path& c : all)
                    if (path_descends(c, u)) expect.push_back(c);
                std::sort(expect.begin(), expect.end());
                CHECK(resolve_range(space, r) == expect);
            } else {
                Path l = all[eng() % all.size()];
                if (!path_descends(l, u)) continue;
                Range r{"topic", l, u, "subclass"};
                std::vector<Path> expect;
                for (const Path& c : all)
                    if (path_descends(l, c) && path_descends(c, u)) expect.push_back(c);
                std::sort(expect.begin(), expect.end());
                CHECK(resolve_range(space, r) == expect);
            }
        }
    }
    SUBCASE("level-order slice matches the sibling-walk oracle") {
        // oracle: pre-order walk collects level-3 coordinates left to right
        const Dimension& date = space.dim("date");
        std::vector<Path> months;
        for (const Path& p : subtree(date, "date"))
            if (path_level(p) == 3) months.push_back(p);
        std::mt19937_64 eng(13);
        for (int round = 0; round < 100; round++) {
            size_t i = eng() % months.size(), j = eng() % months.size();
            if (i > j) std::swap(i, j);
            Range r{"date", months[i], months[j], "month"};
            std::vector<Path> expect(months.begin() + i, months.begin() + j + 1);
            std::sort(expect.begin(), expect.end());
            CHECK(resolve_range(space, r) == expect);
        }
    }
}

TEST_CASE("point subsumption") {
    ResourceSpace space = paper_space();
    Point s{{"topic/CS/DB/INDEX", "date/2020"}};
    Point p{{"topic/CS/DB", "date/2020"}};
    Point q{{"topic/CS/DB/INDEX", "date/2021"}};
    CHECK(point_subsumes(space, s, p));
    CHECK(point_subsumes(space, p, p));
    CHECK_FALSE(point_subsumes(space, q, p));
    CHECK_THROWS_AS(point_subsumes(space, Point{{"topic"}}, p), SpaceError);

    SUBCASE("partial order properties on sampled points") {
        std::mt19937_64 eng(17);
        std::vector<Path> tpool, dpool;
        for (const auto& [c, _] : space.dim("topic").coords) tpool.push_back(c);
        for (const auto& [c, _] : space.dim("date").coords) dpool.push_back(c);
        std::vector<Point> pts;
        for (int i = 0; i < 12; i++)
            pts.push_back(Point{{tpool[eng() % tpool.size()], dpool[eng() % dpool.size()]}});
        for (const Point& a : pts) {
            CHECK(point_subsumes(space, a, a));
            for (const Point& b : pts) {
                if (point_subsumes(space, a, b) && point_subsumes(space, b, a)) CHECK(a == b);
                for (const Point& c : pts)
                    if (point_subsumes(space, a, b) && point_subsumes(space, b, c))
                        CHECK(point_subsumes(space, a, c));
            }
        }
    }
}

TEST_CASE("point keys") {
    ResourceSpace space = paper_space();
    Point p{{"topic/CS/AI/NLP", "date/2020/Autumn/09"}};
    CHECK(p.key() == "<topic/CS/AI/NLP, date/2020/Autumn/09>");
    CHECK(parse_point_key(space, p.key()) == p);
    CHECK_THROWS_AS(parse_point_key(space, "topic, date"), SpaceError);
    CHECK_THROWS_AS(parse_point_key(space, "<topic>"), SpaceError);
    CHECK_THROWS_AS(parse_point_key(space, "<topic/NOPE, date>"), SpaceError);
}
