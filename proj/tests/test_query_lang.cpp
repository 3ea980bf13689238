#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rsm/query.hpp"

using namespace rsm;

namespace {

// The worked query from the engine's motivating example, spacing and the
// trailing comma kept as published.
const char* kCitationQuery = R"(SELECT  topic, paper_title,
        paper_citation_count
	FROM top_resource(topk=10,
            measure=paper_citation_count)
	FROM top_point(topk=10,
            measure=point_citation_count)
	FROM subspace([dimension =topic,
			range=[none, topic/CS/DB],
			rel=subclass,
			agg=TRUE,
			point_citation_count =
				SUM(paper_citation_count)
			],
	[dimension = date,
		range=[date/2020, date/2024],
		rel=year,
			agg= FALSE,
			])
	FROM RS;)";

// Range-union variant: two ranges joined by the union sign, mixed-case
// booleans, no top_point.
const char* kUnionQuery =
    "SELECT topic, paper_title, relevant_paper, most_citated_paper\n"
    "FROM top_resource(topk=10, measure=paper_citation_count)\n"
    "FROM subspace([dimension =topic,\n"
    "range=[none, topic/CS/DB]\n"
    "\xe2\x88\xaa[none, topic/CS/AI] ,\n"
    "rel=subclass,\n"
    "agg=False,\n"
    "],\n"
    "[dimension = date,\n"
    "range=[date/2020, date/2024],\n"
    "rel=year,\n"
    "agg= FALSE,\n"
    "]) FROM RS;";

// Both top operators with distinct k.
const char* kTop3Query =
    "SELECT topic, paper_title\n"
    "FROM top_resource(topk=10, measure=paper_citation_count)\n"
    "FROM top_point(topk=3, measure=point_citation_count)\n"
    "FROM subspace([dimension =topic,\n"
    "range=[none, topic/CS/DB],\n"
    "rel=subclass,\n"
    "agg=TRUE,\n"
    "point_citation_count = SUM(paper_citation_count)\n"
    "],\n"
    "[dimension = date,\n"
    "range=[date/2020, date/2024],\n"
    "rel=year,\n"
    "agg= FALSE,\n"
    "]) FROM RS;";

}  // namespace

TEST_CASE("tokenizer splits keywords, idents, paths, and punctuation") {
    auto toks = tokenize("FROM RS;");
    REQUIRE(toks.size() == 4);
    CHECK(toks[0].kind == TokenKind::Word);
    CHECK(toks[0].text == "FROM");
    CHECK(toks[1].text == "RS");
    CHECK(toks[2].kind == TokenKind::Semicolon);
    CHECK(toks[3].kind == TokenKind::End);

    toks = tokenize("range=[none, topic/CS/DB]");
    REQUIRE(toks.size() == 8);
    CHECK(toks[0].kind == TokenKind::Word);
    CHECK(toks[1].kind == TokenKind::Equals);
    CHECK(toks[2].kind == TokenKind::LBracket);
    CHECK(toks[3].text == "none");
    CHECK(toks[4].kind == TokenKind::Comma);
    CHECK(toks[5].kind == TokenKind::PathTok);
    CHECK(toks[5].text == "topic/CS/DB");
    CHECK(toks[6].kind == TokenKind::RBracket);

    toks = tokenize("topk=10 \xe2\x88\xaa UNION union");
    CHECK(toks[2].kind == TokenKind::Number);
    CHECK(toks[3].kind == TokenKind::Union);
    CHECK(toks[4].kind == TokenKind::Union);
    CHECK(toks[5].kind == TokenKind::Union);

    CHECK_THROWS_WITH_AS(tokenize("SELECT @x"), doctest::Contains("line 1, column 8"),
                         QueryError);
    try {
        tokenize("ok\n  @");
    } catch (const QueryError& e) {
        CHECK(e.offset == 5);
        CHECK(std::string(e.what()).find("line 2, column 3") != std::string::npos);
    }
}

TEST_CASE("the citation-ranking example parses into the documented shape") {
    QueryAst ast = parse_query(kCitationQuery);
    CHECK(ast.select == std::vector<std::string>{"topic", "paper_title", "paper_citation_count"});
    REQUIRE(ast.top_resource.has_value());
    CHECK(*ast.top_resource == TopSpec{10, "paper_citation_count"});
    REQUIRE(ast.top_point.has_value());
    CHECK(*ast.top_point == TopSpec{10, "point_citation_count"});
    CHECK(ast.source == "RS");

    REQUIRE(ast.subspace.dims.size() == 2);
    const DimSpec& t = ast.subspace.dims[0];
    CHECK(t.dimension == "topic");
    CHECK(t.relation == "subclass");
    CHECK(t.agg);
    REQUIRE(t.ranges.size() == 1);
    CHECK(t.ranges[0] == Range{"topic", std::nullopt, "topic/CS/DB", "subclass"});
    REQUIRE(t.point_vars.size() == 1);
    CHECK(t.point_vars[0] ==
          PointVar{"point_citation_count", AggFunc::Sum, "paper_citation_count"});
    CHECK(t.resource_vars.empty());

    const DimSpec& d = ast.subspace.dims[1];
    CHECK(d.dimension == "date");
    CHECK_FALSE(d.agg);
    REQUIRE(d.ranges.size() == 1);
    CHECK(d.ranges[0] == Range{"date", "date/2020", "date/2024", "year"});
    CHECK(d.point_vars.empty());
}

TEST_CASE("union ranges and mixed-case booleans parse") {
    QueryAst ast = parse_query(kUnionQuery);
    CHECK(ast.select.size() == 4);
    CHECK(ast.select[3] == "most_citated_paper");
    CHECK(ast.top_resource.has_value());
    CHECK_FALSE(ast.top_point.has_value());
    const DimSpec& t = ast.subspace.dims[0];
    REQUIRE(t.ranges.size() == 2);
    CHECK(t.ranges[0].upper == "topic/CS/DB");
    CHECK(t.ranges[1].upper == "topic/CS/AI");
    CHECK(t.ranges[1].lower == std::nullopt);
    CHECK_FALSE(t.agg);

    QueryAst top3 = parse_query(kTop3Query);
    CHECK(top3.top_resource->topk == 10);
    CHECK(top3.top_point->topk == 3);
    CHECK(top3.subspace.dims[0].agg);
}

TEST_CASE("keywords are case-insensitive, identifiers are not") {
    QueryAst ast = parse_query(
        "select A from SUBSPACE([DIMENSION=d, RANGE=[NONE, d], REL=r, AGG=false]) from rs;");
    CHECK(ast.select == std::vector<std::string>{"A"});
    CHECK(ast.source == "rs");
    CHECK(ast.subspace.dims[0].dimension == "d");
    CHECK_FALSE(ast.subspace.dims[0].agg);
}

TEST_CASE("pretty_print emits the canonical single-line form") {
    QueryAst ast;
    ast.select = {"x"};
    DimSpec d;
    d.dimension = "d";
    d.relation = "r";
    d.ranges = {Range{"d", std::nullopt, "d", "r"}};
    ast.subspace.dims = {d};
    ast.source = "RS";
    CHECK(pretty_print(ast) ==
          "SELECT x FROM subspace([dimension=d, range=[none, d], rel=r, agg=FALSE]) FROM RS;");
    CHECK(parse_query(pretty_print(ast)) == ast);
}

TEST_CASE("published queries survive a print/parse round trip") {
    for (const char* text : {kCitationQuery, kUnionQuery, kTop3Query}) {
        QueryAst ast = parse_query(text);
        std::string canon = pretty_print(ast);
        QueryAst back = parse_query(canon);
        CHECK(back == ast);
        CHECK(pretty_print(back) == canon);  // fixed point after one pass
    }
    // unions canonicalize to the UNION keyword
    CHECK(pretty_print(parse_query(kUnionQuery))
              .find("[none, topic/CS/DB] UNION [none, topic/CS/AI]") != std::string::npos);
}

TEST_CASE("parse rejects malformed and misordered queries") {
    CHECK_THROWS_WITH_AS(parse_query("SELECT a FROM RS;"), doctest::Contains("no subspace"),
                         QueryError);
    CHECK_THROWS_WITH_AS(
        parse_query("SELECT a FROM subspace([dimension=d, range=[none, d], rel=r, agg=FALSE], "
                    "[dimension=d, range=[none, d], rel=r, agg=FALSE]) FROM RS;"),
        doctest::Contains("duplicate dimension"), QueryError);
    CHECK_THROWS_WITH_AS(
        parse_query("SELECT a FROM top_point(topk=0, measure=m) FROM "
                    "subspace([dimension=d, range=[none, d], rel=r, agg=FALSE]) FROM RS;"),
        doctest::Contains("at least 1"), QueryError);
    CHECK_THROWS_WITH_AS(
        parse_query("SELECT a FROM top_point(topk=1, measure=m) FROM "
                    "top_resource(topk=1, measure=m) FROM "
                    "subspace([dimension=d, range=[none, d], rel=r, agg=FALSE]) FROM RS;"),
        doctest::Contains("top_resource must come before"), QueryError);
    CHECK_THROWS_WITH_AS(
        parse_query("SELECT a FROM top_point(topk=1, measure=m) FROM "
                    "top_point(topk=1, measure=m) FROM "
                    "subspace([dimension=d, range=[none, d], rel=r, agg=FALSE]) FROM RS;"),
        doctest::Contains("duplicate top_point"), QueryError);
    CHECK_THROWS_WITH_AS(
        parse_query("SELECT a FROM subspace([dimension=d, range=[none, d], rel=r, agg=FALSE]) "
                    "FROM subspace([dimension=e, range=[none, e], rel=r, agg=FALSE]) FROM RS;"),
        doctest::Contains("duplicate subspace"), QueryError);
    CHECK_THROWS_WITH_AS(
        parse_query("SELECT a FROM subspace([dimension=d, range=[none, d], rel=r, agg=FALSE]) "
                    "FROM top_point(topk=1, measure=m) FROM RS;"),
        doctest::Contains("cannot follow the subspace"), QueryError);
    CHECK_THROWS_WITH_AS(
        parse_query("SELECT a FROM subspace([dimension=d, range=[none, d], rel=r, agg=maybe]) "
                    "FROM RS;"),
        doctest::Contains("TRUE or FALSE"), QueryError);
    CHECK_THROWS_WITH_AS(
        parse_query("SELECT a FROM subspace([dimension=d, range=[none, d], rel=r, agg=FALSE]) "
                    "FROM RS; trailing"),
        doctest::Contains("end of input"), QueryError);
}

TEST_CASE("error positions never precede a truncation cut") {
    // ASCII forms only: cutting a multi-byte union sign would blame the cut
    // itself, which is exactly what this property cannot distinguish.
    std::string union_ascii = kUnionQuery;
    size_t u = union_ascii.find("\xe2\x88\xaa");
    union_ascii.replace(u, 3, " UNION ");
    const std::string fixtures[] = {
        std::string(kCitationQuery), union_ascii, std::string(kTop3Query),
        "SELECT x FROM subspace([dimension=d, range=[none, d], rel=r, agg=FALSE]) FROM RS;"};
    for (const std::string& text : fixtures) {
        REQUIRE_NOTHROW(parse_query(text));
        for (size_t k = 1; k < text.size(); ++k) {
            bool threw = false;
            try {
                parse_query(text.substr(0, k));
            } catch (const QueryError& e) {
                threw = true;
                CHECK(e.offset + 1 >= k);
            }
            CHECK(threw);
        }
    }
}

namespace {

// Random but grammatically valid ASTs for the round-trip property. Names get
// a letter prefix so none collides with a keyword or lexes as a number.
struct AstGen {
    std::mt19937_64 eng;
    explicit AstGen(uint64_t seed) : eng(seed) {}

    size_t below(size_t n) { return static_cast<size_t>(eng() % n); }

    std::string name() {
        static const char* pool = "abcdefghijklmnopqrstuvwxyz0123456789_";
        std::string s = "n";
        size_t len = 1 + below(6);
        for (size_t i = 0; i < len; ++i) s += pool[below(37)];
        return s;
    }

    std::string path() {
        std::string p = name();
        size_t segs = below(3);
        for (size_t i = 0; i < segs; ++i) p += "/" + name();
        return p;
    }

    TopSpec top() { return TopSpec{1 + static_cast<long long>(below(999)), name()}; }

    QueryAst ast() {
        QueryAst a;
        size_t nsel = 1 + below(4);
        for (size_t i = 0; i < nsel; ++i) a.select.push_back(name());
        if (below(2)) a.top_resource = top();
        if (below(2)) a.top_point = top();
        size_t ndims = 1 + below(3);
        for (size_t i = 0; i < ndims; ++i) {
            DimSpec d;
            d.dimension = name() + std::to_string(i);  // distinct per query
            d.relation = name();
            size_t nranges = 1 + below(3);
            for (size_t j = 0; j < nranges; ++j) {
                Range r;
                r.dimension = d.dimension;
                r.relation = d.relation;
                if (below(2)) r.lower = path();
                r.upper = path();
                d.ranges.push_back(std::move(r));
            }
            d.agg = below(2) == 0;
            size_t npv = below(3);
            for (size_t j = 0; j < npv; ++j)
                d.point_vars.push_back({name(), static_cast<AggFunc>(below(5)), name()});
            size_t nrv = below(2);
            for (size_t j = 0; j < nrv; ++j) d.resource_vars.push_back({name(), "VAL", name()});
            a.subspace.dims.push_back(std::move(d));
        }
        a.source = name();
        return a;
    }
};

}  // namespace

TEST_CASE("generated ASTs round-trip through print and parse exactly") {
    AstGen gen(20240817);
    for (int i = 0; i < 1000; ++i) {
        QueryAst ast = gen.ast();
        QueryAst back = parse_query(pretty_print(ast));
        REQUIRE(back == ast);
    }
}
