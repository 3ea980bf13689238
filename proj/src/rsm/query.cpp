#include "rsm/query.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace rsm {

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

bool word_is(const QueryToken& t, const char* kw) {
    return t.kind == TokenKind::Word && upper(t.text) == kw;
}

std::string line_column(const std::string& text, size_t offset) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

const char* agg_func_name(AggFunc f) {
    switch (f) {
        case AggFunc::Sum: return "SUM";
        case AggFunc::Count: return "COUNT";
        case AggFunc::Max: return "MAX";
        case AggFunc::Min: return "MIN";
        case AggFunc::Avg: return "AVG";
    }
    return "?";
}

std::optional<AggFunc> parse_agg_func(const std::string& name) {
    std::string u = upper(name);
    if (u == "SUM") return AggFunc::Sum;
    if (u == "COUNT") return AggFunc::Count;
    if (u == "MAX") return AggFunc::Max;
    if (u == "MIN") return AggFunc::Min;
    if (u == "AVG") return AggFunc::Avg;
    return std::nullopt;
}

std::vector<QueryToken> tokenize(const std::string& text) {
    std::vector<QueryToken> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            i++;
            continue;
        }
        size_t begin = i;
        switch (c) {
            case '[': out.push_back({TokenKind::LBracket, "[", begin, ++i}); continue;
            case ']': out.push_back({TokenKind::RBracket, "]", begin, ++i}); continue;
            case '(': out.push_back({TokenKind::LParen, "(", begin, ++i}); continue;
            case ')': out.push_back({TokenKind::RParen, ")", begin, ++i}); continue;
            case '=': out.push_back({TokenKind::Equals, "=", begin, ++i}); continue;
            case ',': out.push_back({TokenKind::Comma, ",", begin, ++i}); continue;
            case ';': out.push_back({TokenKind::Semicolon, ";", begin, ++i}); continue;
        }
        if (text.compare(i, 3, "\xe2\x88\xaa") == 0) {  // the union sign
            i += 3;
            out.push_back({TokenKind::Union, "UNION", begin, i});
            continue;
        }
        if (word_char(c)) {
            bool digits = true, slashed = false;
            while (i < n && (word_char(text[i]) ||
                             (text[i] == '/' && i + 1 < n && word_char(text[i + 1])))) {
                if (text[i] == '/') slashed = true;
                if (!std::isdigit(static_cast<unsigned char>(text[i]))) digits = false;
                i++;
            }
            std::string w = text.substr(begin, i - begin);
            TokenKind kind = slashed ? TokenKind::PathTok
                             : digits ? TokenKind::Number
                                      : TokenKind::Word;
            if (kind == TokenKind::Word && upper(w) == "UNION") kind = TokenKind::Union;
            out.push_back({kind, std::move(w), begin, i});
            continue;
        }
        throw QueryError("illegal character at " + line_column(text, i), i);
    }
    out.push_back({TokenKind::End, "", n, n});
    return out;
}

namespace {

// Recursive-descent parser. Every error points at the end of the token that
// broke the parse, so truncating a valid query always reports at or past the
// cut.
class Parser {
public:
    Parser(const std::string& text) : text_(text), toks_(tokenize(text)) {}

    QueryAst parse() {
        QueryAst ast;
        expect_keyword("SELECT");
        ast.select.push_back(expect_name("output name"));
        while (at(TokenKind::Comma)) {
            next();
            ast.select.push_back(expect_name("output name"));
        }

        bool have_subspace = false;
        while (true) {
            expect_keyword("FROM");
            const QueryToken& t = peek();
            if (word_is(t, "TOP_RESOURCE")) {
                if (have_subspace) fail(t, "operators cannot follow the subspace operator");
                if (ast.top_point) fail(t, "top_resource must come before top_point");
                if (ast.top_resource) fail(t, "duplicate top_resource operator");
                next();
                ast.top_resource = parse_top();
            } else if (word_is(t, "TOP_POINT")) {
                if (have_subspace) fail(t, "operators cannot follow the subspace operator");
                if (ast.top_point) fail(t, "duplicate top_point operator");
                next();
                ast.top_point = parse_top();
            } else if (word_is(t, "SUBSPACE")) {
                if (have_subspace) fail(t, "duplicate subspace operator");
                next();
                ast.subspace = parse_subspace();
                have_subspace = true;
            } else {
                break;  // the source name ends the chain
            }
        }
        if (!have_subspace) fail(peek(), "query has no subspace operator");
        ast.source = expect_name("source name");
        expect(TokenKind::Semicolon, "';'");
        if (!at(TokenKind::End)) fail(peek(), "expected end of input");
        return ast;
    }

private:
    const QueryToken& peek() const { return toks_[pos_]; }
    bool at(TokenKind k) const { return toks_[pos_].kind == k; }
    const QueryToken& next() { return toks_[pos_++]; }

    [[noreturn]] void fail(const QueryToken& t, const std::string& what) {
        std::string got = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
        throw QueryError(what + ", got " + got + " at " + line_column(text_, t.end), t.end);
    }

    const QueryToken& expect(TokenKind k, const char* what) {
        if (!at(k)) fail(peek(), std::string("expected ") + what);
        return next();
    }

    void expect_keyword(const char* kw) {
        if (!word_is(peek(), kw)) fail(peek(), std::string("expected ") + kw);
        next();
    }

    std::string expect_name(const char* what) {
        if (!at(TokenKind::Word)) fail(peek(), std::string("expected ") + what);
        return next().text;
    }

    // Coordinate paths appear wherever range bounds do; a bare root lexes as
    // a word and a purely numeric segment as a number, so all three pass.
    std::string expect_path(const char* what) {
        if (!at(TokenKind::Word) && !at(TokenKind::PathTok) && !at(TokenKind::Number))
            fail(peek(), std::string("expected ") + what);
        return next().text;
    }

    void expect_param(const char* name) {
        if (!word_is(peek(), name)) fail(peek(), std::string("expected parameter ") + name);
        next();
        expect(TokenKind::Equals, "'='");
    }

    TopSpec parse_top() {
        TopSpec spec;
        expect(TokenKind::LParen, "'('");
        expect_param("TOPK");
        const QueryToken& num = expect(TokenKind::Number, "an integer");
        if (num.text.size() > 9) fail(num, "topk out of range");
        spec.topk = std::stoll(num.text);
        if (spec.topk < 1) fail(num, "topk must be at least 1");
        expect(TokenKind::Comma, "','");
        expect_param("MEASURE");
        spec.measure = expect_name("measure name");
        expect(TokenKind::RParen, "')'");
        return spec;
    }

    SubspaceSpec parse_subspace() {
        SubspaceSpec spec;
        expect(TokenKind::LParen, "'('");
        spec.dims.push_back(parse_dimspec());
        while (at(TokenKind::Comma)) {
            next();
            spec.dims.push_back(parse_dimspec());
        }
        expect(TokenKind::RParen, "')'");
        std::set<std::string> seen;
        for (const DimSpec& d : spec.dims)
            if (!seen.insert(d.dimension).second)
                fail(peek(), "duplicate dimension " + d.dimension);
        return spec;
    }

    DimSpec parse_dimspec() {
        DimSpec d;
        expect(TokenKind::LBracket, "'['");
        expect_param("DIMENSION");
        d.dimension = expect_name("dimension name");
        expect(TokenKind::Comma, "','");
        expect_param("RANGE");
        d.ranges.push_back(parse_range());
        while (at(TokenKind::Union)) {
            next();
            d.ranges.push_back(parse_range());
        }
        expect(TokenKind::Comma, "','");
        expect_param("REL");
        d.relation = expect_name("relation name");
        expect(TokenKind::Comma, "','");
        expect_param("AGG");
        const QueryToken& b = peek();
        if (word_is(b, "TRUE"))
            d.agg = true;
        else if (word_is(b, "FALSE"))
            d.agg = false;
        else
            fail(b, "expected TRUE or FALSE");
        next();
        while (at(TokenKind::Comma)) {
            next();
            if (at(TokenKind::RBracket)) break;  // tolerated trailing comma
            std::string name = expect_name("variable name");
            expect(TokenKind::Equals, "'='");
            std::string func = expect_name("function name");
            expect(TokenKind::LParen, "'('");
            std::string attr = expect_name("attribute name");
            expect(TokenKind::RParen, "')'");
            if (auto f = parse_agg_func(func))
                d.point_vars.push_back({std::move(name), *f, std::move(attr)});
            else
                d.resource_vars.push_back({std::move(name), upper(func), std::move(attr)});
        }
        expect(TokenKind::RBracket, "']'");
        for (Range& r : d.ranges) {
            r.dimension = d.dimension;
            r.relation = d.relation;
        }
        return d;
    }

    Range parse_range() {
        Range r;
        expect(TokenKind::LBracket, "'['");
        const QueryToken& lo = peek();
        if (word_is(lo, "NONE"))
            next();
        else
            r.lower = expect_path("a path or none");
        expect(TokenKind::Comma, "','");
        r.upper = expect_path("a path");
        expect(TokenKind::RBracket, "']'");
        return r;
    }

    const std::string& text_;
    std::vector<QueryToken> toks_;
    size_t pos_ = 0;
};

}  // namespace

QueryAst parse_query(const std::string& text) { return Parser(text).parse(); }

std::string pretty_print(const QueryAst& ast) {
    std::string out = "SELECT ";
    for (size_t i = 0; i < ast.select.size(); ++i) {
        if (i) out += ", ";
        out += ast.select[i];
    }
    auto top = [&](const char* name, const TopSpec& t) {
        out += " FROM ";
        out += name;
        out += "(topk=" + std::to_string(t.topk) + ", measure=" + t.measure + ")";
    };
    if (ast.top_resource) top("top_resource", *ast.top_resource);
    if (ast.top_point) top("top_point", *ast.top_point);
    out += " FROM subspace(";
    for (size_t i = 0; i < ast.subspace.dims.size(); ++i) {
        const DimSpec& d = ast.subspace.dims[i];
        if (i) out += ", ";
        out += "[dimension=" + d.dimension + ", range=";
        for (size_t j = 0; j < d.ranges.size(); ++j) {
            if (j) out += " UNION ";
            const Range& r = d.ranges[j];
            out += "[" + (r.lower ? *r.lower : std::string("none")) + ", " + r.upper + "]";
        }
        out += ", rel=" + d.relation + ", agg=" + (d.agg ? "TRUE" : "FALSE");
        for (const PointVar& v : d.point_vars)
            out += ", " + v.name + "=" + agg_func_name(v.func) + "(" + v.attr + ")";
        for (const ResourceVar& v : d.resource_vars)
            out += ", " + v.name + "=" + v.func + "(" + v.attr + ")";
        out += "]";
    }
    out += ") FROM " + ast.source + ";";
    return out;
}

}  // namespace rsm
