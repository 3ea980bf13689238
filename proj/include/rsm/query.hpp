// SQL-like subspace query language: tokenizer, recursive-descent parser,
// and the canonical pretty-printer.
//
// The grammar (keywords case-insensitive, identifiers case-sensitive):
//
//   query        := SELECT name (, name)* fromchain ;
//   fromchain    := (FROM op)* FROM name
//   op           := top_resource | top_point | subspace
//   top_resource := top_resource ( topk = INT , measure = name )
//   top_point    := top_point ( topk = INT , measure = name )
//   subspace     := subspace ( dimspec (, dimspec)* )
//   dimspec      := [ dimension = name , range = ranges , rel = name ,
//                     agg = BOOL (, vardef)* ,? ]
//   ranges       := range ((UNION | the union sign) range)*
//   range        := [ bound , PATH ]
//   bound        := none | PATH
//   vardef       := name = name ( name )
//
// A trailing comma before the closing bracket of a dimspec is tolerated;
// published query texts routinely carry one. Exactly one subspace operator
// must be present and innermost; top_resource, when combined with top_point,
// comes first (it applies last). Other operator orders are rejected.
//
// Variable definitions split by their function name: SUM, COUNT, MAX, MIN,
// AVG define point variables (folded over a point's aggregated resources);
// any other function names a per-resource variable and is validated by the
// executor, not the parser.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsm/space.hpp"

namespace rsm {

class QueryError : public std::runtime_error {
public:
    QueryError(const std::string& msg, size_t offset) : std::runtime_error(msg), offset(offset) {}
    size_t offset;  // byte position; errors point at the end of the offender
};

enum class TokenKind {
    Word,     // identifier, contextual keyword, or bare coordinate root
    Number,   // digits only
    PathTok,  // slash-separated coordinate path
    LBracket,
    RBracket,
    LParen,
    RParen,
    Equals,
    Comma,
    Semicolon,
    Union,  // the UNION keyword or the two-byte union sign
    End
};

struct QueryToken {
    TokenKind kind;
    std::string text;
    size_t begin = 0;
    size_t end = 0;
};

std::vector<QueryToken> tokenize(const std::string& text);

enum class AggFunc { Sum, Count, Max, Min, Avg };
const char* agg_func_name(AggFunc f);
// Case-insensitive; nullopt when the name is not an aggregation function.
std::optional<AggFunc> parse_agg_func(const std::string& name);

struct PointVar {
    std::string name;
    AggFunc func = AggFunc::Sum;
    std::string attr;
    bool operator==(const PointVar&) const = default;
};

struct ResourceVar {
    std::string name;
    std::string func;  // uppercased; executor validates
    std::string attr;
    bool operator==(const ResourceVar&) const = default;
};

struct DimSpec {
    std::string dimension;
    std::vector<Range> ranges;  // union of ranges; each carries dimension+relation
    std::string relation;
    bool agg = false;
    std::vector<PointVar> point_vars;
    std::vector<ResourceVar> resource_vars;
    bool operator==(const DimSpec&) const = default;
};

struct SubspaceSpec {
    std::vector<DimSpec> dims;
    bool operator==(const SubspaceSpec&) const = default;
};

struct TopSpec {
    long long topk = 1;
    std::string measure;
    bool operator==(const TopSpec&) const = default;
};

struct QueryAst {
    std::vector<std::string> select;
    std::optional<TopSpec> top_resource;  // applied last
    std::optional<TopSpec> top_point;
    SubspaceSpec subspace;
    std::string source;
    bool operator==(const QueryAst&) const = default;
};

QueryAst parse_query(const std::string& text);

// Canonical single-line form; parse_query(pretty_print(ast)) == ast for any
// ast this module can produce.
std::string pretty_print(const QueryAst& ast);

}  // namespace rsm
