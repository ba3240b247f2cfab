#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "textsql/sql_ast.hpp"

namespace textsql {

/// Orderless clause-wise form of a resolved query. Every entry is a canonical
/// string: identifiers lowercased as table.column, aliases replaced by the
/// tables they name, string literals lowercased in double quotes, numbers in
/// shortest numeric form, symmetric comparisons with sorted operands.
struct ClauseSet {
    bool distinct = false;
    std::vector<std::string> select;    // multiset
    std::vector<std::string> from;      // set
    std::vector<std::string> where;     // conjunct multiset, JOIN ... ON conjuncts folded in
    std::vector<std::string> group_by;  // set
    std::vector<std::string> having;    // conjunct multiset
    std::vector<std::string> order_by;  // ordered, "expr asc|desc"
    std::optional<long long> limit;
    std::optional<SetOp> set_op;
    std::shared_ptr<const ClauseSet> set_rhs;

    bool operator==(const ClauseSet& other) const;
};

ClauseSet normalize(const Query& ast);

/// Sorts the orderless parts. normalize already returns canonical sets;
/// canonical(canonical(c)) == canonical(c).
ClauseSet canonical(const ClauseSet& clauses);

/// One-line debug rendering, stable for canonical input.
std::string render(const ClauseSet& clauses);

}  // namespace textsql
