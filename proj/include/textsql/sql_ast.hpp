#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "textsql/sql_lexer.hpp"

namespace textsql {

enum class Aggregator { None, Count, Sum, Min, Max, Avg };
enum class ArithOp { Add, Sub, Mul, Div };
enum class CompareOp { Eq, Ne, Lt, Gt, Le, Ge, Like, In, Between, IsNull, Exists };
enum class SetOp { Union, Intersect, Except };

const char* to_string(Aggregator agg) noexcept;
const char* to_string(ArithOp op) noexcept;
const char* to_string(CompareOp op) noexcept;
const char* to_string(SetOp op) noexcept;

struct Query;

struct Expr {
    enum class Kind {
        Column,     // [qualifier.]name
        Star,       // * or qualifier.*
        Number,
        String,
        Null,
        Aggregate,  // agg(args[0]) with optional DISTINCT
        Arith,      // args[0] op args[1]
        Negate,     // -args[0]
        Subquery,   // scalar subquery
        Compare,    // args[0] op ..., see CompareOp
        And,
        Or,
        Not,
    };

    Kind kind = Kind::Null;

    // Column / Star, as written.
    std::string qualifier;
    std::string name;
    // Resolved catalog names (empty when parsed without a catalog). For columns
    // of a derived table, `table` is empty and `derived_alias` names the source.
    std::string table;
    std::string column;
    std::string derived_alias;

    // Number lexeme, unquoted string contents, or the operator as written for
    // plain comparisons.
    std::string text;

    Aggregator agg = Aggregator::None;
    bool distinct = false;

    ArithOp arith = ArithOp::Add;
    CompareOp compare = CompareOp::Eq;
    /// NOT IN / NOT LIKE / NOT BETWEEN / IS NOT NULL / NOT EXISTS.
    bool negated = false;
    /// Written inside its own parentheses.
    bool parenthesized = false;

    /// Operands. Compare: args[0] is the left side (absent for EXISTS); IN with a
    /// value list keeps the list in args[1..].
    std::vector<std::shared_ptr<const Expr>> args;
    std::shared_ptr<const Query> subquery;

    Span span;

    bool is_boolean() const {
        return kind == Kind::Compare || kind == Kind::And || kind == Kind::Or || kind == Kind::Not;
    }
};

using ExprPtr = std::shared_ptr<const Expr>;

struct TableRef {
    /// Catalog table name (original case) or empty for a derived table.
    std::string table;
    std::string alias;
    std::shared_ptr<const Query> subquery;
    /// Attached with ',' rather than JOIN.
    bool comma_joined = false;
    /// ON condition attaching this source, if any.
    ExprPtr on;
};

struct OrderItem {
    ExprPtr expr;
    bool descending = false;
    bool explicit_direction = false;
};

/// Parsed query in the Spider dialect. Immutable once returned by the parser.
struct Query {
    bool distinct = false;
    std::vector<ExprPtr> select;
    std::vector<TableRef> from;
    ExprPtr where;
    std::vector<ExprPtr> group_by;
    ExprPtr having;
    std::vector<OrderItem> order_by;
    std::optional<long long> limit;
    std::optional<SetOp> set_op;
    std::shared_ptr<const Query> set_rhs;
};

using SqlAst = std::shared_ptr<const Query>;

/// Top-level ORDER BY present (on the leading SELECT, outside parentheses).
bool has_top_level_order_by(const Query& query);

/// Renders SQL text that re-parses to an equivalent query.
std::string render_sql(const Query& query);
std::string render_expr(const Expr& expr);

}  // namespace textsql
