#include <string>

#include "textsql/sql_ast.hpp"

namespace textsql {

namespace {

int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Or: return 1;
        case Expr::Kind::And: return 2;
        case Expr::Kind::Not: return 3;
        case Expr::Kind::Compare: return 4;
        case Expr::Kind::Arith:
            return e.arith == ArithOp::Add || e.arith == ArithOp::Sub ? 5 : 6;
        case Expr::Kind::Negate: return 7;
        default: return 8;
    }
}

std::string quote(const std::string& text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string child(const ExprPtr& e, int min_prec) {
    std::string text = render_expr(*e);
    if (e->parenthesized || precedence(*e) < min_prec) {
        // render_expr already wraps parenthesized nodes
        if (!e->parenthesized) text = "(" + text + ")";
    }
    return text;
}

std::string render_compare(const Expr& e) {
    const std::string neg = e.negated ? "NOT " : "";
    switch (e.compare) {
        case CompareOp::Exists:
            return neg + "EXISTS (" + render_sql(*e.subquery) + ")";
        case CompareOp::IsNull:
            return child(e.args[0], 5) + (e.negated ? " IS NOT NULL" : " IS NULL");
        case CompareOp::Between:
            return child(e.args[0], 5) + " " + neg + "BETWEEN " + child(e.args[1], 5) + " AND " + child(e.args[2], 5);
        case CompareOp::In: {
            std::string out = child(e.args[0], 5) + " " + neg + "IN (";
            if (e.subquery) {
                out += render_sql(*e.subquery);
            } else {
                for (std::size_t i = 1; i < e.args.size(); ++i) {
                    if (i > 1) out += ", ";
                    out += child(e.args[i], 5);
                }
            }
            return out + ")";
        }
        case CompareOp::Like:
            return child(e.args[0], 5) + " " + neg + "LIKE " + child(e.args[1], 5);
        default:
            return child(e.args[0], 5) + " " + to_string(e.compare) + " " + child(e.args[1], 5);
    }
}

std::string render_bare(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Column:
            return e.qualifier.empty() ? e.name : e.qualifier + "." + e.name;
        case Expr::Kind::Star:
            return e.qualifier.empty() ? "*" : e.qualifier + ".*";
        case Expr::Kind::Number: return e.text;
        case Expr::Kind::String: return quote(e.text);
        case Expr::Kind::Null: return "NULL";
        case Expr::Kind::Aggregate: {
            std::string agg = to_string(e.agg);
            for (char& c : agg) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return agg + "(" + (e.distinct ? "DISTINCT " : "") + render_expr(*e.args[0]) + ")";
        }
        case Expr::Kind::Arith: {
            const int p = precedence(e);
            return child(e.args[0], p) + " " + to_string(e.arith) + " " + child(e.args[1], p + 1);
        }
        case Expr::Kind::Negate: return "-" + child(e.args[0], 7);
        case Expr::Kind::Subquery: return "(" + render_sql(*e.subquery) + ")";
        case Expr::Kind::Compare: return render_compare(e);
        case Expr::Kind::And: return child(e.args[0], 2) + " AND " + child(e.args[1], 3);
        case Expr::Kind::Or: return child(e.args[0], 1) + " OR " + child(e.args[1], 2);
        case Expr::Kind::Not: return "NOT " + child(e.args[0], 3);
    }
    return {};
}

}  // namespace

std::string render_expr(const Expr& expr) {
    std::string text = render_bare(expr);
    return expr.parenthesized ? "(" + text + ")" : text;
}

std::string render_sql(const Query& q) {
    std::string out = "SELECT ";
    if (q.distinct) out += "DISTINCT ";
    for (std::size_t i = 0; i < q.select.size(); ++i) {
        if (i) out += ", ";
        out += render_expr(*q.select[i]);
    }
    out += " FROM ";
    for (std::size_t i = 0; i < q.from.size(); ++i) {
        const TableRef& ref = q.from[i];
        if (i) out += ref.comma_joined ? ", " : " JOIN ";
        out += ref.subquery ? "(" + render_sql(*ref.subquery) + ")" : ref.table;
        if (!ref.alias.empty()) out += " AS " + ref.alias;
        if (ref.on) out += " ON " + render_expr(*ref.on);
    }
    if (q.where) out += " WHERE " + render_expr(*q.where);
    if (!q.group_by.empty()) {
        out += " GROUP BY ";
        for (std::size_t i = 0; i < q.group_by.size(); ++i) {
            if (i) out += ", ";
            out += render_expr(*q.group_by[i]);
        }
    }
    if (q.having) out += " HAVING " + render_expr(*q.having);
    if (!q.order_by.empty()) {
        out += " ORDER BY ";
        for (std::size_t i = 0; i < q.order_by.size(); ++i) {
            if (i) out += ", ";
            out += render_expr(*q.order_by[i].expr);
            if (q.order_by[i].explicit_direction) out += q.order_by[i].descending ? " DESC" : " ASC";
        }
    }
    if (q.limit) out += " LIMIT " + std::to_string(*q.limit);
    if (q.set_op) out += std::string(" ") + to_string(*q.set_op) + " " + render_sql(*q.set_rhs);
    return out;
}

}  // namespace textsql
