#include "textsql/clause_set.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "text_util.hpp"

namespace textsql {

using detail::to_lower;

namespace {

std::string canon(const Expr& e);

std::string canon_number(const std::string& lexeme) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
    if (ec != std::errc() || ptr != lexeme.data() + lexeme.size()) return lexeme;
    if (std::nearbyint(value) == value && std::fabs(value) < 1e15) {
        return std::to_string(static_cast<long long>(value));
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", value);
    return buf;
}

std::string canon_string(const std::string& text) {
    std::string out = "\"";
    for (char c : to_lower(text)) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

std::string column_owner(const Expr& e) {
    if (!e.derived_alias.empty()) return "derived";
    if (!e.table.empty()) return to_lower(e.table);
    return to_lower(e.qualifier);
}

void flatten(const Expr& e, Expr::Kind kind, std::vector<std::string>& out) {
    if (e.kind == kind) {
        for (const auto& arg : e.args) flatten(*arg, kind, out);
    } else {
        out.push_back(canon(e));
    }
}

std::string join_sorted(std::vector<std::string> parts, const char* sep) {
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

CompareOp mirror(CompareOp op) {
    switch (op) {
        case CompareOp::Lt: return CompareOp::Gt;
        case CompareOp::Gt: return CompareOp::Lt;
        case CompareOp::Le: return CompareOp::Ge;
        case CompareOp::Ge: return CompareOp::Le;
        default: return op;
    }
}

std::string canon_subquery(const Query& q) { return "(" + render(normalize(q)) + ")"; }

std::string canon_compare(const Expr& e) {
    const std::string neg = e.negated ? "not " : "";
    switch (e.compare) {
        case CompareOp::Exists:
            return neg + "exists " + canon_subquery(*e.subquery);
        case CompareOp::IsNull:
            return canon(*e.args[0]) + (e.negated ? " is not null" : " is null");
        case CompareOp::Between:
            return canon(*e.args[0]) + " " + neg + "between " + canon(*e.args[1]) + " and " + canon(*e.args[2]);
        case CompareOp::In: {
            if (e.subquery) return canon(*e.args[0]) + " " + neg + "in " + canon_subquery(*e.subquery);
            std::vector<std::string> items;
            for (std::size_t i = 1; i < e.args.size(); ++i) items.push_back(canon(*e.args[i]));
            return canon(*e.args[0]) + " " + neg + "in (" + join_sorted(items, ", ") + ")";
        }
        case CompareOp::Like:
            return canon(*e.args[0]) + " " + neg + "like " + canon(*e.args[1]);
        default: {
            std::string lhs = canon(*e.args[0]);
            std::string rhs = canon(*e.args[1]);
            CompareOp op = e.compare;
            if (rhs < lhs) {
                std::swap(lhs, rhs);
                op = mirror(op);
            }
            return lhs + " " + to_string(op) + " " + rhs;
        }
    }
}

std::string canon(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Column: return column_owner(e) + "." + to_lower(e.column.empty() ? e.name : e.column);
        case Expr::Kind::Star: return e.qualifier.empty() ? "*" : column_owner(e) + ".*";
        case Expr::Kind::Number: return canon_number(e.text);
        case Expr::Kind::String: return canon_string(e.text);
        case Expr::Kind::Null: return "null";
        case Expr::Kind::Aggregate:
            return std::string(to_string(e.agg)) + "(" + (e.distinct ? "distinct " : "") + canon(*e.args[0]) + ")";
        case Expr::Kind::Arith:
            return "(" + canon(*e.args[0]) + " " + to_string(e.arith) + " " + canon(*e.args[1]) + ")";
        case Expr::Kind::Negate: {
            const Expr& operand = *e.args[0];
            if (operand.kind == Expr::Kind::Number) return canon_number("-" + operand.text);
            return "-" + canon(operand);
        }
        case Expr::Kind::Subquery: return canon_subquery(*e.subquery);
        case Expr::Kind::Compare: return canon_compare(e);
        case Expr::Kind::And: {
            std::vector<std::string> parts;
            flatten(e, Expr::Kind::And, parts);
            return "(" + join_sorted(parts, " and ") + ")";
        }
        case Expr::Kind::Or: {
            std::vector<std::string> parts;
            flatten(e, Expr::Kind::Or, parts);
            return "(" + join_sorted(parts, " or ") + ")";
        }
        case Expr::Kind::Not: return "not " + canon(*e.args[0]);
    }
    return {};
}

void conjuncts(const ExprPtr& e, std::vector<std::string>& out) {
    if (e) flatten(*e, Expr::Kind::And, out);
}

void sort_multiset(std::vector<std::string>& v) { std::sort(v.begin(), v.end()); }

void sort_set(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

bool ClauseSet::operator==(const ClauseSet& o) const {
    if (distinct != o.distinct || select != o.select || from != o.from || where != o.where ||
        group_by != o.group_by || having != o.having || order_by != o.order_by || limit != o.limit ||
        set_op != o.set_op) {
        return false;
    }
    if (!set_rhs || !o.set_rhs) return !set_rhs && !o.set_rhs;
    return *set_rhs == *o.set_rhs;
}

ClauseSet canonical(const ClauseSet& clauses) {
    ClauseSet out = clauses;
    sort_multiset(out.select);
    sort_set(out.from);
    sort_multiset(out.where);
    sort_set(out.group_by);
    sort_multiset(out.having);
    if (out.set_rhs) out.set_rhs = std::make_shared<const ClauseSet>(canonical(*out.set_rhs));
    return out;
}

ClauseSet normalize(const Query& ast) {
    ClauseSet out;
    out.distinct = ast.distinct;
    for (const auto& item : ast.select) out.select.push_back(canon(*item));
    for (const auto& ref : ast.from) {
        out.from.push_back(ref.subquery ? canon_subquery(*ref.subquery) : to_lower(ref.table));
        conjuncts(ref.on, out.where);
    }
    conjuncts(ast.where, out.where);
    for (const auto& g : ast.group_by) out.group_by.push_back(canon(*g));
    conjuncts(ast.having, out.having);
    for (const auto& o : ast.order_by) out.order_by.push_back(canon(*o.expr) + (o.descending ? " desc" : " asc"));
    out.limit = ast.limit;
    out.set_op = ast.set_op;
    if (ast.set_rhs) out.set_rhs = std::make_shared<const ClauseSet>(normalize(*ast.set_rhs));
    return canonical(out);
}

std::string render(const ClauseSet& c) {
    auto list = [](const std::vector<std::string>& v, const char* sep) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += sep;
            s += v[i];
        }
        return s;
    };
    std::string out = "select ";
    if (c.distinct) out += "distinct ";
    out += list(c.select, ", ") + " from " + list(c.from, ", ");
    if (!c.where.empty()) out += " where " + list(c.where, " and ");
    if (!c.group_by.empty()) out += " group by " + list(c.group_by, ", ");
    if (!c.having.empty()) out += " having " + list(c.having, " and ");
    if (!c.order_by.empty()) out += " order by " + list(c.order_by, ", ");
    if (c.limit) out += " limit " + std::to_string(*c.limit);
    if (c.set_op && c.set_rhs) out += " " + to_lower(to_string(*c.set_op)) + " " + render(*c.set_rhs);
    return out;
}

}  // namespace textsql
