#include "textsql/sql_parser.hpp"

#include <algorithm>

#include "text_util.hpp"
#include "textsql/errors.hpp"

namespace textsql {

using detail::iequals;

const char* to_string(Aggregator agg) noexcept {
    switch (agg) {
        case Aggregator::None: return "none";
        case Aggregator::Count: return "count";
        case Aggregator::Sum: return "sum";
        case Aggregator::Min: return "min";
        case Aggregator::Max: return "max";
        case Aggregator::Avg: return "avg";
    }
    return "none";
}

const char* to_string(ArithOp op) noexcept {
    switch (op) {
        case ArithOp::Add: return "+";
        case ArithOp::Sub: return "-";
        case ArithOp::Mul: return "*";
        case ArithOp::Div: return "/";
    }
    return "+";
}

const char* to_string(CompareOp op) noexcept {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Gt: return ">";
        case CompareOp::Le: return "<=";
        case CompareOp::Ge: return ">=";
        case CompareOp::Like: return "LIKE";
        case CompareOp::In: return "IN";
        case CompareOp::Between: return "BETWEEN";
        case CompareOp::IsNull: return "IS NULL";
        case CompareOp::Exists: return "EXISTS";
    }
    return "=";
}

const char* to_string(SetOp op) noexcept {
    switch (op) {
        case SetOp::Union: return "UNION";
        case SetOp::Intersect: return "INTERSECT";
        case SetOp::Except: return "EXCEPT";
    }
    return "UNION";
}

bool has_top_level_order_by(const Query& query) {
    for (const Query* q = &query; q; q = q->set_rhs.get()) {
        if (!q->order_by.empty()) return true;
    }
    return false;
}

namespace {

/// Thrown in open mode when the parser needs a token past the end of input.
struct NeedMore {};

enum class Clause { Select, On, Where, GroupBy, Having, OrderBy };

struct ExprContext {
    Clause clause = Clause::Where;
    bool allow_aggregate = false;
    bool allow_subquery = false;
    bool inside_aggregate = false;
};

std::optional<Aggregator> aggregator_keyword(const SqlToken& tok) {
    if (tok.kind != TokenKind::Keyword) return std::nullopt;
    if (tok.is_keyword("COUNT")) return Aggregator::Count;
    if (tok.is_keyword("SUM")) return Aggregator::Sum;
    if (tok.is_keyword("MIN")) return Aggregator::Min;
    if (tok.is_keyword("MAX")) return Aggregator::Max;
    if (tok.is_keyword("AVG")) return Aggregator::Avg;
    return std::nullopt;
}

std::optional<CompareOp> comparison_operator(const SqlToken& tok) {
    if (tok.kind != TokenKind::Operator || tok.unknown) return std::nullopt;
    if (tok.lexeme == "=") return CompareOp::Eq;
    if (tok.lexeme == "!=" || tok.lexeme == "<>") return CompareOp::Ne;
    if (tok.lexeme == "<") return CompareOp::Lt;
    if (tok.lexeme == ">") return CompareOp::Gt;
    if (tok.lexeme == "<=") return CompareOp::Le;
    if (tok.lexeme == ">=") return CompareOp::Ge;
    return std::nullopt;
}

class Parser {
public:
    enum class Mode { Closed, Open };

    Parser(std::span<const SqlToken> tokens, const SchemaCatalog* catalog, Mode mode)
        : tokens_(tokens), catalog_(catalog), mode_(mode) {
        end_token_.kind = TokenKind::Punctuation;
        const std::size_t end = tokens.empty() ? 0 : tokens.back().span.end;
        end_token_.span = {end, end};
    }

    SqlAst statement() {
        auto query = parse_query(nullptr);
        if (!at_end() && peek().is_punct(";")) ++pos_;
        if (!at_end()) fail("unexpected token after the end of the statement");
        return query;
    }

    std::size_t position() const { return pos_; }

private:
    struct Source {
        std::string table;
        std::string alias;
        bool derived = false;
        std::vector<std::string> derived_columns;

        const std::string& visible_name() const { return alias.empty() ? table : alias; }
    };

    struct Scope {
        Scope* parent = nullptr;
        std::vector<Source> sources;
        bool from_closed = false;
        std::vector<Expr*> pending;
    };

    // ---- token access -------------------------------------------------

    bool at_end() {
        if (pos_ < tokens_.size()) return false;
        if (mode_ == Mode::Open) throw NeedMore{};
        return true;
    }

    const SqlToken& peek(std::size_t k = 0) {
        if (pos_ + k < tokens_.size()) return tokens_[pos_ + k];
        if (mode_ == Mode::Open) throw NeedMore{};
        return end_token_;
    }

    const SqlToken& advance() {
        const SqlToken& tok = peek();
        ++pos_;
        return tok;
    }

    [[noreturn]] void fail(const std::string& message, ErrorCode code = ErrorCode::Syntax) {
        const SqlToken& tok = pos_ < tokens_.size() ? tokens_[pos_] : end_token_;
        const std::string where = tok.lexeme.empty() ? std::string("end of input") : "'" + tok.lexeme + "'";
        throw SqlError(code, message + " at " + where, tok.span.begin, tok.span.end);
    }

    [[noreturn]] static void fail_at(Span span, const std::string& message, ErrorCode code = ErrorCode::Syntax) {
        throw SqlError(code, message, span.begin, span.end);
    }

    [[noreturn]] static void unresolved(const Expr& expr, const std::string& message) {
        fail_at(expr.span, message, ErrorCode::Resolution);
    }

    bool accept_keyword(std::string_view kw) {
        if (peek().is_keyword(kw)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_keyword(std::string_view kw) {
        if (!accept_keyword(kw)) fail("expected " + std::string(kw));
    }

    bool accept_punct(std::string_view p) {
        if (peek().is_punct(p)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_punct(std::string_view p) {
        if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
    }

    std::string expect_identifier(const char* what) {
        const SqlToken& tok = peek();
        if (tok.kind != TokenKind::Identifier) fail(std::string("expected ") + what);
        ++pos_;
        return tok.lexeme;
    }

    // ---- queries --------------------------------------------------------

    std::shared_ptr<Query> parse_query(Scope* parent) {
        auto query = std::make_shared<Query>();
        Scope scope;
        scope.parent = parent;

        expect_keyword("SELECT");
        if (accept_keyword("DISTINCT")) query->distinct = true;
        do {
            query->select.push_back(parse_select_item(scope));
        } while (accept_punct(","));

        expect_keyword("FROM");
        parse_from(*query, scope);
        close_from(scope);

        if (accept_keyword("WHERE")) query->where = parse_condition(scope, {Clause::Where, false, true});
        if (accept_keyword("GROUP")) {
            expect_keyword("BY");
            do {
                query->group_by.push_back(parse_value(scope, {Clause::GroupBy, false, false}));
            } while (accept_punct(","));
        }
        if (peek().is_keyword("HAVING")) {
            if (query->group_by.empty()) fail("HAVING requires GROUP BY");
            ++pos_;
            query->having = parse_condition(scope, {Clause::Having, true, true});
        }
        if (accept_keyword("ORDER")) {
            expect_keyword("BY");
            do {
                OrderItem item;
                item.expr = parse_value(scope, {Clause::OrderBy, true, true});
                if (accept_keyword("DESC")) {
                    item.descending = true;
                    item.explicit_direction = true;
                } else if (accept_keyword("ASC")) {
                    item.explicit_direction = true;
                }
                query->order_by.push_back(std::move(item));
            } while (accept_punct(","));
        }
        if (accept_keyword("LIMIT")) {
            const SqlToken& tok = peek();
            if (!tok.is_number() || tok.lexeme.find('.') != std::string::npos) fail("expected an integer LIMIT");
            ++pos_;
            query->limit = std::stoll(tok.lexeme);
        }
        const SqlToken& next = peek();
        std::optional<SetOp> op;
        if (next.is_keyword("UNION")) op = SetOp::Union;
        if (next.is_keyword("INTERSECT")) op = SetOp::Intersect;
        if (next.is_keyword("EXCEPT")) op = SetOp::Except;
        if (op) {
            ++pos_;
            query->set_op = op;
            query->set_rhs = parse_query(parent);
        }
        return query;
    }

    ExprPtr parse_select_item(Scope& scope) {
        const SqlToken& first = peek();
        if (first.is_operator("*")) {
            ++pos_;
            auto star = std::make_shared<Expr>();
            star->kind = Expr::Kind::Star;
            star->span = first.span;
            resolve(*star, scope);
            return star;
        }
        if (first.kind == TokenKind::Identifier && peek(1).is_punct(".") && peek(2).is_operator("*")) {
            auto star = std::make_shared<Expr>();
            star->kind = Expr::Kind::Star;
            star->qualifier = first.lexeme;
            star->span = {first.span.begin, peek(2).span.end};
            pos_ += 3;
            resolve(*star, scope);
            return star;
        }
        return parse_value(scope, {Clause::Select, true, false});
    }

    void parse_from(Query& query, Scope& scope) {
        parse_source(query, scope, false);
        for (;;) {
            if (accept_keyword("JOIN")) {
                parse_source(query, scope, false);
                if (accept_keyword("ON")) {
                    query.from.back().on = parse_condition(scope, {Clause::On, false, false});
                }
                continue;
            }
            if (accept_punct(",")) {
                parse_source(query, scope, true);
                continue;
            }
            break;
        }
    }

    void parse_source(Query& query, Scope& scope, bool comma) {
        TableRef ref;
        ref.comma_joined = comma;
        Source source;
        if (accept_punct("(")) {
            auto sub = parse_query(scope.parent);
            expect_punct(")");
            source.derived = true;
            source.derived_columns = output_columns(*sub);
            ref.subquery = std::move(sub);
        } else {
            const SqlToken& tok = peek();
            if (tok.kind != TokenKind::Identifier) fail("expected a table name");
            if (catalog_) {
                const TableDef* table = catalog_->find_table(tok.lexeme);
                if (!table) fail_at(tok.span, "unknown table '" + tok.lexeme + "'", ErrorCode::Resolution);
                ref.table = table->name;
            } else {
                ref.table = tok.lexeme;
            }
            ++pos_;
            source.table = ref.table;
        }
        if (accept_keyword("AS")) ref.alias = expect_identifier("an alias");
        source.alias = ref.alias;
        declare_source(scope, std::move(source));
        query.from.push_back(std::move(ref));
    }

    // ---- expressions ------------------------------------------------------

    ExprPtr parse_condition(Scope& scope, ExprContext ctx) {
        auto expr = parse_or(scope, ctx);
        if (!expr->is_boolean()) fail("expected a condition");
        return expr;
    }

    ExprPtr parse_value(Scope& scope, ExprContext ctx) {
        auto expr = parse_additive(scope, ctx);
        if (expr->is_boolean()) fail("expected a value, found a condition");
        return expr;
    }

    std::shared_ptr<Expr> make_binary(Expr::Kind kind, ExprPtr lhs, ExprPtr rhs) {
        auto node = std::make_shared<Expr>();
        node->kind = kind;
        node->span = {lhs->span.begin, rhs->span.end};
        node->args = {std::move(lhs), std::move(rhs)};
        return node;
    }

    ExprPtr parse_or(Scope& scope, ExprContext ctx) {
        auto lhs = parse_and(scope, ctx);
        while (peek().is_keyword("OR")) {
            if (!lhs->is_boolean()) fail("OR requires conditions");
            ++pos_;
            auto rhs = parse_and(scope, ctx);
            if (!rhs->is_boolean()) fail("OR requires conditions");
            lhs = make_binary(Expr::Kind::Or, lhs, rhs);
        }
        return lhs;
    }

    ExprPtr parse_and(Scope& scope, ExprContext ctx) {
        auto lhs = parse_not(scope, ctx);
        while (peek().is_keyword("AND")) {
            if (!lhs->is_boolean()) fail("AND requires conditions");
            ++pos_;
            auto rhs = parse_not(scope, ctx);
            if (!rhs->is_boolean()) fail("AND requires conditions");
            lhs = make_binary(Expr::Kind::And, lhs, rhs);
        }
        return lhs;
    }

    ExprPtr parse_not(Scope& scope, ExprContext ctx) {
        const SqlToken& tok = peek();
        if (tok.is_keyword("NOT")) {
            ++pos_;
            if (peek().is_keyword("EXISTS")) {
                auto exists = parse_exists(scope, ctx);
                auto node = std::make_shared<Expr>(*exists);
                node->negated = true;
                node->span.begin = tok.span.begin;
                return node;
            }
            auto operand = parse_not(scope, ctx);
            if (!operand->is_boolean()) fail("NOT requires a condition");
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Not;
            node->span = {tok.span.begin, operand->span.end};
            node->args = {operand};
            return node;
        }
        return parse_predicate(scope, ctx);
    }

    ExprPtr parse_exists(Scope& scope, ExprContext ctx) {
        const SqlToken& kw = advance();
        if (!ctx.allow_subquery) fail("subquery not allowed here");
        expect_punct("(");
        auto node = std::make_shared<Expr>();
        node->kind = Expr::Kind::Compare;
        node->compare = CompareOp::Exists;
        node->subquery = parse_query(&scope);
        node->span = {kw.span.begin, peek().span.end};
        expect_punct(")");
        return node;
    }

    ExprPtr parse_predicate(Scope& scope, ExprContext ctx) {
        if (peek().is_keyword("EXISTS")) return parse_exists(scope, ctx);
        auto lhs = parse_additive(scope, ctx);
        if (lhs->is_boolean()) return lhs;

        auto node = std::make_shared<Expr>();
        node->kind = Expr::Kind::Compare;
        node->args.push_back(lhs);
        node->span.begin = lhs->span.begin;

        const SqlToken& tok = peek();
        if (auto op = comparison_operator(tok)) {
            ++pos_;
            node->compare = *op;
            node->text = tok.lexeme;
            node->args.push_back(parse_operand(scope, ctx));
        } else if (tok.is_keyword("IS")) {
            ++pos_;
            node->compare = CompareOp::IsNull;
            if (accept_keyword("NOT")) node->negated = true;
            expect_keyword("NULL");
        } else {
            bool negated = false;
            if (tok.is_keyword("NOT")) {
                const SqlToken& after = peek(1);
                if (!after.is_keyword("IN") && !after.is_keyword("LIKE") && !after.is_keyword("BETWEEN")) {
                    ++pos_;
                    fail("expected IN, LIKE or BETWEEN after NOT");
                }
                ++pos_;
                negated = true;
            }
            const SqlToken& op = peek();
            if (op.is_keyword("IN")) {
                ++pos_;
                node->compare = CompareOp::In;
                expect_punct("(");
                if (peek().is_keyword("SELECT")) {
                    if (!ctx.allow_subquery) fail("subquery not allowed here");
                    node->subquery = parse_query(&scope);
                } else {
                    do {
                        node->args.push_back(parse_value(scope, ctx));
                    } while (accept_punct(","));
                }
                expect_punct(")");
            } else if (op.is_keyword("LIKE")) {
                ++pos_;
                node->compare = CompareOp::Like;
                node->args.push_back(parse_operand(scope, ctx));
            } else if (op.is_keyword("BETWEEN")) {
                ++pos_;
                node->compare = CompareOp::Between;
                node->args.push_back(parse_operand(scope, ctx));
                expect_keyword("AND");
                node->args.push_back(parse_operand(scope, ctx));
            } else if (negated) {
                fail("expected IN, LIKE or BETWEEN after NOT");
            } else {
                return lhs;  // a bare value; the caller decides whether that is allowed
            }
            node->negated = negated;
        }
        node->span.end = pos_ > 0 ? tokens_[std::min(pos_, tokens_.size()) - 1].span.end : node->span.begin;
        return node;
    }

    ExprPtr parse_operand(Scope& scope, ExprContext ctx) { return parse_value(scope, ctx); }

    ExprPtr parse_additive(Scope& scope, ExprContext ctx) {
        auto lhs = parse_multiplicative(scope, ctx);
        for (;;) {
            const SqlToken& tok = peek();
            if (!(tok.is_operator("+") || tok.is_operator("-"))) break;
            if (lhs->is_boolean()) fail("arithmetic on a condition");
            ++pos_;
            auto rhs = parse_multiplicative(scope, ctx);
            if (rhs->is_boolean()) fail("arithmetic on a condition");
            auto node = make_binary(Expr::Kind::Arith, lhs, rhs);
            node->arith = tok.lexeme == "+" ? ArithOp::Add : ArithOp::Sub;
            lhs = node;
        }
        return lhs;
    }

    ExprPtr parse_multiplicative(Scope& scope, ExprContext ctx) {
        auto lhs = parse_unary(scope, ctx);
        for (;;) {
            const SqlToken& tok = peek();
            if (!(tok.is_operator("*") || tok.is_operator("/"))) break;
            if (lhs->is_boolean()) fail("arithmetic on a condition");
            ++pos_;
            auto rhs = parse_unary(scope, ctx);
            if (rhs->is_boolean()) fail("arithmetic on a condition");
            auto node = make_binary(Expr::Kind::Arith, lhs, rhs);
            node->arith = tok.lexeme == "*" ? ArithOp::Mul : ArithOp::Div;
            lhs = node;
        }
        return lhs;
    }

    ExprPtr parse_unary(Scope& scope, ExprContext ctx) {
        const SqlToken& tok = peek();
        if (tok.is_operator("-")) {
            ++pos_;
            auto operand = parse_unary(scope, ctx);
            if (operand->is_boolean()) fail("negation of a condition");
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Negate;
            node->span = {tok.span.begin, operand->span.end};
            node->args = {operand};
            return node;
        }
        return parse_primary(scope, ctx);
    }

    ExprPtr parse_primary(Scope& scope, ExprContext ctx) {
        const SqlToken& tok = peek();
        auto node = std::make_shared<Expr>();
        node->span = tok.span;

        if (tok.kind == TokenKind::Literal) {
            if (tok.unterminated) fail("unterminated string literal");
            ++pos_;
            if (tok.is_string()) {
                node->kind = Expr::Kind::String;
                node->text = unquote(tok.lexeme);
            } else {
                node->kind = Expr::Kind::Number;
                node->text = tok.lexeme;
            }
            return node;
        }
        if (tok.is_keyword("NULL")) {
            ++pos_;
            node->kind = Expr::Kind::Null;
            return node;
        }
        if (auto agg = aggregator_keyword(tok); agg && peek(1).is_punct("(")) {
            return parse_aggregate(scope, ctx, *agg);
        }
        if (tok.is_punct("(")) {
            ++pos_;
            if (peek().is_keyword("SELECT")) {
                if (!ctx.allow_subquery) fail("subquery not allowed here");
                node->kind = Expr::Kind::Subquery;
                node->subquery = parse_query(&scope);
                node->span.end = peek().span.end;
                expect_punct(")");
                return node;
            }
            auto inner = parse_or(scope, ctx);
            const SqlToken& close = peek();
            expect_punct(")");
            auto wrapped = std::make_shared<Expr>(*inner);
            wrapped->parenthesized = true;
            wrapped->span = {tok.span.begin, close.span.end};
            return wrapped;
        }
        if (tok.kind == TokenKind::Identifier || aggregator_keyword(tok)) {
            ++pos_;
            node->kind = Expr::Kind::Column;
            if (mode_ == Mode::Open && pos_ == tokens_.size() && catalog_ &&
                !names_source_or_column(tok.lexeme, scope)) {
                --pos_;
                fail("unknown column or alias '" + tok.lexeme + "'", ErrorCode::Resolution);
            }
            if (accept_punct(".")) {
                const SqlToken& col = peek();
                if (col.kind != TokenKind::Identifier && !aggregator_keyword(col)) fail("expected a column name");
                ++pos_;
                node->qualifier = tok.lexeme;
                node->name = col.lexeme;
                node->span.end = col.span.end;
            } else {
                node->name = tok.lexeme;
            }
            resolve(*node, scope);
            return node;
        }
        fail("expected an expression");
    }

    ExprPtr parse_aggregate(Scope& scope, ExprContext ctx, Aggregator agg) {
        const SqlToken& kw = advance();
        if (!ctx.allow_aggregate) fail_at(kw.span, "aggregate not allowed in this clause");
        if (ctx.inside_aggregate) fail_at(kw.span, "nested aggregate");
        expect_punct("(");
        auto node = std::make_shared<Expr>();
        node->kind = Expr::Kind::Aggregate;
        node->agg = agg;
        node->distinct = accept_keyword("DISTINCT");
        if (peek().is_operator("*")) {
            const SqlToken& star_tok = advance();
            if (agg != Aggregator::Count || node->distinct) fail("'*' is only allowed in COUNT(*)");
            auto star = std::make_shared<Expr>();
            star->kind = Expr::Kind::Star;
            star->span = star_tok.span;
            node->args = {star};
        } else {
            ExprContext inner = ctx;
            inner.inside_aggregate = true;
            inner.allow_subquery = false;
            node->args = {parse_value(scope, inner)};
        }
        node->span = {kw.span.begin, peek().span.end};
        expect_punct(")");
        return node;
    }

    static std::string unquote(const std::string& lexeme) {
        const char quote = lexeme.front();
        std::string out;
        for (std::size_t i = 1; i + 1 < lexeme.size(); ++i) {
            out.push_back(lexeme[i]);
            if (lexeme[i] == quote && i + 2 < lexeme.size() && lexeme[i + 1] == quote) ++i;
        }
        return out;
    }

    // ---- name resolution --------------------------------------------------

    std::vector<std::string> output_columns(const Query& sub) const {
        std::vector<std::string> names;
        for (const auto& item : sub.select) {
            if (item->kind == Expr::Kind::Column) {
                names.push_back(item->column.empty() ? item->name : item->column);
            } else if (item->kind == Expr::Kind::Star && catalog_) {
                for (const auto& ref : sub.from) {
                    if (!item->qualifier.empty() &&
                        !iequals(item->qualifier, ref.alias.empty() ? ref.table : ref.alias)) {
                        continue;
                    }
                    if (ref.subquery) {
                        auto inner = output_columns(*ref.subquery);
                        names.insert(names.end(), inner.begin(), inner.end());
                    } else if (const TableDef* t = catalog_->find_table(ref.table)) {
                        for (const auto& c : t->columns) names.push_back(c.name);
                    }
                }
            }
        }
        return names;
    }

    static Source* find_source(Scope& scope, std::string_view name) {
        for (auto& source : scope.sources) {
            if (!source.visible_name().empty() && iequals(source.visible_name(), name)) return &source;
        }
        return nullptr;
    }

    bool bind_in_source(Expr& expr, const Source& source) const {
        if (source.derived) {
            for (const auto& c : source.derived_columns) {
                if (iequals(c, expr.name)) {
                    expr.table.clear();
                    expr.derived_alias = source.alias;
                    expr.column = c;
                    return true;
                }
            }
            return false;
        }
        const ColumnDef* col = catalog_->find_column(source.table, expr.name);
        if (!col) return false;
        expr.table = source.table;
        expr.column = col->name;
        return true;
    }

    bool column_exists_anywhere(std::string_view name) const {
        for (const auto& t : catalog_->tables()) {
            if (t.find_column(name)) return true;
        }
        return false;
    }

    void declare_source(Scope& scope, Source source) {
        if (!source.alias.empty()) {
            for (const auto& other : scope.sources) {
                if (iequals(other.visible_name(), source.alias)) {
                    fail("duplicate alias '" + source.alias + "'", ErrorCode::Resolution);
                }
            }
        }
        scope.sources.push_back(std::move(source));
        if (!catalog_) return;
        const Source& added = scope.sources.back();
        for (Expr* pending : scope.pending) {
            if (pending->qualifier.empty() || !iequals(pending->qualifier, added.visible_name())) continue;
            if (pending->kind == Expr::Kind::Star) continue;
            if (!bind_in_source(*pending, added)) {
                unresolved(*pending, "unknown column '" + pending->qualifier + "." + pending->name + "'");
            }
        }
    }

    /// Select-list and ON references are checked as far as the FROM clause
    /// parsed so far allows, then fully once it closes.
    void resolve(Expr& expr, Scope& scope) {
        if (!catalog_) return;
        if (scope.from_closed) {
            resolve_strict(expr, scope);
            return;
        }
        if (!expr.qualifier.empty()) {
            if (Source* source = find_source(scope, expr.qualifier)) {
                if (expr.kind == Expr::Kind::Column && !bind_in_source(expr, *source)) {
                    unresolved(expr, "unknown column '" + expr.qualifier + "." + expr.name + "'");
                }
            } else if (expr.kind == Expr::Kind::Column && !column_exists_anywhere(expr.name)) {
                unresolved(expr, "unknown column '" + expr.name + "'");
            }
        } else if (expr.kind == Expr::Kind::Column && !column_exists_anywhere(expr.name)) {
            unresolved(expr, "unknown column '" + expr.name + "'");
        }
        scope.pending.push_back(&expr);
    }

    void resolve_strict(Expr& expr, Scope& scope) {
        if (expr.kind == Expr::Kind::Star) {
            if (expr.qualifier.empty()) return;
            for (Scope* s = &scope; s; s = s->parent) {
                if (const Source* source = find_source(*s, expr.qualifier)) {
                    expr.table = source->table;
                    if (source->derived) expr.derived_alias = source->alias;
                    return;
                }
            }
            unresolved(expr, "unknown table or alias '" + expr.qualifier + "'");
        }
        if (!expr.qualifier.empty()) {
            for (Scope* s = &scope; s; s = s->parent) {
                if (Source* source = find_source(*s, expr.qualifier)) {
                    if (!bind_in_source(expr, *source)) {
                        unresolved(expr, "unknown column '" + expr.qualifier + "." + expr.name + "'");
                    }
                    return;
                }
            }
            unresolved(expr, "unknown table or alias '" + expr.qualifier + "'");
        }
        for (Scope* s = &scope; s; s = s->parent) {
            for (const auto& source : s->sources) {
                if (bind_in_source(expr, source)) return;
            }
        }
        unresolved(expr, "unknown column '" + expr.name + "'");
    }

    // Whether a name could still start a valid reference: a visible source or
    // a column of one.
    bool names_source_or_column(std::string_view name, Scope& scope) {
        for (Scope* s = &scope; s; s = s->parent) {
            if (!s->from_closed || find_source(*s, name)) return true;
            for (const auto& source : s->sources) {
                Expr probe;
                probe.kind = Expr::Kind::Column;
                probe.name = std::string(name);
                if (bind_in_source(probe, source)) return true;
            }
        }
        return false;
    }

    void close_from(Scope& scope) {
        scope.from_closed = true;
        if (!catalog_) return;
        for (Expr* pending : scope.pending) resolve_strict(*pending, scope);
        scope.pending.clear();
    }

    std::span<const SqlToken> tokens_;
    const SchemaCatalog* catalog_;
    Mode mode_;
    std::size_t pos_ = 0;
    SqlToken end_token_;
};

SqlAst parse_tokens(std::string_view text, const SchemaCatalog* catalog) {
    const auto tokens = lex(text);
    Parser parser(tokens, catalog, Parser::Mode::Closed);
    return parser.statement();
}

}  // namespace

SqlAst parse_sql(std::string_view text, const SchemaCatalog& catalog) { return parse_tokens(text, &catalog); }

SqlAst parse_sql_unresolved(std::string_view text) { return parse_tokens(text, nullptr); }

PrefixResult parse_prefix(std::span<const SqlToken> tokens, const SchemaCatalog* catalog) {
    {
        Parser open(tokens, catalog, Parser::Mode::Open);
        try {
            open.statement();
        } catch (const NeedMore&) {
        } catch (const SqlError&) {
            return {PrefixStatus::Dead, std::min(open.position(), tokens.empty() ? 0 : tokens.size() - 1)};
        }
    }
    Parser closed(tokens, catalog, Parser::Mode::Closed);
    try {
        closed.statement();
        return {PrefixStatus::Complete, 0};
    } catch (const SqlError&) {
        return {PrefixStatus::Viable, 0};
    }
}

}  // namespace textsql
