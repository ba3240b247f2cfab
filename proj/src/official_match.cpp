#include "official_match.hpp"

#include <algorithm>
#include <cstdlib>

#include "text_util.hpp"

namespace textsql::detail {

namespace {

int agg_code(Aggregator agg) {
    switch (agg) {
        case Aggregator::None: return 0;
        case Aggregator::Max: return 1;
        case Aggregator::Min: return 2;
        case Aggregator::Count: return 3;
        case Aggregator::Sum: return 4;
        case Aggregator::Avg: return 5;
    }
    return 0;
}

int unit_code(ArithOp op) {
    switch (op) {
        case ArithOp::Sub: return 1;
        case ArithOp::Add: return 2;
        case ArithOp::Mul: return 3;
        case ArithOp::Div: return 4;
    }
    return 0;
}

constexpr int kBetween = 1;
constexpr int kIn = 8;
constexpr int kLike = 9;

[[noreturn]] void unsupported(std::string reason) { throw NotRepresentable{std::move(reason)}; }

class Projector {
public:
    Projector(const Query& root, const OfficialSchema& schema) : schema_(schema) {
        scan_aliases(root);
        for (const auto& [alias, table] : aliases_) {
            if (schema_.columns.count(alias)) unsupported("alias '" + alias + "' shadows a table name");
        }
    }

    OfficialSql project(const Query& q) {
        OfficialSql sql;
        std::vector<std::string> default_tables;
        for (std::size_t i = 0; i < q.from.size(); ++i) {
            const TableRef& ref = q.from[i];
            if (ref.comma_joined) unsupported("comma join");
            if (ref.subquery) {
                if (i != 0 || !ref.alias.empty()) unsupported("derived table position or alias");
                sql.table_units.push_back({true, {}, Box<OfficialSql>{std::make_shared<OfficialSql>(project(*ref.subquery))}});
            } else {
                const std::string table = to_lower(ref.table);
                sql.table_units.push_back({false, "__" + table + "__", {}});
                default_tables.push_back(table);
            }
            if (ref.on) {
                Condition on = conditions(*ref.on, default_tables);
                if (!sql.from_conds.empty()) sql.from_conds.connectors.push_back("and");
                append(sql.from_conds, on);
            }
        }

        sql.distinct = q.distinct;
        for (const auto& item : q.select) sql.select.push_back(select_item(*item, default_tables));
        if (q.where) sql.where = conditions(*q.where, default_tables);
        for (const auto& g : q.group_by) sql.group_by.push_back(col_unit(*g, default_tables));
        if (q.having) sql.having = conditions(*q.having, default_tables);
        if (!q.order_by.empty()) {
            OrderBy order{"asc", {}};
            for (const auto& item : q.order_by) {
                order.items.push_back(val_unit(*item.expr, default_tables));
                if (item.explicit_direction) order.direction = item.descending ? "desc" : "asc";
            }
            sql.order_by = std::move(order);
        }
        // The reference parser never converts the LIMIT token to an int and
        // substitutes 1; only presence survives.
        if (q.limit) sql.limit = 1;

        if (q.set_op) {
            Box<OfficialSql> rhs{std::make_shared<OfficialSql>(project(*q.set_rhs))};
            switch (*q.set_op) {
                case SetOp::Intersect: sql.intersect = rhs; break;
                case SetOp::Except: sql.except = rhs; break;
                case SetOp::Union: sql.union_ = rhs; break;
            }
        }
        return sql;
    }

private:
    // Aliases are collected over the whole statement in text order; a later
    // "AS x" overrides an earlier one, as in the reference script.
    void scan_aliases(const Query& q) {
        for (const auto& item : q.select) scan_aliases(*item);
        for (const auto& ref : q.from) {
            if (ref.subquery) scan_aliases(*ref.subquery);
            if (!ref.alias.empty()) aliases_[to_lower(ref.alias)] = ref.subquery ? ")" : to_lower(ref.table);
            if (ref.on) scan_aliases(*ref.on);
        }
        if (q.where) scan_aliases(*q.where);
        for (const auto& g : q.group_by) scan_aliases(*g);
        if (q.having) scan_aliases(*q.having);
        for (const auto& o : q.order_by) scan_aliases(*o.expr);
        if (q.set_rhs) scan_aliases(*q.set_rhs);
    }

    void scan_aliases(const Expr& e) {
        for (const auto& arg : e.args) scan_aliases(*arg);
        if (e.subquery) scan_aliases(*e.subquery);
    }

    bool has_column(const std::string& table, const std::string& column) const {
        auto it = schema_.columns.find(table);
        return it != schema_.columns.end() &&
               std::find(it->second.begin(), it->second.end(), column) != it->second.end();
    }

    std::string col_id(const Expr& e, const std::vector<std::string>& default_tables) const {
        if (e.kind == Expr::Kind::Star) {
            if (!e.qualifier.empty()) unsupported("qualified star");
            return "__all__";
        }
        if (e.kind != Expr::Kind::Column) unsupported("expected a column");
        const std::string column = to_lower(e.name);
        if (!e.qualifier.empty()) {
            const std::string q = to_lower(e.qualifier);
            std::string table;
            if (schema_.columns.count(q)) {
                table = q;
            } else if (auto it = aliases_.find(q); it != aliases_.end()) {
                table = it->second;
            } else {
                unsupported("unknown qualifier " + q);
            }
            if (!has_column(table, column)) unsupported("unknown column " + table + "." + column);
            return "__" + table + "." + column + "__";
        }
        if (default_tables.empty()) unsupported("no default tables");
        for (const auto& table : default_tables) {
            if (has_column(table, column)) return "__" + table + "." + column + "__";
        }
        unsupported("column " + column + " not in FROM tables");
    }

    ColUnit col_unit(const Expr& e, const std::vector<std::string>& dt) const {
        if (e.kind == Expr::Kind::Aggregate) {
            if (e.parenthesized) unsupported("parenthesized aggregate");
            const Expr& arg = *e.args[0];
            if (arg.parenthesized) unsupported("parenthesized aggregate argument");
            return {agg_code(e.agg), col_id(arg, dt), e.distinct};
        }
        return {0, col_id(e, dt), false};
    }

    ValUnit val_unit(const Expr& e, const std::vector<std::string>& dt) const {
        if (e.kind == Expr::Kind::Arith) {
            const Expr& lhs = *e.args[0];
            const Expr& rhs = *e.args[1];
            if (lhs.kind == Expr::Kind::Arith || rhs.kind == Expr::Kind::Arith) unsupported("chained arithmetic");
            return {unit_code(e.arith), col_unit(lhs, dt), col_unit(rhs, dt)};
        }
        return {0, col_unit(e, dt), std::nullopt};
    }

    std::pair<int, ValUnit> select_item(const Expr& e, const std::vector<std::string>& dt) const {
        if (e.kind == Expr::Kind::Aggregate && !e.parenthesized) {
            const Expr& arg = *e.args[0];
            if (arg.parenthesized) unsupported("parenthesized aggregate argument");
            ValUnit unit = val_unit(arg, dt);
            if (e.distinct) unit.first.distinct = true;
            return {agg_code(e.agg), unit};
        }
        if (e.kind == Expr::Kind::Arith && !e.parenthesized && e.args[0]->kind == Expr::Kind::Aggregate &&
            !e.args[0]->parenthesized) {
            unsupported("select arithmetic led by an aggregate");
        }
        return {0, val_unit(e, dt)};
    }

    static bool plain_arith(const Expr& e) {
        if (e.parenthesized) return false;
        if (e.kind == Expr::Kind::Arith) return plain_arith(*e.args[0]) && plain_arith(*e.args[1]);
        return e.kind == Expr::Kind::Column || e.kind == Expr::Kind::Number || e.kind == Expr::Kind::String;
    }

    static const Expr& leftmost(const Expr& e) { return e.kind == Expr::Kind::Arith ? leftmost(*e.args[0]) : e; }

    OfficialValue value(const Expr& e, const std::vector<std::string>& dt) {
        switch (e.kind) {
            case Expr::Kind::Subquery:
                return Box<OfficialSql>{std::make_shared<OfficialSql>(project(*e.subquery))};
            case Expr::Kind::String:
                if (e.text.find('"') != std::string::npos || e.text.find('\'') != std::string::npos) {
                    unsupported("quote inside string literal");
                }
                return "\"" + e.text + "\"";
            case Expr::Kind::Number:
                return std::strtod(e.text.c_str(), nullptr);
            case Expr::Kind::Negate:
                if (e.args[0]->kind == Expr::Kind::Number && !e.args[0]->parenthesized && !e.parenthesized) {
                    return -std::strtod(e.args[0]->text.c_str(), nullptr);
                }
                unsupported("negated expression value");
            case Expr::Kind::Column:
                if (e.parenthesized) unsupported("parenthesized column value");
                return col_unit(e, dt);
            case Expr::Kind::Aggregate:
                unsupported("aggregate value");
            case Expr::Kind::Arith: {
                // The reference parser reads the leading column and skips the rest.
                const Expr& first = leftmost(e);
                if (!plain_arith(e) || first.kind != Expr::Kind::Column) unsupported("arithmetic value");
                return col_unit(first, dt);
            }
            default:
                unsupported("value kind");
        }
    }

    // A column value makes the reference parser skip every token up to the next
    // AND, comma, parenthesis or keyword, so conditions OR-ed onto it vanish.
    Condition conditions(const Expr& e, const std::vector<std::string>& dt) {
        Condition in = condition(e, dt);
        Condition out;
        for (std::size_t i = 0; i < in.units.size();) {
            const CondUnit& unit = in.units[i];
            out.units.push_back(unit);
            const OfficialValue& last = unit.op == kBetween ? unit.val2 : unit.val1;
            std::size_t next = i + 1;
            if (std::holds_alternative<ColUnit>(last)) {
                while (next < in.units.size() && in.connectors[next - 1] == "or") {
                    if (!swallowable(in.units[next])) unsupported("condition after a column value");
                    ++next;
                }
            }
            if (next < in.units.size()) out.connectors.push_back(in.connectors[next - 1]);
            i = next;
        }
        return out;
    }

    static bool swallowable(const CondUnit& unit) {
        if (unit.op == kBetween || unit.op == kIn) return false;
        if (unit.lhs.first.agg != 0 || (unit.lhs.second && unit.lhs.second->agg != 0)) return false;
        if (std::holds_alternative<Box<OfficialSql>>(unit.val1)) return false;
        if (const auto* col = std::get_if<ColUnit>(&unit.val1)) return col->agg == 0;
        return true;
    }

    Condition condition(const Expr& e, const std::vector<std::string>& dt) {
        Condition out;
        if ((e.kind == Expr::Kind::And || e.kind == Expr::Kind::Or) && !e.parenthesized) {
            out = condition(*e.args[0], dt);
            Condition rhs = condition(*e.args[1], dt);
            out.connectors.push_back(e.kind == Expr::Kind::And ? "and" : "or");
            append(out, rhs);
            return out;
        }
        if (e.parenthesized) unsupported("parenthesized condition");
        if (e.kind != Expr::Kind::Compare) unsupported("NOT prefix");
        CondUnit unit;
        unit.not_op = e.negated;
        switch (e.compare) {
            case CompareOp::Eq: unit.op = 2; break;
            case CompareOp::Gt: unit.op = 3; break;
            case CompareOp::Lt: unit.op = 4; break;
            case CompareOp::Ge: unit.op = 5; break;
            case CompareOp::Le: unit.op = 6; break;
            case CompareOp::Ne:
                if (e.text == "<>") unsupported("<> operator");
                unit.op = 7;
                break;
            case CompareOp::In: unit.op = kIn; break;
            case CompareOp::Like: unit.op = kLike; break;
            case CompareOp::Between: unit.op = kBetween; break;
            case CompareOp::IsNull: unsupported("IS NULL");
            case CompareOp::Exists: unsupported("EXISTS");
        }
        unit.lhs = val_unit(*e.args[0], dt);
        if (e.compare == CompareOp::In) {
            if (!e.subquery) unsupported("IN value list");
            unit.val1 = Box<OfficialSql>{std::make_shared<OfficialSql>(project(*e.subquery))};
        } else {
            unit.val1 = value(*e.args[1], dt);
            if (e.compare == CompareOp::Between) unit.val2 = value(*e.args[2], dt);
        }
        out.units.push_back(std::move(unit));
        return out;
    }

    static void append(Condition& out, const Condition& more) {
        out.units.insert(out.units.end(), more.units.begin(), more.units.end());
        out.connectors.insert(out.connectors.end(), more.connectors.begin(), more.connectors.end());
    }

    const OfficialSchema& schema_;
    std::map<std::string, std::string> aliases_;
};

// ---- rebuilding ------------------------------------------------------------

void disable_values(Condition& cond);

void disable_values(OfficialSql& sql) {
    disable_values(sql.from_conds);
    disable_values(sql.having);
    disable_values(sql.where);
    for (Box<OfficialSql>* iue : {&sql.intersect, &sql.except, &sql.union_}) {
        if (iue->ptr) disable_values(*iue->ptr);
    }
}

void disable_value(OfficialValue& v) {
    if (auto* sub = std::get_if<Box<OfficialSql>>(&v)) {
        disable_values(*sub->ptr);
    } else {
        v = std::monostate{};
    }
}

void disable_values(Condition& cond) {
    for (auto& unit : cond.units) {
        disable_value(unit.val1);
        disable_value(unit.val2);
    }
}

struct ColumnRebuild {
    const std::set<std::string>& valid;
    const std::map<std::string, std::string>& fk_map;

    void operator()(ColUnit& unit) const {
        if (valid.count(unit.col)) {
            if (auto it = fk_map.find(unit.col); it != fk_map.end()) unit.col = it->second;
        }
        unit.distinct = std::nullopt;
    }

    void operator()(ValUnit& unit) const {
        (*this)(unit.first);
        if (unit.second) (*this)(*unit.second);
    }

    void operator()(Condition& cond) const {
        for (auto& unit : cond.units) (*this)(unit.lhs);
    }

    void operator()(OfficialSql& sql) const {
        for (auto& [agg, unit] : sql.select) (*this)(unit);
        sql.distinct = std::nullopt;
        (*this)(sql.from_conds);
        (*this)(sql.where);
        for (auto& g : sql.group_by) (*this)(g);
        if (sql.order_by) {
            for (auto& unit : sql.order_by->items) (*this)(unit);
        }
        (*this)(sql.having);
        for (Box<OfficialSql>* iue : {&sql.intersect, &sql.except, &sql.union_}) {
            if (iue->ptr) (*this)(*iue->ptr);
        }
    }
};

// ---- scoring ---------------------------------------------------------------

bool scores(std::size_t count, std::size_t pred_total, std::size_t label_total) {
    return pred_total == label_total && count == pred_total;
}

template <class T>
std::size_t multiset_hits(const std::vector<T>& pred, std::vector<T> label) {
    std::size_t hits = 0;
    for (const auto& unit : pred) {
        auto it = std::find(label.begin(), label.end(), unit);
        if (it != label.end()) {
            ++hits;
            label.erase(it);
        }
    }
    return hits;
}

std::string group_key(const std::string& col) {
    const auto dot = col.find('.');
    if (dot == std::string::npos) return col;
    const auto next = col.find('.', dot + 1);
    return col.substr(dot + 1, next == std::string::npos ? std::string::npos : next - dot - 1);
}

std::set<std::string> keywords(const OfficialSql& sql) {
    std::set<std::string> res;
    if (!sql.where.empty()) res.insert("where");
    if (!sql.group_by.empty()) res.insert("group");
    if (!sql.having.empty()) res.insert("having");
    if (sql.order_by) {
        res.insert(sql.order_by->direction);
        res.insert("order");
    }
    if (sql.limit) res.insert("limit");
    if (sql.except.ptr) res.insert("except");
    if (sql.union_.ptr) res.insert("union");
    if (sql.intersect.ptr) res.insert("intersect");
    for (const Condition* cond : {&sql.from_conds, &sql.where, &sql.having}) {
        for (const auto& c : cond->connectors) {
            if (c == "or") res.insert("or");
        }
        for (const auto& unit : cond->units) {
            if (unit.not_op) res.insert("not");
            if (unit.op == kIn) res.insert("in");
            if (unit.op == kLike) res.insert("like");
        }
    }
    return res;
}

std::vector<std::pair<int, std::string>> sorted_tables(const OfficialSql& sql) {
    // "sql" sorts before "table_unit" in the reference ordering.
    std::vector<std::pair<int, std::string>> out;
    for (const auto& unit : sql.table_units) out.emplace_back(unit.is_sql ? 0 : 1, unit.table);
    std::stable_sort(out.begin(), out.end());
    return out;
}

std::map<std::string, bool> partial_match(const OfficialSql& pred, const OfficialSql& label);

bool exact(const OfficialSql& pred, const OfficialSql& label, std::map<std::string, bool>* partial_out) {
    auto partial = partial_match(pred, label);
    bool all = std::all_of(partial.begin(), partial.end(), [](const auto& kv) { return kv.second; });
    bool from = true;
    if (!label.table_units.empty()) {
        from = sorted_tables(pred) == sorted_tables(label);
        // Two derived tables would make the reference sort fail; compare them in place.
        for (std::size_t i = 0; from && i < label.table_units.size(); ++i) {
            const auto& l = label.table_units[i];
            if (!l.is_sql) continue;
            from = std::any_of(pred.table_units.begin(), pred.table_units.end(),
                               [&](const TableUnit& p) { return p.is_sql && p.sql == l.sql; });
        }
    }
    if (partial_out) {
        *partial_out = partial;
        (*partial_out)["from"] = from;
    }
    return all && from;
}

std::pair<std::size_t, std::size_t> nested(const Box<OfficialSql>& pred, const Box<OfficialSql>& label,
                                           std::size_t& count) {
    const std::size_t p = pred.ptr ? 1 : 0;
    const std::size_t l = label.ptr ? 1 : 0;
    if (pred.ptr && label.ptr && exact(*pred.ptr, *label.ptr, nullptr)) ++count;
    return {p, l};
}

std::map<std::string, bool> partial_match(const OfficialSql& pred, const OfficialSql& label) {
    std::map<std::string, bool> res;

    {
        std::vector<ValUnit> pred_units, label_units;
        for (const auto& item : pred.select) pred_units.push_back(item.second);
        for (const auto& item : label.select) label_units.push_back(item.second);
        const auto cnt = multiset_hits(pred.select, label.select);
        const auto cnt_wo_agg = multiset_hits(pred_units, label_units);
        res["select"] = scores(cnt, pred.select.size(), label.select.size());
        res["select(no AGG)"] = scores(cnt_wo_agg, pred.select.size(), label.select.size());
    }
    {
        std::vector<ValUnit> pred_lhs, label_lhs;
        for (const auto& unit : pred.where.units) pred_lhs.push_back(unit.lhs);
        for (const auto& unit : label.where.units) label_lhs.push_back(unit.lhs);
        const auto cnt = multiset_hits(pred.where.units, label.where.units);
        const auto cnt_wo_op = multiset_hits(pred_lhs, label_lhs);
        res["where"] = scores(cnt, pred.where.units.size(), label.where.units.size());
        res["where(no OP)"] = scores(cnt_wo_op, pred.where.units.size(), label.where.units.size());
    }
    {
        std::vector<std::string> pred_cols, label_cols;
        for (const auto& g : pred.group_by) pred_cols.push_back(group_key(g.col));
        for (const auto& g : label.group_by) label_cols.push_back(group_key(g.col));
        const auto cnt = multiset_hits(pred_cols, label_cols);
        res["group(no Having)"] = scores(cnt, pred_cols.size(), label_cols.size());
    }
    {
        const std::size_t pred_total = pred.group_by.empty() ? 0 : 1;
        const std::size_t label_total = label.group_by.empty() ? 0 : 1;
        std::vector<std::string> pred_cols, label_cols;
        for (const auto& g : pred.group_by) pred_cols.push_back(g.col);
        for (const auto& g : label.group_by) label_cols.push_back(g.col);
        const std::size_t cnt =
            (pred_total == 1 && label_total == 1 && pred_cols == label_cols && pred.having == label.having) ? 1 : 0;
        res["group"] = scores(cnt, pred_total, label_total);
    }
    {
        const std::size_t pred_total = pred.order_by ? 1 : 0;
        const std::size_t label_total = label.order_by ? 1 : 0;
        const bool limits = pred.limit.has_value() == label.limit.has_value();
        const std::size_t cnt = (label.order_by && pred.order_by == label.order_by && limits) ? 1 : 0;
        res["order"] = scores(cnt, pred_total, label_total);
    }
    {
        const std::set<std::string> pred_ao(pred.where.connectors.begin(), pred.where.connectors.end());
        const std::set<std::string> label_ao(label.where.connectors.begin(), label.where.connectors.end());
        res["and/or"] = pred_ao == label_ao;
    }
    {
        std::size_t cnt = 0;
        auto [p1, l1] = nested(pred.intersect, label.intersect, cnt);
        auto [p2, l2] = nested(pred.except, label.except, cnt);
        auto [p3, l3] = nested(pred.union_, label.union_, cnt);
        res["IUEN"] = scores(cnt, p1 + p2 + p3, l1 + l2 + l3);
    }
    {
        const auto pred_kw = keywords(pred);
        const auto label_kw = keywords(label);
        std::size_t cnt = 0;
        for (const auto& k : pred_kw) cnt += label_kw.count(k);
        res["keywords"] = scores(cnt, pred_kw.size(), label_kw.size());
    }
    return res;
}

}  // namespace

OfficialSchema official_schema(const SchemaCatalog& catalog) {
    OfficialSchema schema;
    // Global column ids in catalog order, "*" first, as in the catalog file.
    std::vector<std::string> ids{"__all__"};
    std::map<std::string, int> index;
    for (const auto& table : catalog.tables()) {
        auto& cols = schema.columns[to_lower(table.name)];
        for (const auto& col : table.columns) {
            cols.push_back(to_lower(col.name));
            const std::string id = "__" + to_lower(table.name) + "." + to_lower(col.name) + "__";
            index[id] = static_cast<int>(ids.size());
            ids.push_back(id);
        }
    }
    // Each key pair joins the first existing group holding either end, without
    // merging groups; every member then maps to the group's lowest index.
    std::vector<std::set<int>> groups;
    for (const auto& fk : catalog.foreign_keys()) {
        const int a = index.at("__" + to_lower(fk.from_table) + "." + to_lower(fk.from_column) + "__");
        const int b = index.at("__" + to_lower(fk.to_table) + "." + to_lower(fk.to_column) + "__");
        std::set<int>* target = nullptr;
        for (auto& g : groups) {
            if (g.count(a) || g.count(b)) {
                target = &g;
                break;
            }
        }
        if (!target) target = &groups.emplace_back();
        target->insert(a);
        target->insert(b);
    }
    for (const auto& g : groups) {
        const int lowest = *g.begin();
        for (int idx : g) schema.fk_map[ids[idx]] = ids[lowest];
    }
    return schema;
}

OfficialSql project_official(const Query& query, const OfficialSchema& schema) {
    Projector projector(query, schema);
    return projector.project(query);
}

OfficialSql empty_official_sql() { return OfficialSql{}; }

void prepare_for_match(OfficialSql& sql, const OfficialSchema& schema) {
    disable_values(sql);
    std::set<std::string> valid;
    for (const auto& unit : sql.table_units) {
        if (unit.is_sql) continue;
        const std::string table = unit.table.substr(2, unit.table.size() - 4);
        auto it = schema.columns.find(table);
        if (it == schema.columns.end()) continue;
        for (const auto& col : it->second) valid.insert("__" + table + "." + col + "__");
    }
    ColumnRebuild{valid, schema.fk_map}(sql);
}

OfficialScore official_exact_match(const OfficialSql& pred, const OfficialSql& gold) {
    OfficialScore score;
    score.exact = exact(pred, gold, &score.partial);
    return score;
}

}  // namespace textsql::detail
