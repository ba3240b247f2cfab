#include "textsql/triage.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "text_util.hpp"
#include "textsql/clause_set.hpp"
#include "textsql/errors.hpp"
#include "textsql/evaluator.hpp"
#include "textsql/sql_parser.hpp"

namespace textsql {

namespace {

using json = nlohmann::ordered_json;
using detail::to_lower;

constexpr std::array<FailureCategory, kCategoryCount> kOrder = {
    FailureCategory::IncompleteSql, FailureCategory::PossibleFalseNegative, FailureCategory::ForeignKeys,
    FailureCategory::LogicalError,  FailureCategory::DkAggregation,         FailureCategory::DkTable,
    FailureCategory::DkColumn,      FailureCategory::DkValue,               FailureCategory::DkComplex,
};

enum class Clause { Select, Where, Having, Other };

struct Features {
    std::set<std::string> tables;
    std::set<std::string> join_pairs;
    std::multiset<std::string> aggregators;
    std::set<std::string> select_columns;
    std::set<std::string> where_columns;
    std::multiset<std::string> literals;
};

std::string column_key(const Expr& e) {
    const std::string owner = !e.derived_alias.empty() ? "derived" : to_lower(e.table.empty() ? e.qualifier : e.table);
    return owner + "." + to_lower(e.column.empty() ? e.name : e.column);
}

void collect(const Query& q, Features& f);

void collect_expr(const Expr& e, Features& f, Clause clause, bool in_aggregate) {
    switch (e.kind) {
        case Expr::Kind::Column:
            if (!in_aggregate && clause == Clause::Select) f.select_columns.insert(column_key(e));
            if (clause == Clause::Where) f.where_columns.insert(column_key(e));
            break;
        case Expr::Kind::Aggregate:
            if (clause == Clause::Select || clause == Clause::Having) f.aggregators.insert(to_string(e.agg));
            in_aggregate = true;
            break;
        case Expr::Kind::Number: f.literals.insert(e.text); break;
        case Expr::Kind::String: f.literals.insert("'" + e.text + "'"); break;
        case Expr::Kind::Compare:
            if (e.compare == CompareOp::Eq && e.args.size() == 2 && clause != Clause::Select &&
                e.args[0]->kind == Expr::Kind::Column && e.args[1]->kind == Expr::Kind::Column) {
                auto a = column_key(*e.args[0]);
                auto b = column_key(*e.args[1]);
                if (a.substr(0, a.find('.')) != b.substr(0, b.find('.'))) {
                    if (b < a) std::swap(a, b);
                    f.join_pairs.insert(a + "=" + b);
                }
            }
            break;
        default: break;
    }
    for (const auto& arg : e.args) collect_expr(*arg, f, clause, in_aggregate);
    if (e.subquery) collect(*e.subquery, f);
}

void collect(const Query& q, Features& f) {
    for (const auto& item : q.select) collect_expr(*item, f, Clause::Select, false);
    for (const auto& src : q.from) {
        if (!src.table.empty()) f.tables.insert(to_lower(src.table));
        if (src.subquery) collect(*src.subquery, f);
        if (src.on) collect_expr(*src.on, f, Clause::Other, false);
    }
    if (q.where) collect_expr(*q.where, f, Clause::Where, false);
    for (const auto& g : q.group_by) collect_expr(*g, f, Clause::Other, false);
    if (q.having) collect_expr(*q.having, f, Clause::Having, false);
    for (const auto& o : q.order_by) collect_expr(*o.expr, f, Clause::Other, false);
    if (q.set_rhs) collect(*q.set_rhs, f);
}

Features features(const Query& q) {
    Features f;
    collect(q, f);
    return f;
}

using ExprEdit = std::function<void(Expr&)>;
using QueryEdit = std::function<void(Query&)>;

SqlAst rewrite(const Query& q, const ExprEdit& on_expr, const QueryEdit& on_query);

ExprPtr rewrite(const ExprPtr& e, const ExprEdit& on_expr, const QueryEdit& on_query) {
    if (!e) return e;
    auto copy = std::make_shared<Expr>(*e);
    for (auto& arg : copy->args) arg = rewrite(arg, on_expr, on_query);
    if (copy->subquery) copy->subquery = rewrite(*copy->subquery, on_expr, on_query);
    on_expr(*copy);
    return copy;
}

SqlAst rewrite(const Query& q, const ExprEdit& on_expr, const QueryEdit& on_query) {
    auto copy = std::make_shared<Query>(q);
    for (auto& item : copy->select) item = rewrite(item, on_expr, on_query);
    for (auto& src : copy->from) {
        src.on = rewrite(src.on, on_expr, on_query);
        if (src.subquery) src.subquery = rewrite(*src.subquery, on_expr, on_query);
    }
    copy->where = rewrite(copy->where, on_expr, on_query);
    for (auto& g : copy->group_by) g = rewrite(g, on_expr, on_query);
    copy->having = rewrite(copy->having, on_expr, on_query);
    for (auto& o : copy->order_by) o.expr = rewrite(o.expr, on_expr, on_query);
    if (copy->set_rhs) copy->set_rhs = rewrite(*copy->set_rhs, on_expr, on_query);
    on_query(*copy);
    return copy;
}

ClauseSet masked_values(const Query& q) {
    auto out = rewrite(
        q,
        [](Expr& e) {
            if (e.kind == Expr::Kind::Number || e.kind == Expr::Kind::String) {
                e.kind = Expr::Kind::String;
                e.text = "?";
            }
        },
        [](Query&) {});
    return normalize(*out);
}

ClauseSet neutral_logic(const Query& q) {
    auto out = rewrite(
        q,
        [](Expr& e) {
            if (e.kind != Expr::Kind::Compare) return;
            e.negated = false;
            switch (e.compare) {
                case CompareOp::Ne:
                case CompareOp::Lt:
                case CompareOp::Gt:
                case CompareOp::Le:
                case CompareOp::Ge:
                    e.compare = CompareOp::Eq;
                    e.text = "=";
                    break;
                default: break;
            }
        },
        [](Query& query) {
            auto placeholder = std::make_shared<Expr>();
            placeholder->kind = Expr::Kind::Number;
            placeholder->text = "0";
            for (auto& o : query.order_by) {
                o.expr = placeholder;
                o.descending = false;
                o.explicit_direction = false;
            }
        });
    return normalize(*out);
}

template <class Set>
std::string show(const Set& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& x : s) {
        if (!first) out += ", ";
        first = false;
        out += x;
    }
    return out + "}";
}

template <class Set>
std::string diff_evidence(const char* what, const Set& gold, const Set& pred) {
    return std::string(what) + " differ: gold " + show(gold) + ", pred " + show(pred);
}

std::string format_percent(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", value);
    return buf;
}

}  // namespace

const std::array<FailureCategory, kCategoryCount>& report_order() { return kOrder; }

const char* to_string(FailureCategory category) noexcept {
    switch (category) {
        case FailureCategory::IncompleteSql: return "IncompleteSql";
        case FailureCategory::PossibleFalseNegative: return "PossibleFalseNegative";
        case FailureCategory::ForeignKeys: return "ForeignKeys";
        case FailureCategory::LogicalError: return "LogicalError";
        case FailureCategory::DkAggregation: return "DkAggregation";
        case FailureCategory::DkTable: return "DkTable";
        case FailureCategory::DkColumn: return "DkColumn";
        case FailureCategory::DkValue: return "DkValue";
        case FailureCategory::DkComplex: return "DkComplex";
    }
    return "?";
}

const char* row_label(FailureCategory category) noexcept {
    switch (category) {
        case FailureCategory::IncompleteSql: return "Incomplete SQL";
        case FailureCategory::PossibleFalseNegative: return "False Negatives";
        case FailureCategory::ForeignKeys: return "Foreign Keys";
        case FailureCategory::LogicalError: return "Logical Errors";
        case FailureCategory::DkAggregation: return "DK - Incorrect AGG";
        case FailureCategory::DkTable: return "DK - Incorrect Table";
        case FailureCategory::DkColumn: return "DK - Incorrect Column";
        case FailureCategory::DkValue: return "DK - Incorrect Value";
        case FailureCategory::DkComplex: return "DK - Complex";
    }
    return "?";
}

FailureCategory parse_category(std::string_view name) {
    for (auto c : kOrder) {
        if (detail::iequals(name, to_string(c)) || detail::iequals(name, row_label(c))) return c;
    }
    throw Error(ErrorCode::Config, "unknown failure category '" + std::string(name) + "'");
}

FailureLabel classify(std::string_view gold, std::string_view pred, const SchemaCatalog& catalog, int em, int ex) {
    SqlAst gold_ast;
    try {
        gold_ast = parse_sql(gold, catalog);
    } catch (const SqlError& e) {
        throw Error(ErrorCode::GoldParse, std::string("gold does not parse: ") + e.what());
    }

    if (detail::trim(pred).empty()) return {FailureCategory::IncompleteSql, "prediction is empty"};
    try {
        parse_sql_unresolved(pred);
    } catch (const SqlError& e) {
        return {FailureCategory::IncompleteSql, std::string("prediction does not parse: ") + e.what()};
    }

    SqlAst pred_ast;
    std::optional<std::string> resolution_error;
    try {
        pred_ast = parse_sql(pred, catalog);
    } catch (const SqlError& e) {
        resolution_error = e.what();
    }

    if (pred_ast && normalize(*gold_ast) == normalize(*pred_ast)) {
        throw Error(ErrorCode::NotAFailure, "prediction is clause-wise identical to gold");
    }
    if (em == 1 && ex == 1) throw Error(ErrorCode::NotAFailure, "prediction matches gold on EM and EX");
    if (em == 0 && ex == 1) return {FailureCategory::PossibleFalseNegative, "EM=0 but EX=1"};

    if (resolution_error) {
        const std::string& msg = *resolution_error;
        if (msg.find("unknown table") != std::string::npos) {
            return {FailureCategory::DkTable, "prediction names a missing table: " + msg};
        }
        if (msg.find("unknown column") != std::string::npos) {
            return {FailureCategory::DkColumn, "prediction names a missing column: " + msg};
        }
        return {FailureCategory::DkComplex, "prediction does not resolve: " + msg};
    }

    const auto g = features(*gold_ast);
    const auto p = features(*pred_ast);

    if (!g.join_pairs.empty() && !p.join_pairs.empty() && g.join_pairs != p.join_pairs) {
        return {FailureCategory::ForeignKeys, diff_evidence("join column pairs", g.join_pairs, p.join_pairs)};
    }
    if (g.aggregators != p.aggregators) {
        return {FailureCategory::DkAggregation, diff_evidence("aggregators", g.aggregators, p.aggregators)};
    }
    if (g.tables != p.tables) {
        return {FailureCategory::DkTable, diff_evidence("FROM tables", g.tables, p.tables)};
    }
    if (g.select_columns != p.select_columns) {
        return {FailureCategory::DkColumn, diff_evidence("SELECT columns", g.select_columns, p.select_columns)};
    }
    if (g.where_columns != p.where_columns) {
        return {FailureCategory::DkColumn, diff_evidence("WHERE columns", g.where_columns, p.where_columns)};
    }
    if (g.literals != p.literals && masked_values(*gold_ast) == masked_values(*pred_ast)) {
        return {FailureCategory::DkValue, diff_evidence("literal values", g.literals, p.literals)};
    }
    if (neutral_logic(*gold_ast) == neutral_logic(*pred_ast)) {
        return {FailureCategory::LogicalError, "only ORDER BY or comparison operators differ: gold " +
                                                   render(normalize(*gold_ast)) + ", pred " +
                                                   render(normalize(*pred_ast))};
    }
    return {FailureCategory::DkComplex, "no narrower rule applies: gold " + render(normalize(*gold_ast)) +
                                            ", pred " + render(normalize(*pred_ast))};
}

FailureLabel classify(std::string_view gold, std::string_view pred, const SchemaCatalog& catalog,
                      const ExecutionResult& gold_exec, const ExecutionResult& pred_exec) {
    const int ex = execution_match(gold_exec, pred_exec);
    int em = 0;
    try {
        em = exact_match(gold, pred, catalog).em;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::GoldParse) throw;
    }
    return classify(gold, pred, catalog, em, ex);
}

const TriageRow& TriageReport::row(FailureCategory category) const {
    for (const auto& r : rows) {
        if (r.category == category) return r;
    }
    throw Error(ErrorCode::Config, "missing report row");
}

TriageReport triage_corpus(const std::vector<TriageInput>& inputs, const std::vector<SchemaCatalog>& catalogs) {
    TriageReport report;
    for (std::size_t i = 0; i < kCategoryCount; ++i) report.rows[i].category = kOrder[i];

    for (const auto& in : inputs) {
        if (in.em == 1 && in.ex == 1) continue;
        const auto* catalog = find_catalog(catalogs, in.db_id);
        if (!catalog) {
            report.warnings.push_back("example " + std::to_string(in.index) + ": unknown db_id '" + in.db_id + "'");
            continue;
        }
        try {
            auto label = classify(in.gold, in.pred, *catalog, in.em, in.ex);
            report.records.push_back({in, std::move(label)});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::GoldParse && e.code() != ErrorCode::NotAFailure) throw;
            report.warnings.push_back("example " + std::to_string(in.index) + ": " + e.what());
        }
    }

    report.total = report.records.size();
    for (const auto& rec : report.records) {
        for (auto& row : report.rows) {
            if (row.category == rec.label.category) ++row.count;
        }
    }
    for (auto& row : report.rows) row.percent = rounded_percent(row.count, report.total);
    return report;
}

std::vector<TriageInput> load_triage_inputs(std::string_view text) {
    auto from_json = [](const json& j, std::size_t fallback_index) {
        TriageInput in;
        in.index = j.value("index", fallback_index);
        in.db_id = j.value("db_id", std::string());
        in.question = j.value("question", std::string());
        in.gold = j.value("gold", std::string());
        in.pred = j.value("pred", std::string());
        in.em = j.value("em", 0);
        in.ex = j.value("ex", 0);
        return in;
    };

    std::vector<TriageInput> out;
    const auto trimmed = detail::trim(text);
    if (trimmed.empty()) return out;
    try {
        if (trimmed.front() == '{' || trimmed.front() == '[') {
            try {
                const auto doc = json::parse(trimmed);
                const json* records = &doc;
                if (doc.is_object()) {
                    if (!doc.contains("records")) {
                        out.push_back(from_json(doc, 0));
                        return out;
                    }
                    records = &doc.at("records");
                }
                for (std::size_t i = 0; i < records->size(); ++i) out.push_back(from_json((*records)[i], i));
                return out;
            } catch (const json::parse_error&) {
                if (trimmed.front() == '[') throw;
            }
        }
        std::size_t i = 0;
        for (const auto& line : split_lines(trimmed)) {
            if (detail::trim(line).empty()) continue;
            out.push_back(from_json(json::parse(line), i++));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("evaluation records: ") + e.what());
    }
    return out;
}

std::string triage_json(const TriageReport& report) {
    json j;
    j["total"] = report.total;
    j["categories"] = json::array();
    for (const auto& row : report.rows) {
        j["categories"].push_back({{"category", to_string(row.category)},
                                   {"label", row_label(row.category)},
                                   {"count", row.count},
                                   {"percent", row.percent}});
    }
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

std::string triage_table(const TriageReport& report) {
    std::size_t width = std::string("Failure Categories").size();
    for (const auto& row : report.rows) width = std::max(width, std::string(row_label(row.category)).size());
    std::ostringstream out;
    auto line = [&](const std::string& label, const std::string& count, const std::string& pct) {
        out << label << std::string(width - label.size() + 2, ' ');
        out << std::string(count.size() < 5 ? 5 - count.size() : 0, ' ') << count << "  ";
        out << std::string(pct.size() < 10 ? 10 - pct.size() : 0, ' ') << pct << "\n";
    };
    line("Failure Categories", "Count", "Percentage");
    for (const auto& row : report.rows) {
        line(row_label(row.category), std::to_string(row.count), format_percent(row.percent));
    }
    line("Total", std::to_string(report.total), report.total ? "100.0" : "0.0");
    return out.str();
}

std::string evidence_jsonl(const TriageReport& report) {
    std::string out;
    for (const auto& rec : report.records) {
        json j;
        j["index"] = rec.input.index;
        j["db_id"] = rec.input.db_id;
        j["question"] = rec.input.question;
        j["gold"] = rec.input.gold;
        j["pred"] = rec.input.pred;
        j["em"] = rec.input.em;
        j["ex"] = rec.input.ex;
        j["category"] = to_string(rec.label.category);
        j["label"] = row_label(rec.label.category);
        j["evidence"] = rec.label.evidence;
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace textsql
