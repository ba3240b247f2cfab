#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "textsql/catalog.hpp"
#include "textsql/sql_ast.hpp"

// Clause structure of the reference Spider exact-match script, built from our
// AST instead of its whitespace tokenizer. Field layout, integer codes and
// comparison rules follow that script so that scores agree pair for pair.
namespace textsql::detail {

/// Deep-comparing owning pointer; null compares equal only to null.
template <class T>
struct Box {
    std::shared_ptr<T> ptr;

    friend bool operator==(const Box& a, const Box& b) {
        if (!a.ptr || !b.ptr) return !a.ptr && !b.ptr;
        return *a.ptr == *b.ptr;
    }
};

struct ColUnit {
    int agg = 0;
    std::string col;
    std::optional<bool> distinct = false;  // nullopt once distinct flags are disabled

    bool operator==(const ColUnit&) const = default;
};

struct ValUnit {
    int op = 0;
    ColUnit first;
    std::optional<ColUnit> second;

    bool operator==(const ValUnit&) const = default;
};

struct OfficialSql;

using OfficialValue = std::variant<std::monostate, double, std::string, ColUnit, Box<OfficialSql>>;

struct CondUnit {
    bool not_op = false;
    int op = 0;
    ValUnit lhs;
    OfficialValue val1;
    OfficialValue val2;

    bool operator==(const CondUnit&) const = default;
};

struct Condition {
    std::vector<CondUnit> units;
    std::vector<std::string> connectors;  // "and" / "or" between consecutive units

    bool empty() const { return units.empty(); }
    bool operator==(const Condition&) const = default;
};

struct TableUnit {
    bool is_sql = false;
    std::string table;
    Box<OfficialSql> sql;

    bool operator==(const TableUnit&) const = default;
};

struct OrderBy {
    std::string direction;
    std::vector<ValUnit> items;

    bool operator==(const OrderBy&) const = default;
};

struct OfficialSql {
    std::optional<bool> distinct = false;
    std::vector<std::pair<int, ValUnit>> select;
    std::vector<TableUnit> table_units;
    Condition from_conds;
    Condition where;
    std::vector<ColUnit> group_by;
    Condition having;
    std::optional<OrderBy> order_by;
    std::optional<int> limit;
    Box<OfficialSql> intersect;
    Box<OfficialSql> except;
    Box<OfficialSql> union_;

    bool operator==(const OfficialSql&) const = default;
};

/// Raised when the reference script could not parse the query.
struct NotRepresentable {
    std::string reason;
};

/// Lowercased schema view plus the foreign-key column map of the reference script.
struct OfficialSchema {
    std::map<std::string, std::vector<std::string>> columns;  // table -> columns
    std::map<std::string, std::string> fk_map;                // "__t.c__" -> "__t.c__"
};

OfficialSchema official_schema(const SchemaCatalog& catalog);

/// Throws NotRepresentable.
OfficialSql project_official(const Query& query, const OfficialSchema& schema);

OfficialSql empty_official_sql();

/// Value and column rebuilding applied before comparison.
void prepare_for_match(OfficialSql& sql, const OfficialSchema& schema);

struct OfficialScore {
    bool exact = false;
    std::map<std::string, bool> partial;  // f1 == 1 per component, plus "from"
};

OfficialScore official_exact_match(const OfficialSql& pred, const OfficialSql& gold);

}  // namespace textsql::detail
