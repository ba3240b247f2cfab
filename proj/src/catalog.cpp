#include "textsql/catalog.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"
#include "textsql/errors.hpp"

namespace textsql {

using detail::iequals;
using detail::to_lower;
using json = nlohmann::json;

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::Integrity: return "IntegrityError";
        case ErrorCode::Syntax: return "SyntaxError";
        case ErrorCode::Resolution: return "ResolutionError";
        case ErrorCode::EmptyQuestion: return "EmptyQuestion";
        case ErrorCode::UnknownEntity: return "UnknownEntity";
        case ErrorCode::UnknownDbId: return "UnknownDbId";
        case ErrorCode::DbUnavailable: return "DbUnavailable";
        case ErrorCode::GoldParse: return "GoldParseError";
        case ErrorCode::Alignment: return "AlignmentError";
        case ErrorCode::NotAFailure: return "NotAFailure";
        case ErrorCode::ConfigAfterFeed: return "ConfigAfterFeed";
        case ErrorCode::Config: return "ConfigError";
        case ErrorCode::Io: return "IoError";
    }
    return "Error";
}

const char* to_string(ValueType type) noexcept {
    switch (type) {
        case ValueType::Text: return "text";
        case ValueType::Number: return "number";
        case ValueType::Time: return "time";
        case ValueType::Boolean: return "boolean";
        case ValueType::Others: return "others";
    }
    return "others";
}

const char* to_string(RelationKind kind) noexcept {
    return kind == RelationKind::OneToOne ? "one_to_one" : "one_to_many";
}

ValueType parse_value_type(std::string_view name) {
    if (iequals(name, "text")) return ValueType::Text;
    if (iequals(name, "number")) return ValueType::Number;
    if (iequals(name, "time")) return ValueType::Time;
    if (iequals(name, "boolean")) return ValueType::Boolean;
    if (iequals(name, "others")) return ValueType::Others;
    throw Error(ErrorCode::Parse, "unknown column type '" + std::string(name) + "'");
}

const ColumnDef* TableDef::find_column(std::string_view column) const {
    for (const auto& c : columns) {
        if (iequals(c.name, column)) return &c;
    }
    return nullptr;
}

bool TableDef::in_primary_key(std::string_view column) const {
    return std::any_of(primary_key.begin(), primary_key.end(),
                       [&](const std::string& pk) { return iequals(pk, column); });
}

bool TableDef::is_sole_primary_key(std::string_view column) const {
    return primary_key.size() == 1 && iequals(primary_key.front(), column);
}

SchemaCatalog::SchemaCatalog(std::string db_id, std::vector<TableDef> tables, std::vector<ForeignKey> foreign_keys,
                             std::optional<std::filesystem::path> db_path)
    : db_id_(std::move(db_id)),
      tables_(std::move(tables)),
      foreign_keys_(std::move(foreign_keys)),
      db_path_(std::move(db_path)) {}

const TableDef* SchemaCatalog::find_table(std::string_view table) const {
    for (const auto& t : tables_) {
        if (iequals(t.name, table)) return &t;
    }
    return nullptr;
}

const ColumnDef* SchemaCatalog::find_column(std::string_view table, std::string_view column) const {
    const TableDef* t = find_table(table);
    return t ? t->find_column(column) : nullptr;
}

SchemaCatalog SchemaCatalog::with_db_path(std::filesystem::path path) const {
    SchemaCatalog copy = *this;
    copy.db_path_ = std::move(path);
    return copy;
}

RelationKind classify_relation(const ForeignKey& fk, const SchemaCatalog& catalog) {
    // Without uniqueness metadata only a sole primary key can be the "one" side.
    const TableDef* from = catalog.find_table(fk.from_table);
    if (from && from->is_sole_primary_key(fk.from_column)) return RelationKind::OneToOne;
    return RelationKind::OneToMany;
}

std::vector<IntegrityIssue> validate_catalog(const SchemaCatalog& catalog) {
    std::vector<IntegrityIssue> issues;
    std::set<std::string> table_names;
    for (const auto& table : catalog.tables()) {
        if (!table_names.insert(to_lower(table.name)).second) {
            issues.push_back({table.name, "duplicate table name"});
        }
        std::set<std::string> column_names;
        for (const auto& column : table.columns) {
            if (!column_names.insert(to_lower(column.name)).second) {
                issues.push_back({table.name + "." + column.name, "duplicate column name in table " + table.name});
            }
        }
        for (const auto& pk : table.primary_key) {
            if (!table.find_column(pk)) {
                issues.push_back({table.name + "." + pk, "primary key column does not exist"});
            }
        }
    }
    for (const auto& fk : catalog.foreign_keys()) {
        const std::string name =
            fk.from_table + "." + fk.from_column + " -> " + fk.to_table + "." + fk.to_column;
        if (!catalog.find_table(fk.from_table) || !catalog.find_table(fk.to_table)) {
            issues.push_back({name, "foreign key references a missing table"});
            continue;
        }
        if (!catalog.find_column(fk.from_table, fk.from_column) || !catalog.find_column(fk.to_table, fk.to_column)) {
            issues.push_back({name, "foreign key references a missing column"});
            continue;
        }
        if (iequals(fk.from_table, fk.to_table) && iequals(fk.from_column, fk.to_column)) {
            issues.push_back({name, "foreign key references itself"});
            continue;
        }
        if (fk.kind != classify_relation(fk, catalog)) {
            issues.push_back({name, "foreign key kind disagrees with its classification"});
        }
    }
    return issues;
}

const SchemaCatalog* find_catalog(const std::vector<SchemaCatalog>& catalogs, std::string_view db_id) {
    for (const auto& c : catalogs) {
        if (c.db_id() == db_id) return &c;
    }
    return nullptr;
}

namespace {

std::vector<int> flatten_indices(const json& node) {
    std::vector<int> out;
    if (node.is_number_integer()) {
        out.push_back(node.get<int>());
    } else if (node.is_array()) {
        for (const auto& item : node) {
            auto inner = flatten_indices(item);
            out.insert(out.end(), inner.begin(), inner.end());
        }
    } else {
        throw Error(ErrorCode::Parse, "expected a column index");
    }
    return out;
}

SchemaCatalog parse_entry(const json& entry) {
    const std::string db_id = entry.at("db_id").get<std::string>();
    const auto table_names = entry.at("table_names_original").get<std::vector<std::string>>();
    const json& columns = entry.at("column_names_original");
    const json& types = entry.at("column_types");
    if (!columns.is_array() || !types.is_array() || columns.size() != types.size()) {
        throw Error(ErrorCode::Parse, db_id + ": column_names_original and column_types differ in length");
    }

    std::vector<TableDef> tables;
    std::set<std::string> seen_tables;
    for (const auto& name : table_names) {
        if (!seen_tables.insert(to_lower(name)).second) {
            throw Error(ErrorCode::Integrity, db_id + ": duplicate table name '" + name + "'");
        }
        tables.push_back(TableDef{name, {}, {}});
    }

    // Global column index -> (table index, column name); the synthetic "*" keeps table -1.
    std::vector<std::pair<int, std::string>> column_index;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const json& pair = columns[i];
        if (!pair.is_array() || pair.size() != 2) {
            throw Error(ErrorCode::Parse, db_id + ": malformed column entry at index " + std::to_string(i));
        }
        const int table = pair[0].get<int>();
        const std::string name = pair[1].get<std::string>();
        column_index.emplace_back(table, name);
        if (table == -1) continue;
        if (table < 0 || static_cast<std::size_t>(table) >= tables.size()) {
            throw Error(ErrorCode::Integrity, db_id + ": column '" + name + "' belongs to a missing table");
        }
        tables[table].columns.push_back(ColumnDef{name, parse_value_type(types[i].get<std::string>())});
    }

    auto resolve = [&](int index, const char* what) -> const std::pair<int, std::string>& {
        if (index < 0 || static_cast<std::size_t>(index) >= column_index.size() || column_index[index].first < 0) {
            throw Error(ErrorCode::Integrity,
                        db_id + ": " + what + " references column index " + std::to_string(index) + " out of range");
        }
        return column_index[index];
    };

    if (entry.contains("primary_keys")) {
        for (int index : flatten_indices(entry.at("primary_keys"))) {
            const auto& [table, name] = resolve(index, "primary key");
            tables[table].primary_key.push_back(name);
        }
    }

    std::vector<ForeignKey> fks;
    if (entry.contains("foreign_keys")) {
        for (const auto& pair : entry.at("foreign_keys")) {
            if (!pair.is_array() || pair.size() != 2) {
                throw Error(ErrorCode::Parse, db_id + ": malformed foreign key entry");
            }
            const auto& [from_table, from_column] = resolve(pair[0].get<int>(), "foreign key");
            const auto& [to_table, to_column] = resolve(pair[1].get<int>(), "foreign key");
            fks.push_back(ForeignKey{tables[from_table].name, from_column, tables[to_table].name, to_column,
                                     RelationKind::OneToMany});
        }
    }

    SchemaCatalog draft(db_id, tables, fks);
    for (auto& fk : fks) fk.kind = classify_relation(fk, draft);
    SchemaCatalog catalog(db_id, std::move(tables), std::move(fks));

    auto issues = validate_catalog(catalog);
    if (!issues.empty()) {
        throw Error(ErrorCode::Integrity, db_id + ": " + issues.front().entity + ": " + issues.front().message);
    }
    return catalog;
}

}  // namespace

std::vector<SchemaCatalog> load_catalog_from_string(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed catalog file: ") + e.what());
    }
    if (!doc.is_array()) throw Error(ErrorCode::Parse, "catalog file must hold an array of databases");

    std::vector<SchemaCatalog> out;
    out.reserve(doc.size());
    for (const auto& entry : doc) {
        try {
            out.push_back(parse_entry(entry));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Parse, std::string("malformed catalog entry: ") + e.what());
        }
    }
    return out;
}

std::vector<SchemaCatalog> load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open catalog file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_catalog_from_string(buffer.str());
}

}  // namespace textsql
