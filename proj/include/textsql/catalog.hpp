#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace textsql {

enum class ValueType { Text, Number, Time, Boolean, Others };

enum class RelationKind { OneToOne, OneToMany };

const char* to_string(ValueType type) noexcept;
const char* to_string(RelationKind kind) noexcept;
ValueType parse_value_type(std::string_view name);

struct ColumnDef {
    std::string name;
    ValueType value_type = ValueType::Text;

    bool operator==(const ColumnDef&) const = default;
};

struct TableDef {
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<std::string> primary_key;

    const ColumnDef* find_column(std::string_view column) const;
    bool in_primary_key(std::string_view column) const;
    /// True when the column is the whole primary key of this table.
    bool is_sole_primary_key(std::string_view column) const;

    bool operator==(const TableDef&) const = default;
};

struct ForeignKey {
    std::string from_table;
    std::string from_column;
    std::string to_table;
    std::string to_column;
    RelationKind kind = RelationKind::OneToMany;

    bool operator==(const ForeignKey&) const = default;
};

struct IntegrityIssue {
    std::string entity;
    std::string message;

    bool operator==(const IntegrityIssue&) const = default;
};

/// Immutable after construction; safe to share between readers.
class SchemaCatalog {
public:
    SchemaCatalog() = default;
    SchemaCatalog(std::string db_id, std::vector<TableDef> tables, std::vector<ForeignKey> foreign_keys,
                  std::optional<std::filesystem::path> db_path = std::nullopt);

    const std::string& db_id() const { return db_id_; }
    const std::vector<TableDef>& tables() const { return tables_; }
    const std::vector<ForeignKey>& foreign_keys() const { return foreign_keys_; }
    const std::optional<std::filesystem::path>& db_path() const { return db_path_; }

    /// Case-insensitive lookups.
    const TableDef* find_table(std::string_view table) const;
    const ColumnDef* find_column(std::string_view table, std::string_view column) const;

    /// Copy with a database file attached.
    SchemaCatalog with_db_path(std::filesystem::path path) const;

    bool operator==(const SchemaCatalog&) const = default;

private:
    std::string db_id_;
    std::vector<TableDef> tables_;
    std::vector<ForeignKey> foreign_keys_;
    std::optional<std::filesystem::path> db_path_;
};

/// Reads a Spider `tables.json` catalog. Throws Error{Parse} on malformed JSON
/// and Error{Integrity} when an entry breaks a catalog invariant.
std::vector<SchemaCatalog> load_catalog(const std::filesystem::path& path);
std::vector<SchemaCatalog> load_catalog_from_string(std::string_view json_text);

RelationKind classify_relation(const ForeignKey& fk, const SchemaCatalog& catalog);

std::vector<IntegrityIssue> validate_catalog(const SchemaCatalog& catalog);

/// Finds the catalog for a db_id or returns nullptr.
const SchemaCatalog* find_catalog(const std::vector<SchemaCatalog>& catalogs, std::string_view db_id);

}  // namespace textsql
