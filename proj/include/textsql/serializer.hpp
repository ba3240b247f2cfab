#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "textsql/catalog.hpp"
#include "textsql/database.hpp"

namespace textsql {

enum class Scheme { Baseline, Fk, Sd };

const char* to_string(Scheme scheme) noexcept;
Scheme parse_scheme(std::string_view name);

enum class SegmentKind { Question, DbId, Table, Column, FkMarker, Description, Anchor };

const char* to_string(SegmentKind kind) noexcept;

struct Segment {
    SegmentKind kind = SegmentKind::Question;
    std::size_t begin = 0;
    std::size_t end = 0;
    /// Owning table for Table/Column/FkMarker/Anchor segments (catalog case);
    /// for FkMarker, `target` names the referenced table.
    std::string table;
    std::string column;
    std::string target;
    /// Set on entries of the description section.
    bool in_description = false;

    bool operator==(const Segment&) const = default;
};

/// Segments are ordered and disjoint; the gaps between them hold only
/// separator text (" | ", " : ", " , ", " ", "( ", " )").
struct SerializedInput {
    Scheme scheme = Scheme::Baseline;
    std::string text;
    std::vector<Segment> segments;

    std::string_view slice(const Segment& s) const { return std::string_view(text).substr(s.begin, s.end - s.begin); }
    bool operator==(const SerializedInput&) const = default;
};

struct DbDescriptions {
    std::map<std::string, std::string> tables;                              // table -> text
    std::map<std::pair<std::string, std::string>, std::string> columns;     // (table, column) -> text
};

struct DescriptionStore {
    std::map<std::string, DbDescriptions> databases;

    /// Empty descriptions when the db has none.
    const DbDescriptions& for_db(std::string_view db_id) const;
};

/// `{db_id: {"tables": {table: text}, "columns": {"table.column": text}}}`.
DescriptionStore load_descriptions(const std::filesystem::path& path);
DescriptionStore load_descriptions_from_string(std::string_view json_text);

/// One issue per description naming a table or column absent from the catalog.
std::vector<IntegrityIssue> validate_descriptions(const DbDescriptions& descriptions, const SchemaCatalog& catalog);

/// `question | db_id | table : col , col | ...` with schema names lowercased.
/// Throws Error{EmptyQuestion} for a blank question.
SerializedInput serialize_baseline(std::string_view question, const SchemaCatalog& catalog);

/// Baseline plus `foreign key <table>` after qualifying foreign-key columns.
SerializedInput serialize_fk(std::string_view question, const SchemaCatalog& catalog);

/// Baseline, then ` | description`, then ` | table : text , column : text` per
/// described table in catalog order. Throws Error{UnknownEntity} when the
/// store names something absent from the catalog.
SerializedInput serialize_sd(std::string_view question, const SchemaCatalog& catalog, const DescriptionStore& store);

SerializedInput serialize(std::string_view question, const SchemaCatalog& catalog, Scheme scheme,
                          const DescriptionStore* store);

/// Number of markers serialize_fk emits for one key: 2 when both ends are
/// primary keys of a one-to-one relation, otherwise 1.
std::size_t expected_marker_count(const ForeignKey& fk, const SchemaCatalog& catalog);

struct AnchorConfig {
    double threshold = 0.85;
    std::size_t max_per_column = 2;
};

struct AnchorMatch {
    std::size_t question_begin = 0;
    std::size_t question_end = 0;
    std::string table;
    std::string column;
    std::string cell_value;
    double score = 0.0;

    bool operator==(const AnchorMatch&) const = default;
};

/// Lowercase, punctuation replaced by spaces, whitespace collapsed.
std::string normalize_for_match(std::string_view text);

/// 2 * LCS(a, b) / (|a| + |b|) over normalized strings; 1.0 for two empty strings.
double similarity(std::string_view a, std::string_view b);

/// Fuzzy matches of text-column cells against question n-grams. Sorted by
/// descending score, then question position. Throws Error{DbUnavailable}
/// when a catalog table cannot be read from the database.
std::vector<AnchorMatch> extract_anchors(std::string_view question, const SchemaCatalog& catalog, const Database& db,
                                         const AnchorConfig& config = {});

/// Appends `( v1 , v2 )` after each anchored column of the schema part, after
/// any foreign-key marker of that column.
SerializedInput attach_anchors(const SerializedInput& input, const std::vector<AnchorMatch>& anchors);

}  // namespace textsql
