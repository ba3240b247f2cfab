#include "textsql/serializer.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "text_util.hpp"
#include "textsql/errors.hpp"

namespace textsql {

namespace {

using detail::to_lower;

class Builder {
public:
    explicit Builder(Scheme scheme) { out_.scheme = scheme; }

    void sep(std::string_view s) { out_.text += s; }

    void add(SegmentKind kind, std::string_view content, std::string table = {}, std::string column = {},
             std::string target = {}) {
        Segment seg;
        seg.kind = kind;
        seg.begin = out_.text.size();
        out_.text += content;
        seg.end = out_.text.size();
        seg.table = std::move(table);
        seg.column = std::move(column);
        seg.target = std::move(target);
        seg.in_description = in_description_;
        out_.segments.push_back(std::move(seg));
    }

    void enter_description() { in_description_ = true; }

    SerializedInput finish() { return std::move(out_); }

private:
    SerializedInput out_;
    bool in_description_ = false;
};

std::string_view checked_question(std::string_view question) {
    auto q = detail::trim(question);
    if (q.empty()) throw Error(ErrorCode::EmptyQuestion, "question is empty");
    return q;
}

// Referenced tables of the markers attached to one column, in key order.
std::vector<std::string> marker_targets(const SchemaCatalog& catalog, const TableDef& table, const ColumnDef& column) {
    std::vector<std::string> targets;
    auto push = [&](const std::string& t) {
        if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    };
    // One-to-one keys whose referenced column is not a primary key are marked
    // on that column only.
    auto referenced_is_key = [&](const ForeignKey& fk) {
        const auto* to = catalog.find_table(fk.to_table);
        return to && to->is_sole_primary_key(fk.to_column);
    };
    for (const auto& fk : catalog.foreign_keys()) {
        const bool from_here = detail::iequals(fk.from_table, table.name) && detail::iequals(fk.from_column, column.name);
        if (from_here && (fk.kind == RelationKind::OneToMany || referenced_is_key(fk))) push(fk.to_table);
    }
    for (const auto& fk : catalog.foreign_keys()) {
        const bool to_here = detail::iequals(fk.to_table, table.name) && detail::iequals(fk.to_column, column.name);
        if (to_here && fk.kind == RelationKind::OneToOne) push(fk.from_table);
    }
    return targets;
}

void emit_schema(Builder& b, std::string_view question, const SchemaCatalog& catalog, bool with_markers) {
    b.add(SegmentKind::Question, question);
    b.sep(" | ");
    b.add(SegmentKind::DbId, catalog.db_id());
    for (const auto& table : catalog.tables()) {
        b.sep(" | ");
        b.add(SegmentKind::Table, to_lower(table.name), table.name);
        b.sep(" : ");
        bool first = true;
        for (const auto& column : table.columns) {
            if (!first) b.sep(" , ");
            first = false;
            b.add(SegmentKind::Column, to_lower(column.name), table.name, column.name);
            if (!with_markers) continue;
            for (const auto& target : marker_targets(catalog, table, column)) {
                b.sep(" ");
                b.add(SegmentKind::FkMarker, "foreign key " + to_lower(target), table.name, column.name, target);
            }
        }
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

const char* to_string(Scheme scheme) noexcept {
    switch (scheme) {
        case Scheme::Baseline: return "baseline";
        case Scheme::Fk: return "fk";
        case Scheme::Sd: return "sd";
    }
    return "?";
}

Scheme parse_scheme(std::string_view name) {
    const auto n = to_lower(name);
    if (n == "baseline") return Scheme::Baseline;
    if (n == "fk") return Scheme::Fk;
    if (n == "sd") return Scheme::Sd;
    throw Error(ErrorCode::Config, "unknown scheme '" + std::string(name) + "'");
}

const char* to_string(SegmentKind kind) noexcept {
    switch (kind) {
        case SegmentKind::Question: return "question";
        case SegmentKind::DbId: return "db_id";
        case SegmentKind::Table: return "table";
        case SegmentKind::Column: return "column";
        case SegmentKind::FkMarker: return "fk_marker";
        case SegmentKind::Description: return "description";
        case SegmentKind::Anchor: return "anchor";
    }
    return "?";
}

const DbDescriptions& DescriptionStore::for_db(std::string_view db_id) const {
    static const DbDescriptions empty;
    auto it = databases.find(std::string(db_id));
    return it == databases.end() ? empty : it->second;
}

DescriptionStore load_descriptions_from_string(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("descriptions: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::Parse, "descriptions: top level must be an object");
    DescriptionStore store;
    for (const auto& [db_id, entry] : doc.items()) {
        if (!entry.is_object()) throw Error(ErrorCode::Parse, "descriptions: entry for " + db_id + " must be an object");
        DbDescriptions d;
        if (auto it = entry.find("tables"); it != entry.end()) {
            for (const auto& [table, text] : it->items()) {
                if (!text.is_string()) throw Error(ErrorCode::Parse, "descriptions: " + db_id + "." + table + " is not a string");
                d.tables[table] = text.get<std::string>();
            }
        }
        if (auto it = entry.find("columns"); it != entry.end()) {
            for (const auto& [key, text] : it->items()) {
                const auto dot = key.find('.');
                if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
                    throw Error(ErrorCode::Parse, "descriptions: column key '" + key + "' must be table.column");
                }
                if (!text.is_string()) throw Error(ErrorCode::Parse, "descriptions: " + db_id + "." + key + " is not a string");
                d.columns[{key.substr(0, dot), key.substr(dot + 1)}] = text.get<std::string>();
            }
        }
        store.databases.emplace(db_id, std::move(d));
    }
    return store;
}

DescriptionStore load_descriptions(const std::filesystem::path& path) {
    return load_descriptions_from_string(read_file(path));
}

std::vector<IntegrityIssue> validate_descriptions(const DbDescriptions& descriptions, const SchemaCatalog& catalog) {
    std::vector<IntegrityIssue> issues;
    for (const auto& [table, text] : descriptions.tables) {
        if (!catalog.find_table(table)) issues.push_back({table, "described table not in catalog " + catalog.db_id()});
    }
    for (const auto& [key, text] : descriptions.columns) {
        if (!catalog.find_column(key.first, key.second)) {
            issues.push_back({key.first + "." + key.second, "described column not in catalog " + catalog.db_id()});
        }
    }
    return issues;
}

SerializedInput serialize_baseline(std::string_view question, const SchemaCatalog& catalog) {
    const auto q = checked_question(question);
    Builder b(Scheme::Baseline);
    emit_schema(b, q, catalog, false);
    return b.finish();
}

SerializedInput serialize_fk(std::string_view question, const SchemaCatalog& catalog) {
    const auto q = checked_question(question);
    Builder b(Scheme::Fk);
    emit_schema(b, q, catalog, true);
    return b.finish();
}

SerializedInput serialize_sd(std::string_view question, const SchemaCatalog& catalog, const DescriptionStore& store) {
    const auto q = checked_question(question);
    const auto& desc = store.for_db(catalog.db_id());
    if (auto issues = validate_descriptions(desc, catalog); !issues.empty()) {
        throw Error(ErrorCode::UnknownEntity, issues.front().entity + ": " + issues.front().message);
    }

    Builder b(Scheme::Sd);
    emit_schema(b, q, catalog, false);
    b.sep(" | ");
    b.enter_description();
    b.add(SegmentKind::Description, "description");

    auto find_text = [](const auto& map, const auto& pred) -> const std::string* {
        for (const auto& [key, text] : map) {
            if (pred(key)) return &text;
        }
        return nullptr;
    };

    for (const auto& table : catalog.tables()) {
        const std::string* table_text = find_text(desc.tables, [&](const std::string& k) {
            return detail::iequals(k, table.name);
        });
        std::vector<std::pair<const ColumnDef*, const std::string*>> column_texts;
        for (const auto& column : table.columns) {
            const std::string* text = find_text(desc.columns, [&](const std::pair<std::string, std::string>& k) {
                return detail::iequals(k.first, table.name) && detail::iequals(k.second, column.name);
            });
            if (text) column_texts.emplace_back(&column, text);
        }
        if (!table_text && column_texts.empty()) continue;

        b.sep(" | ");
        b.add(SegmentKind::Table, to_lower(table.name), table.name);
        b.sep(" : ");
        bool first = true;
        if (table_text) {
            b.add(SegmentKind::Description, *table_text, table.name);
            first = false;
        }
        for (const auto& [column, text] : column_texts) {
            if (!first) b.sep(" , ");
            first = false;
            b.add(SegmentKind::Column, to_lower(column->name), table.name, column->name);
            b.sep(" : ");
            b.add(SegmentKind::Description, *text, table.name, column->name);
        }
    }
    return b.finish();
}

SerializedInput serialize(std::string_view question, const SchemaCatalog& catalog, Scheme scheme,
                          const DescriptionStore* store) {
    switch (scheme) {
        case Scheme::Baseline: return serialize_baseline(question, catalog);
        case Scheme::Fk: return serialize_fk(question, catalog);
        case Scheme::Sd: {
            static const DescriptionStore empty;
            return serialize_sd(question, catalog, store ? *store : empty);
        }
    }
    throw Error(ErrorCode::Config, "unknown scheme");
}

std::size_t expected_marker_count(const ForeignKey& fk, const SchemaCatalog& catalog) {
    const auto* to = catalog.find_table(fk.to_table);
    const bool reverse = fk.kind == RelationKind::OneToOne && to && to->is_sole_primary_key(fk.to_column);
    return reverse ? 2 : 1;
}

SerializedInput attach_anchors(const SerializedInput& input, const std::vector<AnchorMatch>& anchors) {
    if (anchors.empty()) return input;

    auto values_for = [&](const Segment& column) {
        std::vector<std::string> values;
        for (const auto& a : anchors) {
            if (detail::iequals(a.table, column.table) && detail::iequals(a.column, column.column) &&
                std::find(values.begin(), values.end(), a.cell_value) == values.end()) {
                values.push_back(a.cell_value);
            }
        }
        return values;
    };

    Builder b(input.scheme);
    std::size_t cursor = 0;
    const auto& segs = input.segments;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& seg = segs[i];
        if (seg.in_description) b.enter_description();
        b.sep(std::string_view(input.text).substr(cursor, seg.begin - cursor));
        b.add(seg.kind, input.slice(seg), seg.table, seg.column, seg.target);
        cursor = seg.end;
        if (seg.kind != SegmentKind::Column || seg.in_description) continue;

        // Markers for the same column go before the anchor.
        while (i + 1 < segs.size() && segs[i + 1].kind == SegmentKind::FkMarker &&
               segs[i + 1].table == seg.table && segs[i + 1].column == seg.column) {
            ++i;
            b.sep(std::string_view(input.text).substr(cursor, segs[i].begin - cursor));
            b.add(segs[i].kind, input.slice(segs[i]), segs[i].table, segs[i].column, segs[i].target);
            cursor = segs[i].end;
        }
        const auto values = values_for(seg);
        if (values.empty()) continue;
        b.sep(" ( ");
        for (std::size_t v = 0; v < values.size(); ++v) {
            if (v) b.sep(" , ");
            b.add(SegmentKind::Anchor, values[v], seg.table, seg.column);
        }
        b.sep(" )");
    }
    b.sep(std::string_view(input.text).substr(cursor));
    return b.finish();
}

}  // namespace textsql
