#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textsql/catalog.hpp"
#include "textsql/database.hpp"

namespace textsql {

enum class MatchMode {
    /// Clause structure and comparison rules of the reference Spider script:
    /// literal values, DISTINCT and JOIN ... ON conditions do not count.
    Official,
    /// Full ClauseSet equality, values and DISTINCT included.
    Strict,
};

const char* to_string(MatchMode mode) noexcept;
MatchMode parse_match_mode(std::string_view name);

struct MatchResult {
    int em = 0;
    /// Official mode: select, select(no AGG), where, where(no OP),
    /// group(no Having), group, order, and/or, IUEN, keywords, from.
    /// Strict mode: select, from, where, group, having, order, limit, set.
    std::map<std::string, bool> per_clause;
    /// Mode actually applied; Strict when the gold query uses a construct the
    /// reference script cannot parse.
    MatchMode mode = MatchMode::Official;
};

/// Throws Error{GoldParse} when gold does not parse against the catalog. An
/// unparseable prediction scores 0 with every clause false.
MatchResult exact_match(std::string_view gold, std::string_view pred, const SchemaCatalog& catalog,
                        MatchMode mode = MatchMode::Official);

/// 1 iff both run without error and the results are equivalent. Order is
/// enforced when either query has a top-level ORDER BY.
int execution_match(std::string_view gold, std::string_view pred, const Database& db,
                    std::chrono::milliseconds timeout = std::chrono::seconds(30));

/// Same decision from already captured results.
int execution_match(const ExecutionResult& gold, const ExecutionResult& pred);

struct EvalExample {
    std::string question;
    std::string db_id;
    std::string gold_sql;
};

/// Spider example file: JSON array of objects with question, query, db_id.
std::vector<EvalExample> load_examples(const std::filesystem::path& path);
std::vector<EvalExample> load_examples_from_string(std::string_view json_text);

/// One prediction per line, index-aligned with the examples.
std::vector<std::string> load_predictions(const std::filesystem::path& path);
std::vector<std::string> split_lines(std::string_view text);

struct ExampleRecord {
    std::size_t index = 0;
    std::string db_id;
    std::string question;
    std::string gold;
    std::string pred;
    int em = 0;
    int ex = 0;
    MatchMode em_mode = MatchMode::Official;
    std::map<std::string, bool> per_clause;
    std::optional<std::string> gold_error;
    std::optional<std::string> pred_error;
};

struct Report {
    std::size_t count = 0;
    std::size_t em_hits = 0;
    std::size_t ex_hits = 0;
    std::vector<ExampleRecord> records;
    std::vector<std::string> warnings;

    /// Percentages rounded to one decimal; 0.0 for an empty corpus.
    double em_percent() const;
    double ex_percent() const;
};

struct EvalOptions {
    MatchMode mode = MatchMode::Official;
    /// 0 picks the hardware concurrency.
    unsigned workers = 0;
    std::chrono::milliseconds timeout = std::chrono::seconds(30);
};

/// Databases resolve to catalog.db_path() when set, else database_path(db_root, db_id).
/// Throws Error{Alignment} on a length mismatch, Error{UnknownDbId} for an
/// example whose db_id has no catalog and Error{DbUnavailable} for a missing database.
Report evaluate_corpus(const std::vector<EvalExample>& examples, const std::vector<std::string>& predictions,
                       const std::vector<SchemaCatalog>& catalogs, const std::filesystem::path& db_root,
                       const EvalOptions& options = {});

double rounded_percent(std::size_t hits, std::size_t total);

std::string report_json(const Report& report, bool with_records = true);
std::string report_table(const Report& report);
/// Per-example records, one JSON object per line.
std::string records_jsonl(const Report& report);

}  // namespace textsql
