#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textsql/catalog.hpp"
#include "textsql/database.hpp"

namespace textsql {

/// Declared in report row order.
enum class FailureCategory {
    IncompleteSql,
    PossibleFalseNegative,
    ForeignKeys,
    LogicalError,
    DkAggregation,
    DkTable,
    DkColumn,
    DkValue,
    DkComplex,
};

inline constexpr std::size_t kCategoryCount = 9;

/// Report row order.
const std::array<FailureCategory, kCategoryCount>& report_order();

/// Identifier form, e.g. "DkAggregation".
const char* to_string(FailureCategory category) noexcept;
/// Row label, e.g. "DK - Incorrect AGG".
const char* row_label(FailureCategory category) noexcept;
FailureCategory parse_category(std::string_view name);

struct FailureLabel {
    FailureCategory category = FailureCategory::DkComplex;
    std::string evidence;
};

/// First matching rule wins: incomplete SQL, EM=0 with EX=1, join column
/// pairs, aggregators, FROM tables, SELECT/WHERE columns, literal values,
/// order/comparison flips, then the residual DkComplex.
/// Throws Error{NotAFailure} when em and ex are both 1 or the queries are
/// clause-wise identical, and Error{GoldParse} when gold does not parse.
FailureLabel classify(std::string_view gold, std::string_view pred, const SchemaCatalog& catalog, int em, int ex);

/// Derives EM (official mode) and EX from the captured executions.
FailureLabel classify(std::string_view gold, std::string_view pred, const SchemaCatalog& catalog,
                      const ExecutionResult& gold_exec, const ExecutionResult& pred_exec);

struct TriageInput {
    std::size_t index = 0;
    std::string db_id;
    std::string question;
    std::string gold;
    std::string pred;
    int em = 0;
    int ex = 0;
};

struct TriageRecord {
    TriageInput input;
    FailureLabel label;
};

struct TriageRow {
    FailureCategory category = FailureCategory::DkComplex;
    std::size_t count = 0;
    double percent = 0.0;
};

struct TriageReport {
    std::size_t total = 0;
    std::array<TriageRow, kCategoryCount> rows{};
    std::vector<TriageRecord> records;
    std::vector<std::string> warnings;

    const TriageRow& row(FailureCategory category) const;
};

/// Classifies every failed input. Correct pairs (em = ex = 1) are skipped;
/// pairs with an unknown db or an unparseable gold become warnings.
TriageReport triage_corpus(const std::vector<TriageInput>& inputs, const std::vector<SchemaCatalog>& catalogs);

/// Reads evaluator records: a report JSON object with "records", a JSON array,
/// or JSON lines.
std::vector<TriageInput> load_triage_inputs(std::string_view text);

std::string triage_json(const TriageReport& report);
std::string triage_table(const TriageReport& report);
/// One JSON object per failure with its label and evidence.
std::string evidence_jsonl(const TriageReport& report);

}  // namespace textsql
