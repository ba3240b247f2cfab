#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "textsql/catalog.hpp"

namespace textsql {

enum class CheckLevel {
    Lexical,      // only lexing must succeed
    Grammatical,  // dialect grammar prefix-viability
    Schema,       // grammar plus table, column and alias resolution
};

enum class Verdict { Accept, Reject, Complete };

enum class CheckerStatus { Open, Complete, Dead };

const char* to_string(CheckLevel level) noexcept;
const char* to_string(Verdict verdict) noexcept;
CheckLevel parse_check_level(std::string_view name);

/// Incremental validity state for one decoding hypothesis. Fragments may cut
/// through lexemes; the trailing partial lexeme is judged by whether any
/// completion of it keeps the prefix viable. Single owner; use fork() to branch.
class CheckerState {
public:
    explicit CheckerState(std::shared_ptr<const SchemaCatalog> catalog);

    /// Dead is absorbing: once rejected, every later feed returns Reject.
    Verdict feed(std::string_view piece);

    CheckerState fork() const { return *this; }

    /// Throws Error{ConfigAfterFeed} once anything has been fed.
    void set_level(CheckLevel level);
    CheckLevel level() const { return level_; }

    CheckerStatus status() const { return status_; }
    const std::string& text() const { return text_; }
    /// Byte offset where the rejecting fragment started.
    std::optional<std::size_t> reject_offset() const { return reject_offset_; }
    const SchemaCatalog& catalog() const { return *catalog_; }

private:
    Verdict judge(const std::string& text) const;

    std::shared_ptr<const SchemaCatalog> catalog_;
    std::string text_;
    CheckLevel level_ = CheckLevel::Schema;
    CheckerStatus status_ = CheckerStatus::Open;
    bool fed_ = false;
    std::optional<std::size_t> reject_offset_;
};

CheckerState new_checker(const SchemaCatalog& catalog);
CheckerState new_checker(std::shared_ptr<const SchemaCatalog> catalog);

/// Sets the level and returns the same state.
CheckerState& check_level(CheckerState& state, CheckLevel level);

struct LineVerdict {
    Verdict verdict = Verdict::Accept;
    std::optional<std::size_t> reject_offset;
};

/// Feeds `sql` one byte at a time and returns the last verdict.
LineVerdict check_sql(std::string_view sql, const SchemaCatalog& catalog, CheckLevel level = CheckLevel::Schema);

}  // namespace textsql
