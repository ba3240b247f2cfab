#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace textsql {

/// NULL, INTEGER, REAL, TEXT (BLOB bytes are kept as text).
using Cell = std::variant<std::monostate, long long, double, std::string>;
using Row = std::vector<Cell>;

struct ExecutionResult {
    /// Rows in the order the engine returned them.
    std::vector<Row> rows;
    /// The query has a top-level ORDER BY, so row order is meaningful.
    bool ordered = false;
    std::optional<std::string> error;

    bool ok() const { return !error.has_value(); }
};

/// Read-only connection to one database file. One instance per thread.
class Database {
public:
    /// Throws Error{DbUnavailable} when the file is missing or cannot be opened.
    static Database open(const std::filesystem::path& path);

    Database(Database&&) noexcept;
    Database& operator=(Database&&) noexcept;
    ~Database();

    /// Never throws for SQL failures; they land in ExecutionResult::error.
    /// A statement running past the timeout is interrupted and reported as an error.
    ExecutionResult execute(std::string_view sql,
                            std::chrono::milliseconds timeout = std::chrono::seconds(30)) const;

    const std::filesystem::path& path() const { return path_; }

private:
    struct Handle;
    Database(std::unique_ptr<Handle> handle, std::filesystem::path path);

    std::unique_ptr<Handle> handle_;
    std::filesystem::path path_;
};

/// ORDER BY outside any parentheses, found by a token scan so it also works
/// for SQL outside the parser's dialect.
bool has_top_level_order_by(std::string_view sql);

/// Cells equal with numeric comparison across INTEGER/REAL and an absolute
/// tolerance for reals.
bool cells_equal(const Cell& a, const Cell& b, double tolerance = 1e-6);

/// Multiset comparison, or positional when `ordered`.
bool results_equivalent(const std::vector<Row>& a, const std::vector<Row>& b, bool ordered,
                        double tolerance = 1e-6);

/// `<db_root>/<db_id>/<db_id>.sqlite`
std::filesystem::path database_path(const std::filesystem::path& db_root, std::string_view db_id);

}  // namespace textsql
