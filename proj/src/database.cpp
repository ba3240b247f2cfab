#include "textsql/database.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cmath>

#include "text_util.hpp"
#include "textsql/errors.hpp"
#include "textsql/sql_lexer.hpp"

namespace textsql {

struct Database::Handle {
    sqlite3* db = nullptr;
    ~Handle() {
        if (db) sqlite3_close_v2(db);
    }
};

namespace {

struct Deadline {
    std::chrono::steady_clock::time_point at;
    bool expired = false;
};

int check_deadline(void* arg) {
    auto* deadline = static_cast<Deadline*>(arg);
    if (std::chrono::steady_clock::now() >= deadline->at) {
        deadline->expired = true;
        return 1;
    }
    return 0;
}

struct StatementCloser {
    void operator()(sqlite3_stmt* stmt) const { sqlite3_finalize(stmt); }
};

int type_rank(const Cell& c) {
    if (std::holds_alternative<std::monostate>(c)) return 0;
    if (std::holds_alternative<std::string>(c)) return 2;
    return 1;
}

double as_number(const Cell& c) {
    if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
    return std::get<double>(c);
}

bool cell_less(const Cell& a, const Cell& b) {
    const int ra = type_rank(a);
    const int rb = type_rank(b);
    if (ra != rb) return ra < rb;
    if (ra == 1) return as_number(a) < as_number(b);
    if (ra == 2) return std::get<std::string>(a) < std::get<std::string>(b);
    return false;
}

bool row_less(const Row& a, const Row& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
}

bool rows_equal(const Row& a, const Row& b, double tolerance) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!cells_equal(a[i], b[i], tolerance)) return false;
    }
    return true;
}

}  // namespace

Database::Database(std::unique_ptr<Handle> handle, std::filesystem::path path)
    : handle_(std::move(handle)), path_(std::move(path)) {}

Database::Database(Database&&) noexcept = default;
Database& Database::operator=(Database&&) noexcept = default;
Database::~Database() = default;

Database Database::open(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::DbUnavailable, "database file not found: " + path.string());
    }
    auto handle = std::make_unique<Handle>();
    const int rc = sqlite3_open_v2(path.string().c_str(), &handle->db, SQLITE_OPEN_READONLY, nullptr);
    if (rc != SQLITE_OK) {
        const std::string message = handle->db ? sqlite3_errmsg(handle->db) : sqlite3_errstr(rc);
        throw Error(ErrorCode::DbUnavailable, "cannot open " + path.string() + ": " + message);
    }
    return Database(std::move(handle), path);
}

ExecutionResult Database::execute(std::string_view sql, std::chrono::milliseconds timeout) const {
    ExecutionResult result;
    result.ordered = has_top_level_order_by(sql);
    sqlite3* db = handle_->db;

    Deadline deadline{std::chrono::steady_clock::now() + timeout};
    sqlite3_progress_handler(db, 1000, check_deadline, &deadline);

    sqlite3_stmt* raw = nullptr;
    const char* tail = nullptr;
    int rc = sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &raw, &tail);
    std::unique_ptr<sqlite3_stmt, StatementCloser> stmt(raw);
    if (rc != SQLITE_OK) {
        result.error = sqlite3_errmsg(db);
    } else if (!stmt) {
        result.error = "empty statement";
    } else {
        std::string_view rest(tail, sql.data() + sql.size() - tail);
        rest = detail::trim(rest);
        while (!rest.empty() && rest.front() == ';') rest = detail::trim(rest.substr(1));
        if (!rest.empty()) result.error = "more than one statement";
    }

    while (!result.error) {
        rc = sqlite3_step(stmt.get());
        if (rc == SQLITE_DONE) break;
        if (rc != SQLITE_ROW) {
            result.error = deadline.expired ? std::string("timeout") : std::string(sqlite3_errmsg(db));
            break;
        }
        const int n = sqlite3_column_count(stmt.get());
        Row row;
        row.reserve(n);
        for (int i = 0; i < n; ++i) {
            switch (sqlite3_column_type(stmt.get(), i)) {
                case SQLITE_INTEGER: row.emplace_back(static_cast<long long>(sqlite3_column_int64(stmt.get(), i))); break;
                case SQLITE_FLOAT: row.emplace_back(sqlite3_column_double(stmt.get(), i)); break;
                case SQLITE_NULL: row.emplace_back(std::monostate{}); break;
                default: {
                    const auto* bytes = static_cast<const char*>(sqlite3_column_blob(stmt.get(), i));
                    const int size = sqlite3_column_bytes(stmt.get(), i);
                    row.emplace_back(std::string(bytes ? bytes : "", static_cast<std::size_t>(size)));
                }
            }
        }
        result.rows.push_back(std::move(row));
    }
    sqlite3_progress_handler(db, 0, nullptr, nullptr);
    if (result.error) result.rows.clear();
    return result;
}

bool has_top_level_order_by(std::string_view sql) {
    int depth = 0;
    const auto tokens = lex(sql);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& tok = tokens[i];
        if (tok.is_punct("(")) ++depth;
        if (tok.is_punct(")")) --depth;
        if (depth == 0 && tok.is_keyword("ORDER") && i + 1 < tokens.size() && tokens[i + 1].is_keyword("BY")) {
            return true;
        }
    }
    return false;
}

bool cells_equal(const Cell& a, const Cell& b, double tolerance) {
    const int ra = type_rank(a);
    if (ra != type_rank(b)) return false;
    if (ra == 0) return true;
    if (ra == 2) return std::get<std::string>(a) == std::get<std::string>(b);
    if (std::holds_alternative<long long>(a) && std::holds_alternative<long long>(b)) {
        return std::get<long long>(a) == std::get<long long>(b);
    }
    return std::fabs(as_number(a) - as_number(b)) <= tolerance;
}

bool results_equivalent(const std::vector<Row>& a, const std::vector<Row>& b, bool ordered, double tolerance) {
    if (a.size() != b.size()) return false;
    if (ordered) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!rows_equal(a[i], b[i], tolerance)) return false;
        }
        return true;
    }
    std::vector<Row> sa = a;
    std::vector<Row> sb = b;
    std::sort(sa.begin(), sa.end(), row_less);
    std::sort(sb.begin(), sb.end(), row_less);
    for (std::size_t i = 0; i < sa.size(); ++i) {
        if (!rows_equal(sa[i], sb[i], tolerance)) return false;
    }
    return true;
}

std::filesystem::path database_path(const std::filesystem::path& db_root, std::string_view db_id) {
    return db_root / std::string(db_id) / (std::string(db_id) + ".sqlite");
}

}  // namespace textsql
