#include "textsql/evaluator.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "official_match.hpp"
#include "text_util.hpp"
#include "textsql/clause_set.hpp"
#include "textsql/errors.hpp"
#include "textsql/sql_parser.hpp"

namespace textsql {

using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kOfficialClauses = {"select", "select(no AGG)", "where", "where(no OP)",
                                                   "group(no Having)", "group", "order", "and/or",
                                                   "IUEN", "keywords", "from"};
const std::vector<std::string> kStrictClauses = {"select", "from", "where", "group", "having", "order", "limit", "set"};

std::map<std::string, bool> all_false(const std::vector<std::string>& names) {
    std::map<std::string, bool> out;
    for (const auto& n : names) out[n] = false;
    return out;
}

bool same_rhs(const ClauseSet& a, const ClauseSet& b) {
    if (a.set_op != b.set_op) return false;
    if (!a.set_rhs || !b.set_rhs) return !a.set_rhs && !b.set_rhs;
    return *a.set_rhs == *b.set_rhs;
}

MatchResult strict_match(const Query& gold, const Query* pred) {
    MatchResult result;
    result.mode = MatchMode::Strict;
    if (!pred) {
        result.per_clause = all_false(kStrictClauses);
        return result;
    }
    const ClauseSet g = normalize(gold);
    const ClauseSet p = normalize(*pred);
    auto& f = result.per_clause;
    f["select"] = g.distinct == p.distinct && g.select == p.select;
    f["from"] = g.from == p.from;
    f["where"] = g.where == p.where;
    f["group"] = g.group_by == p.group_by;
    f["having"] = g.having == p.having;
    f["order"] = g.order_by == p.order_by;
    f["limit"] = g.limit == p.limit;
    f["set"] = same_rhs(g, p);
    result.em = g == p ? 1 : 0;
    return result;
}

MatchResult official_match(const Query& gold, const Query* pred, const detail::OfficialSchema& schema) {
    detail::OfficialSql g;
    try {
        g = detail::project_official(gold, schema);
    } catch (const detail::NotRepresentable&) {
        return strict_match(gold, pred);
    }
    MatchResult result;
    result.mode = MatchMode::Official;
    std::optional<detail::OfficialSql> p;
    if (pred) {
        try {
            p = detail::project_official(*pred, schema);
        } catch (const detail::NotRepresentable&) {
        }
    }
    if (!p) {
        result.per_clause = all_false(kOfficialClauses);
        return result;
    }
    detail::prepare_for_match(g, schema);
    detail::prepare_for_match(*p, schema);
    auto score = detail::official_exact_match(*p, g);
    result.em = score.exact ? 1 : 0;
    result.per_clause = std::move(score.partial);
    return result;
}

MatchResult match_with(std::string_view gold, std::string_view pred, const SchemaCatalog& catalog, MatchMode mode,
                       const detail::OfficialSchema* schema) {
    SqlAst gold_ast;
    try {
        gold_ast = parse_sql(gold, catalog);
    } catch (const SqlError& e) {
        throw Error(ErrorCode::GoldParse, std::string("gold query does not parse: ") + e.what());
    }
    SqlAst pred_ast;
    try {
        pred_ast = parse_sql(pred, catalog);
    } catch (const SqlError&) {
    }
    if (mode == MatchMode::Strict) return strict_match(*gold_ast, pred_ast.get());
    return official_match(*gold_ast, pred_ast.get(), *schema);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string one_decimal(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", value);
    return buf;
}

json record_json(const ExampleRecord& r) {
    json j;
    j["index"] = r.index;
    j["db_id"] = r.db_id;
    j["question"] = r.question;
    j["gold"] = r.gold;
    j["pred"] = r.pred;
    j["em"] = r.em;
    j["ex"] = r.ex;
    j["em_mode"] = to_string(r.em_mode);
    j["per_clause"] = json::object();
    for (const auto& [k, v] : r.per_clause) j["per_clause"][k] = v;
    if (r.gold_error) j["gold_error"] = *r.gold_error;
    if (r.pred_error) j["pred_error"] = *r.pred_error;
    return j;
}

}  // namespace

const char* to_string(MatchMode mode) noexcept { return mode == MatchMode::Official ? "official" : "strict"; }

MatchMode parse_match_mode(std::string_view name) {
    if (detail::iequals(name, "official")) return MatchMode::Official;
    if (detail::iequals(name, "strict")) return MatchMode::Strict;
    throw Error(ErrorCode::Config, "unknown match mode '" + std::string(name) + "'");
}

MatchResult exact_match(std::string_view gold, std::string_view pred, const SchemaCatalog& catalog, MatchMode mode) {
    const auto schema = detail::official_schema(catalog);
    return match_with(gold, pred, catalog, mode, &schema);
}

int execution_match(const ExecutionResult& gold, const ExecutionResult& pred) {
    if (!gold.ok() || !pred.ok()) return 0;
    return results_equivalent(gold.rows, pred.rows, gold.ordered || pred.ordered) ? 1 : 0;
}

int execution_match(std::string_view gold, std::string_view pred, const Database& db,
                    std::chrono::milliseconds timeout) {
    return execution_match(db.execute(gold, timeout), db.execute(pred, timeout));
}

std::vector<EvalExample> load_examples_from_string(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed examples file: ") + e.what());
    }
    if (!doc.is_array()) throw Error(ErrorCode::Parse, "examples file must hold an array");
    std::vector<EvalExample> out;
    for (const auto& entry : doc) {
        try {
            out.push_back({entry.at("question").get<std::string>(), entry.at("db_id").get<std::string>(),
                           entry.at("query").get<std::string>()});
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Parse, std::string("malformed example: ") + e.what());
        }
    }
    return out;
}

std::vector<EvalExample> load_examples(const std::filesystem::path& path) {
    return load_examples_from_string(read_file(path));
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> load_predictions(const std::filesystem::path& path) { return split_lines(read_file(path)); }

double rounded_percent(std::size_t hits, std::size_t total) {
    if (total == 0) return 0.0;
    return std::round(1000.0 * static_cast<double>(hits) / static_cast<double>(total)) / 10.0;
}

double Report::em_percent() const { return rounded_percent(em_hits, count); }
double Report::ex_percent() const { return rounded_percent(ex_hits, count); }

Report evaluate_corpus(const std::vector<EvalExample>& examples, const std::vector<std::string>& predictions,
                       const std::vector<SchemaCatalog>& catalogs, const std::filesystem::path& db_root,
                       const EvalOptions& options) {
    if (examples.size() != predictions.size()) {
        throw Error(ErrorCode::Alignment, std::to_string(examples.size()) + " examples but " +
                                              std::to_string(predictions.size()) + " predictions");
    }

    std::map<std::string, const SchemaCatalog*> catalog_of;
    std::map<std::string, std::filesystem::path> db_of;
    std::map<std::string, detail::OfficialSchema> schema_of;
    for (const auto& ex : examples) {
        if (catalog_of.count(ex.db_id)) continue;
        const SchemaCatalog* catalog = find_catalog(catalogs, ex.db_id);
        if (!catalog) throw Error(ErrorCode::UnknownDbId, "no catalog for db_id '" + ex.db_id + "'");
        catalog_of[ex.db_id] = catalog;
        db_of[ex.db_id] = catalog->db_path() ? *catalog->db_path() : database_path(db_root, ex.db_id);
        schema_of[ex.db_id] = detail::official_schema(*catalog);
        Database::open(db_of[ex.db_id]);  // fail fast on a missing file
    }

    Report report;
    report.count = examples.size();
    report.records.resize(examples.size());
    std::vector<std::vector<std::string>> warnings(examples.size());

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        std::map<std::string, Database> open;
        try {
            for (std::size_t i = next++; i < examples.size(); i = next++) {
                const EvalExample& ex = examples[i];
                ExampleRecord& rec = report.records[i];
                rec.index = i;
                rec.db_id = ex.db_id;
                rec.question = ex.question;
                rec.gold = ex.gold_sql;
                rec.pred = predictions[i];
                rec.em_mode = options.mode;

                try {
                    auto m = match_with(ex.gold_sql, predictions[i], *catalog_of.at(ex.db_id), options.mode,
                                        &schema_of.at(ex.db_id));
                    rec.em = m.em;
                    rec.em_mode = m.mode;
                    rec.per_clause = std::move(m.per_clause);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::GoldParse) throw;
                    warnings[i].push_back("example " + std::to_string(i) + ": " + e.what());
                }

                auto it = open.find(ex.db_id);
                if (it == open.end()) it = open.emplace(ex.db_id, Database::open(db_of.at(ex.db_id))).first;
                const auto gold = it->second.execute(ex.gold_sql, options.timeout);
                const auto pred = it->second.execute(predictions[i], options.timeout);
                rec.gold_error = gold.error;
                rec.pred_error = pred.error;
                if (gold.error) {
                    warnings[i].push_back("example " + std::to_string(i) + ": gold query failed: " + *gold.error);
                }
                rec.ex = execution_match(gold, pred);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!failure) failure = std::current_exception();
            next = examples.size();
        }
    };

    unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, examples.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 0; i < examples.size(); ++i) {
        report.em_hits += report.records[i].em;
        report.ex_hits += report.records[i].ex;
        for (auto& w : warnings[i]) report.warnings.push_back(std::move(w));
    }
    return report;
}

std::string report_json(const Report& report, bool with_records) {
    json j;
    j["count"] = report.count;
    j["em"] = report.em_percent();
    j["ex"] = report.ex_percent();
    j["em_hits"] = report.em_hits;
    j["ex_hits"] = report.ex_hits;
    j["warnings"] = report.warnings;
    if (with_records) {
        j["records"] = json::array();
        for (const auto& r : report.records) j["records"].push_back(record_json(r));
    }
    return j.dump(2) + "\n";
}

std::string report_table(const Report& report) {
    std::string out = "EM " + one_decimal(report.em_percent()) + " EX " + one_decimal(report.ex_percent()) + "\n";
    char line[96];
    std::snprintf(line, sizeof line, "%-8s %8s\n", "metric", "value");
    out += line;
    std::snprintf(line, sizeof line, "%-8s %8zu\n", "count", report.count);
    out += line;
    std::snprintf(line, sizeof line, "%-8s %8s\n", "EM", one_decimal(report.em_percent()).c_str());
    out += line;
    std::snprintf(line, sizeof line, "%-8s %8s\n", "EX", one_decimal(report.ex_percent()).c_str());
    out += line;
    return out;
}

std::string records_jsonl(const Report& report) {
    std::string out;
    for (const auto& r : report.records) out += record_json(r).dump() + "\n";
    return out;
}

}  // namespace textsql
