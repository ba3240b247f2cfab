#include "textsql/textsql.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "textsql/catalog.hpp"
#include "textsql/checker.hpp"
#include "textsql/database.hpp"
#include "textsql/errors.hpp"
#include "textsql/evaluator.hpp"
#include "textsql/serializer.hpp"
#include "textsql/triage.hpp"

using namespace textsql;
using json = nlohmann::ordered_json;

struct textsql_context {
    std::vector<SchemaCatalog> catalogs;
    std::vector<std::shared_ptr<const SchemaCatalog>> shared;
    std::optional<DescriptionStore> descriptions;
    std::optional<std::filesystem::path> db_root;
};

struct textsql_checker {
    CheckerState state;
};

struct textsql_report {
    Report report;
};

struct textsql_triage_report {
    TriageReport report;
};

namespace {

thread_local std::string last_error;

textsql_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::Parse: return TEXTSQL_E_PARSE;
        case ErrorCode::Integrity: return TEXTSQL_E_INTEGRITY;
        case ErrorCode::Syntax: return TEXTSQL_E_SYNTAX;
        case ErrorCode::Resolution: return TEXTSQL_E_RESOLUTION;
        case ErrorCode::EmptyQuestion: return TEXTSQL_E_EMPTY_QUESTION;
        case ErrorCode::UnknownEntity: return TEXTSQL_E_UNKNOWN_ENTITY;
        case ErrorCode::UnknownDbId: return TEXTSQL_E_UNKNOWN_DB_ID;
        case ErrorCode::DbUnavailable: return TEXTSQL_E_DB_UNAVAILABLE;
        case ErrorCode::GoldParse: return TEXTSQL_E_GOLD_PARSE;
        case ErrorCode::Alignment: return TEXTSQL_E_ALIGNMENT;
        case ErrorCode::NotAFailure: return TEXTSQL_E_NOT_A_FAILURE;
        case ErrorCode::ConfigAfterFeed: return TEXTSQL_E_CONFIG_AFTER_FEED;
        case ErrorCode::Config: return TEXTSQL_E_CONFIG;
        case ErrorCode::Io: return TEXTSQL_E_IO;
    }
    return TEXTSQL_E_INTERNAL;
}

textsql_status fail(textsql_status status, std::string message) {
    last_error = std::move(message);
    return status;
}

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

template <class F>
textsql_status guarded(F&& body) {
    try {
        last_error.clear();
        body();
        return TEXTSQL_OK;
    } catch (const Error& e) {
        return fail(status_of(e.code()), e.what());
    } catch (const InvalidArgument& e) {
        return fail(TEXTSQL_E_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(TEXTSQL_E_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(TEXTSQL_E_INTERNAL, e.what());
    }
}

void require(const void* p, const char* name) {
    if (!p) throw InvalidArgument(std::string(name) + " is NULL");
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

const SchemaCatalog& catalog_for(const textsql_context* ctx, const char* db_id) {
    require(db_id, "db_id");
    const auto* catalog = find_catalog(ctx->catalogs, db_id);
    if (!catalog) throw Error(ErrorCode::UnknownDbId, std::string("no catalog for db_id '") + db_id + "'");
    return *catalog;
}

std::filesystem::path db_file(const textsql_context* ctx, const SchemaCatalog& catalog) {
    if (catalog.db_path()) return *catalog.db_path();
    if (!ctx->db_root) throw Error(ErrorCode::Config, "no database root configured");
    return database_path(*ctx->db_root, catalog.db_id());
}

textsql_context* make_context(std::vector<SchemaCatalog> catalogs) {
    auto ctx = std::make_unique<textsql_context>();
    ctx->catalogs = std::move(catalogs);
    for (const auto& c : ctx->catalogs) ctx->shared.push_back(std::make_shared<const SchemaCatalog>(c));
    return ctx.release();
}

SerializedInput serialize_one(const textsql_context* ctx, const SchemaCatalog& catalog, const char* question,
                              const textsql_serialize_options* options) {
    require(question, "question");
    Scheme scheme = Scheme::Baseline;
    if (options && options->scheme) scheme = parse_scheme(options->scheme);
    if (scheme == Scheme::Sd && !ctx->descriptions) {
        throw Error(ErrorCode::Config, "scheme sd needs a descriptions file");
    }
    auto out = serialize(question, catalog, scheme, ctx->descriptions ? &*ctx->descriptions : nullptr);
    if (options && options->with_anchors) {
        AnchorConfig config;
        if (options->anchor_threshold > 0) config.threshold = options->anchor_threshold;
        if (options->anchor_max_per_column > 0) config.max_per_column = options->anchor_max_per_column;
        const auto db = Database::open(db_file(ctx, catalog));
        out = attach_anchors(out, extract_anchors(question, catalog, db, config));
    }
    return out;
}

json serialized_json(const SerializedInput& in) {
    json j;
    j["scheme"] = to_string(in.scheme);
    j["text"] = in.text;
    j["segments"] = json::array();
    for (const auto& s : in.segments) {
        json seg{{"kind", to_string(s.kind)}, {"begin", s.begin}, {"end", s.end}};
        if (!s.table.empty()) seg["table"] = s.table;
        if (!s.column.empty()) seg["column"] = s.column;
        if (!s.target.empty()) seg["target"] = s.target;
        j["segments"].push_back(std::move(seg));
    }
    return j;
}

MatchMode mode_of(const char* mode) { return mode ? parse_match_mode(mode) : MatchMode::Official; }

}  // namespace

extern "C" {

const char* textsql_last_error(void) { return last_error.c_str(); }

const char* textsql_status_name(textsql_status status) {
    switch (status) {
        case TEXTSQL_OK: return "OK";
        case TEXTSQL_E_INVALID_ARGUMENT: return "InvalidArgument";
        case TEXTSQL_E_PARSE: return "ParseError";
        case TEXTSQL_E_INTEGRITY: return "IntegrityError";
        case TEXTSQL_E_SYNTAX: return "SyntaxError";
        case TEXTSQL_E_RESOLUTION: return "ResolutionError";
        case TEXTSQL_E_EMPTY_QUESTION: return "EmptyQuestion";
        case TEXTSQL_E_UNKNOWN_ENTITY: return "UnknownEntity";
        case TEXTSQL_E_UNKNOWN_DB_ID: return "UnknownDbId";
        case TEXTSQL_E_DB_UNAVAILABLE: return "DbUnavailable";
        case TEXTSQL_E_GOLD_PARSE: return "GoldParseError";
        case TEXTSQL_E_ALIGNMENT: return "AlignmentError";
        case TEXTSQL_E_NOT_A_FAILURE: return "NotAFailure";
        case TEXTSQL_E_CONFIG_AFTER_FEED: return "ConfigAfterFeed";
        case TEXTSQL_E_CONFIG: return "ConfigError";
        case TEXTSQL_E_IO: return "IoError";
        case TEXTSQL_E_INTERNAL: return "InternalError";
    }
    return "Unknown";
}

const char* textsql_verdict_name(textsql_verdict verdict) {
    switch (verdict) {
        case TEXTSQL_ACCEPT: return "accept";
        case TEXTSQL_REJECT: return "reject";
        case TEXTSQL_COMPLETE: return "complete";
    }
    return "unknown";
}

void textsql_string_free(char* text) { std::free(text); }

textsql_status textsql_context_open(const char* tables_path, textsql_context** out) {
    if (!tables_path || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "tables_path and out are required");
    return guarded([&] { *out = make_context(load_catalog(tables_path)); });
}

textsql_status textsql_context_from_json(const char* tables_json, textsql_context** out) {
    if (!tables_json || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "tables_json and out are required");
    return guarded([&] { *out = make_context(load_catalog_from_string(tables_json)); });
}

void textsql_context_free(textsql_context* ctx) { delete ctx; }

textsql_status textsql_context_load_descriptions(textsql_context* ctx, const char* path) {
    if (!ctx || !path) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx and path are required");
    return guarded([&] {
        auto store = load_descriptions(path);
        for (const auto& [db_id, desc] : store.databases) {
            const auto* catalog = find_catalog(ctx->catalogs, db_id);
            if (!catalog) throw Error(ErrorCode::UnknownEntity, "descriptions name unknown db_id '" + db_id + "'");
            if (auto issues = validate_descriptions(desc, *catalog); !issues.empty()) {
                throw Error(ErrorCode::UnknownEntity, issues.front().entity + ": " + issues.front().message);
            }
        }
        ctx->descriptions = std::move(store);
    });
}

textsql_status textsql_context_set_db_root(textsql_context* ctx, const char* db_root) {
    if (!ctx || !db_root) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx and db_root are required");
    return guarded([&] { ctx->db_root = std::filesystem::path(db_root); });
}

textsql_status textsql_context_db_count(const textsql_context* ctx, size_t* out) {
    if (!ctx || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx and out are required");
    *out = ctx->catalogs.size();
    return TEXTSQL_OK;
}

textsql_status textsql_serialize(const textsql_context* ctx, const char* db_id, const char* question,
                                 const textsql_serialize_options* options, char** out_text) {
    if (!ctx || !out_text) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx and out_text are required");
    return guarded([&] { *out_text = dup(serialize_one(ctx, catalog_for(ctx, db_id), question, options).text); });
}

textsql_status textsql_serialize_json(const textsql_context* ctx, const char* db_id, const char* question,
                                      const textsql_serialize_options* options, char** out_json) {
    if (!ctx || !out_json) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx and out_json are required");
    return guarded([&] {
        *out_json = dup(serialized_json(serialize_one(ctx, catalog_for(ctx, db_id), question, options)).dump());
    });
}

textsql_status textsql_serialize_examples(const textsql_context* ctx, const char* examples_path,
                                          const textsql_serialize_options* options, const char* format,
                                          char** out_lines) {
    if (!ctx || !examples_path || !out_lines) {
        return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx, examples_path and out_lines are required");
    }
    return guarded([&] {
        const std::string fmt = format ? format : "text";
        if (fmt != "text" && fmt != "json") throw Error(ErrorCode::Config, "unknown serialize format '" + fmt + "'");
        std::string out;
        const auto examples = load_examples(examples_path);
        for (std::size_t i = 0; i < examples.size(); ++i) {
            const auto& ex = examples[i];
            const auto s = serialize_one(ctx, catalog_for(ctx, ex.db_id.c_str()), ex.question.c_str(), options);
            if (fmt == "json") {
                auto j = serialized_json(s);
                j["index"] = i;
                j["db_id"] = ex.db_id;
                out += j.dump();
            } else {
                out += s.text;
            }
            out += '\n';
        }
        *out_lines = dup(out);
    });
}

textsql_status textsql_checker_new(const textsql_context* ctx, const char* db_id, textsql_checker** out) {
    if (!ctx || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx and out are required");
    return guarded([&] {
        const auto& catalog = catalog_for(ctx, db_id);
        const auto index = static_cast<std::size_t>(&catalog - ctx->catalogs.data());
        *out = new textsql_checker{new_checker(ctx->shared[index])};
    });
}

textsql_status textsql_checker_set_level(textsql_checker* checker, const char* level) {
    if (!checker || !level) return fail(TEXTSQL_E_INVALID_ARGUMENT, "checker and level are required");
    return guarded([&] { checker->state.set_level(parse_check_level(level)); });
}

textsql_status textsql_checker_feed(textsql_checker* checker, const char* fragment, size_t length,
                                    textsql_verdict* out) {
    if (!checker || !out || (!fragment && length)) {
        return fail(TEXTSQL_E_INVALID_ARGUMENT, "checker, fragment and out are required");
    }
    return guarded([&] {
        switch (checker->state.feed(std::string_view(fragment ? fragment : "", length))) {
            case Verdict::Accept: *out = TEXTSQL_ACCEPT; break;
            case Verdict::Reject: *out = TEXTSQL_REJECT; break;
            case Verdict::Complete: *out = TEXTSQL_COMPLETE; break;
        }
    });
}

textsql_status textsql_checker_fork(const textsql_checker* checker, textsql_checker** out) {
    if (!checker || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "checker and out are required");
    return guarded([&] { *out = new textsql_checker{checker->state.fork()}; });
}

textsql_status textsql_checker_reject_offset(const textsql_checker* checker, long long* out) {
    if (!checker || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "checker and out are required");
    const auto off = checker->state.reject_offset();
    *out = off ? static_cast<long long>(*off) : -1;
    return TEXTSQL_OK;
}

void textsql_checker_free(textsql_checker* checker) { delete checker; }

textsql_status textsql_check_sql(const textsql_context* ctx, const char* db_id, const char* sql, const char* level,
                                 textsql_verdict* out, long long* reject_offset) {
    if (!ctx || !sql || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx, sql and out are required");
    return guarded([&] {
        const auto result = check_sql(sql, catalog_for(ctx, db_id), level ? parse_check_level(level) : CheckLevel::Schema);
        *out = result.verdict == Verdict::Accept   ? TEXTSQL_ACCEPT
               : result.verdict == Verdict::Reject ? TEXTSQL_REJECT
                                                   : TEXTSQL_COMPLETE;
        if (reject_offset) *reject_offset = result.reject_offset ? static_cast<long long>(*result.reject_offset) : -1;
    });
}

textsql_status textsql_exact_match(const textsql_context* ctx, const char* db_id, const char* gold, const char* pred,
                                   const char* mode, int* out_em) {
    if (!ctx || !gold || !pred || !out_em) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx, gold, pred and out_em are required");
    return guarded([&] { *out_em = exact_match(gold, pred, catalog_for(ctx, db_id), mode_of(mode)).em; });
}

textsql_status textsql_exact_match_json(const textsql_context* ctx, const char* db_id, const char* gold,
                                        const char* pred, const char* mode, char** out_json) {
    if (!ctx || !gold || !pred || !out_json) {
        return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx, gold, pred and out_json are required");
    }
    return guarded([&] {
        const auto m = exact_match(gold, pred, catalog_for(ctx, db_id), mode_of(mode));
        json j{{"em", m.em}, {"mode", to_string(m.mode)}, {"per_clause", json::object()}};
        for (const auto& [k, v] : m.per_clause) j["per_clause"][k] = v;
        *out_json = dup(j.dump());
    });
}

textsql_status textsql_execution_match(const textsql_context* ctx, const char* db_id, const char* gold,
                                       const char* pred, long long timeout_ms, int* out_ex) {
    if (!ctx || !gold || !pred || !out_ex) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx, gold, pred and out_ex are required");
    return guarded([&] {
        const auto& catalog = catalog_for(ctx, db_id);
        const auto db = Database::open(db_file(ctx, catalog));
        const auto timeout = std::chrono::milliseconds(timeout_ms > 0 ? timeout_ms : 30000);
        *out_ex = execution_match(gold, pred, db, timeout);
    });
}

textsql_status textsql_evaluate(const textsql_context* ctx, const char* examples_path, const char* predictions_path,
                                const textsql_eval_options* options, textsql_report** out) {
    if (!ctx || !examples_path || !predictions_path || !out) {
        return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx, examples_path, predictions_path and out are required");
    }
    return guarded([&] {
        EvalOptions opts;
        if (options) {
            opts.mode = mode_of(options->mode);
            opts.workers = options->workers;
            if (options->timeout_ms > 0) opts.timeout = std::chrono::milliseconds(options->timeout_ms);
        }
        const auto examples = load_examples(examples_path);
        const auto predictions = load_predictions(predictions_path);
        const std::filesystem::path root = ctx->db_root ? *ctx->db_root : std::filesystem::path();
        *out = new textsql_report{evaluate_corpus(examples, predictions, ctx->catalogs, root, opts)};
    });
}

textsql_status textsql_report_metrics(const textsql_report* report, size_t* count, double* em_percent,
                                      double* ex_percent) {
    if (!report) return fail(TEXTSQL_E_INVALID_ARGUMENT, "report is required");
    if (count) *count = report->report.count;
    if (em_percent) *em_percent = report->report.em_percent();
    if (ex_percent) *ex_percent = report->report.ex_percent();
    return TEXTSQL_OK;
}

textsql_status textsql_report_render(const textsql_report* report, const char* format, char** out) {
    if (!report || !format || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "report, format and out are required");
    return guarded([&] {
        const std::string fmt = format;
        if (fmt == "json") *out = dup(report_json(report->report));
        else if (fmt == "table") *out = dup(report_table(report->report));
        else if (fmt == "records") *out = dup(records_jsonl(report->report));
        else throw Error(ErrorCode::Config, "unknown report format '" + fmt + "'");
    });
}

void textsql_report_free(textsql_report* report) { delete report; }

textsql_status textsql_classify(const textsql_context* ctx, const char* db_id, const char* gold, const char* pred,
                                int em, int ex, char** out_category, char** out_evidence) {
    if (!ctx || !gold || !pred || !out_category) {
        return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx, gold, pred and out_category are required");
    }
    return guarded([&] {
        const auto label = classify(gold, pred, catalog_for(ctx, db_id), em, ex);
        char* category = dup(to_string(label.category));
        if (out_evidence) {
            try {
                *out_evidence = dup(label.evidence);
            } catch (...) {
                std::free(category);
                throw;
            }
        }
        *out_category = category;
    });
}

textsql_status textsql_triage(const textsql_context* ctx, const char* records_text, textsql_triage_report** out) {
    if (!ctx || !records_text || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "ctx, records_text and out are required");
    return guarded([&] {
        *out = new textsql_triage_report{triage_corpus(load_triage_inputs(records_text), ctx->catalogs)};
    });
}

textsql_status textsql_triage_total(const textsql_triage_report* report, size_t* out) {
    if (!report || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "report and out are required");
    *out = report->report.total;
    return TEXTSQL_OK;
}

textsql_status textsql_triage_render(const textsql_triage_report* report, const char* format, char** out) {
    if (!report || !format || !out) return fail(TEXTSQL_E_INVALID_ARGUMENT, "report, format and out are required");
    return guarded([&] {
        const std::string fmt = format;
        if (fmt == "json") *out = dup(triage_json(report->report));
        else if (fmt == "table") *out = dup(triage_table(report->report));
        else if (fmt == "evidence") *out = dup(evidence_jsonl(report->report));
        else throw Error(ErrorCode::Config, "unknown triage format '" + fmt + "'");
    });
}

void textsql_triage_free(textsql_triage_report* report) { delete report; }

}  // extern "C"
