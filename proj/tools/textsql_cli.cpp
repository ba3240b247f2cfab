#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "textsql/textsql.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAlignment = 3;

struct RunConfig {
    std::string tables;
    std::string examples;
    std::string predictions;
    std::string descriptions;
    std::string db_root;
    std::string scheme = "baseline";
    std::string check_level = "schema";
    double anchor_threshold = 0.85;
    std::size_t anchor_max_per_column = 2;
    bool with_anchors = false;
    std::string format;
    std::string out;
    std::string records;
    std::string db_id;
    std::string input;
    std::string dump_evidence;
    std::string mode = "official";
    unsigned workers = 0;
    long long timeout_ms = 30000;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
    ApiError(textsql_status status, const std::string& what) : std::runtime_error(what), status(status) {}
    textsql_status status;
};

void check(textsql_status status) {
    if (status != TEXTSQL_OK) {
        throw ApiError(status, std::string(textsql_status_name(status)) + ": " + textsql_last_error());
    }
}

struct ContextCloser {
    void operator()(textsql_context* c) const { textsql_context_free(c); }
};
using Context = std::unique_ptr<textsql_context, ContextCloser>;

std::string take(char* text) {
    std::string out = text ? text : "";
    textsql_string_free(text);
    return out;
}

void require_file(const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string(flag) + " is required");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw ApiError(TEXTSQL_E_IO, std::string(flag) + ": no such file: " + path);
    }
}

std::string read_all(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ApiError(TEXTSQL_E_IO, "cannot read " + path);
    return read_all(in);
}

void write_output(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw ApiError(TEXTSQL_E_IO, "cannot write " + cfg.out);
    out << text;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ApiError(TEXTSQL_E_IO, "cannot write " + path);
    out << text;
}

Context open_context(const RunConfig& cfg) {
    require_file(cfg.tables, "--tables");
    textsql_context* raw = nullptr;
    check(textsql_context_open(cfg.tables.c_str(), &raw));
    Context ctx(raw);
    if (!cfg.db_root.empty()) {
        std::error_code ec;
        if (!std::filesystem::is_directory(cfg.db_root, ec)) {
            throw ApiError(TEXTSQL_E_IO, "--db-root: no such directory: " + cfg.db_root);
        }
        check(textsql_context_set_db_root(ctx.get(), cfg.db_root.c_str()));
    }
    if (!cfg.descriptions.empty()) {
        require_file(cfg.descriptions, "--descriptions");
        check(textsql_context_load_descriptions(ctx.get(), cfg.descriptions.c_str()));
    }
    return ctx;
}

int cmd_serialize(const RunConfig& cfg) {
    if (cfg.scheme == "sd" && cfg.descriptions.empty()) throw UsageError("--scheme sd requires --descriptions");
    if (cfg.with_anchors && cfg.db_root.empty()) throw UsageError("--with-anchors requires --db-root");
    require_file(cfg.examples, "--examples");
    auto ctx = open_context(cfg);
    textsql_serialize_options opts{cfg.scheme.c_str(), cfg.with_anchors ? 1 : 0, cfg.anchor_threshold,
                                   cfg.anchor_max_per_column};
    const char* format = cfg.format == "json" ? "json" : "text";
    char* lines = nullptr;
    check(textsql_serialize_examples(ctx.get(), cfg.examples.c_str(), &opts, format, &lines));
    write_output(cfg, take(lines));
    return 0;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

int cmd_check(const RunConfig& cfg) {
    if (cfg.db_id.empty()) throw UsageError("--db-id is required");
    auto ctx = open_context(cfg);
    std::string text;
    if (cfg.input.empty() || cfg.input == "-") {
        text = read_all(std::cin);
    } else {
        require_file(cfg.input, "--input");
        text = read_file(cfg.input);
    }

    const bool as_json = cfg.format == "json";
    std::string out = as_json ? "" : "index\tverdict\treject_offset\n";
    std::istringstream lines(text);
    std::string line;
    for (std::size_t index = 0; std::getline(lines, line); ++index) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        textsql_verdict verdict = TEXTSQL_ACCEPT;
        long long offset = -1;
        check(textsql_check_sql(ctx.get(), cfg.db_id.c_str(), line.c_str(), cfg.check_level.c_str(), &verdict,
                                &offset));
        if (as_json) {
            out += "{\"index\":" + std::to_string(index) + ",\"sql\":\"" + json_escape(line) + "\",\"verdict\":\"" +
                   textsql_verdict_name(verdict) + "\",\"reject_offset\":" +
                   (offset < 0 ? std::string("null") : std::to_string(offset)) + "}\n";
        } else {
            out += std::to_string(index) + "\t" + textsql_verdict_name(verdict) + "\t" +
                   (offset < 0 ? std::string("-") : std::to_string(offset)) + "\n";
        }
    }
    write_output(cfg, out);
    return 0;
}

struct ReportCloser {
    void operator()(textsql_report* r) const { textsql_report_free(r); }
};

int cmd_evaluate(const RunConfig& cfg) {
    if (cfg.db_root.empty()) throw UsageError("--db-root is required");
    require_file(cfg.examples, "--examples");
    require_file(cfg.predictions, "--predictions");
    auto ctx = open_context(cfg);
    textsql_eval_options opts{cfg.mode.c_str(), cfg.workers, cfg.timeout_ms};
    textsql_report* raw = nullptr;
    check(textsql_evaluate(ctx.get(), cfg.examples.c_str(), cfg.predictions.c_str(), &opts, &raw));
    std::unique_ptr<textsql_report, ReportCloser> report(raw);

    char* rendered = nullptr;
    check(textsql_report_render(report.get(), cfg.format == "json" ? "json" : "table", &rendered));
    write_output(cfg, take(rendered));
    if (!cfg.records.empty()) {
        char* records = nullptr;
        check(textsql_report_render(report.get(), "records", &records));
        write_file(cfg.records, take(records));
    }
    return 0;
}

struct TriageCloser {
    void operator()(textsql_triage_report* r) const { textsql_triage_free(r); }
};

int cmd_triage(const RunConfig& cfg) {
    require_file(cfg.records, "--records");
    auto ctx = open_context(cfg);
    const auto records = read_file(cfg.records);
    textsql_triage_report* raw = nullptr;
    check(textsql_triage(ctx.get(), records.c_str(), &raw));
    std::unique_ptr<textsql_triage_report, TriageCloser> report(raw);

    char* rendered = nullptr;
    check(textsql_triage_render(report.get(), cfg.format == "json" ? "json" : "table", &rendered));
    write_output(cfg, take(rendered));
    if (!cfg.dump_evidence.empty()) {
        char* evidence = nullptr;
        check(textsql_triage_render(report.get(), "evidence", &evidence));
        write_file(cfg.dump_evidence, take(evidence));
    }
    return 0;
}

std::string env_name(const std::string& flag) {
    std::string out = "TEXTSQL_";
    for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

template <class T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& target, const std::string& help) {
    return app->add_option("--" + name, target, help)->envname(env_name(name));
}

void add_shared(CLI::App* app, RunConfig& cfg) {
    flag(app, "tables", cfg.tables, "Spider tables.json catalog");
    flag(app, "examples", cfg.examples, "Spider example file (question, query, db_id)");
    flag(app, "predictions", cfg.predictions, "predicted SQL, one per line");
    flag(app, "descriptions", cfg.descriptions, "schema descriptions JSON");
    flag(app, "db-root", cfg.db_root, "directory holding <db_id>/<db_id>.sqlite");
    flag(app, "scheme", cfg.scheme, "baseline, fk or sd")->check(CLI::IsMember({"baseline", "fk", "sd"}));
    flag(app, "check-level", cfg.check_level, "lexical, grammatical or schema")
        ->check(CLI::IsMember({"lexical", "grammatical", "schema"}));
    flag(app, "anchor-threshold", cfg.anchor_threshold, "fuzzy match threshold")->check(CLI::Range(0.0, 1.0));
    flag(app, "format", cfg.format, "json, tsv or table")->check(CLI::IsMember({"json", "tsv", "table", "text"}));
    flag(app, "out", cfg.out, "write output here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"textsql: serialization, constrained checking, evaluation and failure triage for text-to-SQL"};
    app.require_subcommand(1, 1);

    auto* serialize = app.add_subcommand("serialize", "serialize questions with their schema");
    add_shared(serialize, cfg);
    serialize->add_flag("--with-anchors", cfg.with_anchors, "append matched cell values")->envname("TEXTSQL_WITH_ANCHORS");
    flag(serialize, "anchor-max-per-column", cfg.anchor_max_per_column, "anchor values kept per column");

    auto* check_cmd = app.add_subcommand("check", "judge candidate SQL lines, one verdict per line");
    add_shared(check_cmd, cfg);
    flag(check_cmd, "db-id", cfg.db_id, "database the candidates target");
    flag(check_cmd, "input", cfg.input, "candidate SQL file, '-' for stdin");

    auto* evaluate = app.add_subcommand("evaluate", "exact match and execution accuracy");
    add_shared(evaluate, cfg);
    flag(evaluate, "mode", cfg.mode, "official or strict")->check(CLI::IsMember({"official", "strict"}));
    flag(evaluate, "workers", cfg.workers, "worker threads, 0 for all cores");
    flag(evaluate, "timeout-ms", cfg.timeout_ms, "per-query execution timeout");
    flag(evaluate, "records", cfg.records, "write per-example records (JSON lines)");

    auto* triage = app.add_subcommand("triage", "classify failed predictions");
    add_shared(triage, cfg);
    flag(triage, "records", cfg.records, "per-example records from evaluate");
    flag(triage, "dump-evidence", cfg.dump_evidence, "write one annotated record per failure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*serialize) return cmd_serialize(cfg);
        if (*check_cmd) return cmd_check(cfg);
        if (*evaluate) return cmd_evaluate(cfg);
        if (*triage) return cmd_triage(cfg);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ApiError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.status == TEXTSQL_E_ALIGNMENT ? kExitAlignment : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
