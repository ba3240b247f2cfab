#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace textsql::testing {

inline std::filesystem::path fixtures_dir() { return TEXTSQL_FIXTURES_DIR; }
inline std::filesystem::path built_dir() { return TEXTSQL_BUILT_FIXTURES_DIR; }
inline std::filesystem::path spider_dir() { return fixtures_dir() / "spider"; }
inline std::filesystem::path tables_path() { return spider_dir() / "tables.json"; }
inline std::filesystem::path dev_path() { return spider_dir() / "dev.json"; }
inline std::filesystem::path descriptions_path() { return spider_dir() / "descriptions.json"; }
inline std::filesystem::path spider_db_root() { return built_dir() / "database"; }
inline std::filesystem::path toy_db_root() { return built_dir() / "ex"; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::vector<nlohmann::json> rows;
    std::istringstream in(read_file(path));
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
    }
    return rows;
}

}  // namespace textsql::testing
