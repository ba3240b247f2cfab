#pragma once

#include <string>
#include <vector>

#include "fixture_paths.hpp"
#include "textsql/catalog.hpp"

namespace textsql::testing {

inline const std::vector<SchemaCatalog>& spider_catalogs() {
    static const std::vector<SchemaCatalog> catalogs = load_catalog(tables_path());
    return catalogs;
}

inline const SchemaCatalog& spider(const std::string& db_id) {
    const SchemaCatalog* c = find_catalog(spider_catalogs(), db_id);
    if (!c) throw std::runtime_error("no fixture catalog " + db_id);
    return *c;
}

}  // namespace textsql::testing
