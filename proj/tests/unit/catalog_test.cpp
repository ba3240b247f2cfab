#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "textsql/catalog.hpp"
#include "textsql/errors.hpp"

using namespace textsql;
using textsql::testing::read_file;
using textsql::testing::spider;
using textsql::testing::tables_path;

namespace {

std::string one_db(const std::string& tables, const std::string& columns, const std::string& types,
                   const std::string& pks, const std::string& fks) {
    return R"([{"db_id": "d", "table_names_original": )" + tables + R"(, "column_names_original": )" + columns +
           R"(, "column_types": )" + types + R"(, "primary_keys": )" + pks + R"(, "foreign_keys": )" + fks + "}]";
}

ErrorCode load_error(const std::string& text) {
    try {
        load_catalog_from_string(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::Io;
}

const ForeignKey* find_fk(const SchemaCatalog& c, std::string_view from_table, std::string_view from_column) {
    for (const auto& fk : c.foreign_keys()) {
        if (fk.from_table == from_table && fk.from_column == from_column) return &fk;
    }
    return nullptr;
}

}  // namespace

TEST(Catalog, LoadsEveryFixtureEntryInFileOrder) {
    const auto raw = nlohmann::json::parse(read_file(tables_path()));
    const auto catalogs = load_catalog(tables_path());
    ASSERT_EQ(catalogs.size(), raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& entry = raw[i];
        const auto& c = catalogs[i];
        EXPECT_EQ(c.db_id(), entry["db_id"].get<std::string>());
        ASSERT_EQ(c.tables().size(), entry["table_names_original"].size());
        std::size_t columns = 0;
        for (std::size_t t = 0; t < c.tables().size(); ++t) {
            EXPECT_EQ(c.tables()[t].name, entry["table_names_original"][t].get<std::string>());
            columns += c.tables()[t].columns.size();
        }
        // "*" is not a table column.
        EXPECT_EQ(columns + 1, entry["column_names_original"].size());
        EXPECT_EQ(c.foreign_keys().size(), entry["foreign_keys"].size());
        EXPECT_TRUE(validate_catalog(c).empty()) << c.db_id();
    }
}

TEST(Catalog, ConcertSingerHasSinger) {
    const auto& c = spider("concert_singer");
    const TableDef* singer = c.find_table("singer");
    ASSERT_NE(singer, nullptr);
    EXPECT_EQ(singer->name, "singer");
    EXPECT_NE(c.find_column("SINGER", "Song_Name"), nullptr);
    EXPECT_EQ(c.find_column("singer", "nope"), nullptr);
}

TEST(Catalog, LookupIsCaseInsensitiveButNamesKeepCase) {
    const auto& c = spider("car_1");
    const TableDef* t = c.find_table("cars_data");
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(t->name, "cars_data");
    const TableDef* names = c.find_table("CAR_NAMES");
    ASSERT_NE(names, nullptr);
    EXPECT_NE(names->find_column("makeid"), nullptr);
    EXPECT_EQ(names->find_column("makeid")->name, "MakeId");
}

TEST(Catalog, ValueTypesFollowTheFile) {
    const auto& c = spider("concert_singer");
    EXPECT_EQ(c.find_column("singer", "Age")->value_type, ValueType::Number);
    EXPECT_EQ(c.find_column("singer", "Name")->value_type, ValueType::Text);
    EXPECT_EQ(c.find_column("singer", "Is_male")->value_type, ValueType::Boolean);
    EXPECT_EQ(parse_value_type("boolean"), ValueType::Boolean);
    EXPECT_EQ(parse_value_type("time"), ValueType::Time);
    EXPECT_THROW(parse_value_type("blob"), Error);
}

TEST(Catalog, WorldCityCountryCodeIsOneToMany) {
    const auto& c = spider("world_1");
    const ForeignKey* fk = find_fk(c, "city", "CountryCode");
    ASSERT_NE(fk, nullptr);
    EXPECT_EQ(fk->to_table, "country");
    EXPECT_EQ(fk->to_column, "Code");
    EXPECT_EQ(classify_relation(*fk, c), RelationKind::OneToMany);
}

TEST(Catalog, SolePrimaryKeyReferenceIsOneToOne) {
    const auto& c = spider("car_1");
    const ForeignKey* fk = find_fk(c, "cars_data", "Id");
    ASSERT_NE(fk, nullptr);
    EXPECT_EQ(fk->to_table, "car_names");
    EXPECT_EQ(classify_relation(*fk, c), RelationKind::OneToOne);
    EXPECT_EQ(fk->kind, RelationKind::OneToOne);
}

TEST(Catalog, CompositeKeyMemberIsOneToMany) {
    const auto& c = spider("concert_singer");
    const TableDef* bridge = c.find_table("singer_in_concert");
    ASSERT_NE(bridge, nullptr);
    EXPECT_EQ(bridge->primary_key.size(), 2u);
    EXPECT_FALSE(bridge->is_sole_primary_key("concert_ID"));
    const ForeignKey* fk = find_fk(c, "singer_in_concert", "concert_ID");
    ASSERT_NE(fk, nullptr);
    EXPECT_EQ(classify_relation(*fk, c), RelationKind::OneToMany);
}

TEST(Catalog, StoredKindAgreesWithClassificationEverywhere) {
    for (const auto& c : textsql::testing::spider_catalogs()) {
        for (const auto& fk : c.foreign_keys()) EXPECT_EQ(fk.kind, classify_relation(fk, c)) << c.db_id();
    }
}

TEST(Catalog, LoadingIsDeterministic) {
    const std::string text = read_file(tables_path());
    EXPECT_EQ(load_catalog_from_string(text), load_catalog_from_string(text));
}

TEST(Catalog, EmptyListGivesNoCatalogs) { EXPECT_TRUE(load_catalog_from_string("[]").empty()); }

TEST(Catalog, MalformedJsonIsParseError) {
    EXPECT_EQ(load_error("[{"), ErrorCode::Parse);
    EXPECT_EQ(load_error("{}"), ErrorCode::Parse);
    EXPECT_EQ(load_error(R"([{"db_id": "d"}])"), ErrorCode::Parse);
}

TEST(Catalog, ForeignKeyIndexOutOfRangeIsIntegrityError) {
    const auto text = one_db(R"(["a"])", R"([[-1, "*"], [0, "x"]])", R"(["text", "number"])", "[1]", "[[1, 7]]");
    EXPECT_EQ(load_error(text), ErrorCode::Integrity);
}

TEST(Catalog, DuplicateTableIsIntegrityError) {
    const auto text = one_db(R"(["a", "A"])", R"([[-1, "*"], [0, "x"], [1, "y"]])", R"(["text", "number", "number"])",
                             "[]", "[]");
    EXPECT_EQ(load_error(text), ErrorCode::Integrity);
}

TEST(Catalog, MissingFileIsIoError) {
    try {
        load_catalog("/nonexistent/tables.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
}

TEST(Catalog, ValidateReportsDuplicateColumn) {
    SchemaCatalog c("d", {TableDef{"t", {{"a", ValueType::Text}, {"A", ValueType::Number}}, {}}}, {});
    const auto issues = validate_catalog(c);
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].entity.find("t"), std::string::npos);
    EXPECT_NE(issues[0].entity.find("A"), std::string::npos);
}

TEST(Catalog, ValidateReportsForeignKeyToMissingTable) {
    SchemaCatalog c("d", {TableDef{"t", {{"a", ValueType::Text}}, {}}},
                    {ForeignKey{"t", "a", "ghost", "id", RelationKind::OneToMany}});
    const auto issues = validate_catalog(c);
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_NE(issues[0].entity.find("ghost"), std::string::npos);
}

TEST(Catalog, ValidateReportsMissingPrimaryKeyColumn) {
    SchemaCatalog c("d", {TableDef{"t", {{"a", ValueType::Text}}, {"b"}}}, {});
    EXPECT_EQ(validate_catalog(c).size(), 1u);
}

TEST(Catalog, WithDbPathKeepsSchema) {
    const auto& c = spider("pets_1");
    const auto attached = c.with_db_path("/tmp/x.sqlite");
    EXPECT_EQ(attached.tables(), c.tables());
    ASSERT_TRUE(attached.db_path().has_value());
    EXPECT_EQ(*attached.db_path(), "/tmp/x.sqlite");
    EXPECT_FALSE(c.db_path().has_value());
}
