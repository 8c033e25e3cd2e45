#include <gtest/gtest.h>

#include <sstream>

#include "listpolar/io.hpp"

using namespace listpolar;

namespace {

std::string error_of(const std::string& text, const DesignInfo& design = {}) {
  std::istringstream in(text);
  try {
    read_dataset_csv(in, design);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(DatasetCsv, RoundTripIsExact) {
  const ScenarioConfig cfg = make_scenario(PolarityMode::OppositePolarity, CovariateMode::SameEffect, 0.3);
  const Dataset ds = generate_dataset(cfg, 10);
  std::ostringstream out;
  write_dataset_csv(out, ds);
  std::istringstream in(out.str());
  const Dataset back = read_dataset_csv(in);
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_TRUE(back.has_direct);
  EXPECT_TRUE(back.has_truth);
  EXPECT_EQ(back.config.j_items, 4);
  EXPECT_EQ(back.config.n_treatment, 1000);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& a = ds.respondents[i];
    const auto& b = back.respondents[i];
    ASSERT_TRUE(a.id == b.id && a.treat == b.treat && a.y == b.y && a.d == b.d && a.x1 == b.x1 &&
                a.x2 == b.x2 && a.x3 == b.x3 && a.z == b.z);
  }
}

TEST(DatasetCsv, AnyColumnOrderAndOptionalColumns) {
  std::istringstream in("x3,y,treat,x2,id,x1\r\n0.5,3,1,0.1,0,0\r\n-1,2,0,0.2,1,1\r\n");
  const Dataset ds = read_dataset_csv(in);
  EXPECT_FALSE(ds.has_direct);
  EXPECT_FALSE(ds.has_truth);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.respondents[1].x1, 1);
  EXPECT_EQ(ds.respondents[0].x3, 0.5);
  EXPECT_EQ(ds.config.j_items, 2);
  EXPECT_EQ(ds.config.scenario_id, "external");
}

TEST(DatasetCsv, DesignInfoOverridesInference) {
  std::istringstream in("id,treat,y,d,x1,x2,x3\n0,1,3,0,0,0,0\n1,0,1,0,0,0,0\n");
  DesignInfo design;
  design.j_items = 4;
  design.append_zero_item = true;
  const Dataset ds = read_dataset_csv(in, design);
  EXPECT_EQ(ds.config.j_items, 4);
  EXPECT_TRUE(ds.config.append_zero_item);
}

TEST(DatasetCsv, ErrorsCarryLineNumbers) {
  const std::string header = "id,treat,y,d,x1,x2,x3\n";
  EXPECT_NE(error_of(header + "0,1,2,0,0,0.1,0.2\n1,2,1,0,0,0,0\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of(header + "0,1,2,0,0,abc,0.2\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of(header + "0,1,2,0,0,0.1\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of(header + "0,1,-1,0,0,0.1,0.2\n").find("line 2"), std::string::npos);
  DesignInfo design;
  design.j_items = 2;
  EXPECT_NE(error_of(header + "0,0,1,0,0,0,0\n1,0,3,0,0,0,0\n", design).find("line 3"), std::string::npos);
}

TEST(DatasetCsv, HeaderProblems) {
  EXPECT_NE(error_of("id,treat,y,x1,x2,x3,extra\n").find("unknown column 'extra'"), std::string::npos);
  EXPECT_NE(error_of("id,treat,y,x1,x2,x2,x3\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("id,treat,x1,x2,x3\n").find("'y'"), std::string::npos);
  EXPECT_NE(error_of("id,treat,y,x1,x2,x3\n").find("no rows"), std::string::npos);
  EXPECT_NE(error_of("").find("line 1"), std::string::npos);
}

TEST(DatasetCsv, InferredItemsRejectImpossibleTreatedCounts) {
  EXPECT_FALSE(error_of("id,treat,y,x1,x2,x3\n0,0,2,0,0,0\n1,1,4,0,0,0\n").empty());
}

TEST(Config, EmptyObjectIsFullGrid) {
  const auto s = parse_scenarios(nlohmann::json::object());
  EXPECT_EQ(s.size(), 44u);
}

TEST(Config, ScalarsAndArrays) {
  const auto doc = nlohmann::json::parse(R"({
    "polarity_mode": "opposite",
    "covariate_mode": ["same", "OppositeEffect"],
    "group_b_share": [0.1, 0.2, 0.3],
    "n_total": 500, "n_treatment": 250, "alpha3": 0.0, "append_zero_item": true
  })");
  const auto s = parse_scenarios(doc);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s[0].scenario_id, "opposite_same_b0.10");
  EXPECT_EQ(s[5].scenario_id, "opposite_opposite_b0.30");
  EXPECT_EQ(s[0].n_total, 500);
  EXPECT_EQ(s[0].alpha3, 0.0);
  EXPECT_TRUE(s[0].append_zero_item);
  EXPECT_NEAR(s[0].beta0_a, calibrate_intercept(0.25, 1.0), 1e-12);
}

TEST(Config, SingleScenarioId) {
  const auto doc = nlohmann::json::parse(
      R"({"polarity_mode":"nonsensitive","covariate_mode":"same","group_b_share":0.2,"scenario_id":"mine"})");
  const auto s = parse_scenarios(doc);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].scenario_id, "mine");
  EXPECT_THROW(parse_scenarios(nlohmann::json::parse(R"({"scenario_id":"x"})")), ConfigError);
}

TEST(Config, Errors) {
  using nlohmann::json;
  EXPECT_THROW(parse_scenarios(json::parse(R"({"reps": 3})")), ConfigError);
  EXPECT_THROW(parse_scenarios(json::parse(R"({"n_total": "many"})")), ConfigError);
  EXPECT_THROW(parse_scenarios(json::parse(R"({"group_b_share": 0.7})")), ConfigError);
  EXPECT_THROW(parse_scenarios(json::parse(R"({"polarity_mode": "sideways"})")), ConfigError);
  EXPECT_THROW(parse_scenarios(json::parse(R"({"beta0_a": 0.0})")), ConfigError);
  EXPECT_THROW(parse_scenarios(json::parse(R"([1, 2])")), ConfigError);
  EXPECT_THROW(read_scenarios_file("/nonexistent/config.json"), ConfigError);
}

TEST(Csv, NineSignificantDigits) {
  EXPECT_EQ(csv::format_g9(0.1234567891234), "0.123456789");
  EXPECT_EQ(csv::round_g9(0.1234567891234), 0.123456789);
  EXPECT_EQ(csv::format_g9(std::nan("")), "nan");
}
