#include <gtest/gtest.h>

#include "xsite/app/config_io.hpp"
#include "xsite/errors.hpp"

namespace xsite::app {
namespace {

using nlohmann::json;

json minimal() {
  return json::parse(R"({
    "design": {"alpha": 0.75},
    "spec": {"mu": {"y10": 1, "y20": 0, "y13": 1.5, "y14": 2.5, "y23": 0.5, "y24": -0.5},
             "n_users": 1000, "n_reps": 5, "seed": 3}
  })");
}

std::string field_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(Config, DefaultsFilled) {
  const ExperimentConfig c = config_from_json(minimal());
  EXPECT_EQ(c.design.alpha, 0.75);
  EXPECT_EQ(c.design.site1_split, 0.5);
  EXPECT_EQ(c.spec.n_users, 1000u);
  EXPECT_EQ(c.sweep.axis, SweepAxis::POverlap);
  EXPECT_EQ(c.sweep.values, std::vector<double>{0.5});
  EXPECT_EQ(c.methods.size(), 4u);
}

TEST(Config, NormalizedFormRoundTrips) {
  const ExperimentConfig c = config_from_json(minimal());
  const json normalized = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(normalized)), normalized);
  EXPECT_EQ(normalized["spec"]["delta1"], 1.0);
  EXPECT_EQ(normalized["spec"]["delta2"], -1.0);
  EXPECT_EQ(normalized["schema_version"], kSchemaVersion);
}

TEST(Config, FieldPathsInErrors) {
  json j = minimal();
  j["design"]["alpha"] = 0.5;
  EXPECT_EQ(field_of(j), "design.alpha");

  j = minimal();
  j["spec"]["mu"].erase("y13");
  EXPECT_EQ(field_of(j), "spec.mu.y13");

  j = minimal();
  j["spec"]["p_overlap"] = 2.0;
  EXPECT_EQ(field_of(j), "spec.p_overlap");

  j = minimal();
  j["spec"]["colour"] = "red";
  EXPECT_EQ(field_of(j), "spec.colour");

  j = minimal();
  j["spec"]["delta1"] = 3.0;
  EXPECT_EQ(field_of(j), "spec.delta1");

  j = minimal();
  j["sweep"] = {{"axis", "p_overlap"}, {"values", {0.2, 1.4}}};
  EXPECT_EQ(field_of(j), "sweep.values[1]");

  j = minimal();
  j["methods"] = {"corrected", "cate"};
  EXPECT_EQ(field_of(j), "methods[1]");

  j = minimal();
  j["schema_version"] = 99;
  EXPECT_EQ(field_of(j), "schema_version");

  j = minimal();
  j.erase("design");
  EXPECT_EQ(field_of(j), "design");
}

TEST(Config, HalfAlphaMessageNamesRule) {
  json j = minimal();
  j["design"]["alpha"] = 0.5;
  try {
    config_from_json(j);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("eps_alpha"), std::string::npos) << e.what();
  }
}

TEST(Config, ConsistentDeltasAccepted) {
  json j = minimal();
  j["spec"]["delta1"] = 1.0;
  j["spec"]["delta2"] = -1.0;
  EXPECT_NO_THROW(config_from_json(j));
}

TEST(RunId, ContentAddressed) {
  const ExperimentConfig c = config_from_json(minimal());
  const std::string id = run_id_for(c);
  EXPECT_EQ(id.size(), 32u);
  EXPECT_EQ(id.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(run_id_for(config_from_json(config_to_json(c))), id);
  ExperimentConfig other = c;
  other.spec.seed = 4;
  EXPECT_NE(run_id_for(other), id);
}

TEST(LoadConfig, BadFilesAreValidationErrors) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), ValidationError);
  EXPECT_NO_THROW(load_config(std::string(XSITE_CONFIG_DIR) + "/example.json"));
}

}  // namespace
}  // namespace xsite::app
