#include <gtest/gtest.h>

#include "orbi/atlas_io.hpp"
#include "orbi/counterexamples.hpp"
#include "orbi/error.hpp"

namespace orbi {
namespace {

const char* kMinimal = R"({"name": "line", "charts": [{"id": "L", "dim": 1,
  "region": {"kind": "ball", "center": ["0"], "radius": "1"},
  "group": {"scalarMode": "exact", "generators": []}}]})";

std::string with_generator(const std::string& gen, const std::string& mode = "exact") {
  return R"({"name": "g", "dim": 2, "charts": [{"id": "A", "dim": 2,
    "region": {"kind": "full"},
    "group": {"scalarMode": ")" +
         mode + R"(", "generators": [)" + gen + "]}}]}";
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_atlas_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

TEST(AtlasIo, MinimalOneDimensionalFile) {
  Atlas a = parse_atlas_text(kMinimal);
  EXPECT_EQ(a.dim(), 1U);
  ASSERT_EQ(a.charts().size(), 1U);
  EXPECT_EQ(a.charts()[0].group.order(), 1U);
  EXPECT_TRUE(a.charts()[0].model.contains(Eigen::VectorXd::Constant(1, 0.5)));
}

TEST(AtlasIo, DecimalInExactModeNamesTheField) {
  try {
    parse_atlas_text(with_generator(R"([["0.5","0"],["0","1"]])"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("charts[0].group.generators[0][0][0]"), std::string::npos) << e.what();
  }
}

TEST(AtlasIo, GroupClosureErrors) {
  EXPECT_EQ(code_of(with_generator(R"([["2","0"],["0","1"]])")), ErrorCode::not_finite);
  EXPECT_EQ(code_of(with_generator(R"([["0","0"],["0","1"]])")), ErrorCode::singular);
  EXPECT_EQ(code_of(with_generator(R"([["0","-1"],["1","0"]])", "fuzzy")), ErrorCode::parse_error);
  EXPECT_EQ(code_of("{"), ErrorCode::parse_error);
  EXPECT_EQ(code_of(R"({"name": "x", "charts": []})"), ErrorCode::parse_error);
}

TEST(AtlasIo, FlatGeneratorForm) {
  Atlas a = parse_atlas_text(with_generator(R"(["0","-1","1","0"])"));
  EXPECT_EQ(a.charts()[0].group.order(), 4U);
}

TEST(AtlasIo, RoundTripPreservesStructure) {
  for (const char* name : {"bad-union-F", "bad-union-Fprime", "bad-union-Fsecond", "mirror", "teardrop(3)", "football(2,3)"}) {
    Atlas a = atlas_fixture(name);
    const std::string text = serialize_atlas(a);
    Atlas b = parse_atlas_text(text);
    EXPECT_EQ(serialize_atlas(b), text) << name;
    EXPECT_EQ(b.name(), a.name());
    EXPECT_EQ(b.mode(), a.mode());
    ASSERT_EQ(b.charts().size(), a.charts().size()) << name;
    EXPECT_EQ(b.transitions().size(), a.transitions().size()) << name;
    EXPECT_EQ(b.identifications().size(), a.identifications().size()) << name;
    for (std::size_t i = 0; i < a.charts().size(); ++i) {
      const Chart& ca = a.charts()[i];
      const Chart& cb = b.charts()[i];
      EXPECT_EQ(ca.id, cb.id);
      ASSERT_EQ(ca.group.order(), cb.group.order()) << name;
      for (std::size_t g = 0; g < ca.group.order(); ++g) EXPECT_TRUE(cb.group.find(ca.group.element(g)).has_value()) << name;
      for (const auto& u : chart_samples(ca, 40, 3)) EXPECT_TRUE(cb.model.contains(u)) << name;
    }
  }
}

}  // namespace
}  // namespace orbi
