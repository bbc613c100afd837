#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "gazegraph/errors.hpp"
#include "gazegraph/json_format.hpp"
#include "gazegraph/random.hpp"

using namespace gazegraph;

TEST(Errors, ExitCodes) {
  EXPECT_EQ(exit_code(ErrorKind::config), 2);
  EXPECT_EQ(exit_code(ErrorKind::argument), 2);
  EXPECT_EQ(exit_code(ErrorKind::data), 3);
  EXPECT_EQ(exit_code(ErrorKind::numeric), 4);
}

TEST(Errors, KindsFollowHierarchy) {
  EXPECT_EQ(ParseError(7, "x").kind(), ErrorKind::data);
  EXPECT_EQ(ParseError(7, "x").line(), 7u);
  EXPECT_STREQ(ParseError(7, "bad").what(), "line 7: bad");
  EXPECT_EQ(PartitionError("x").kind(), ErrorKind::data);
  EXPECT_EQ(NumericError("x").kind(), ErrorKind::numeric);
  EXPECT_EQ(ConfigError("x").kind(), ErrorKind::config);
  EXPECT_THROW(throw PartitionError("p"), DataError);
}

TEST(Random, DeriveSeedIsDeterministicAndSpreads) {
  EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (std::uint64_t stage = 0; stage < 20; ++stage) seen.insert(derive_seed(seed, stage));
  EXPECT_EQ(seen.size(), 400u);
}

TEST(Random, EngineSequenceIsStandardFixed) {
  // 10000th output of a default-seeded mt19937_64 is fixed by the standard
  Rng rng;
  rng.discard(9999);
  EXPECT_EQ(rng(), 9981545732273789042ULL);
}

TEST(Random, Uniform01RangeAndMean) {
  Rng rng(5);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Random, StandardNormalMoments) {
  Rng rng(11);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = standard_normal(rng);
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Random, UniformIndexCoversRange) {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[uniform_index(rng, 7)];
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(JsonFormat, RealsUseSeventeenDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(2.0), "2.0");
  EXPECT_EQ(format_real(-3.5), "-3.5");
  EXPECT_EQ(format_real(1e300), "1.0000000000000001e+300");
  EXPECT_EQ(format_real(INFINITY), "\"inf\"");
  EXPECT_EQ(format_real(-INFINITY), "\"-inf\"");
  EXPECT_EQ(format_real(NAN), "\"nan\"");
}

TEST(JsonFormat, DumpIsStableAndRoundTrips) {
  Json j;
  j["b"] = 0.1;
  j["a"] = Json::array({1, 2.5, "x"});
  j["c"] = Json::object();
  j["d"] = INFINITY;
  const auto text = dump_fixed(j);
  EXPECT_EQ(text, dump_fixed(j));
  EXPECT_EQ(text,
            "{\n \"b\": 0.10000000000000001,\n \"a\": [\n  1,\n  2.5,\n  \"x\"\n ],\n \"c\": {},\n \"d\": \"inf\"\n}\n");
  const auto back = Json::parse(text);
  EXPECT_EQ(read_real(back["b"]), 0.1);
  EXPECT_TRUE(std::isinf(read_real(back["d"])));
  EXPECT_EQ(dump_fixed(j, -1), "{\"b\":0.10000000000000001,\"a\":[1,2.5,\"x\"],\"c\":{},\"d\":\"inf\"}\n");
}

TEST(JsonFormat, ReadRealRejectsOtherStrings) {
  EXPECT_THROW(read_real(Json("abc")), DataError);
  EXPECT_TRUE(std::isnan(read_real(Json("nan"))));
}

TEST(JsonFormat, ReadJsonFileErrors) {
  EXPECT_THROW(read_json_file("/nonexistent/file.json"), ConfigError);
  const std::string path = ::testing::TempDir() + "bad.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(read_json_file(path), DataError);
}
