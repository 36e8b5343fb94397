#include "grid/dataset.hpp"
#include "grid/errors.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

using namespace grid;

namespace {
std::vector<Variable> two_vars() {
  return {{"A", VariableKind::Input, "", {0, 10}}, {"B", VariableKind::Output, "", {0, 10}}};
}
}  // namespace

TEST(Regime, RoundTrip) {
  EXPECT_EQ(Regime::parse("obs"), Regime::observational());
  const auto r = Regime::parse("do:Temperature=28.5");
  ASSERT_TRUE(r.interventional());
  EXPECT_EQ(*r.variable, "Temperature");
  EXPECT_DOUBLE_EQ(r.value, 28.5);
  EXPECT_EQ(Regime::parse(r.to_string()), r);
  EXPECT_THROW(Regime::parse("do:T"), InvalidArgument);
  EXPECT_THROW(Regime::parse("intervene"), InvalidArgument);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(28), "28");
  for (double x : {1.0 / 3.0, -2.5e-9, 123456.789, 6.02214076e23})
    EXPECT_EQ(std::strtod(format_number(x).c_str(), nullptr), x);
}

TEST(Csv, RoundTripKeepsWeightsAndRegimes) {
  std::vector<Sample> s{{Eigen::Vector2d(1.5, 2.0), 1.0, Regime::observational()},
                        {Eigen::Vector2d(3.0, 0.25), 2.0, Regime::intervention("A", 3.0)}};
  const auto text = samples_to_csv(two_vars(), s);
  EXPECT_EQ(text, "A,B,weight,regime\n1.5,2,1,obs\n3,0.25,2,do:A=3\n");
  const auto t = parse_samples_csv(text);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"A", "B"}));
  EXPECT_DOUBLE_EQ(t.values(1, 1), 0.25);
  EXPECT_DOUBLE_EQ(t.weights(1), 2.0);
  EXPECT_EQ(t.regimes[1], Regime::intervention("A", 3.0));
}

TEST(Csv, OptionalColumnsAndErrors) {
  const auto t = parse_samples_csv("A,B\n1,2\n3,4\n");
  EXPECT_EQ(t.values.rows(), 2);
  EXPECT_DOUBLE_EQ(t.weights.sum(), 2.0);
  EXPECT_THROW(parse_samples_csv(""), InvalidArgument);
  EXPECT_THROW(parse_samples_csv("A,B\n1\n"), InvalidArgument);
  EXPECT_THROW(parse_samples_csv("A,B\n1,x\n"), InvalidArgument);
  EXPECT_THROW(parse_samples_csv("A,weight\n1,0\n"), InvalidArgument);
}

TEST(DatasetTest, AppendAndObservationalMean) {
  Dataset d = Dataset::from_samples(two_vars(), {{Eigen::Vector2d(1, 0), 1.0, {}}, {Eigen::Vector2d(3, 0), 1.0, {}}});
  d.append({{Eigen::Vector2d(10, 0), 2.0, Regime::intervention("A", 10)}});
  EXPECT_EQ(d.rows(), 3);
  EXPECT_DOUBLE_EQ(d.observational_mean(0), 2.0);
  EXPECT_THROW(d.append({{Eigen::Vector3d(1, 2, 3), 1.0, {}}}), InvalidArgument);
  EXPECT_THROW(d.append({{Eigen::Vector2d(1, 2), 0.0, {}}}), InvalidArgument);
  const auto p = d.permuted_columns({1, 0});
  EXPECT_EQ(p.variables[0].name, "B");
  EXPECT_DOUBLE_EQ(p.values(2, 1), 10.0);
}

TEST(Files, AtomicWriteReplacesContents) {
  const auto path = (std::filesystem::temp_directory_path() / "grid_atomic_test.txt").string();
  write_text_file_atomic(path, "first");
  write_text_file_atomic(path, "second");
  EXPECT_EQ(read_text_file(path), "second");
  std::filesystem::remove(path);
  EXPECT_THROW(read_text_file(path), Error);
}
