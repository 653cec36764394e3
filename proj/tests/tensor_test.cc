#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sparseview/tensor.h"

namespace sparseview {
namespace {

TEST(NumericArrayTest, ShapeAndValueCountMustAgree) {
  EXPECT_THROW(NumericArray({2, 2}, std::vector<double>{1.0, 2.0, 3.0}), std::invalid_argument);
  const NumericArray m = NumericArray::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.shape_string(), "[2, 3]");
}

TEST(NumericArrayTest, RankOneIsASingleRow) {
  const NumericArray v = NumericArray::vector({1, 2, 3});
  EXPECT_EQ(v.rows(), 1u);
  EXPECT_EQ(v.cols(), 3u);
  EXPECT_THROW(v.dim(1), std::out_of_range);
}

TEST(NumericArrayTest, FinitenessCheck) {
  NumericArray a({3}, 1.0);
  EXPECT_TRUE(a.all_finite());
  a[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(a.all_finite());
}

TEST(NamedArraysTest, RejectsDuplicateNames) {
  NamedArrays s;
  s.add("w", NumericArray({2}, 1.0));
  EXPECT_THROW(s.add("w", NumericArray({2}, 1.0)), std::invalid_argument);
  EXPECT_THROW(s.at("missing"), std::out_of_range);
}

TEST(NamedArraysTest, KeepsInsertionOrderAndLayout) {
  NamedArrays s;
  s.add("b", NumericArray({2}, 1.0));
  s.add("a", NumericArray({1, 3}, 2.0));
  EXPECT_EQ(s.names(), (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(s.total_values(), 5u);
  const NamedArrays z = s.zeros_like();
  EXPECT_TRUE(z.same_layout(s));
  EXPECT_EQ(z.at("a")[2], 0.0);
}

TEST(NamedArraysTest, AddScaled) {
  NamedArrays a, b;
  a.add("x", NumericArray::vector({1, 2}));
  b.add("x", NumericArray::vector({10, 20}));
  a.add_scaled(b, 0.5);
  EXPECT_EQ(a.at("x")[0], 6.0);
  EXPECT_EQ(a.at("x")[1], 12.0);
  NamedArrays c;
  c.add("y", NumericArray::vector({1, 2}));
  EXPECT_THROW(a.add_scaled(c, 1.0), std::invalid_argument);
}

}  // namespace
}  // namespace sparseview
