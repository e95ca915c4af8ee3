#include <gtest/gtest.h>

#include "levybsde/error.hpp"
#include "levybsde/multi_index.hpp"

using namespace levybsde;

TEST(MultiIndex, GradedLexOrderInTwoDimensions) {
  const auto idx = graded_lex_enumerate(2, 2);
  ASSERT_EQ(idx.size(), 5u);
  EXPECT_EQ(idx[0], (MultiIndex{1, 0}));
  EXPECT_EQ(idx[1], (MultiIndex{0, 1}));
  EXPECT_EQ(idx[2], (MultiIndex{2, 0}));
  EXPECT_EQ(idx[3], (MultiIndex{1, 1}));
  EXPECT_EQ(idx[4], (MultiIndex{0, 2}));
}

TEST(MultiIndex, CountsMatchStarsAndBars) {
  // C(n + d - 1, d) indices of degree d.
  EXPECT_EQ(indices_of_degree(3, 2).size(), 6u);
  EXPECT_EQ(indices_of_degree(3, 4).size(), 15u);
  EXPECT_EQ(graded_lex_enumerate(1, 4).size(), 4u);
}

TEST(MultiIndex, LessIsStrictWeakOrder) {
  const auto idx = graded_lex_enumerate(3, 3);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    EXPECT_FALSE(graded_lex_less(idx[a], idx[a]));
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      EXPECT_TRUE(graded_lex_less(idx[a], idx[b]));
      EXPECT_FALSE(graded_lex_less(idx[b], idx[a]));
    }
  }
}

TEST(MultiIndex, MonomialAndDegree) {
  const MultiIndex p{2, 0, 1};
  EXPECT_EQ(p.degree(), 3);
  const double x[3] = {3.0, 0.0, -2.0};
  EXPECT_DOUBLE_EQ(p.monomial(x), -18.0);
  EXPECT_EQ(MultiIndex::unit(3, 1).unit_position(), 1u);
}

TEST(MultiIndex, ParseAcceptsSeveralSeparators) {
  EXPECT_EQ(parse_multi_index("(1,0,2)"), (MultiIndex{1, 0, 2}));
  EXPECT_EQ(parse_multi_index("1;0;2"), (MultiIndex{1, 0, 2}));
  EXPECT_THROW(parse_multi_index("1,-1"), std::exception);
}
