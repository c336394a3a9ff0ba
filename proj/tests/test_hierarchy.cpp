#include <doctest.h>

#include <random>

#include "htsrec/errors.hpp"
#include "htsrec/hierarchy.hpp"

using namespace htsrec;

namespace {

Hierarchy two_level_example() {
  // T; A, B; AA, AB, BA, BB
  Hierarchy h;
  h.aggregation.resize(3, 4);
  h.aggregation << 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 1, 1;
  h.labels_upper = {"T", "A", "B"};
  h.labels_bottom = {"AA", "AB", "BA", "BB"};
  return h;
}

}  // namespace

TEST_CASE("summing matrix stacks the aggregation over an identity block") {
  const Hierarchy h = Hierarchy::minimal();
  const Eigen::MatrixXd s = summing_matrix(h);
  Eigen::MatrixXd expected(3, 2);
  expected << 1, 1, 1, 0, 0, 1;
  CHECK(s == expected);

  Hierarchy dup;
  dup.aggregation = Eigen::MatrixXd::Identity(2, 2);
  dup.labels_upper = {"U1", "U2"};
  dup.labels_bottom = {"B1", "B2"};
  const Eigen::MatrixXd s_dup = summing_matrix(dup);
  CHECK(s_dup.topRows(2) == Eigen::MatrixXd::Identity(2, 2));
  CHECK(s_dup.bottomRows(2) == Eigen::MatrixXd::Identity(2, 2));

  const Hierarchy deep = two_level_example();
  const Eigen::MatrixXd s_deep = summing_matrix(deep);
  CHECK(s_deep.rows() == 7);
  CHECK(s_deep.cols() == 4);
  CHECK(s_deep.topRows(3) == deep.aggregation);
  CHECK(s_deep.bottomRows(4) == Eigen::MatrixXd::Identity(4, 4));
}

TEST_CASE("coherence residual measures u - A b") {
  const Hierarchy h = Hierarchy::minimal();
  Eigen::VectorXd coherent(3);
  coherent << 5, 2, 3;
  CHECK(coherence_residual(h, coherent)(0) == 0.0);

  Eigen::VectorXd off(3);
  off << 6, 2, 3;
  CHECK(coherence_residual(h, off)(0) == 1.0);

  Eigen::VectorXd wrong_size(4);
  wrong_size.setZero();
  CHECK_THROWS_AS(coherence_residual(h, wrong_size), Error);
}

TEST_CASE("points of the form S b are exactly coherent") {
  const Hierarchy h = two_level_example();
  const Eigen::MatrixXd s = summing_matrix(h);
  std::mt19937_64 gen(41);
  std::uniform_int_distribution<int> value(-50, 50);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd b(4);
    for (int j = 0; j < 4; ++j) b(j) = value(gen);
    const Eigen::VectorXd residual = coherence_residual(h, s * b);
    CHECK(residual.cwiseAbs().maxCoeff() == 0.0);  // integer arithmetic, exact
  }
}

TEST_CASE("hierarchy validation names the offending row or label") {
  Hierarchy h = Hierarchy::minimal();
  h.aggregation(0, 0) = 0.5;
  CHECK_THROWS_WITH_AS(h.validate(),
                       doctest::Contains("non-binary entry"), Error);

  Hierarchy empty_row = Hierarchy::minimal();
  empty_row.aggregation.setZero();
  CHECK_THROWS_WITH_AS(empty_row.validate(), doctest::Contains("no 1 entries"),
                       Error);

  Hierarchy dup = Hierarchy::minimal();
  dup.labels_bottom = {"U", "B2"};
  CHECK_THROWS_WITH_AS(dup.validate(), doctest::Contains("duplicate"), Error);

  Hierarchy mismatch = Hierarchy::minimal();
  mismatch.labels_upper = {"U", "extra"};
  CHECK_THROWS_AS(mismatch.validate(), Error);
}
