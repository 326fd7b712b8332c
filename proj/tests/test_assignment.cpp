#include "oracles.hpp"

#include "infraqa/assignment.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace infraqa;

TEST_SUITE("assignment") {
  TEST_CASE("identity-favouring matrix") {
    Eigen::MatrixXd c = Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
    const Assignment a = optimal_assignment(c);
    CHECK(a.total_cost == 0.0);
    for (int i = 0; i < 4; ++i) CHECK(a.row_to_col[i] == i);
  }

  TEST_CASE("two by two") {
    Eigen::Matrix2d c;
    c << 1, 2, 2, 1;
    const Assignment a = optimal_assignment(c);
    CHECK(a.total_cost == 2.0);
    CHECK(a.row_to_col == std::vector<int>{0, 1});
  }

  TEST_CASE("empty and rectangular inputs") {
    CHECK(optimal_assignment(Eigen::MatrixXd(0, 3)).row_to_col.empty());
    Eigen::MatrixXd wide(2, 4);
    wide << 5, 1, 9, 9, 1, 5, 9, 9;
    const Assignment w = optimal_assignment(wide);
    CHECK(w.total_cost == 2.0);
    CHECK(w.row_to_col == std::vector<int>{1, 0});

    const Assignment t = optimal_assignment(Eigen::MatrixXd(wide.transpose()));
    CHECK(t.total_cost == 2.0);
    CHECK(t.row_to_col == std::vector<int>{1, 0, -1, -1});
  }

  TEST_CASE("ties resolve deterministically") {
    const Eigen::MatrixXd c = Eigen::MatrixXd::Zero(3, 3);
    const Assignment a = optimal_assignment(c);
    const Assignment b = optimal_assignment(c);
    CHECK(a.row_to_col == b.row_to_col);
  }

  TEST_CASE("matches permutation enumeration") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = trial < 100 ? 5 : dim(rng);
      const int m = trial < 100 ? 5 : dim(rng);
      Eigen::MatrixXd c(n, m);
      std::vector<std::vector<double>> rows(n, std::vector<double>(m));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) rows[i][j] = c(i, j) = trial % 3 == 0 ? std::round(u(rng)) : u(rng);
      const Assignment a = optimal_assignment(c);
      CHECK(std::abs(a.total_cost - oracle::permutation_min_cost(rows)) < 1e-9);

      // One-to-one and exactly min(n, m) pairs.
      std::set<int> used;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (a.row_to_col[i] < 0) continue;
        CHECK(used.insert(a.row_to_col[i]).second);
        sum += c(i, a.row_to_col[i]);
      }
      CHECK(static_cast<int>(used.size()) == std::min(n, m));
      CHECK(std::abs(sum - a.total_cost) < 1e-9);
    }
  }
}
