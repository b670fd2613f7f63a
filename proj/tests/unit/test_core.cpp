#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace split;
using testsup::oracle_cost;
using testsup::random_qp;
using testsup::random_x;

namespace {

QuadraticProgram triangle_maxcut() {
  WeightedGraph g;
  g.node_count = 3;
  g.edges = {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}};
  return maxcut_to_qubo(g);
}

}  // namespace

TEST_CASE("evaluate_cost basics") {
  const QuadraticProgram tri = triangle_maxcut();

  SECTION("all zeros vanish") {
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
      const auto qp = random_qp(rng, 1 + static_cast<int>(rng.next_below(12)), 0.5);
      REQUIRE(evaluate_cost(qp, Assignment(qp.size(), 0)) == 0.0);
    }
  }

  SECTION("triangle cut of two edges") {
    // Oracle: enumerate all 8 assignments of the 3-node cut program.
    double best = 0.0;
    for (int code = 0; code < 8; ++code) {
      const Assignment x{static_cast<std::uint8_t>(code & 1),
                         static_cast<std::uint8_t>((code >> 1) & 1),
                         static_cast<std::uint8_t>((code >> 2) & 1)};
      best = std::min(best, oracle_cost(tri.quad_terms(), tri.linear(), x));
    }
    REQUIRE(best == -2.0);
    REQUIRE(evaluate_cost(tri, {1, 0, 0}) == -2.0);
  }

  SECTION("linear only") {
    const QuadraticProgram qp(2, {}, {1.5, -2.0});
    REQUIRE(evaluate_cost(qp, {1, 1}) == -0.5);
  }

  SECTION("length mismatch") {
    REQUIRE_THROWS_AS(evaluate_cost(tri, {1, 0}), std::invalid_argument);
  }
}

TEST_CASE("check_feasibility") {
  SECTION("cardinality equality") {
    const QuadraticProgram qp(4, {}, {0, 0, 0, 0},
                              {Constraint::cardinality_eq({0, 1, 2, 3}, 2)});
    REQUIRE(check_feasibility(qp, {1, 0, 1, 0}).empty());
    REQUIRE(check_feasibility(qp, {1, 1, 1, 0}) == std::vector<int>{0});
  }

  SECTION("linear inequality") {
    const QuadraticProgram qp(2, {}, {0, 0},
                              {Constraint::linear_le({0, 1}, {2.0, 3.0}, 4.0)});
    REQUIRE(check_feasibility(qp, {1, 1}) == std::vector<int>{0});
    REQUIRE(check_feasibility(qp, {1, 0}).empty());
  }

  SECTION("length mismatch") {
    const QuadraticProgram qp(2, {}, {0, 0});
    REQUIRE_THROWS_AS(check_feasibility(qp, {1}), std::invalid_argument);
  }
}

TEST_CASE("flip_delta") {
  const QuadraticProgram tri = triangle_maxcut();

  SECTION("from zeros only the linear term activates") {
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
      const int n = 1 + static_cast<int>(rng.next_below(10));
      const auto qp = random_qp(rng, n, 0.5);
      const Assignment zeros(n, 0);
      for (int i = 0; i < n; ++i)
        REQUIRE(flip_delta(qp, zeros, i) == qp.linear()[i]);
    }
  }

  SECTION("triangle loses the cut") {
    REQUIRE(flip_delta(tri, {1, 0, 0}, 0) == 2.0);
  }

  SECTION("involution") {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
      const int n = 2 + static_cast<int>(rng.next_below(10));
      const auto qp = random_qp(rng, n, 0.6, false);
      Assignment x = random_x(rng, n);
      const int i = static_cast<int>(rng.next_below(n));
      const double before = flip_delta(qp, x, i);
      x[i] ^= 1;
      REQUIRE(before + flip_delta(qp, x, i) == 0.0);
    }
  }

  SECTION("index out of range") {
    REQUIRE_THROWS_AS(flip_delta(tri, {0, 0, 0}, 3), std::out_of_range);
    REQUIRE_THROWS_AS(flip_delta(tri, {0, 0, 0}, -1), std::out_of_range);
  }

  SECTION("matches the cost difference on 1000 random cases") {
    Rng rng(4);
    for (int t = 0; t < 1000; ++t) {
      const int n = 1 + static_cast<int>(rng.next_below(16));
      const auto qp = random_qp(rng, n, 0.5, false);
      Assignment x = random_x(rng, n);
      const int i = static_cast<int>(rng.next_below(n));
      const double delta = flip_delta(qp, x, i);
      const double before = evaluate_cost(qp, x);
      x[i] ^= 1;
      REQUIRE(std::abs(delta - (evaluate_cost(qp, x) - before)) <= 1e-9);
    }
  }
}

TEST_CASE("storage canonicalization") {
  SECTION("term order does not matter") {
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
      const int n = 3 + static_cast<int>(rng.next_below(10));
      const auto qp = random_qp(rng, n, 0.6, false);
      auto shuffled = qp.quad_terms();
      rng.shuffle(shuffled);
      const QuadraticProgram qp2(n, shuffled, qp.linear());
      const Assignment x = random_x(rng, n);
      REQUIRE(evaluate_cost(qp, x) == evaluate_cost(qp2, x));
    }
  }

  SECTION("(i,j) and (j,i) keys agree") {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
      const int n = 3 + static_cast<int>(rng.next_below(10));
      const auto qp = random_qp(rng, n, 0.6, false);
      auto rekeyed = qp.quad_terms();
      for (auto& term : rekeyed) std::swap(term.i, term.j);
      const QuadraticProgram qp2(n, rekeyed, qp.linear());
      const Assignment x = random_x(rng, n);
      REQUIRE(evaluate_cost(qp, x) == evaluate_cost(qp2, x));
      for (const auto& term : qp.quad_terms())
        REQUIRE(qp2.quad_coeff(term.j, term.i) == term.value);
    }
  }
}

TEST_CASE("program validation") {
  SECTION("duplicate pairs rejected") {
    REQUIRE_THROWS_AS(
        QuadraticProgram(3, {{0, 1, 1.0}, {1, 0, 2.0}}, {0, 0, 0}),
        std::invalid_argument);
  }
  SECTION("self loops rejected") {
    REQUIRE_THROWS_AS(QuadraticProgram(2, {{1, 1, 1.0}}, {0, 0}),
                      std::invalid_argument);
  }
  SECTION("indices checked") {
    REQUIRE_THROWS_AS(QuadraticProgram(2, {{0, 2, 1.0}}, {0, 0}),
                      std::out_of_range);
  }
  SECTION("linear length checked") {
    REQUIRE_THROWS_AS(QuadraticProgram(3, {}, {0, 0}), std::invalid_argument);
  }
  SECTION("explicit zeros dropped") {
    const QuadraticProgram qp(2, {{0, 1, 0.0}}, {0, 0});
    REQUIRE(qp.quad_terms().empty());
    REQUIRE(qp.quad_coeff(0, 1) == 0.0);
  }
  SECTION("constraint validation") {
    REQUIRE_THROWS_AS(
        QuadraticProgram(3, {}, {0, 0, 0},
                         {Constraint::cardinality_eq({0, 0}, 1)}),
        std::invalid_argument);
    REQUIRE_THROWS_AS(
        QuadraticProgram(3, {}, {0, 0, 0},
                         {Constraint::cardinality_eq({0, 5}, 1)}),
        std::out_of_range);
    Constraint bad = Constraint::cardinality_eq({0, 1}, 1);
    bad.bound = 1.5;
    REQUIRE_THROWS_AS(QuadraticProgram(3, {}, {0, 0, 0}, {bad}),
                      std::invalid_argument);
    Constraint nonunit = Constraint::cardinality_eq({0, 1}, 1);
    nonunit.coefficients[0] = 2.0;
    REQUIRE_THROWS_AS(QuadraticProgram(3, {}, {0, 0, 0}, {nonunit}),
                      std::invalid_argument);
  }
}
