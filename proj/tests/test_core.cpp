#include <doctest.h>

#include <algorithm>
#include <random>

#include "cdmca/core.hpp"
#include "cdmca/error.hpp"
#include "cdmca/log.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace cdmca;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Parse;
}

double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST_CASE("layout offsets are prefix sums") {
  DomainLayout layout({2, 3, 4}, {5, 1, 2});
  CHECK(layout.domains() == 3);
  CHECK(layout.total_features() == 9);
  CHECK(layout.total_items() == 8);
  CHECK(layout.col_offset(2) == 5);
  CHECK(layout.row_offset(1) == 5);
  CHECK(layout.row_offset(2) == 6);
  CHECK(layout.global_row(2, 1) == 7);
  CHECK(layout.locate(7) == std::pair<Index, Index>{2, 1});
  CHECK(layout.locate(5) == std::pair<Index, Index>{1, 0});
  CHECK(kind_of([&] { (void)layout.global_row(1, 1); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([] { DomainLayout({2, 0}, {1, 1}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { DomainLayout({}, {}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("standardize_columns") {
  SUBCASE("mean zero, population variance one, parameters recorded") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 10, 2, 20, 3, 60;
    const auto t = standardize_columns({0, x, std::nullopt});
    for (Index j = 0; j < 2; ++j) {
      CHECK(t.data.col(j).mean() == doctest::Approx(0.0).epsilon(1e-14));
      CHECK(t.data.col(j).squaredNorm() / 3.0 == doctest::Approx(1.0).epsilon(1e-14));
    }
    REQUIRE(t.standardization);
    CHECK(t.standardization->mean(0) == doctest::Approx(2.0));
    CHECK(t.standardization->scale(0) == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(t.data(0, 0) == doctest::Approx(-std::sqrt(1.5)));
    // Stored parameters reproduce the transform of the raw rows.
    const Eigen::VectorXd r = apply_standardization(*t.standardization, x.row(2).transpose());
    CHECK((r - t.data.row(2).transpose()).norm() < 1e-14);
  }
  SUBCASE("idempotent, and composed parameters still map raw data") {
    Eigen::MatrixXd x(4, 1);
    x << 4, -1, 7, 0.5;
    const auto once = standardize_columns({0, x, std::nullopt});
    const auto twice = standardize_columns(once);
    CHECK((once.data - twice.data).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd r = apply_standardization(*twice.standardization, x.row(1).transpose());
    CHECK(r(0) == doctest::Approx(once.data(1, 0)).epsilon(1e-12));
  }
  SUBCASE("constant column names the column") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    try {
      standardize_columns({4, x, std::nullopt});
      FAIL("expected ConstantColumn");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ConstantColumn);
      CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
  }
}

TEST_CASE("augment") {
  SUBCASE("single domain is the identity") {
    DomainLayout layout({3}, {1});
    Eigen::VectorXd x(3);
    x << 1, 2, 3;
    CHECK(augment(x, 0, layout) == x);
  }
  SUBCASE("second domain lands in its column span") {
    DomainLayout layout({2, 3}, {1, 1});
    Eigen::VectorXd x(3), expected(5);
    x << 7, 8, 9;
    expected << 0, 0, 7, 8, 9;
    CHECK(augment(x, 1, layout) == expected);
    CHECK(augment(Eigen::VectorXd::Zero(2), 0, layout) == Eigen::VectorXd::Zero(5));
  }
  SUBCASE("length mismatch") {
    DomainLayout layout({2, 3}, {1, 1});
    CHECK(kind_of([&] { augment(Eigen::VectorXd::Zero(2), 1, layout); }) ==
          ErrorKind::LengthMismatch);
  }
}

TEST_CASE("augment agrees with the block data matrix rows") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto inst = testing_support::random_instance(seed);
    const Eigen::MatrixXd dense = inst.x.dense();
    for (Index d = 0; d < inst.layout.domains(); ++d) {
      for (Index i = 0; i < inst.layout.items(d); ++i) {
        const Index r = inst.layout.global_row(d, i);
        const Eigen::VectorXd a = augment(inst.x.block(d).row(i).transpose(), d, inst.layout);
        CHECK(a == dense.row(r).transpose());
        CHECK(a == inst.x.row(r));
      }
    }
  }
}

TEST_CASE("block data matrix guards") {
  DomainLayout layout({2}, {3});
  CHECK(kind_of([&] { BlockDataMatrix(layout, {Eigen::MatrixXd::Zero(2, 2)}); }) ==
        ErrorKind::DimensionMismatch);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { BlockDataMatrix(layout, {bad}); }) == ErrorKind::NonFinite);
  BlockDataMatrix x(layout, {Eigen::MatrixXd::Ones(3, 2)});
  CHECK(kind_of([&] { (void)x.dense(5); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("weight graph canonical storage") {
  DomainLayout layout({1, 1}, {3, 4});
  const std::vector<WeightEntry> entries{{0, 2, 1, 0, 1.5}, {1, 3, 0, 0, 2.0}, {0, 1, 0, 0, 0.0}};
  const auto g = WeightGraph::from_entries(layout, entries);
  REQUIRE(g.edge_count() == 2);  // zero weight dropped
  for (const auto& e : g.edges()) CHECK(e.row > e.col);
  CHECK(g.edges()[0] == Edge{3, 2, 1.5});
  CHECK(g.edges()[1] == Edge{6, 0, 2.0});
  CHECK(g.symmetric_sum() == doctest::Approx(7.0));
  const Eigen::MatrixXd dense = g.dense();
  CHECK(dense == dense.transpose());
  const auto entry = g.entry(1);
  CHECK(entry.domain_a == 1);
  CHECK(entry.index_a == 3);
  CHECK(entry.domain_b == 0);
  CHECK(entry.index_b == 0);
}

TEST_CASE("validate_weights") {
  DomainLayout layout({1, 1}, {3, 4});
  SUBCASE("duplicate unordered pair") {
    const std::vector<WeightEntry> e{{0, 1, 1, 2, 1.0}, {1, 2, 0, 1, 1.0}};
    CHECK(kind_of([&] { validate_weights(layout, e); }) == ErrorKind::DuplicateEdge);
  }
  SUBCASE("index equal to n_e") {
    const std::vector<WeightEntry> e{{0, 1, 1, 4, 1.0}};
    CHECK(kind_of([&] { validate_weights(layout, e); }) == ErrorKind::OutOfRange);
  }
  SUBCASE("non-finite weight") {
    const std::vector<WeightEntry> e{{0, 1, 1, 2, std::numeric_limits<double>::infinity()}};
    CHECK(kind_of([&] { validate_weights(layout, e); }) == ErrorKind::NonFinite);
  }
  SUBCASE("negative weights load with a warning") {
    std::vector<std::string> seen;
    auto prev = set_warning_handler([&](const std::string& m) { seen.push_back(m); });
    const std::vector<WeightEntry> e{{0, 1, 1, 2, -1.0}};
    const auto g = WeightGraph::from_entries(layout, e);
    set_warning_handler(prev);
    CHECK(g.edge_count() == 1);
    CHECK(seen.size() == 1);
  }
  SUBCASE("graph-level validation") {
    const std::vector<WeightEntry> e{{0, 1, 1, 2, 1.0}};
    CHECK_NOTHROW(validate_weights(WeightGraph::from_entries(layout, e)));
  }
}

TEST_CASE("degree_matrix") {
  SUBCASE("empty graph") {
    DomainLayout layout({1}, {4});
    CHECK(degree_matrix(WeightGraph(layout)).values == Eigen::VectorXd::Zero(4));
  }
  SUBCASE("single edge between rows 1 and 3 of N = 3") {
    DomainLayout layout({1}, {3});
    const auto g = WeightGraph::from_edges(layout, {{2, 0, 2.0}});
    Eigen::VectorXd expected(3);
    expected << 2, 0, 2;
    CHECK(degree_matrix(g).values == expected);
  }
  SUBCASE("matches dense row sums of the symmetrized matrix") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      auto inst = testing_support::random_instance(seed);
      const Eigen::VectorXd oracle = oracle::degrees(inst.w.dense());
      CHECK((degree_matrix(inst.w).values - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("invariant under reordering of the edge list") {
    auto inst = testing_support::random_instance(11);
    auto edges = inst.w.edges();
    std::mt19937 gen(3);
    std::shuffle(edges.begin(), edges.end(), gen);
    for (auto& e : edges) std::swap(e.row, e.col);  // also flip orientation
    const auto shuffled = WeightGraph::from_edges(inst.layout, edges);
    CHECK((degree_matrix(shuffled).values - degree_matrix(inst.w).values).norm() < 1e-12);
  }
}

TEST_CASE("mcca_weights") {
  SUBCASE("D=2, n=2, unit off-diagonal coupling") {
    DomainLayout layout({1, 1}, {2, 2});
    Eigen::MatrixXd c(2, 2);
    c << 0, 1, 1, 0;
    const auto g = mcca_weights(c, layout);
    REQUIRE(g.edge_count() == 2);
    CHECK(g.edges()[0] == Edge{2, 0, 1.0});
    CHECK(g.edges()[1] == Edge{3, 1, 1.0});
  }
  SUBCASE("zero coupling is empty") {
    DomainLayout layout({1, 1}, {2, 2});
    CHECK(mcca_weights(Eigen::MatrixXd::Zero(2, 2), layout).empty());
  }
  SUBCASE("D=3, n=4: every vertex has degree D-1 = 2") {
    DomainLayout layout({2, 1, 3}, {4, 4, 4});
    Eigen::MatrixXd c = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
    const auto g = mcca_weights(c, layout);
    // Direct count: each item is linked to its namesake in the two other domains.
    CHECK(g.edge_count() == 12);
    CHECK(degree_matrix(g).values == Eigen::VectorXd::Constant(12, 2.0));
  }
  SUBCASE("diagonal coupling adds self-associations") {
    DomainLayout layout({1, 1}, {3, 3});
    const auto g = mcca_weights(Eigen::MatrixXd::Ones(2, 2), layout);
    CHECK(g.edge_count() == 9);
    CHECK(degree_matrix(g).values == Eigen::VectorXd::Constant(6, 2.0));
    CHECK(g.symmetric_sum() == doctest::Approx(12.0));
  }
  SUBCASE("errors") {
    DomainLayout unequal({1, 1}, {2, 3});
    CHECK(kind_of([&] { mcca_weights(Eigen::MatrixXd::Ones(2, 2), unequal); }) ==
          ErrorKind::InvalidArgument);
    DomainLayout layout({1, 1}, {2, 2});
    Eigen::MatrixXd asym(2, 2);
    asym << 0, 1, 2, 0;
    CHECK(kind_of([&] { mcca_weights(asym, layout); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("edge_coding") {
  SUBCASE("empty graph") {
    DomainLayout layout({2}, {3});
    BlockDataMatrix x(layout, {Eigen::MatrixXd::Random(3, 2)});
    const auto ec = edge_coding(x, WeightGraph(layout));
    CHECK(ec.edges() == 0);
    CHECK(ec.gram() == Eigen::MatrixXd::Zero(2, 2));
  }
  SUBCASE("one cross-domain edge is the sum of augmented vectors") {
    DomainLayout layout({2, 1}, {2, 3});
    Eigen::MatrixXd x1(2, 2), x2(3, 1);
    x1 << 1, 2, 3, 4;
    x2 << 5, 6, 7;
    BlockDataMatrix x(layout, {x1, x2});
    const auto g = WeightGraph::from_entries(layout, std::vector<WeightEntry>{{0, 1, 1, 2, 0.5}});
    const auto ec = edge_coding(x, g);
    REQUIRE(ec.edges() == 1);
    Eigen::RowVectorXd expected(3);
    expected << 3, 4, 7;
    CHECK(ec.data.row(0) == expected);
    CHECK(ec.weights(0) == 0.5);
  }
  SUBCASE("identity against the dense product oracle, D=2, n=(3,4), p=(2,2)") {
    cdmca::Rng rng(5);
    DomainLayout layout({2, 2}, {3, 4});
    Eigen::MatrixXd a(3, 2), b(4, 2);
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
    for (Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
    BlockDataMatrix x(layout, {a, b});
    std::vector<Edge> edges{{3, 0, 1.0}, {4, 1, 0.5}, {6, 2, 2.0}, {5, 3, 1.5}, {1, 0, 0.7}};
    const auto g = WeightGraph::from_edges(layout, edges);
    const Eigen::MatrixXd xd = x.dense();
    const Eigen::MatrixXd w = g.dense();
    const Eigen::MatrixXd rhs = oracle::xtmx(xd, w) + oracle::xtwx(xd, w);
    CHECK(rel_frobenius(edge_coding(x, g).gram(), rhs) < 1e-10);
  }
  SUBCASE("identity holds on random graphs with self-associations") {
    for (std::uint64_t seed = 100; seed < 200; ++seed) {
      auto inst = testing_support::random_instance(seed);
      const Eigen::MatrixXd xd = inst.x.dense();
      const Eigen::MatrixXd w = inst.w.dense();
      const auto ec = edge_coding(inst.x, inst.w);
      CHECK(ec.edges() == inst.w.edge_count());
      CHECK(rel_frobenius(ec.gram(), oracle::xtmx(xd, w) + oracle::xtwx(xd, w)) < 1e-10);
    }
  }
}
