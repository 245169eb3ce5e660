#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ct/currents.hpp"
#include "ct/transport.hpp"
#include "oracles.hpp"

using namespace ct;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Simplex segment(const Vec& a, const Vec& b, double w = 1.0) {
  Mat m(a.size(), 2);
  m.col(0) = a;
  m.col(1) = b;
  return {std::move(m), w};
}

Simplex triangle(const Vec& a, const Vec& b, const Vec& c, double w = 1.0) {
  Mat m(a.size(), 3);
  m.col(0) = a;
  m.col(1) = b;
  m.col(2) = c;
  return {std::move(m), w};
}

PolyhedralCurrent circle_polyline(int segments, double radius = 1.0) {
  // vertices built once so shared endpoints are bitwise identical
  std::vector<Vec> verts;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * M_PI * i / segments;
    verts.push_back(vec2(radius * std::cos(a), radius * std::sin(a)));
  }
  PolyhedralCurrent P(2, 1);
  P.set_integral(true);
  for (int i = 0; i < segments; ++i) P.add(segment(verts[i], verts[(i + 1) % segments]));
  return P;
}

double simplex_chain_volume(const PolyhedralCurrent& P) {
  double v = 0.0;
  for (const auto& s : P.simplices()) v += s.weight * simplex_volume(s);
  return v;
}

}  // namespace

TEST_CASE("quadrature rules integrate monomials exactly") {
  for (int dim = 0; dim <= 3; ++dim) {
    for (int degree : {1, 2, 3, 5}) {
      const auto rule = simplex_rule(dim, degree);
      double wsum = 0.0;
      for (const auto& q : rule) {
        wsum += q.weight;
        REQUIRE(q.weight > 0.0);
      }
      REQUIRE(wsum == Catch::Approx(1.0).margin(1e-13));
      // all monomials of total degree <= degree against the closed form
      std::vector<int> exps(dim, 0);
      while (true) {
        int total = 0;
        for (int e : exps) total += e;
        if (total <= degree && dim > 0) {
          double acc = 0.0;
          double dimfact = 1.0;
          for (int j = 2; j <= dim; ++j) dimfact *= j;
          for (const auto& q : rule) {
            double m = 1.0;
            for (int a = 0; a < dim; ++a)
              for (int e = 0; e < exps[a]; ++e) m *= q.bary[a + 1];
            acc += q.weight * m;
          }
          const double exact = ct_oracle::simplex_monomial_integral(exps) * dimfact;
          REQUIRE(acc == Catch::Approx(exact).margin(1e-12));
        }
        int axis = 0;
        while (axis < dim) {
          ++exps[axis];
          int t = 0;
          for (int e : exps) t += e;
          if (t <= degree) break;
          exps[axis] = 0;
          ++axis;
        }
        if (axis == dim) break;
      }
    }
  }
  CHECK_THROWS_AS(simplex_rule(2, 7), std::invalid_argument);
}

TEST_CASE("combinatorial boundary") {
  const Vec v0 = vec2(0, 0), v1 = vec2(1, 0), v2 = vec2(0, 1);
  SECTION("oriented triangle boundary edges") {
    PolyhedralCurrent P(2, 2);
    P.add(triangle(v0, v1, v2));
    const PolyhedralCurrent B = boundary(P);
    REQUIRE(B.simplices().size() == 3);
    // pair against a generic constant 1-form and compare with the three
    // oriented edges (v1 v2) - (v0 v2) + (v0 v1)
    const PolyForm w = PolyForm::from_components(
        2, 1, {{{1}, Polynomial::constant(2, 0.3)}, {{2}, Polynomial::constant(2, -0.9)}});
    PolyhedralCurrent expected(2, 1);
    expected.add(segment(v1, v2, 1.0));
    expected.add(segment(v0, v2, -1.0));
    expected.add(segment(v0, v1, 1.0));
    CHECK(pair_current(discretize(B, 2), w) ==
          Catch::Approx(pair_current(discretize(expected, 2), w)).margin(1e-14));
  }
  SECTION("boundary of boundary cancels") {
    PolyhedralCurrent P(2, 2);
    P.add(triangle(v0, v1, v2));
    P.add(triangle(v1, vec2(1, 1), v2, 2.0));
    const PolyhedralCurrent BB = boundary(boundary(P));
    CHECK(BB.simplices().empty());
  }
  SECTION("glued compatible triangles drop the shared edge") {
    PolyhedralCurrent P(2, 2);
    P.add(triangle(v0, v1, v2));
    P.add(triangle(v1, vec2(1, 1), v2));
    const PolyhedralCurrent B = boundary(P);
    CHECK(B.simplices().size() == 4);
  }
  SECTION("zero-currents rejected") {
    PolyhedralCurrent P(2, 0);
    CHECK_THROWS_AS(boundary(P), std::invalid_argument);
  }
  SECTION("closed polyline is boundaryless") {
    CHECK(boundary(circle_polyline(16)).simplices().empty());
  }
  SECTION("boundary of boundary on seeded chains") {
    std::mt19937_64 rng(97);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 10; ++trial) {
      PolyhedralCurrent P(3, 2);
      const Vec a = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
      const Vec b = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
      const Vec c = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
      const Vec d = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
      P.add(triangle(a, b, c, 1.0 + std::floor(3 * std::abs(u(rng)))));
      P.add(triangle(b, d, c, 1.0 + std::floor(3 * std::abs(u(rng)))));
      const PolyhedralCurrent BB = boundary(boundary(P));
      double worst = 0.0;
      for (const auto& s : BB.simplices()) worst = std::max(worst, std::abs(s.weight));
      REQUIRE(worst <= 1e-14);
    }
  }
}

TEST_CASE("discretize") {
  SECTION("unit segment at first order is the midpoint atom") {
    PolyhedralCurrent P(2, 1);
    P.add(segment(vec2(0, 0), vec2(1, 0)));
    const DiscreteCurrent T = discretize(P, 1);
    REQUIRE(T.natoms() == 1);
    CHECK((T.point(0) - vec2(0.5, 0.0)).norm() == 0.0);
    CHECK(T.tau(0).coeff({1}) == Catch::Approx(1.0).margin(1e-15));
  }
  SECTION("mass is preserved by the quadrature weights") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int q : {1, 2, 3, 5}) {
      PolyhedralCurrent P(3, 2);
      for (int s = 0; s < 5; ++s) {
        const Vec a = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
        const Vec b = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
        const Vec c = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
        P.add(triangle(a, b, c, u(rng) < 0 ? -2.0 : 1.5));
      }
      double pm = 0.0;
      for (const auto& s : P.simplices()) pm += std::abs(s.weight) * simplex_volume(s);
      CHECK(mass(discretize(P, q)) == Catch::Approx(pm).margin(1e-13 * pm));
    }
  }
  SECTION("pairing the discretized unit segment with x1 dx1 gives one half") {
    PolyhedralCurrent P(2, 1);
    P.add(segment(vec2(0, 0), vec2(1, 0)));
    const PolyForm w = PolyForm::from_components(2, 1, {{{1}, Polynomial::variable(2, 0)}});
    CHECK(pair_current(discretize(P, 3), w) == Catch::Approx(0.5).margin(1e-14));
  }
  SECTION("unsupported order rejected") {
    PolyhedralCurrent P(2, 1);
    P.add(segment(vec2(0, 0), vec2(1, 0)));
    CHECK_THROWS_AS(discretize(P, 9), std::invalid_argument);
  }
}

TEST_CASE("pairing against forms") {
  SECTION("single atom against a constant form") {
    DiscreteCurrent T(2, 2, 1);
    T.set_atom(0, vec2(0, 0), KVector::basis(2, 2, {1, 2}));
    CHECK(pair_current(T, PolyForm::constant(2, KCovector::basis(2, 2, {1, 2}))) == 1.0);
    CHECK(pair_current(T, PolyForm(2, 2)) == 0.0);
  }
  SECTION("winding pairing of the 64-gon against the angular form") {
    const DiscreteCurrent T = discretize(circle_polyline(64), 3);
    const FormEvaluator angular = [](const Vec& x) {
      KCovector c(2, 1);
      const double r2 = x.squaredNorm();
      c[multi_index_rank(2, {1})] = -x[1] / r2;
      c[multi_index_rank(2, {2})] = x[0] / r2;
      return c;
    };
    CHECK(pair_current(T, angular) == Catch::Approx(2.0 * M_PI).margin(1e-3));
  }
  SECTION("grade mismatch rejected") {
    DiscreteCurrent T(2, 1, 0);
    CHECK_THROWS_AS(pair_current(T, PolyForm(2, 2)), std::invalid_argument);
  }
}

TEST_CASE("mass of discrete currents") {
  SECTION("weighted unit segment") {
    PolyhedralCurrent P(2, 1);
    P.add(segment(vec2(0, 0), vec2(1, 0), 2.0));
    CHECK(mass(discretize(P, 2)) == Catch::Approx(2.0).margin(1e-14));
  }
  SECTION("empty current") { CHECK(mass(DiscreteCurrent(2, 1, 0)) == 0.0); }
  SECTION("inscribed polygon perimeter") {
    CHECK(mass(discretize(circle_polyline(64), 1)) ==
          Catch::Approx(128.0 * std::sin(M_PI / 64)).margin(1e-12));
  }
}

TEST_CASE("wedge with a vector field") {
  SECTION("constant field against a horizontal atom") {
    DiscreteCurrent T(2, 1, 1);
    T.set_atom(0, vec2(0, 0), KVector::basis(2, 1, {1}));
    ConstantField e2(vec2(0, 1));
    const DiscreteCurrent W = wedge_field(e2, T);
    CHECK(W.tau(0).coeff({1, 2}) == -1.0);  // e2 ^ e1 = -e12
  }
  SECTION("parallel field annihilates") {
    DiscreteCurrent T(2, 1, 1);
    T.set_atom(0, vec2(0.3, 0.4), KVector::basis(2, 1, {1}));
    ConstantField e1(vec2(1, 0));
    CHECK(mass(wedge_field(e1, T)) == 0.0);
  }
  SECTION("mass bound under wedging") {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> u(-1, 1);
    SwirlField b(0.8, 0.9, 1.8);
    for (int trial = 0; trial < 5; ++trial) {
      PolyhedralCurrent P(2, 1);
      for (int s = 0; s < 6; ++s)
        P.add(segment(vec2(u(rng), u(rng)), vec2(u(rng), u(rng)), u(rng)));
      const DiscreteCurrent T = discretize(P, 3);
      CHECK(mass(wedge_field(b, T)) <= b.sup_bound() * mass(T) * (1.0 + 1e-9));
    }
  }
  SECTION("grade overflow rejected") {
    DiscreteCurrent T(2, 2, 0);
    ConstantField e1(vec2(1, 0));
    CHECK_THROWS_AS(wedge_field(e1, T), std::invalid_argument);
  }
}

TEST_CASE("pushforward along flows") {
  SECTION("zero time is the identity") {
    const DiscreteCurrent T = discretize(circle_polyline(8), 2);
    RotationField b(1.0, 2.0);
    const DiscreteCurrent S = pushforward_flow(T, b, 0.0, 1e-10);
    CHECK((S.points() - T.points()).norm() == 0.0);
    CHECK((S.taus() - T.taus()).norm() == 0.0);
  }
  SECTION("rotations preserve mass") {
    const DiscreteCurrent T = discretize(circle_polyline(32), 3);
    RotationField b(1.0, 2.0);
    const DiscreteCurrent S = pushforward_flow(T, b, 0.8, 1e-10);
    CHECK(mass(S) == Catch::Approx(mass(T)).margin(1e-8));
  }
  SECTION("shear tilts a vertical segment onto the diagonal") {
    PolyhedralCurrent P(2, 1);
    P.add(segment(vec2(0, 0), vec2(0, 1)));
    const DiscreteCurrent T = discretize(P, 3);
    ShearField b(2, 2.0);
    const DiscreteCurrent S = pushforward_flow(T, b, 1.0, 1e-10);
    CHECK(mass(S) == Catch::Approx(std::sqrt(2.0)).margin(1e-6));
    // atom vectors align with e1 + e2
    for (std::size_t i = 0; i < S.natoms(); ++i) {
      const KVector t = S.tau(i);
      CHECK(t.coeff({1}) == Catch::Approx(t.coeff({2})).margin(1e-9));
    }
  }
  SECTION("pushforward mass bound") {
    SwirlField b(0.8, 0.9, 1.8);
    const DiscreteCurrent T = discretize(circle_polyline(16, 1.2), 2);
    const double t = 0.7;
    double sup_norm = 0.0;
    for (std::size_t i = 0; i < T.natoms(); ++i) {
      const Mat J = jacobian_action(b, T.point(i), t, 1e-10);
      sup_norm = std::max(sup_norm, J.jacobiSvd().singularValues()[0]);
    }
    const DiscreteCurrent S = pushforward_flow(T, b, t, 1e-10);
    CHECK(mass(S) <= std::pow(sup_norm, T.grade()) * mass(T) * (1.0 + 1e-6));
  }
}

TEST_CASE("interval products") {
  SECTION("interval times a point is a time segment") {
    PolyhedralCurrent P(2, 0);
    Mat v(2, 1);
    v.col(0) = vec2(0.3, 0.7);
    P.add({v, 1.0});
    const PolyhedralCurrent C = product_interval(0.0, 1.0, P);
    REQUIRE(C.simplices().size() == 1);
    const KVector dir = simplex_direction(C.simplices()[0]);
    CHECK(dir.coeff({1}) == Catch::Approx(1.0).margin(1e-15));
  }
  SECTION("interval times the unit segment tiles the square") {
    PolyhedralCurrent P(1, 1);
    Mat m(1, 2);
    m(0, 0) = 0.0;
    m(0, 1) = 1.0;
    P.add({m, 1.0});
    const PolyhedralCurrent C = product_interval(0.25, 0.75, P);
    REQUIRE(C.simplices().size() == 2);
    const FormEvaluator dt_dx = [](const Vec&) { return KCovector::basis(2, 2, {1, 2}); };
    CHECK(pair_current(discretize(C, 2), dt_dx) == Catch::Approx(0.5).margin(1e-14));
  }
  SECTION("degenerate interval rejected") {
    PolyhedralCurrent P(1, 1);
    Mat m(1, 2);
    m(0, 0) = 0.0;
    m(0, 1) = 1.0;
    P.add({m, 1.0});
    CHECK_THROWS_AS(product_interval(0.5, 0.5, P), std::invalid_argument);
  }
  SECTION("boundary of the product restricted to the open slab") {
    // against time-compact tensor forms the caps vanish, so the full
    // boundary pairs like its restriction
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> u(-1, 1);
    PolyhedralCurrent P(2, 1);
    for (int s = 0; s < 4; ++s) P.add(segment(vec2(u(rng), u(rng)), vec2(u(rng), u(rng)), 1.0 + s));
    const PolyhedralCurrent lhs_poly = boundary(product_interval(0.0, 1.0, P));
    const PolyhedralCurrent rhs_poly = product_interval(0.0, 1.0, boundary(P));
    const DiscreteCurrent lhs_d = discretize(lhs_poly, 3);
    const DiscreteCurrent rhs_d = discretize(rhs_poly, 3);
    for (int panel = 0; panel < 10; ++panel) {
      const TimeTest psi = random_time_test(300 + panel);
      const TensorForm eta0 = TensorForm::time_profile(psi, random_poly_form(400 + panel, 2, 1, 2));
      const TensorForm eta1 = TensorForm::time_one_form(psi, random_poly_form(500 + panel, 2, 0, 2));
      REQUIRE(std::abs(pair_current(lhs_d, eta0) + pair_current(rhs_d, eta0)) <= 1e-8);
      REQUIRE(std::abs(pair_current(lhs_d, eta1) + pair_current(rhs_d, eta1)) <= 1e-8);
    }
  }
}

TEST_CASE("subdivision") {
  SECTION("segments split at midpoints") {
    PolyhedralCurrent P(2, 1);
    P.add(segment(vec2(0, 0), vec2(1, 0), 2.0));
    const PolyhedralCurrent S = subdivide(P, 1);
    REQUIRE(S.simplices().size() == 2);
    CHECK(mass(discretize(S, 1)) == Catch::Approx(2.0).margin(1e-14));
  }
  SECTION("triangles refine into four with preserved area") {
    PolyhedralCurrent P(2, 2);
    P.add(triangle(vec2(0, 0), vec2(1, 0), vec2(0, 1), 3.0));
    const PolyhedralCurrent S = subdivide(P, 1);
    REQUIRE(S.simplices().size() == 4);
    CHECK(simplex_chain_volume(S) == Catch::Approx(simplex_chain_volume(P)).margin(1e-14));
  }
  SECTION("barycentric refinement for grade three preserves the current") {
    PolyhedralCurrent P(3, 3);
    Mat m(3, 4);
    m.col(0) = Vec::Zero(3);
    m.col(1) = Vec::Unit(3, 0);
    m.col(2) = Vec::Unit(3, 1);
    m.col(3) = Vec::Unit(3, 2);
    P.add({m, 1.0});
    const PolyhedralCurrent S = subdivide(P, 1);
    REQUIRE(S.simplices().size() == 24);
    // flags carry parity-signed weights; oriented (signed) volumes must sum
    // to the parent volume, and the total mass is preserved
    auto signed_volume = [](const Simplex& s) {
      Mat E(3, 3);
      for (int j = 0; j < 3; ++j) E.col(j) = s.vertices.col(j + 1) - s.vertices.col(0);
      return s.weight * E.determinant() / 6.0;
    };
    double total = 0.0;
    for (const auto& s : S.simplices()) total += signed_volume(s);
    CHECK(total == Catch::Approx(1.0 / 6.0).margin(1e-13));
    CHECK(mass(discretize(S, 2)) == Catch::Approx(mass(discretize(P, 2))).margin(1e-13));
    // pairing against a linear top form agrees
    const PolyForm w = PolyForm::from_components(
        3, 3, {{{1, 2, 3}, Polynomial::variable(3, 0) + Polynomial::constant(3, 0.5)}});
    CHECK(pair_current(discretize(S, 2), w) ==
          Catch::Approx(pair_current(discretize(P, 2), w)).margin(1e-13));
  }
  SECTION("pairing is invariant under refinement within quadrature exactness") {
    PolyhedralCurrent P(2, 1);
    P.add(segment(vec2(-0.5, 0.2), vec2(0.8, 0.9)));
    const PolyForm w = random_poly_form(271, 2, 1, 3);
    const double a = pair_current(discretize(P, 3), w);
    const double bq = pair_current(discretize(subdivide(P, 1), 3), w);
    CHECK(std::abs(a - bq) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("discrete Stokes identity") {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> u(-1, 1);
  PolyhedralCurrent P(3, 2);
  const Vec a = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
  const Vec b = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
  const Vec c = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
  const Vec d = Vec::NullaryExpr(3, [&](Eigen::Index) { return u(rng); });
  P.add(triangle(a, b, c));
  P.add(triangle(b, d, c, 2.0));
  const PolyForm w = random_poly_form(811, 3, 1, 2);
  const double lhs = pair_current(discretize(P, 3), w.ext_d());
  const double rhs = pair_current(discretize(boundary(P), 3), w);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("pushforward commutes with the boundary under refinement") {
  // grade-2 chain: the pushed boundary carries transported edge directions
  // along the curved flow, while the boundary of the piecewise-linear image
  // lives on chords; the gap closes at least linearly in the mesh size
  SwirlField b(0.8, 0.9, 1.8);
  const double t = 0.5;
  PolyhedralCurrent P(2, 2);
  P.add(triangle(vec2(-0.5, -0.3), vec2(0.7, -0.2), vec2(0.1, 0.8)));
  P.add(triangle(vec2(0.7, -0.2), vec2(0.9, 0.6), vec2(0.1, 0.8), 2.0));
  std::vector<double> hs, errs;
  for (int L : {1, 2, 3}) {
    PolyhedralCurrent refined = subdivide(P, L);
    const DiscreteCurrent pushed_boundary =
        pushforward_flow(discretize(boundary(refined), 3), b, t, 1e-10);
    PolyhedralCurrent imaged(2, 2);
    for (const auto& s : refined.simplices()) {
      Mat v = s.vertices;
      for (int j = 0; j < v.cols(); ++j) v.col(j) = advect(b, Vec(v.col(j)), t, 1e-10, false, false).endpoint;
      imaged.add({std::move(v), s.weight});
    }
    const DiscreteCurrent boundary_of_image = discretize(boundary(imaged), 3);
    double worst = 0.0;
    for (int panel = 0; panel < 5; ++panel) {
      const PolyForm w = random_poly_form(900 + panel, 2, 1, 2);
      worst = std::max(worst,
                       std::abs(pair_current(pushed_boundary, w) - pair_current(boundary_of_image, w)));
    }
    hs.push_back(std::pow(0.5, L));
    errs.push_back(worst);
  }
  CHECK(loglog_slope(hs, errs) >= 1.0);
}
