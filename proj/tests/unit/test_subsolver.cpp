#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mipreg/subsolver.hpp"
#include "sampling.hpp"

using namespace mipreg;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

FeasibleRegion unit_box(int n) { return FeasibleRegion(Vec::Zero(n), Vec::Ones(n)); }

SparseRow sum_row(int n, double rhs) {
  SparseRow r;
  for (int i = 0; i < n; ++i) {
    r.index.push_back(i);
    r.coef.push_back(1.0);
  }
  r.rhs = rhs;
  return r;
}

// Projection onto {sum x = s} within the box by bisection on the shift.
Vec simplex_slice_oracle(const Vec& p, double s) {
  double lo = p.minCoeff() - 2.0, hi = p.maxCoeff() + 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double sum = (p.array() - mid).max(0.0).min(1.0).sum();
    (sum > s ? lo : hi) = mid;
  }
  return (p.array() - 0.5 * (lo + hi)).max(0.0).min(1.0).matrix();
}

Objective quadratic(const Vec& c) {
  return {[c](const Vec& x) { return (x - c).squaredNorm(); },
          [c](const Vec& x) -> Vec { return 2.0 * (x - c); }};
}

}  // namespace

TEST_CASE("project: examples") {
  auto box = unit_box(2);
  CHECK((project(v2(1.5, -0.2), box) - v2(1, 0)).norm() < 1e-12);

  auto seg = unit_box(2);
  seg.add_equality(sum_row(2, 1.0));
  CHECK((project(v2(0, 0), seg) - v2(0.5, 0.5)).norm() < 1e-10);

  auto tri = unit_box(3);
  tri.add_equality(sum_row(3, 1.0));
  const Vec q = project(Vec::Constant(3, 0.9), tri);
  CHECK((q - Vec::Constant(3, 1.0 / 3.0)).norm() < 1e-10);
}

TEST_CASE("project: exact box-hyperplane block matches bisection oracle") {
  testgen::Gen gen(5);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = gen.integer(2, 12);
    const double s = gen.uniform(0.0, n);
    auto reg = unit_box(n);
    reg.add_equality(sum_row(n, s));
    const Vec p = gen.normal(n, 2.0);
    CHECK((project(p, reg, 1e-12) - simplex_slice_oracle(p, s)).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("project: overlapping equalities, half-spaces and a disk") {
  testgen::Gen gen(6);
  auto reg = unit_box(3);
  reg.add_equality(sum_row(3, 1.2));
  SparseRow overlap;
  overlap.index = {0, 1};
  overlap.coef = {1.0, -1.0};
  overlap.rhs = 0.1;
  reg.add_equality(overlap);
  SparseRow half;
  half.index = {2};
  half.coef = {1.0};
  half.rhs = 0.5;
  reg.add_linear_inequality(half);
  ConvexInequality disk;
  disk.value = [](const Vec& x) { return x.squaredNorm() - 0.8; };
  disk.gradient = [](const Vec& x) -> Vec { return 2.0 * x; };
  reg.add_inequality(disk);

  for (int trial = 0; trial < 100; ++trial) {
    const Vec p = gen.normal(3, 1.5);
    const Vec q = project(p, reg, 1e-10);
    CHECK(reg.max_violation(q) <= 1e-10);
    // Idempotence.
    CHECK((project(q, reg, 1e-10) - q).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("project: polyhedral projection is optimal (variational inequality)") {
  testgen::Gen gen(7);
  auto reg = unit_box(4);
  reg.add_equality(sum_row(4, 2.0));
  SparseRow half;
  half.index = {0, 1};
  half.coef = {1.0, 2.0};
  half.rhs = 1.0;
  reg.add_linear_inequality(half);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec p = gen.normal(4, 2.0);
    const Vec q = project(p, reg, 1e-12);
    // <p - q, z - q> <= 0 for feasible z.
    for (int k = 0; k < 50; ++k) {
      const Vec z = project(gen.normal(4, 2.0), reg, 1e-12);
      CHECK((p - q).dot(z - q) <= 1e-6);
    }
  }
}

TEST_CASE("project: empty region raises ProjectionError") {
  auto reg = unit_box(2);
  reg.add_equality(sum_row(2, 1.5));
  SparseRow r;
  r.index = {0, 1};
  r.coef = {1.0, 1.0};
  r.rhs = 0.5;
  reg.add_linear_inequality(r);
  ProjectionOptions opt;
  opt.max_cycles = 500;
  CHECK_THROWS_AS(reg.project(v2(0.9, 0.9), opt), ProjectionError);
}

TEST_CASE("minimize: examples") {
  auto box = unit_box(2);
  auto r1 = minimize(quadratic(v2(2, -1)), box, v2(0.5, 0.5));
  CHECK(r1.converged);
  CHECK((r1.minimizer - v2(1, 0)).norm() < 1e-8);

  auto seg = unit_box(2);
  seg.add_equality(sum_row(2, 1.0));
  Objective lin{[](const Vec& x) { return x.sum(); }, [](const Vec& x) -> Vec { return Vec::Ones(x.size()); }};
  auto r2 = minimize(lin, seg, v2(0.3, 0.7));
  CHECK(r2.objective == doctest::Approx(1.0));
  CHECK(seg.max_violation(r2.minimizer) < 1e-9);

  auto diag = unit_box(2);
  SparseRow eq;
  eq.index = {0, 1};
  eq.coef = {1.0, -1.0};
  diag.add_equality(eq);
  // On x1 = x2 = t the objective is 2 (t - 0.5)^2 + 0.08, minimized at t = 0.5.
  auto r3 = minimize(quadratic(v2(0.3, 0.7)), diag, v2(0.1, 0.1));
  CHECK((r3.minimizer - v2(0.5, 0.5)).norm() < 1e-6);
  CHECK(r3.objective == doctest::Approx(0.08).epsilon(1e-9));
}

TEST_CASE("minimize: errors") {
  auto box = unit_box(2);
  CHECK_THROWS_AS(minimize(quadratic(v2(0, 0)), box, v2(1.5, 0.0)), InfeasibleStartError);
  Objective bad{[](const Vec& x) { return x[0] > 0.2 ? std::nan("") : -x[0]; },
                [](const Vec& x) -> Vec { return -Vec::Ones(x.size()); }};
  CHECK_THROWS_AS(minimize(bad, box, v2(0.0, 0.0)), NonFiniteError);
}

TEST_CASE("property: interior quadratics recover the analytic minimizer") {
  testgen::Gen gen(8);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = gen.integer(1, 10);
    const Vec c = Vec::Constant(n, 0.2) + 0.6 * gen.unit_box(n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Random(n, n);
    const Eigen::MatrixXd H = M.transpose() * M + Eigen::MatrixXd::Identity(n, n);
    Objective f{[H, c](const Vec& x) { return 0.5 * (x - c).dot(H * (x - c)); },
                [H, c](const Vec& x) -> Vec { return H * (x - c); }};
    const auto r = minimize(f, unit_box(n), gen.unit_box(n));
    CHECK((r.minimizer - c).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("property: descent and feasibility on random constrained quadratics") {
  testgen::Gen gen(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = gen.integer(2, 8);
    auto reg = unit_box(n);
    reg.add_equality(sum_row(n, gen.uniform(0.5, n - 0.5)));
    SparseRow half;
    for (int i = 0; i < n; ++i) {
      half.index.push_back(i);
      half.coef.push_back(gen.uniform(-1.0, 1.0));
    }
    half.rhs = 0.0;
    const Vec start = project(gen.unit_box(n), reg, 1e-12);
    half.rhs = std::max(0.0, half.dot(start));
    reg.add_linear_inequality(half);
    const Vec c = gen.normal(n, 2.0);
    const auto f = quadratic(c);
    const auto r = minimize(f, reg, start);
    CHECK(r.objective <= f.value(start) + 1e-12);
    CHECK(reg.max_violation(r.minimizer) <= 1e-7);
    INFO("kkt " << r.kkt_residual << " it " << r.iterations);
    CHECK(r.converged);
  }
}

TEST_CASE("property: linear objectives reach an optimal vertex") {
  testgen::Gen gen(10);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = gen.integer(2, 10);
    auto reg = unit_box(n);
    reg.add_equality(sum_row(n, 1.0));
    const Vec c = gen.normal(n);
    Objective f{[c](const Vec& x) { return c.dot(x); }, [c](const Vec&) -> Vec { return c; }};
    const auto r = minimize(f, reg, Vec::Constant(n, 1.0 / n));
    CHECK(r.objective == doctest::Approx(c.minCoeff()).epsilon(1e-8));
  }
}
