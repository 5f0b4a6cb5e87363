#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include <json.hpp>

#include "mipreg/rat/io.hpp"
#include "mipreg/rat/model.hpp"
#include "sampling.hpp"

using namespace mipreg;
using namespace mipreg::rat;

namespace {

// I users, station 0 on RAT-1, station 1 on RAT-2, loose caps.
RatInstance two_station(const Eigen::MatrixXd& rate) {
  RatInstance inst;
  inst.I = static_cast<int>(rate.rows());
  inst.K = 2;
  inst.rat_of = {1, 2};
  inst.rate = rate;
  inst.alpha = Vec::Ones(inst.I);
  inst.n_max = {inst.I, inst.I};
  inst.w_max = {1e300, 1e300};
  inst.k_max = {inst.I, inst.I};
  return inst;
}

// Relaxed x with rows on the simplex and both technologies loaded.
Vec relaxed_point(testgen::Gen& gen, const RatInstance& inst) {
  Vec x(inst.I * inst.K);
  for (int i = 0; i < inst.I; ++i) {
    double s = 0.0;
    for (int k = 0; k < inst.K; ++k) s += (x[var(inst, i, k)] = -std::log(1.0 - gen.uniform()));
    for (int k = 0; k < inst.K; ++k) x[var(inst, i, k)] /= s;
  }
  return x;
}

LiftedPoint random_lifted(testgen::Gen& gen, const RatInstance& inst, double vmin) {
  LiftedPoint p;
  p.x = gen.unit_box(inst.I * inst.K);
  p.u = 10.0 * gen.unit_box(inst.I);
  p.v1 = gen.uniform(vmin, 5.0);
  p.v2 = gen.uniform(vmin, 5.0);
  return p;
}

double fd(const std::function<double(double)>& f, double h = 1e-6) { return (f(h) - f(-h)) / (2 * h); }

}  // namespace

TEST_CASE("throughput: two users on one RAT-1 station") {
  Eigen::MatrixXd r(2, 2);
  r << 2, 1, 4, 1;
  const auto t = throughput(two_station(r), {0, 0});
  CHECK(t.per_user[0] == doctest::Approx(4.0 / 3.0));
  CHECK(t.per_user[1] == doctest::Approx(4.0 / 3.0));
  CHECK(t.aggregate == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("throughput: two users on one RAT-2 station") {
  Eigen::MatrixXd r(2, 2);
  r << 1, 3, 1, 5;
  const auto t = throughput(two_station(r), {1, 1});
  CHECK(t.per_user[0] == doctest::Approx(1.5));
  CHECK(t.per_user[1] == doctest::Approx(2.5));
  CHECK(t.aggregate == doctest::Approx(4.0));
}

TEST_CASE("throughput: mixed assignment matches the raw sums") {
  Eigen::MatrixXd r(3, 2);
  r << 2.0, 7.0, 3.0, 5.0, 6.0, 11.0;
  auto inst = two_station(r);
  inst.alpha << 1.0, 2.0, 0.5;
  // Users 0 and 2 share RAT-1, user 1 is alone on RAT-2.
  const double v1 = 1.0 / 2.0 + 1.0 / 6.0;
  const double expect = 1.0 / v1 + 2.0 * 5.0 / 1.0 + 0.5 / v1;
  const auto t = throughput(inst, {0, 1, 0});
  CHECK(t.aggregate == doctest::Approx(expect).epsilon(1e-14));
  CHECK(aggregate_throughput(inst, {0, 1, 0}) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(relaxed_throughput(inst, encode(inst, {0, 1, 0})) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("check_constraints names each violated cap") {
  Eigen::MatrixXd r(3, 2);
  r << 2.0, 7.0, 3.0, 5.0, 6.0, 11.0;
  auto inst = two_station(r);
  inst.n_max = {1, 3};
  inst.k_max = {3, 1};
  inst.w_max = {1e300, 5.5};
  const auto rep = check_constraints(inst, {1, 1, 0});
  CHECK_FALSE(rep.feasible);
  REQUIRE(rep.violations.size() == 2);
  CHECK(rep.violations[0].rfind("C1:", 0) == 0);  // 7/2 + 5/2 > 5.5
  CHECK(rep.violations[1].rfind("C4:", 0) == 0);
  CHECK(check_constraints(inst, {0, 0, 1}).violations.front().rfind("C2:", 0) == 0);
}

TEST_CASE("property: the relaxed region contains exactly the feasible assignments") {
  testgen::Gen gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int I = gen.integer(2, 5), K = gen.integer(2, 3);
    auto inst = generate_instance({}, I, K, 100 + trial);
    // Tighten caps at random so every constraint family gets exercised.
    inst.n_max = {gen.integer(1, I), gen.integer(1, I)};
    for (int& c : inst.k_max) c = gen.integer(1, I);
    inst.w_max[0] *= gen.uniform(0.3, 1.0);
    inst.w_max[1] *= gen.uniform(0.3, 1.0);
    const auto reg = assignment_region(inst, FormulationOptions{});
    Assignment a(I, 0);
    for (long idx = 0; idx < std::lround(std::pow(K, I)); ++idx) {
      long rest = idx;
      for (int i = I - 1; i >= 0; --i, rest /= K) a[i] = static_cast<int>(rest % K);
      CHECK(reg.contains(encode(inst, a), 1e-9) == check_constraints(inst, a).feasible);
    }
  }
}

TEST_CASE("relaxed throughput gradient matches finite differences") {
  testgen::Gen gen(8);
  const auto inst = generate_instance({}, 4, 3, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = relaxed_point(gen, inst);
    const Vec g = relaxed_throughput_gradient(inst, x, 1e-6);
    for (Index j = 0; j < x.size(); ++j) {
      const double d = fd([&](double h) {
        Vec y = x;
        y[j] += h;
        return relaxed_throughput(inst, y, 1e-6);
      });
      CHECK(g[j] == doctest::Approx(d).epsilon(1e-5));
    }
  }
}

TEST_CASE("lifted at a consistent point equals the aggregate throughput") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = generate_instance({}, 5, 2, seed);
    std::mt19937_64 eng(seed);
    Assignment a(5);
    for (int& k : a) k = static_cast<int>(eng() % 2);
    if (std::count(a.begin(), a.end(), 0) == 0 || std::count(a.begin(), a.end(), 1) == 0) a[0] = 1 - a[0];
    const Vec x = encode(inst, a);
    const auto p = lifted_point(inst, x);
    const double f = aggregate_throughput(inst, a);
    CHECK(std::abs(lifted(inst, p).value - f) <= 1e-10 * f);
    // The coupling equalities hold by construction.
    const auto aux = auxiliary_from(inst, to_matrix(inst, a));
    CHECK(std::abs(aux.v1 - p.v1) <= 1e-12 * aux.v1);
    CHECK(aux.v2 == p.v2);
  }
}

TEST_CASE("lifted: affine in x and convex in v") {
  testgen::Gen gen(18);
  const auto inst = generate_instance({}, 4, 2, 18);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = random_lifted(gen, inst, 0.1);
    auto q = p;
    q.x = gen.unit_box(p.x.size());
    auto mid = p;
    mid.x = 0.5 * (p.x + q.x);
    const double second = lifted(inst, p).value + lifted(inst, q).value - 2.0 * lifted(inst, mid).value;
    CHECK(std::abs(second) <= 1e-12 * (1.0 + std::abs(lifted(inst, mid).value)));

    auto pv = p, qv = p, mv = p;
    qv.v1 = gen.uniform(0.1, 5.0);
    qv.v2 = gen.uniform(0.1, 5.0);
    mv.v1 = 0.5 * (pv.v1 + qv.v1);
    mv.v2 = 0.5 * (pv.v2 + qv.v2);
    CHECK(lifted(inst, mv).value <= 0.5 * (lifted(inst, pv).value + lifted(inst, qv).value) + 1e-12);
  }
}

TEST_CASE("lifted and split gradients match finite differences") {
  testgen::Gen gen(19);
  const auto inst = generate_instance({}, 3, 2, 19);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_lifted(gen, inst, 0.5);
    using Pick = std::function<double(const LiftedPoint&)>;
    const std::vector<std::pair<Pick, LiftedValue>> parts = {
        {[&](const LiftedPoint& q) { return lifted(inst, q).value; }, lifted(inst, p)},
        {[&](const LiftedPoint& q) { return dc_parts(inst, q).fa.value; }, dc_parts(inst, p).fa},
        {[&](const LiftedPoint& q) { return dc_parts(inst, q).fb.value; }, dc_parts(inst, p).fb}};
    for (const auto& [f, g] : parts) {
      for (Index j = 0; j < p.x.size(); ++j)
        CHECK(g.grad_x[j] == doctest::Approx(fd([&](double h) {
                auto q = p;
                q.x[j] += h;
                return f(q);
              })).epsilon(1e-6));
      for (Index i = 0; i < p.u.size(); ++i)
        CHECK(g.grad_u[i] == doctest::Approx(fd([&](double h) {
                auto q = p;
                q.u[i] += h;
                return f(q);
              })).epsilon(1e-6));
      CHECK(g.grad_v1 == doctest::Approx(fd([&](double h) {
              auto q = p;
              q.v1 += h;
              return f(q);
            })).epsilon(1e-6));
      CHECK(g.grad_v2 == doctest::Approx(fd([&](double h) {
              auto q = p;
              q.v2 += h;
              return f(q);
            })).epsilon(1e-6));
    }
  }
}

TEST_CASE("split: scalar identity (a+b)^2/2c - (a^2+b^2)/2c = ab/c") {
  const double a = 1, b = 2, c = 1;
  CHECK((a + b) * (a + b) / (2 * c) == 4.5);
  CHECK((a * a / (2 * c) + b * b / (2 * c)) == 2.5);
  CHECK((a + b) * (a + b) / (2 * c) - (a * a / (2 * c) + b * b / (2 * c)) == a * b / c);
}

TEST_CASE("property: fa - fb reproduces lifted") {
  testgen::Gen gen(20);
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = generate_instance({}, gen.integer(1, 6), gen.integer(2, 4), 300 + trial);
    const auto p = random_lifted(gen, inst, 0.1);
    const auto d = dc_parts(inst, p);
    const double f = lifted(inst, p).value;
    CHECK(std::abs(d.fa.value - d.fb.value - f) <= 1e-10 * std::max(1.0, std::abs(f)));
  }
}

TEST_CASE("property: fa and fb are convex along random segments") {
  testgen::Gen gen(21);
  const auto inst = generate_instance({}, 4, 2, 21);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_lifted(gen, inst, 0.1);
    const auto q = random_lifted(gen, inst, 0.1);
    const double t = gen.uniform();
    LiftedPoint m;
    m.x = (1 - t) * p.x + t * q.x;
    m.u = (1 - t) * p.u + t * q.u;
    m.v1 = (1 - t) * p.v1 + t * q.v1;
    m.v2 = (1 - t) * p.v2 + t * q.v2;
    const auto dp = dc_parts(inst, p), dq = dc_parts(inst, q), dm = dc_parts(inst, m);
    CHECK(dm.fa.value <= (1 - t) * dp.fa.value + t * dq.fa.value + 1e-8);
    CHECK(dm.fb.value <= (1 - t) * dp.fb.value + t * dq.fb.value + 1e-8);
  }
}

TEST_CASE("build_dc: composite parts reproduce lifted and have correct gradients") {
  testgen::Gen gen(22);
  const auto inst = generate_instance({}, 4, 2, 22);
  const auto dc = build_dc(inst);
  for (const Assignment& a : {Assignment{0, 1, 0, 1}, Assignment{1, 1, 0, 0}, Assignment{0, 0, 0, 1}}) {
    CHECK(dc.objective.value(encode(inst, a)) == doctest::Approx(-aggregate_throughput(inst, a) * 1e-6).epsilon(1e-12));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = relaxed_point(gen, inst);
    const double f = dc.objective.value(x);
    // Off the corners the substituted u makes the RAT-2 term quadratic in x.
    CHECK(f == doctest::Approx(-lifted(inst, lifted_point(inst, x, 1e-6)).value).epsilon(1e-10));
    const Vec ga = dc.objective.fa.gradient(x), gb = dc.objective.fb.gradient(x);
    for (Index j = 0; j < x.size(); ++j) {
      auto along = [&](const Objective& o) {
        return fd([&](double h) {
          Vec y = x;
          y[j] += h;
          return o.value(y);
        });
      };
      CHECK(ga[j] == doctest::Approx(along(dc.objective.fa)).epsilon(1e-5));
      CHECK(gb[j] == doctest::Approx(along(dc.objective.fb)).epsilon(1e-5));
    }
  }
}

TEST_CASE("build_multiconvex: block minimum over s gives the negated throughput") {
  testgen::Gen gen(23);
  const auto inst = generate_instance({}, 5, 2, 23);
  const auto p = build_multiconvex(inst);
  const Index n = p.n;
  for (int trial = 0; trial < 50; ++trial) {
    Vec z(n + 2);
    do {
      z.head(n) = relaxed_point(gen, inst);
      z.tail(2) = p.exact_y(z);
    } while (!p.region.contains(z, 1e-9));
    CHECK(p.objective.value(z) == doctest::Approx(-relaxed_throughput(inst, z.head(n), 1e-6)).epsilon(1e-10));
    // s-gradient vanishes at the block minimizer.
    const Vec g = p.objective.gradient(z);
    CHECK(std::abs(g[n]) <= 1e-9);
    CHECK(std::abs(g[n + 1]) <= 1e-9);
  }
  const auto report = check_block_convexity(p, 200, 23, 1e-9);
  CHECK(report.violations == 0);
}

TEST_CASE("build_multiconvex gradient matches finite differences") {
  testgen::Gen gen(24);
  const auto inst = generate_instance({}, 3, 3, 24);
  const auto p = build_multiconvex(inst);
  for (int trial = 0; trial < 10; ++trial) {
    Vec z(p.n + 2);
    z.head(p.n) = relaxed_point(gen, inst);
    z.tail(2) = gen.unit_box(2) * 3.0;
    const Vec g = p.objective.gradient(z);
    for (Index j = 0; j < z.size(); ++j)
      CHECK(g[j] == doctest::Approx(fd([&](double h) {
              Vec y = z;
              y[j] += h;
              return p.objective.value(y);
            })).epsilon(1e-6));
  }
}

TEST_CASE("lipschitz_constant: formula example and degenerate denominator") {
  Eigen::MatrixXd r(2, 2);
  r << 5.0, 1.0, 3.0, 2.0;
  auto inst = two_station(r);
  inst.n_max = {1, 1};
  CHECK(lipschitz_constant(inst) == doctest::Approx(std::sqrt(2.0) * 4.0));
  CHECK(lipschitz_constant(inst) == doctest::Approx(5.657).epsilon(1e-4));
  inst.n_max = {2, 1};
  CHECK_THROWS_AS(lipschitz_constant(inst), std::invalid_argument);

  // With N_max = I - 1 the denominator is exactly 1.
  const auto g = generate_instance({}, 7, 2, 3);
  CHECK(lipschitz_constant(g) ==
        doctest::Approx(std::sqrt(7.0) * std::abs(g.max_rate(1) - g.min_rate(2))).epsilon(1e-15));
}

TEST_CASE("property: sampled gradient norms stay below gradient_bound") {
  testgen::Gen gen(25);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = generate_instance({}, 4, 2, seed);
    const double bound = gradient_bound(inst);
    REQUIRE(std::isfinite(bound));
    const auto reg = assignment_region(inst, FormulationOptions{1.0});
    int used = 0;
    for (int trial = 0; trial < 2000; ++trial) {
      const Vec x = relaxed_point(gen, inst);
      if (!reg.contains(x, 0.0)) continue;
      ++used;
      CHECK(relaxed_throughput_gradient(inst, x).norm() <= bound);
    }
    CHECK(used > 100);
  }
}

TEST_CASE("generate_instance: deterministic, positive rates, paper caps") {
  const auto a = generate_instance({}, 6, 3, 77);
  const auto b = generate_instance({}, 6, 3, 77);
  CHECK(std::memcmp(a.rate.data(), b.rate.data(), sizeof(double) * 18) == 0);
  CHECK((a.rate.array() > 0.0).all());
  CHECK(a.n_max == std::array<int, 2>{5, 5});
  CHECK(a.w_max[0] == a.max_rate(1));
  CHECK(a.k_max == std::vector<int>{6, 6, 6});
  CHECK(a.rat_of == std::vector<int>{1, 2, 1});
  CHECK_FALSE(generate_instance({}, 6, 3, 78).rate.isApprox(a.rate));
  CHECK_NOTHROW(a.validate());
}

TEST_CASE("rayleigh draws have unit second moment") {
  std::mt19937_64 eng(2024);
  const ChannelConfig cfg;
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double psi = rayleigh(cfg.rayleigh_sigma, unit_uniform(eng()));
    sum += psi * psi;
  }
  CHECK(std::abs(sum / n - 1.0) <= 0.02);
}

TEST_CASE("instance json round trip is exact") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = generate_instance({}, 5, 3, seed);
    const auto b = from_json(to_json(a));
    CHECK(std::memcmp(a.rate.data(), b.rate.data(), sizeof(double) * 15) == 0);
    CHECK(a.alpha == b.alpha);
    CHECK(a.n_max == b.n_max);
    CHECK(a.w_max == b.w_max);
    CHECK(a.k_max == b.k_max);
    CHECK(a.rat_of == b.rat_of);
    CHECK(b.seed == seed);
    CHECK(b.channel->power_dbm == a.channel->power_dbm);
  }
}

TEST_CASE("instance json errors carry context") {
  const std::string good = to_json(generate_instance({}, 3, 2, 1));
  std::string broken = good;
  broken.insert(broken.find("\"alpha\""), "@");
  try {
    from_json(broken);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }

  auto j = nlohmann::json::parse(good);
  j.erase("k_max");
  CHECK_THROWS_WITH_AS(from_json(j.dump()), doctest::Contains("k_max"), FormatError);
  j = nlohmann::json::parse(good);
  j["rate"][1] = {1.0};
  CHECK_THROWS_WITH_AS(from_json(j.dump()), doctest::Contains("rate"), FormatError);

  j = nlohmann::json::parse(good);
  j["n_max"] = {0, 2};
  CHECK_THROWS_WITH_AS(from_json(j.dump()), doctest::Contains("n_max"), InfeasibleInputError);
  j = nlohmann::json::parse(good);
  j["k_max"] = {0, 0};
  CHECK_THROWS_WITH_AS(from_json(j.dump()), doctest::Contains("k_max"), InfeasibleInputError);
}
