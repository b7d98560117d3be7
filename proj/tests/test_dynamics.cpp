#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

#include <Eigen/LU>
#include <doctest.h>

#include "hhlab/error.hpp"
#include "hhlab/integrator.hpp"
#include "hhlab/random.hpp"
#include "hhlab/system.hpp"
#include "hhlab/text.hpp"
#include "hhlab/trajectory_io.hpp"

using namespace hhlab;

namespace {

SystemParams params(int n, double m = 1.0, double w = 1.0) {
  SystemParams p;
  p.order = n;
  p.mass = m;
  p.omega = w;
  return p;
}

// Closed-form N = 1 orbit: a harmonic oscillator centred at (0, -1/(m w^2)).
State harmonic_solution(const SystemParams& p, const State& s0, double t) {
  const double k = p.stiffness();
  const double w = p.omega;
  const double yc = -1.0 / k;
  const double x = s0.x * std::cos(w * t) + s0.px / (p.mass * w) * std::sin(w * t);
  const double y = yc + (s0.y - yc) * std::cos(w * t) + s0.py / (p.mass * w) * std::sin(w * t);
  const double px = -p.mass * w * s0.x * std::sin(w * t) + s0.px * std::cos(w * t);
  const double py = -p.mass * w * (s0.y - yc) * std::sin(w * t) + s0.py * std::cos(w * t);
  return {t, x, y, px, py};
}

double max_diff(const State& a, const State& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.px - b.px),
                   std::abs(a.py - b.py)});
}

}  // namespace

TEST_CASE("critical energy") {
  CHECK(critical_energy(params(3)) == 1.0 / 6.0);
  CHECK(critical_energy(params(4)) == 0.25);
  CHECK(critical_energy(params(5, 2.0, 3.0)) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(critical_energy(params(6)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params(0).validate(), Error);
  CHECK_THROWS_AS(params(3, -1.0).validate(), Error);
  CHECK_THROWS_AS(params(3, 1.0, 0.0).validate(), Error);
  CHECK_NOTHROW(params(1).validate());
}

TEST_CASE("complex_power agrees with std::pow") {
  for (int k = 0; k <= 7; ++k) {
    const auto [re, im] = complex_power(0.3, -0.7, k);
    const auto z = std::pow(std::complex<double>(0.3, -0.7), k);
    CHECK(re == doctest::Approx(z.real()).epsilon(1e-14));
    CHECK(im == doctest::Approx(z.imag()).epsilon(1e-14));
  }
}

TEST_CASE("gradient matches the hand-written force laws") {
  const CounterRng rng(11);
  for (std::uint64_t k = 0; k < 100; ++k) {
    const double x = rng.uniform(2 * k, -1, 1);
    const double y = rng.uniform(2 * k + 1, -1, 1);
    const auto [g3x, g3y] = grad_potential(params(3), x, y);
    CHECK(std::abs(g3x - (x + 2 * x * y)) < 1e-12);
    CHECK(std::abs(g3y - (y + x * x - y * y)) < 1e-12);
    const auto [g4x, g4y] = grad_potential(params(4), x, y);
    CHECK(std::abs(g4x - (x + 3 * x * x * y - y * y * y)) < 1e-12);
    CHECK(std::abs(g4y - (y + x * x * x - 3 * x * y * y)) < 1e-12);
    const auto [g5x, g5y] = grad_potential(params(5), x, y);
    CHECK(std::abs(g5x - (x + 4 * x * x * x * y - 4 * x * y * y * y)) < 1e-12);
    CHECK(std::abs(g5y - (y + std::pow(x, 4) - 6 * x * x * y * y + std::pow(y, 4))) < 1e-12);
  }
}

TEST_CASE("gradient and Hessian match finite differences") {
  const double h = 1e-5;
  for (int n = 1; n <= 6; ++n) {
    const SystemParams p = params(n, 1.3, 0.8);
    for (double x : {-0.4, 0.1, 0.35}) {
      for (double y : {-0.3, 0.05, 0.45}) {
        const auto [gx, gy] = grad_potential(p, x, y);
        const double fx = (potential(p, x + h, y) - potential(p, x - h, y)) / (2 * h);
        const double fy = (potential(p, x, y + h) - potential(p, x, y - h)) / (2 * h);
        CHECK(std::abs(gx - fx) < 1e-6);
        CHECK(std::abs(gy - fy) < 1e-6);
        const Mat2 hess = hessian_potential(p, x, y);
        const auto [ax, ay] = grad_potential(p, x + h, y);
        const auto [bx, by] = grad_potential(p, x - h, y);
        const auto [cx, cy] = grad_potential(p, x, y + h);
        const auto [dx, dy] = grad_potential(p, x, y - h);
        CHECK(std::abs(hess(0, 0) - (ax - bx) / (2 * h)) < 1e-6);
        CHECK(std::abs(hess(1, 0) - (ay - by) / (2 * h)) < 1e-6);
        CHECK(std::abs(hess(0, 1) - (cx - dx) / (2 * h)) < 1e-6);
        CHECK(std::abs(hess(1, 1) - (cy - dy) / (2 * h)) < 1e-6);
        CHECK(hess(0, 1) == hess(1, 0));
      }
    }
  }
}

TEST_CASE("anharmonic term is harmonic") {
  // Im z^N solves Laplace's equation, so the trace of the Hessian is 2 m w^2.
  for (int n = 2; n <= 6; ++n) {
    const SystemParams p = params(n, 1.5, 0.7);
    const Mat2 h = hessian_potential(p, 0.31, -0.27);
    CHECK(h.trace() == doctest::Approx(2 * p.stiffness()).epsilon(1e-12));
  }
}

TEST_CASE("potential has N-fold rotational symmetry") {
  for (int n = 3; n <= 6; ++n) {
    const SystemParams p = params(n);
    const double a = 2 * std::numbers::pi / n;
    const double x = 0.23;
    const double y = -0.41;
    const double xr = std::cos(a) * x - std::sin(a) * y;
    const double yr = std::sin(a) * x + std::cos(a) * y;
    CHECK(potential(p, xr, yr) == doctest::Approx(potential(p, x, y)).epsilon(1e-13));
    if (n % 2 == 1) CHECK(potential(p, -x, y) == doctest::Approx(potential(p, x, y)).epsilon(1e-14));
  }
}

TEST_CASE("rhs and Jacobian") {
  const SystemParams p = params(4, 2.0, 1.5);
  const Vec4 z(0.1, -0.2, 0.3, 0.4);
  const Vec4 f = rhs(p, z);
  const auto [gx, gy] = grad_potential(p, 0.1, -0.2);
  CHECK(f[0] == doctest::Approx(0.15));
  CHECK(f[1] == doctest::Approx(0.2));
  CHECK(f[2] == -gx);
  CHECK(f[3] == -gy);
  const Mat4 j = jacobian(p, z);
  const double h = 1e-6;
  for (int c = 0; c < 4; ++c) {
    Vec4 e = Vec4::Zero();
    e[c] = h;
    const Vec4 col = (rhs(p, Vec4(z + e)) - rhs(p, Vec4(z - e))) / (2 * h);
    CHECK((col - j.col(c)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("energy and on-shell momentum") {
  const SystemParams p = params(3);
  const double e = 0.1;
  const double px = solve_momentum_on_shell(p, e, 0.0, 0.1, 0.2, +1);
  CHECK(px > 0);
  CHECK(total_energy(p, {0, 0.0, 0.1, px, 0.2}) == doctest::Approx(e).epsilon(1e-14));
  CHECK(solve_momentum_on_shell(p, e, 0.0, 0.1, 0.2, -1) == -px);
  CHECK_THROWS_AS(solve_momentum_on_shell(p, e, 0.0, 0.1, 0.9), Error);
}

TEST_CASE("sample count and uniform times") {
  CHECK(sample_count(1.0, 0.1) == 11);
  CHECK(sample_count(0.3, 0.1) == 4);
  CHECK(sample_count(1.05, 0.1) == 11);
  const auto tr = integrate(params(3), {0, 0, 0.1, 0.2, 0}, 2.0, 0.01);
  CHECK(tr.size() == 201);
  CHECK(tr[200].t == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(tr.energy == total_energy(params(3), tr[0]));
}

TEST_CASE("RK4 is fourth order") {
  const SystemParams p = params(1);
  const State s0{0, 0.2, -0.1, 0.3, 0.4};
  const State exact = harmonic_solution(p, s0, 2.0);
  const double e1 = max_diff(integrate(p, s0, 2.0, 0.1).states.back(), exact);
  const double e2 = max_diff(integrate(p, s0, 2.0, 0.05).states.back(), exact);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.05));
  CHECK(max_diff(integrate(p, s0, 2.0, 1e-3).states.back(), exact) < 1e-12);
}

TEST_CASE("substeps keep the sample grid") {
  const SystemParams p = params(3);
  const State s0{0, 0, 0.1, 0.3, 0.1};
  IntegrationOptions o;
  o.substeps = 10;
  const auto coarse = integrate(p, s0, 5.0, 0.01, o);
  const auto fine = integrate(p, s0, 5.0, 0.001);
  REQUIRE(coarse.size() == 501);
  CHECK(coarse.dt == 0.01);
  for (std::size_t k = 0; k < coarse.size(); k += 50)
    CHECK(max_diff(coarse[k], fine[10 * k]) < 1e-12);
}

TEST_CASE("time reversibility") {
  const SystemParams p = params(3);
  const State s0{0, 0, 0.1, 0.4, 0.2};
  const State end = integrate(p, s0, 10.0, 1e-3).states.back();
  const State back = integrate(p, {0, end.x, end.y, -end.px, -end.py}, 10.0, 1e-3).states.back();
  CHECK(std::abs(back.x - s0.x) < 1e-9);
  CHECK(std::abs(back.y - s0.y) < 1e-9);
  CHECK(std::abs(back.px + s0.px) < 1e-9);
  CHECK(std::abs(back.py + s0.py) < 1e-9);
}

TEST_CASE("escape and non-finite input") {
  const SystemParams p = params(3);
  try {
    integrate(p, {0, 0, 0.0, 0.0, 1.2}, 100.0, 1e-2);
    FAIL("expected Unbounded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unbounded);
  }
  CHECK_THROWS_AS(integrate(p, {0, 0, NAN, 0.0, 0.0}, 1.0, 1e-2), Error);
  CHECK_THROWS_AS(integrate(p, {0, 0, 0.1, 0.0, 0.0}, 1.0, -1e-2), Error);
}

TEST_CASE("propagate streams and can stop early") {
  std::size_t seen = 0;
  propagate(params(3), {0, 0, 0.1, 0.2, 0}, 10.0, 0.01, {}, [&](const State&) {
    return ++seen < 5;
  });
  CHECK(seen == 5);
}

TEST_CASE("fundamental matrix is symplectic") {
  const SystemParams p = params(3);
  const auto frames = integrate_variational(p, {0, 0, 0.1, 0.45, 0.2}, 10.0, 1e-3);
  const Mat4& phi = frames.back().phi;
  CHECK(std::abs(phi.determinant() - 1.0) < 1e-8);
  Mat4 j = Mat4::Zero();
  j.topRightCorner<2, 2>() = Mat2::Identity();
  j.bottomLeftCorner<2, 2>() = -Mat2::Identity();
  CHECK((phi.transpose() * j * phi - j).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fundamental matrix matches finite differences of the flow") {
  const SystemParams p = params(4);
  const State s0{0, 0.05, -0.1, 0.3, 0.2};
  const auto frames = integrate_variational(p, s0, 3.0, 1e-3);
  const Mat4& phi = frames.back().phi;
  const double h = 1e-6;
  for (int c = 0; c < 4; ++c) {
    Vec4 e = Vec4::Zero();
    e[c] = h;
    const Vec4 zp = to_vec(integrate(p, from_vec(0, to_vec(s0) + e), 3.0, 1e-3).states.back());
    const Vec4 zm = to_vec(integrate(p, from_vec(0, to_vec(s0) - e), 3.0, 1e-3).states.back());
    CHECK(((zp - zm) / (2 * h) - phi.col(c)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("scale symmetry maps orbits to orbits") {
  const SystemParams p = params(3);
  const State s0{0, 0.05, -0.1, 0.3, 0.2};
  const double a = 1.7;
  const auto tr = integrate(p, s0, 2.0, 1e-3);
  const auto [q, scaled] = rescale(p, tr, a);
  CHECK(q.mass == doctest::Approx(std::pow(a, -5.0)));
  CHECK(q.omega == doctest::Approx(a * a * a));
  CHECK(scaled.energy == doctest::Approx(tr.energy * a * a * a).epsilon(1e-12));
  const auto direct = integrate(q, scaled[0], scaled.dt * (scaled.size() - 1), scaled.dt);
  CHECK(max_diff(direct.states.back(), scaled.states.back()) < 1e-9);
}

TEST_CASE("text formatting round trips") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 12345.678, 0.0})
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("trajectory CSV and sidecar round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "hhlab_test_io";
  std::filesystem::remove_all(dir);
  const SystemParams p = params(4, 1.2, 0.9);
  const auto tr = integrate(p, {0, 0, -0.2, 0.3, 0.1}, 1.0, 0.1);
  write_trajectory(dir / "orbit.csv", tr);
  CHECK(std::filesystem::exists(sidecar_path(dir / "orbit.csv")));
  CHECK(read_text_file(dir / "orbit.csv").rfind("t,x,y,px,py\n", 0) == 0);
  const auto back = read_trajectory(dir / "orbit.csv");
  REQUIRE(back.size() == tr.size());
  CHECK(back.params.order == 4);
  CHECK(back.params.mass == 1.2);
  CHECK(back.dt == tr.dt);
  for (std::size_t k = 0; k < tr.size(); ++k) CHECK(max_diff(back[k], tr[k]) == 0.0);
  CHECK(trajectory_csv(tr, 5).find("0.5,") != std::string::npos);
  std::filesystem::remove_all(dir);
}
