#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "cvqec/gaussian.hpp"
#include "support/fock_oracle.hpp"
#include "support/random_states.hpp"

using namespace cvqec;
using cvqec::testing::random_single_mode;
using cvqec::testing::random_state;
using cvqec::testing::random_symplectic;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Covariance of two_mode_squeezed(r) written out by hand:
// a = cosh(2r)/2 on the diagonal, +sinh(2r)/2 between the x's, -sinh(2r)/2
// between the p's.
Matrix hand_tms_cov(double r) {
  const double a = 0.5 * std::cosh(2 * r);
  const double c = 0.5 * std::sinh(2 * r);
  Matrix m(4, 4);
  m << a, 0, c, 0,  //
      0, a, 0, -c,  //
      c, 0, a, 0,   //
      0, -c, 0, a;
  return m;
}

}  // namespace

TEST_SUITE("gaussian") {
  TEST_CASE("vacuum state") {
    const GaussianState v1 = vacuum_state(1);
    CHECK(v1.mean().isZero());
    CHECK(v1.cov().isApprox(0.5 * Matrix::Identity(2, 2)));

    const GaussianState v3 = vacuum_state(3);
    CHECK(v3.cov().rows() == 6);
    for (double nu : symplectic_eigenvalues(v3)) {
      CHECK(nu == doctest::Approx(0.5).epsilon(1e-14));
    }
    CHECK(duan_simon(vacuum_state(2), 0, 1) == 2.0);
    CHECK_THROWS_AS(vacuum_state(0), std::invalid_argument);
  }

  TEST_CASE("construction validates shape and symmetry") {
    Matrix asym = 0.5 * Matrix::Identity(2, 2);
    asym(0, 1) = 1e-6;
    CHECK_THROWS_AS(GaussianState(Vector::Zero(2), asym), std::invalid_argument);
    CHECK_THROWS_AS(GaussianState(Vector::Zero(3), Matrix::Identity(2, 2)), std::invalid_argument);
    CHECK_THROWS_AS(GaussianState(Vector::Zero(3), Matrix::Identity(3, 3)), std::invalid_argument);
  }

  TEST_CASE("displace") {
    const GaussianState d = displace(vacuum_state(1), 0, 1.0, 0.0);
    CHECK(d.mean()(0) == 1.0);
    CHECK(d.mean()(1) == 0.0);
    CHECK(d.cov() == vacuum_state(1).cov());

    const GaussianState back = displace(displace(vacuum_state(2), 1, 0.3, -1.7), 1, -0.3, 1.7);
    CHECK(back.mean().isZero(1e-15));
    CHECK_THROWS_AS(displace(vacuum_state(1), 1, 0, 0), std::invalid_argument);
  }

  TEST_CASE("beam splitter") {
    CHECK(max_abs(beam_splitter(2, 1.0, 0, 1, BeamSplitterConvention::Rotation).matrix() - Matrix::Identity(4, 4)) ==
          0.0);
    // Reflection convention at T = 1 keeps the signal and flips the auxiliary port.
    const Matrix reflect_t1 = beam_splitter(2, 1.0, 0, 1).matrix();
    CHECK(reflect_t1(0, 0) == 1.0);
    CHECK(reflect_t1(2, 2) == -1.0);

    // Hand 4x4 product: [[t,-r],[-r,-t]]^2 = I for the reflection sign pattern.
    const double t = std::sqrt(0.5);
    Matrix hand(4, 4);
    hand << t, 0, -t, 0,  //
        0, t, 0, -t,      //
        -t, 0, -t, 0,     //
        0, -t, 0, -t;
    const Matrix s = beam_splitter(2, 0.5, 0, 1).matrix();
    CHECK(max_abs(s - hand) < 1e-15);
    CHECK(max_abs(hand * hand - Matrix::Identity(4, 4)) < 1e-15);
    CHECK(max_abs(s * s - Matrix::Identity(4, 4)) < 1e-15);

    const GaussianState out = apply(beam_splitter(2, 0.38, 0, 1), vacuum_state(2));
    CHECK(max_abs(out.cov() - 0.5 * Matrix::Identity(4, 4)) < 1e-15);

    CHECK_THROWS_AS(beam_splitter(2, 1.1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(beam_splitter(2, -0.1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(beam_splitter(2, 0.5, 1, 1), std::invalid_argument);
  }

  TEST_CASE("phase shift") {
    CHECK(max_abs(phase_shift(1, 0.0, 0).matrix() - Matrix::Identity(2, 2)) == 0.0);
    Vector m(2);
    m << 1.0, 2.0;
    const GaussianState s = apply(phase_shift(1, std::numbers::pi, 0), GaussianState(m, 0.5 * Matrix::Identity(2, 2)));
    CHECK(s.mean()(0) == doctest::Approx(-1.0));
    CHECK(s.mean()(1) == doctest::Approx(-2.0));

    const GaussianState sq = apply(squeeze(1, 0.5, 0.0, 0), vacuum_state(1));
    const GaussianState rot = apply(phase_shift(1, std::numbers::pi / 2, 0), sq);
    CHECK(rot.cov()(1, 1) == doctest::Approx(sq.cov()(0, 0)));
    CHECK(rot.cov()(0, 0) == doctest::Approx(sq.cov()(1, 1)));
  }

  TEST_CASE("squeeze") {
    CHECK(max_abs(squeeze(1, 0.0, 0.7, 0).matrix() - Matrix::Identity(2, 2)) < 1e-15);
    const GaussianState s = apply(squeeze(1, 0.5, 0.0, 0), vacuum_state(1));
    CHECK(s.cov()(0, 0) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(s.cov()(1, 1) == doctest::Approx(0.5 * std::exp(1.0)).epsilon(1e-14));
    CHECK(as_snu(quadrature_variance(s, {QuadratureKind::X, 0})) == doctest::Approx(0.36787944117144233));

    const Matrix round = squeeze(1, -0.9, 1.1, 0).matrix() * squeeze(1, 0.9, 1.1, 0).matrix();
    CHECK(max_abs(round - Matrix::Identity(2, 2)) < 1e-12);
    CHECK_THROWS_AS(squeeze(1, 25.0, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(squeeze(1, NAN, 0.0, 0), std::invalid_argument);
  }

  TEST_CASE("two-mode squeezed state against the hand-built covariance") {
    CHECK(max_abs(two_mode_squeezed(0.0).cov() - vacuum_state(2).cov()) < 1e-15);
    for (double r : {0.3, 0.5, 1.0}) {
      CHECK(max_abs(two_mode_squeezed(r).cov() - hand_tms_cov(r)) < 1e-14);
    }
    CHECK(duan_simon(two_mode_squeezed(0.3), 0, 1) == doctest::Approx(1.0976232721880528).epsilon(1e-13));
    CHECK(duan_simon(two_mode_squeezed(1.0), 0, 1) == doctest::Approx(0.2706705664732254).epsilon(1e-13));
    for (double nu : symplectic_eigenvalues(two_mode_squeezed(0.8))) {
      CHECK(nu == doctest::Approx(0.5).epsilon(1e-12));
    }
    // Purity: det(2 cov) = 1.
    CHECK((2.0 * two_mode_squeezed(0.8).cov()).determinant() == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("apply") {
    std::mt19937_64 rng(11);
    const GaussianState s = random_state(3, rng);
    const GaussianState same = apply(SymplecticTransform::identity(3), s);
    CHECK(max_abs(same.cov() - s.cov()) == 0.0);
    CHECK_THROWS_AS(apply(SymplecticTransform::identity(2), s), std::invalid_argument);

    for (int trial = 0; trial < 20; ++trial) {
      const GaussianState in = random_state(2, rng);
      const SymplecticTransform s1 = random_symplectic(2, rng);
      const SymplecticTransform s2 = random_symplectic(2, rng);
      const GaussianState seq = apply(s2, apply(s1, in));
      const GaussianState cmp = apply(SymplecticTransform(s2.matrix() * s1.matrix()), in);
      CHECK(max_abs(seq.cov() - cmp.cov()) < 1e-12 * std::max(1.0, max_abs(cmp.cov())));
      CHECK((seq.mean() - cmp.mean()).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, cmp.mean().cwiseAbs().maxCoeff()));
    }
  }

  TEST_CASE("symplectic structure is enforced") {
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 0) = 2.0;
    CHECK_THROWS_AS(SymplecticTransform{bad}, std::invalid_argument);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const auto n = static_cast<std::size_t>(1 + trial % 4);
      const double t = cvqec::testing::uniform(rng, 0.0, 1.0);
      if (n >= 2) {
        CHECK(symplectic_defect(beam_splitter(n, t, 0, n - 1).matrix()) < 1e-12);
        CHECK(symplectic_defect(beam_splitter(n, t, n - 1, 0, BeamSplitterConvention::Rotation).matrix()) < 1e-12);
      }
      CHECK(symplectic_defect(phase_shift(n, 7.0 * t, n - 1).matrix()) < 1e-12);
      CHECK(symplectic_defect(squeeze(n, 2.0 * t - 1.0, 3.0 * t, 0).matrix()) < 1e-12);
    }
  }

  TEST_CASE("passive transforms preserve vacuum and mean-field energy") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const double t = cvqec::testing::uniform(rng, 0.0, 1.0);
      const double phi = cvqec::testing::uniform(rng, -4.0, 4.0);
      const SymplecticTransform passive = phase_shift(3, phi, 1).after(beam_splitter(3, t, 0, 2));
      CHECK(max_abs(apply(passive, vacuum_state(3)).cov() - vacuum_state(3).cov()) < 1e-12);
      const GaussianState s = random_state(3, rng);
      CHECK(apply(passive, s).mean().squaredNorm() == doctest::Approx(s.mean().squaredNorm()).epsilon(1e-12));
    }
  }

  TEST_CASE("apply preserves physicality") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 3);
      const GaussianState s = random_state(n, rng);
      const GaussianState out = apply(random_symplectic(n, rng), s);
      REQUIRE(physicality_check(out).min_symplectic_eigenvalue >= 0.5 - 1e-9);
    }
  }

  TEST_CASE("add noise") {
    const GaussianState v = vacuum_state(2);
    CHECK(max_abs(add_noise(v, Matrix::Zero(4, 4)).cov() - v.cov()) == 0.0);

    // (sqrt(g1) v_C, sqrt(g2) v_C) per quadrature: cross term sqrt(g1 g2) Var(v_C).
    const double g1 = 0.61, g2 = 1.0, var = 3.0;
    Vector c = Vector::Zero(4);
    c(0) = std::sqrt(g1);
    c(2) = std::sqrt(g2);
    const GaussianState noisy = add_noise(v, var * c * c.transpose());
    CHECK(noisy.cov()(0, 2) == doctest::Approx(std::sqrt(g1 * g2) * var));
    CHECK(noisy.mean().isZero());

    Matrix one = Matrix::Zero(2, 2);
    one(0, 0) = from_snu(3.0);
    CHECK(as_snu(add_noise(vacuum_state(1), one).cov()(0, 0)) == doctest::Approx(4.0));

    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 0) = -1e-6;
    CHECK_THROWS_AS(add_noise(vacuum_state(1), neg), std::invalid_argument);
    CHECK_THROWS_AS(add_noise(vacuum_state(1), Matrix::Zero(4, 4)), std::invalid_argument);
  }

  TEST_CASE("partial trace") {
    std::mt19937_64 rng(3);
    const GaussianState s = random_state(3, rng);
    const GaussianState all = partial_trace(s, {0, 1, 2});
    CHECK(max_abs(all.cov() - s.cov()) == 0.0);

    const GaussianState reduced = partial_trace(two_mode_squeezed(0.5), {0});
    CHECK(reduced.cov()(0, 0) == doctest::Approx(0.7715403174076219).epsilon(1e-13));
    CHECK(reduced.cov()(1, 1) == doctest::Approx(0.7715403174076219).epsilon(1e-13));
    CHECK(reduced.cov()(0, 1) == doctest::Approx(0.0));

    CHECK(max_abs(partial_trace(vacuum_state(3), {1}).cov() - vacuum_state(1).cov()) == 0.0);
    CHECK_THROWS_AS(partial_trace(s, {}), std::invalid_argument);
    CHECK_THROWS_AS(partial_trace(s, {3}), std::invalid_argument);

    // Tracing, padding with vacuum and tracing again leaves the kept block.
    const GaussianState kept = partial_trace(s, {2, 0});
    const GaussianState again = partial_trace(tensor(kept, vacuum_state(1)), {0, 1});
    CHECK(max_abs(again.cov() - kept.cov()) == 0.0);
    CHECK((again.mean() - kept.mean()).isZero());
  }

  TEST_CASE("quadrature variance and SNU") {
    CHECK(quadrature_variance(vacuum_state(1), {QuadratureKind::P, 0}) == 0.5);
    CHECK(as_snu(0.5) == 1.0);
    // Pure loss eta = 0.8 on a 10 SNU input: 0.8 * 10 + 0.2 * 1 = 8.2 SNU.
    const double eta = 0.8;
    const double out = eta * from_snu(10.0) + (1.0 - eta) * kVacuumVariance;
    const GaussianState noisy = thermal_state(from_snu(10.0));
    const SymplecticTransform bs = beam_splitter(2, eta, 0, 1, BeamSplitterConvention::Rotation);
    const GaussianState lossy = partial_trace(apply(bs, tensor(noisy, vacuum_state(1))), {0});
    CHECK(as_snu(quadrature_variance(lossy, {QuadratureKind::X, 0})) == doctest::Approx(8.2).epsilon(1e-14));
    CHECK(as_snu(out) == doctest::Approx(8.2));
  }

  TEST_CASE("duan-simon") {
    CHECK(duan_simon(vacuum_state(2), 0, 1) == 2.0);
    CHECK(duan_simon(tensor(thermal_state(1.0), thermal_state(1.0)), 0, 1) == 4.0);
    CHECK_THROWS_AS(duan_simon(vacuum_state(2), 1, 1), std::invalid_argument);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
      const GaussianState prod = tensor(random_single_mode(rng), random_single_mode(rng));
      REQUIRE(duan_simon(prod, 0, 1) >= 2.0 - 1e-12);
    }
  }

  TEST_CASE("symplectic eigenvalues and physicality") {
    for (double nu : symplectic_eigenvalues(vacuum_state(2))) {
      CHECK(nu == doctest::Approx(0.5));
    }
    const GaussianState sub = GaussianState(Vector::Zero(2), 0.4 * Matrix::Identity(2, 2));
    CHECK_FALSE(is_physical(sub));
    CHECK(is_physical(thermal_state(0.9)));
    const GaussianState th = tensor(thermal_state(0.7), thermal_state(1.3));
    const auto nu = symplectic_eigenvalues(th);
    CHECK(nu[0] == doctest::Approx(0.7));
    CHECK(nu[1] == doctest::Approx(1.3));
  }

  TEST_CASE("json round trip") {
    std::mt19937_64 rng(8);
    const GaussianState s = random_state(2, rng);
    const GaussianState back = state_from_json(to_json(s));
    CHECK(back.n_modes() == 2);
    CHECK(max_abs(back.cov() - s.cov()) == 0.0);
    CHECK((back.mean() - s.mean()).isZero(0.0));
    CHECK(to_json(vacuum_state(1)) == R"({"cov":[0.5,0.0,0.0,0.5],"mean":[0.0,0.0],"n_modes":1})");
  }
}

TEST_SUITE("fidelity") {
  using cvqec::testing::fock_density;
  using cvqec::testing::fock_fidelity;
  using cvqec::testing::fock_moments;
  using cvqec::testing::FockGaussian;
  using cvqec::testing::truncate;

  constexpr int kWorkDim = 120;
  constexpr int kCutoff = 40;

  GaussianState from_fock(const cvqec::testing::CMatrix& rho) {
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
    fock_moments(rho, mean, cov);
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GaussianState(mean, cov);
  }

  TEST_CASE("closed forms") {
    const GaussianState vac = vacuum_state(1);
    CHECK(fidelity(displace(vac, 0, 1.0, 0.0), vac) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(std::abs(fidelity(displace(vac, 0, 1.0, 0.0), vac) - 0.6065306597126334) < 1e-9);
    CHECK(fidelity(vac, thermal_state(1.5)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(fidelity(vacuum_state(2), vacuum_state(2)), UnsupportedError);
  }

  TEST_CASE("identity, symmetry and bounds on random states") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
      const GaussianState a = random_single_mode(rng);
      const GaussianState b = random_single_mode(rng);
      CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-9));
      const double fab = fidelity(a, b);
      CHECK(fab == doctest::Approx(fidelity(b, a)).epsilon(1e-12));
      CHECK(fab >= 0.0);
      CHECK(fab < 1.0 - 1e-9);
    }
  }

  TEST_CASE("Fock-basis oracle at cutoff 40") {
    const FockGaussian cases[] = {
        {0.0, 0.0, 0.0, {1.0 / std::sqrt(2.0), 0.0}},  // coherent, x-mean 1
        {1.0, 0.0, 0.0, {0.0, 0.0}},                   // thermal, V = 1.5
        {0.3, 0.4, 0.7, {0.5, -0.3}},
        {0.0, 0.5, 2.0, {-0.4, 0.6}},
        {0.8, 0.2, -1.0, {0.2, 0.9}},
    };
    const FockGaussian vacuum{};
    for (const FockGaussian& c1 : cases) {
      for (const FockGaussian* c2 : {&vacuum, &cases[2], &cases[4]}) {
        const auto rho1 = fock_density(c1, kWorkDim);
        const auto rho2 = fock_density(*c2, kWorkDim);
        const double oracle = fock_fidelity(truncate(rho1, kCutoff), truncate(rho2, kCutoff));
        const double engine = fidelity(from_fock(rho1), from_fock(rho2));
        CHECK(std::abs(oracle - engine) < 1e-6);
      }
    }
    // The oracle itself reproduces the coherent overlap.
    const double coh = fock_fidelity(truncate(fock_density(cases[0], kWorkDim), kCutoff),
                                     truncate(fock_density(vacuum, kWorkDim), kCutoff));
    CHECK(coh == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
  }
}
