#include <catch2/catch_amalgamated.hpp>

#include "qphase/fock.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace qphase;
using Catch::Approx;

TEST_CASE("mode space validation") {
    CHECK_THROWS_AS(ModeSpace(1), DomainError);
    CHECK_THROWS_AS(ModeSpace(4, -1.0), DomainError);
    CHECK_THROWS_AS(ModeSpace({70, 70}, {1, 1}, {1, 1}), ScaleError);
    ModeSpace two({4, 8}, {1.0, 2.0}, {1.0, 0.5});
    CHECK(two.dim() == 32);
    CHECK(two.stride(0) == 8);
    CHECK(two.stride(1) == 1);
    CHECK(two.pack({2, 5}) == 21);
    CHECK(two.unpack(21) == std::vector<int>{2, 5});
    ModeSpace joint = ModeSpace(4).tensor(ModeSpace(8));
    CHECK(joint.dim() == 32);
    CHECK_THROWS_AS(two.check_mode(2), IndexError);
}

TEST_CASE("annihilation matrix elements, D=3") {
    ModeSpace space(3);
    Matrix a = annihilation(space).matrix;
    Matrix expected(3, 3);
    expected << 0, 1, 0, 0, 0, std::sqrt(2.0), 0, 0, 0;
    CHECK((a - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("annihilation kills the vacuum") {
    ModeSpace space(8);
    Vector v = annihilation(space).matrix * number_state(space, 0).amplitudes;
    CHECK(v.norm() == 0.0);
}

TEST_CASE("coherent states are annihilation eigenstates") {
    ModeSpace space(32);
    StateVector alpha = coherent_state(space, Complex(0.5, 0.0));
    Vector residual = annihilation(space).matrix * alpha.amplitudes - 0.5 * alpha.amplitudes;
    CHECK(residual.norm() < 1e-8);
}

TEST_CASE("creation is the adjoint, ladder action") {
    ModeSpace space(4);
    CHECK((creation(space).matrix - annihilation(space).matrix.adjoint()).cwiseAbs().maxCoeff() ==
          0.0);
    Vector up = creation(space).matrix * number_state(space, 1).amplitudes;
    CHECK(std::abs(up(2) - std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(up.norm() - std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("ladder commutator is the identity below the truncation edge") {
    ModeSpace space(16);
    Matrix a = annihilation(space).matrix;
    Matrix comm = a * a.adjoint() - a.adjoint() * a;
    // explicit matrix multiplication oracle: identity on levels 0..D-2
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
            CHECK(std::abs(comm(i, j) - (i == j ? 1.0 : 0.0)) < 1e-14);
    CHECK(comm(15, 15).real() == Approx(-15.0)); // truncation artifact on the top level
}

TEST_CASE("position and momentum") {
    ModeSpace space(16);
    Matrix q = position(space).matrix;
    Matrix p = momentum(space).matrix;
    CHECK((q - q.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((p - p.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    Vector vac = number_state(space, 0).amplitudes;
    CHECK(std::abs(vac.dot(q * vac)) < 1e-14);                    // <0|q|0> = 0 by parity
    CHECK((vac.dot(q * q * vac)).real() == Approx(0.5).margin(1e-12)); // hbar/(2 m w) at unit constants

    Matrix comm = q * p - p * q;
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j) {
            const Complex expected = (i == j) ? Complex(0.0, 1.0) : Complex(0.0, 0.0);
            CHECK(std::abs(comm(i, j) - expected) < 1e-13);
        }

    ModeSpace scaled(16, 2.0, 3.0, 0.5);
    Vector vac2 = number_state(scaled, 0).amplitudes;
    const double expect_q2 = scaled.hbar / (2.0 * scaled.mass[0] * scaled.omega[0]);
    CHECK((vac2.dot(position(scaled).matrix * position(scaled).matrix * vac2)).real() ==
          Approx(expect_q2).margin(1e-12));
}

TEST_CASE("number states") {
    ModeSpace space(4);
    CHECK(number_state(space, 0).amplitudes(0) == Complex(1.0, 0.0));
    Vector two = number_state(space, 2).amplitudes;
    CHECK(two(2) == Complex(1.0, 0.0));
    CHECK(two.norm() == 1.0);
    CHECK_THROWS_AS(number_state(space, 4), TruncationError);

    Matrix h = harmonic_hamiltonian(space).matrix;
    Vector one = number_state(space, 1).amplitudes;
    CHECK((one.dot(h * one)).real() == Approx(1.5).margin(1e-14)); // hbar w (n + 1/2)
}

TEST_CASE("coherent state amplitudes and overlap law") {
    ModeSpace space(32);
    CHECK((coherent_state(space, Complex(0.0, 0.0)).amplitudes -
           number_state(space, 0).amplitudes)
              .norm() == 0.0);

    StateVector one = coherent_state(space, Complex(1.0, 0.0));
    CHECK(one.amplitudes(0).real() == Approx(std::exp(-0.5)).epsilon(1e-9));

    const Complex a(0.3, 0.0), b(0.0, -0.2);
    StateVector sa = coherent_state(space, a), sb = coherent_state(space, b);
    const double overlap = std::norm(sb.amplitudes.dot(sa.amplitudes));
    CHECK(overlap == Approx(std::exp(-std::norm(a - b))).margin(1e-8));
    CHECK(overlap == Approx(oracle::coherent_overlap_series(a, b)).margin(1e-10));
}

TEST_CASE("coherent truncation guard names the required dimension") {
    ModeSpace space(8);
    try {
        coherent_state(space, Complex(3.0, 0.0));
        FAIL("guard did not fire");
    } catch (const TruncationError& e) {
        const std::string msg = e.what();
        const int needed = required_truncation(Complex(3.0, 0.0));
        CHECK(msg.find("D >= " + std::to_string(needed)) != std::string::npos);
        CHECK_NOTHROW(coherent_state(ModeSpace(needed), Complex(3.0, 0.0)));
    }
}

TEST_CASE("pure densities") {
    ModeSpace space(4);
    DensityOperator vac = pure_density(number_state(space, 0));
    CHECK(vac.matrix(0, 0) == Complex(1.0, 0.0));
    CHECK(vac.matrix.cwiseAbs().sum() == 1.0);

    Vector plus = (number_state(space, 0).amplitudes + number_state(space, 1).amplitudes) /
                  std::sqrt(2.0);
    DensityOperator rho = pure_density(StateVector(space, plus));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(rho.matrix(i, j).real() == Approx(0.5));
    CHECK(rho.purity() == Approx(1.0).margin(1e-9));

    Matrix mixed = 0.5 * pure_density(number_state(space, 0)).matrix +
                   0.5 * pure_density(number_state(space, 1)).matrix;
    CHECK(DensityOperator(space, mixed).purity() == Approx(0.5).margin(1e-12));
}

TEST_CASE("density operator invariants are enforced") {
    ModeSpace space(3);
    Matrix bad = Matrix::Zero(3, 3);
    bad(0, 1) = 1.0;
    bad(0, 0) = 1.0;
    CHECK_THROWS_AS(DensityOperator(space, bad), DomainError); // not Hermitian

    Matrix off_trace = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(DensityOperator(space, off_trace), DomainError); // trace 3

    Matrix indefinite = Matrix::Zero(3, 3);
    indefinite(0, 0) = 1.5;
    indefinite(1, 1) = -0.5;
    CHECK_THROWS_AS(DensityOperator(space, indefinite), DomainError);
}

TEST_CASE("property: constructors and adjointness over random inputs") {
    auto gen = test::rng(12345);
    ModeSpace space(32);
    std::uniform_real_distribution<double> mag(0.0, 2.0), phase(0.0, 2 * M_PI);
    for (int trial = 0; trial < 100; ++trial) {
        StateVector s = test::random_state(space, gen);
        CHECK(std::abs(s.amplitudes.norm() - 1.0) < 1e-12);

        const double r = mag(gen), th = phase(gen);
        const Complex alpha = std::polar(r, th);
        StateVector c = coherent_state(space, alpha);
        Vector residual = annihilation(space).matrix * c.amplitudes - alpha * c.amplitudes;
        CHECK(residual.norm() < 1e-7);
    }
    // adjointness is exact by construction on every mode of a two-mode space
    ModeSpace two({8, 5}, {1.0, 1.0}, {1.0, 2.0});
    for (int mode = 0; mode < 2; ++mode)
        CHECK((creation(two, mode).matrix - annihilation(two, mode).matrix.adjoint())
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
}

TEST_CASE("multi-mode operators act on their own mode") {
    ModeSpace two({3, 4}, {1.0, 1.0}, {1.0, 1.0});
    Matrix a0 = annihilation(two, 0).matrix;
    Matrix a1 = annihilation(two, 1).matrix;
    CHECK((a0 * a1 - a1 * a0).cwiseAbs().maxCoeff() == 0.0);
    StateVector s = number_state(two, {1, 2});
    Vector v0 = a0 * s.amplitudes;
    CHECK(std::abs(v0(two.pack({0, 2})) - 1.0) < 1e-15);
    Vector v1 = a1 * s.amplitudes;
    CHECK(std::abs(v1(two.pack({1, 1})) - std::sqrt(2.0)) < 1e-15);
}

TEST_CASE("partial trace of a product state") {
    ModeSpace sys(3), app(5);
    auto gen = test::rng(99);
    DensityOperator rho_s = test::random_density(sys, gen);
    DensityOperator rho_a = test::random_density(app, gen);
    DensityOperator joint(sys.tensor(app), tensor_product(rho_s.matrix, rho_a.matrix));
    CHECK((partial_trace(joint, 0).matrix - rho_s.matrix).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((partial_trace(joint, 1).matrix - rho_a.matrix).cwiseAbs().maxCoeff() < 1e-12);
}
