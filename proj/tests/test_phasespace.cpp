#include <catch2/catch_amalgamated.hpp>

#include "qphase/ordering.hpp"
#include "qphase/phasespace.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace qphase;
using Catch::Approx;

TEST_CASE("alpha <-> (q, p) round trip is exact") {
    ModeSpace space(8, 2.0, 3.0, 0.5);
    auto gen = test::rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 50; ++t) {
        const double q = u(gen), p = u(gen);
        const Complex a = alpha_from_qp(space, 0, q, p);
        CHECK(q_of(space, 0, a) == Approx(q).margin(1e-12));
        CHECK(p_of(space, 0, a) == Approx(p).margin(1e-12));
    }
}

TEST_CASE("grid axes require odd sample counts") {
    CHECK_THROWS_AS(GridAxis(6.0, 120), DomainError);
    CHECK_THROWS_AS(GridAxis(-1.0, 121), DomainError);
    CHECK_THROWS_AS(GridAxis(6.0, 1), DomainError);
}

TEST_CASE("grid layout is row-major, Re before Im, mode 0 slowest") {
    ModeSpace space(4);
    PhaseGrid grid = default_grid(space, 2.0, 5);
    const long flat = 3 * 5 + 1; // re index 3, im index 1
    const PhasePoint pt = grid.point_at(flat);
    CHECK(pt.alphas[0].real() == Approx(grid.axes[0].value(3)));
    CHECK(pt.alphas[0].imag() == Approx(grid.axes[0].value(1)));
    CHECK(grid.pack(grid.unpack(flat)) == flat);
}

TEST_CASE("q values of reference states") {
    ModeSpace space(32);
    DensityOperator vac = pure_density(number_state(space, 0));
    CHECK(q_value(vac, PhasePoint(Complex(0, 0))) == Approx(1.0 / M_PI).margin(1e-12));

    // coherent state: Q(alpha) = (1/pi) exp(-|alpha - alpha0|^2)
    const Complex a0(0.7, -0.4);
    DensityOperator coh = pure_density(coherent_state(space, a0));
    const Complex probe = a0 + Complex(0.6, 0.8); // |alpha - a0| = 1
    CHECK(q_value(coh, PhasePoint(probe)) == Approx(std::exp(-1.0) / M_PI).margin(1e-9));

    // |1>: Q(beta) = (1/pi) |beta|^2 exp(-|beta|^2), from the <beta|1> overlap
    DensityOperator one = pure_density(number_state(space, 1));
    CHECK(q_value(one, PhasePoint(Complex(0, 1))) == Approx(std::exp(-1.0) / M_PI).margin(1e-12));
}

TEST_CASE("wigner values against the defining-integral oracle") {
    ModeSpace space(12);
    auto gen = test::rng(42);
    DensityOperator rho = test::random_density(space, gen, 0.3);
    for (const auto& [q, p] : std::vector<std::pair<double, double>>{
             {0.0, 0.0}, {0.3, -0.4}, {1.0, 0.7}, {-1.2, 0.5}}) {
        const double direct = oracle::wigner_direct(rho, q, p);
        const double fast = wigner_value(rho, PhasePoint(alpha_from_qp(space, 0, q, p)));
        CHECK(fast == Approx(direct).margin(1e-10));
    }
    // non-unit constants
    ModeSpace scaled(12, 2.0, 3.0, 0.5);
    DensityOperator rho2 = test::random_density(scaled, gen, 0.3);
    const double direct = oracle::wigner_direct(rho2, 0.4, -0.3);
    const double fast = wigner_value(rho2, PhasePoint(alpha_from_qp(scaled, 0, 0.4, -0.3)));
    CHECK(fast == Approx(direct).margin(1e-10));
}

TEST_CASE("wigner reference values and normalization") {
    ModeSpace space(16);
    DensityOperator vac = pure_density(number_state(space, 0));
    CHECK(wigner_value(vac, PhasePoint(Complex(0, 0))) == Approx(1.0 / M_PI).margin(1e-12));

    DensityOperator one = pure_density(number_state(space, 1));
    CHECK(wigner_value(one, PhasePoint(Complex(0, 0))) == Approx(-1.0 / M_PI).margin(1e-12));

    auto gen = test::rng(3);
    PhaseGrid grid = default_grid(space, 6.0, 121);
    for (int t = 0; t < 5; ++t) {
        StateVector s = test::random_state(space, gen, -1, 0.25);
        PhaseDistribution w = wigner_distribution(pure_density(s), grid);
        CHECK(integrate(w) == Approx(1.0).margin(1e-6));
        CHECK(w.measure == Measure::QP);
    }
    CHECK_THROWS_AS(
        wigner_value(DensityOperator(ModeSpace({2, 2}, {1, 1}, {1, 1}),
                                     Matrix::Identity(4, 4) / 4.0),
                     PhasePoint({Complex(0, 0), Complex(0, 0)})),
        UnsupportedError);
}

TEST_CASE("husimi at kappa = omega reproduces the Q function") {
    ModeSpace space(16);
    auto gen = test::rng(11);
    CHECK_THROWS_AS(husimi_value(pure_density(number_state(space, 0)), PhasePoint(Complex(0, 0)),
                                 -1.0),
                    DomainError);
    for (int t = 0; t < 3; ++t) {
        DensityOperator rho = test::random_density(space, gen, 0.3);
        for (const Complex probe : {Complex(0.0, 0.0), Complex(0.9, -0.6), Complex(-1.4, 0.3)}) {
            const double h = husimi_value(rho, PhasePoint(probe), space.omega[0]);
            const double q = q_value(rho, PhasePoint(probe)) / qp_jacobian(space);
            CHECK(h == Approx(q).margin(1e-6));
        }
    }
    DensityOperator one = pure_density(number_state(space, 1));
    CHECK(husimi_value(one, PhasePoint(Complex(0, 0)), 1.0) >= -1e-12);
    DensityOperator vac = pure_density(number_state(space, 0));
    CHECK(husimi_value(vac, PhasePoint(Complex(0, 0)), 1.0) ==
          Approx(1.0 / (2.0 * M_PI)).margin(1e-8));
}

TEST_CASE("weierstrass transform agrees with the direct Q grid") {
    ModeSpace space(16);
    PhaseGrid grid = default_grid(space, 8.0, 161);
    auto gen = test::rng(17);
    for (int t = 0; t < 5; ++t) {
        DensityOperator rho = pure_density(test::random_state(space, gen, -1, 0.25));
        PhaseDistribution w = wigner_distribution(rho, grid, Measure::Alpha2);
        PhaseDistribution smoothed = weierstrass_transform(w, space.omega[0]);
        PhaseDistribution q = q_distribution(rho, grid, Measure::Alpha2);
        CHECK((smoothed.values - q.values).cwiseAbs().maxCoeff() < 1e-4);
        CHECK(integrate(smoothed) == Approx(integrate(w)).margin(1e-5));
        CHECK(smoothed.kind == DistKind::Husimi);
    }
}

TEST_CASE("weierstrass transform broadens a delta spike to the kernel width") {
    ModeSpace space(4);
    PhaseGrid grid = default_grid(space, 6.0, 121);
    PhaseDistribution spike{grid, DistKind::Wigner, 0.0, Measure::Alpha2,
                            Eigen::VectorXd::Zero(grid.total_points())};
    spike.values(grid.pack({{60, 60}})) = 1.0; // grid centre
    PhaseDistribution out = weierstrass_transform(spike, space.omega[0]);
    // kernel in q: exp(-m kappa q^2 / hbar), so value drops to 1/e at
    // q = sqrt(hbar/(m kappa)), i.e. Re alpha = 1/sqrt(2) here
    const double centre = out.values(grid.pack({{60, 60}}));
    const long at_width = grid.pack({{60 + 7, 60}}); // Re alpha = 0.7 ~ 1/sqrt(2)
    CHECK(out.values(at_width) / centre == Approx(std::exp(-2.0 * 0.7 * 0.7)).margin(1e-6));
}

TEST_CASE("weierstrass transform removes the |1> negativity") {
    ModeSpace space(16);
    PhaseGrid grid = default_grid(space, 6.0, 121);
    PhaseDistribution w = wigner_distribution(pure_density(number_state(space, 1)), grid);
    CHECK(w.values.minCoeff() < -0.25); // strongly negative at the origin
    PhaseDistribution smoothed = weierstrass_transform(w, space.omega[0]);
    CHECK(smoothed.values.minCoeff() >= -1e-9);
}

TEST_CASE("weierstrass margin guard") {
    ModeSpace space(16);
    PhaseGrid tight = default_grid(space, 4.0, 81);
    auto gen = test::rng(5);
    PhaseDistribution w =
        wigner_distribution(pure_density(test::random_state(space, gen, -1, 0.25)), tight);
    CHECK_THROWS_AS(weierstrass_transform(w, space.omega[0]), ExtentError);
}

TEST_CASE("integration and measure covariance") {
    ModeSpace space(16);
    PhaseGrid grid = default_grid(space, 6.0, 121);
    auto gen = test::rng(23);
    DensityOperator rho = test::random_density(space, gen, 0.4);
    PhaseDistribution q = q_distribution(rho, grid);
    CHECK(integrate(q) == Approx(1.0).margin(1e-6));

    PhaseDistribution doubled = q;
    doubled.values *= 2.0;
    CHECK(integrate(doubled) == Approx(2.0 * integrate(q)).margin(1e-12));

    PhaseDistribution qp = convert_measure(q, Measure::QP);
    CHECK(integrate(qp) == Approx(integrate(q)).margin(1e-12));
    PhaseDistribution back = convert_measure(qp, Measure::Alpha2);
    CHECK((back.values - q.values).cwiseAbs().maxCoeff() == 0.0);

    // a grid truncated at R=2 integrates the square, not the disk
    PhaseDistribution tight = q_distribution(pure_density(number_state(space, 0)),
                                             default_grid(space, 2.0, 81));
    const double erf2 = std::erf(2.0);
    CHECK(integrate(tight) == Approx(erf2 * erf2).margin(1e-9));
}

TEST_CASE("region probabilities") {
    ModeSpace space(16);
    PhaseGrid grid = default_grid(space, 6.0, 121);
    PhaseDistribution q = q_distribution(pure_density(number_state(space, 0)), grid);

    CHECK(region_probability(q, [](const PhasePoint&) { return true; }) ==
          Approx(integrate(q)).margin(1e-12));
    CHECK(region_probability(q, [](const PhasePoint& p) { return p.alphas[0].real() > 0.0; }) ==
          Approx(0.5).margin(1e-6));

    // radial mass inside |alpha| <= 2: 1 - e^{-4}, the closed-form radial oracle
    const double disk2 =
        region_probability(q, [](const PhasePoint& p) { return std::abs(p.alphas[0]) <= 2.0; });
    CHECK(disk2 == Approx(1.0 - std::exp(-4.0)).margin(2e-4));

    // the same integral on a finer grid tightens toward the oracle (O(h^2))
    PhaseDistribution fine = q_distribution(pure_density(number_state(space, 0)),
                                            default_grid(space, 6.0, 301));
    const double disk2f =
        region_probability(fine, [](const PhasePoint& p) { return std::abs(p.alphas[0]) <= 2.0; });
    CHECK(disk2f == Approx(1.0 - std::exp(-4.0)).margin(5e-5));

    const double disk1 =
        region_probability(fine, [](const PhasePoint& p) { return std::abs(p.alphas[0]) <= 1.0; });
    CHECK(disk1 == Approx(1.0 - std::exp(-1.0)).margin(2e-4));

    PhaseDistribution w = wigner_distribution(pure_density(number_state(space, 0)), grid);
    CHECK_THROWS_AS(region_probability(w, [](const PhasePoint&) { return true; }), DomainError);
}

TEST_CASE("phase expectations and the anti-normal moment bridge") {
    ModeSpace space(16);
    PhaseGrid grid = default_grid(space, 8.0, 161);
    DensityOperator vac = pure_density(number_state(space, 0));
    PhaseDistribution q = q_distribution(vac, grid);

    auto unity = PhasePolynomial::constant(Coefficient::integer(1));
    CHECK(phase_expectation(q, unity).value.real() == Approx(1.0).margin(1e-9));

    auto q2 = PhasePolynomial::variable_q().pow(2);
    // <q^2>_Q = hbar/(2mw) + hbar/(2mw) = 1 at unit constants: the Gaussian
    // moment of the vacuum Q, twice the ground-state spread
    CHECK(phase_expectation(q, q2).value.real() == Approx(1.0).margin(1e-9));
    CHECK_FALSE(phase_expectation(q, q2).extent_warning);
    CHECK(phase_expectation(q_distribution(vac, default_grid(space, 6.0, 121)), q2.pow(2))
              .extent_warning); // degree 4 wants R >= 8

    // moments of alpha^j alpha*^k equal anti-normal operator traces
    auto gen = test::rng(31);
    for (int t = 0; t < 4; ++t) {
        DensityOperator rho = test::random_density(space, gen, 0.4, 10);
        PhaseDistribution qr = q_distribution(rho, grid, t % 2 ? Measure::QP : Measure::Alpha2);
        for (int j = 0; j <= 2; ++j)
            for (int k = 0; k <= 2; ++k) {
                const Complex lhs = phase_expectation(qr, alpha_monomial(j, k)).value;
                LadderWord w;
                for (int x = 0; x < j; ++x) w.push_back({0, false});
                for (int x = 0; x < k; ++x) w.push_back({0, true});
                LadderPolynomial op(1);
                op.add_term(w, Coefficient::integer(1));
                const Complex rhs = expectation_trace(rho, op).value;
                CHECK(std::abs(lhs - rhs) < 1e-5);
            }
    }
}

TEST_CASE("positivity across random density operators") {
    ModeSpace space(16);
    PhaseGrid grid = default_grid(space, 6.0, 121);
    auto gen = test::rng(47);
    for (int t = 0; t < 20; ++t) {
        PhaseDistribution q = q_distribution(test::random_density(space, gen, 0.25), grid);
        CHECK(q.values.minCoeff() >= -kQNegativityTol);
        CHECK(integrate(q) == Approx(1.0).margin(1e-6));
    }
}
