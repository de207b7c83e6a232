#include <doctest.h>

#include "nvent/quantum_core.hpp"
#include "oracles.hpp"

using namespace nvent;

TEST_CASE("spin-1/2 and spin-1 matrices") {
  const auto half = spin_operators<double>(1);
  CHECK(half.z(0, 0).real() == 0.5);
  CHECK(half.z(1, 1).real() == -0.5);
  const auto one = spin_operators<double>(2);
  CHECK(one.z(0, 0).real() == 1.0);
  CHECK(one.z(1, 1).real() == 0.0);
  CHECK(one.z(2, 2).real() == -1.0);

  for (int two_s : {1, 2}) {
    const auto s = spin_operators<double>(two_s);
    const Operator comm = s.x * s.y - s.y * s.x;
    CHECK((comm - kI * s.z).cwiseAbs().maxCoeff() < 1e-14);
    const double ss = 0.5 * two_s * (0.5 * two_s + 1.0);
    const Operator casimir = s.x * s.x + s.y * s.y + s.z * s.z;
    CHECK((casimir - ss * Operator::Identity(two_s + 1, two_s + 1)).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS_AS(spin_operators<double>(3), InvalidArgument);
  CHECK_THROWS_AS(spin_operators<double>(0), InvalidArgument);
}

TEST_CASE("spin matrices in long double keep the algebra") {
  const auto s = spin_operators<long double>(2);
  const auto comm = (s.x * s.y - s.y * s.x).eval();
  CHECK((comm - std::complex<long double>(0, 1) * s.z).cwiseAbs().maxCoeff() < 1e-18L);
}

TEST_CASE("embedding matches explicit Kronecker products") {
  const SpinSystem sys = SpinSystem::standard();
  const oracle::Mat id = oracle::Mat::Identity(2, 2);
  CHECK((embed(oracle::sz_half(), 0, sys) - oracle::kron3(oracle::sz_half(), id, id)).norm() == 0.0);
  CHECK((embed(oracle::sx_half(), 1, sys) - oracle::kron3(id, oracle::sx_half(), id)).norm() == 0.0);
  CHECK((embed(oracle::sy_half(), 2, sys) - oracle::kron3(id, id, oracle::sy_half())).norm() == 0.0);
  CHECK((embed_pair(oracle::sz_half(), 0, oracle::sz_half(), 2, sys) -
         oracle::kron3(oracle::sz_half(), id, oracle::sz_half()))
            .norm() == 0.0);

  const SpinSystem s1 = SpinSystem::standard(NvMode::SpinOne);
  CHECK(s1.dim() == 12);
  const Operator sz_nv = site_sz(s1, SpinSystem::kNv);
  CHECK(is_hermitian(sz_nv));
  CHECK(sz_nv.trace().real() == doctest::Approx(0.0));

  CHECK_THROWS_AS(embed(Operator::Identity(3, 3), 0, sys), InvalidArgument);
  CHECK_THROWS_AS(embed(Operator::Identity(2, 2), 3, sys), InvalidArgument);
}

TEST_CASE("embedding preserves Hermiticity") {
  std::mt19937_64 rng(7);
  const SpinSystem sys = SpinSystem::standard(NvMode::SpinOne);
  for (int site = 0; site < 3; ++site) {
    const Operator h = oracle::random_hermitian(sys.site(site).dim(), rng);
    CHECK(relative_hermiticity_error(embed(h, site, sys)) < 1e-15);
  }
}

TEST_CASE("partial trace against explicit sums") {
  std::mt19937_64 rng(11);
  const std::array<int, 3> dims{2, 3, 2};
  const Operator rho = oracle::random_density(12, 12, rng);
  const Operator reduced = partial_trace(rho, dims, 1);
  Operator expected = Operator::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2)
          for (int m = 0; m < 3; ++m)
            expected(a * 2 + b, a2 * 2 + b2) += rho((a * 3 + m) * 2 + b, (a2 * 3 + m) * 2 + b2);
  CHECK((reduced - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(reduced.trace() - Complex(1.0)) < 1e-14);

  // Product states factor exactly.
  const Operator a = oracle::random_density(2, 2, rng), b = oracle::random_density(3, 3, rng),
                 c = oracle::random_density(2, 2, rng);
  const Operator prod = oracle::kron3(a, b, c);
  const Operator ac = Eigen::kroneckerProduct(a, c).eval();
  CHECK((partial_trace(prod, dims, 1) - ac).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((partial_trace_to_qubits(prod, SpinSystem::standard(NvMode::SpinOne)) - ac)
            .cwiseAbs()
            .maxCoeff() < 1e-15);
}

TEST_CASE("dipolar constant and Zeeman frequency") {
  const PhysicalConstants k;
  CHECK(k.dipolar_constant(2, 2) == doctest::Approx(oracle::dipolar_c()).epsilon(1e-15));
  // Frozen: -3.26226e-19 rad s^-1 m^3.
  CHECK(k.dipolar_constant(2, 2) == doctest::Approx(-3.26226e-19).epsilon(1e-5));
  CHECK(k.dipolar_constant(2, 2) < 0);
  CHECK(k.zeeman(2.0, 1.0) == doctest::Approx(2 * oracle::kMuB / oracle::kHbar).epsilon(1e-15));
  CHECK(k.d_nv == doctest::Approx(2 * M_PI * 2.87e9).epsilon(1e-15));
  const SpinSystem sys = SpinSystem::standard();
  CHECK(sys.coupling(0, 1) == doctest::Approx(oracle::dipolar_c()).epsilon(1e-15));
}

TEST_CASE("spin system invariants") {
  auto sites = SpinSystem::standard().sites();
  CHECK(SpinSystem(sites).dim() == 8);
  sites[1].t2 = 0.0;
  CHECK_THROWS_AS(SpinSystem{sites}, InvalidArgument);
  sites = SpinSystem::standard().sites();
  sites[1].t2 = -1.0;
  CHECK_THROWS_AS(SpinSystem{sites}, InvalidArgument);
  sites = SpinSystem::standard().sites();
  std::swap(sites[0], sites[1]);
  CHECK_THROWS_AS(SpinSystem{sites}, InvalidArgument);
  sites = SpinSystem::standard().sites();
  sites[0].two_s = 2;
  CHECK_THROWS_AS(SpinSystem{sites}, InvalidArgument);
  const auto with = SpinSystem::standard().with_t2(1e-3, 2e-3, kInf);
  CHECK(with.site(1).t2 == 2e-3);
  CHECK(std::isinf(with.site(2).t2));
}

TEST_CASE("initial product state") {
  for (auto mode : {NvMode::TwoLevel, NvMode::SpinOne}) {
    const SpinSystem sys = SpinSystem::standard(mode);
    const Ket psi = initial_plus_state(sys);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-15));
    const auto lv = nv_levels(sys);
    CHECK(lv.one == 0);
    CHECK(lv.zero == 1);
    // Each qubit reduced state is |+><+|.
    const Operator q = partial_trace_to_qubits(projector(psi), sys);
    CHECK((q - Operator::Constant(4, 4, 0.25)).cwiseAbs().maxCoeff() < 1e-15);
  }
  // The spin-1 NV has no weight on m = -1.
  const SpinSystem s1 = SpinSystem::standard(NvMode::SpinOne);
  const Ket psi = initial_plus_state(s1);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(std::abs(psi((a * 3 + 2) * 2 + b)) == 0.0);
}

TEST_CASE("unitary propagator against a Taylor exponential") {
  std::mt19937_64 rng(3);
  for (int dim : {2, 8, 12}) {
    const Operator h = oracle::random_hermitian(dim, rng);
    const double t = 0.37;
    const Operator u = unitary_propagator(h, t);
    CHECK((u - oracle::expm(-kI * t * h)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((u * u.adjoint() - Operator::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("density matrix checks") {
  std::mt19937_64 rng(5);
  const Operator rho = oracle::random_density(8, 3, rng);
  CHECK(check_density_matrix(rho).valid);
  CHECK_NOTHROW(require_density_matrix(rho, "test"));

  Operator bad_trace = 1.01 * rho;
  CHECK_FALSE(check_density_matrix(bad_trace).valid);
  CHECK_THROWS_AS(require_density_matrix(bad_trace, "test"), InvalidArgument);

  Operator non_herm = rho;
  non_herm(0, 1) += 1e-6;
  CHECK_FALSE(check_density_matrix(non_herm).valid);

  Operator negative = Operator::Zero(2, 2);
  negative(0, 0) = 1.1;
  negative(1, 1) = -0.1;
  const auto report = check_density_matrix(negative);
  CHECK_FALSE(report.valid);
  CHECK(report.min_eigenvalue == doctest::Approx(-0.1));

  double clipped = 0.0;
  const Operator fixed = project_to_density_matrix(negative, &clipped);
  CHECK(check_density_matrix(fixed).valid);
  CHECK(clipped == doctest::Approx(0.1));
  CHECK((project_to_density_matrix(rho) - rho).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fidelities") {
  std::mt19937_64 rng(9);
  const Ket a = oracle::random_ket(4, rng);
  CHECK(state_fidelity(a, a) == doctest::Approx(1.0));
  CHECK(state_fidelity(projector(a), a) == doctest::Approx(1.0));
  const Ket b = oracle::random_ket(4, rng);
  CHECK(state_fidelity(a, b) == doctest::Approx(std::norm((a.adjoint() * b)(0, 0))));
}
