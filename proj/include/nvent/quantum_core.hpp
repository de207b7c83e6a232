#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace nvent {

template <typename Scalar>
using OperatorT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using KetT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using Operator = OperatorT<double>;
using Ket = KetT<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr Complex kI{0.0, 1.0};

/// Raised for inputs that violate a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot meet its tolerances.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CODATA 2018 values. Couplings are converted to angular frequency (hbar = 1).
struct PhysicalConstants {
  double mu0_over_4pi = 1.00000000055e-7;  // T m / A
  double mu_b = 9.2740100783e-24;          // J / T
  double hbar = 1.054571817e-34;           // J s
  double d_nv = 2.0 * std::numbers::pi * 2.87e9;  // rad / s

  /// Dipolar constant C = -(mu0/4pi) mu_i mu_j / hbar in rad s^-1 m^3.
  /// Moments are given in Bohr magnetons.
  double dipolar_constant(double moment_i, double moment_j) const {
    return -mu0_over_4pi * (moment_i * mu_b) * (moment_j * mu_b) / hbar;
  }

  /// Zeeman angular frequency mu B / hbar for a moment in Bohr magnetons.
  double zeeman(double moment, double b_field) const { return moment * mu_b * b_field / hbar; }
};

enum class SiteLabel { Qubit1, NV, Qubit2 };

/// The NV centre is either an effective two-level site with S_z = diag(1/2, -1/2)
/// or the full spin-1 triplet with zero-field splitting.
enum class NvMode { TwoLevel, SpinOne };

struct SpinSite {
  SiteLabel label = SiteLabel::Qubit1;
  int two_s = 1;                 // 2s, so 1 for spin-1/2 and 2 for spin-1
  double magnetic_moment = 2.0;  // Bohr magnetons
  double t2 = kInf;              // seconds

  int dim() const { return two_s + 1; }
  double spin() const { return 0.5 * two_s; }
};

/// Three sites in the fixed order (qubit1, NV, qubit2).
class SpinSystem {
 public:
  SpinSystem(std::array<SpinSite, 3> sites, double b_field = 0.0,
             PhysicalConstants constants = {});

  /// mu = 2 mu_B on every site, infinite T2, no field.
  static SpinSystem standard(NvMode mode = NvMode::TwoLevel);

  const SpinSite& site(int index) const { return sites_.at(static_cast<std::size_t>(index)); }
  const std::array<SpinSite, 3>& sites() const { return sites_; }
  double b_field() const { return b_field_; }
  const PhysicalConstants& constants() const { return constants_; }
  NvMode nv_mode() const { return sites_[kNv].two_s == 2 ? NvMode::SpinOne : NvMode::TwoLevel; }

  std::array<int, 3> dims() const;
  int dim() const;

  /// Dipolar constant between two sites in rad s^-1 m^3.
  double coupling(int i, int j) const;

  SpinSystem with_t2(double t2_qubit1, double t2_nv, double t2_qubit2) const;
  SpinSystem with_b_field(double b_field) const;

  static constexpr int kQubit1 = 0;
  static constexpr int kNv = 1;
  static constexpr int kQubit2 = 2;

 private:
  std::array<SpinSite, 3> sites_;
  double b_field_;
  PhysicalConstants constants_;
};

template <typename Scalar>
struct SpinMatrices {
  OperatorT<Scalar> x, y, z;
};

/// Angular momentum matrices in the S_z eigenbasis ordered by descending m.
template <typename Scalar = double>
SpinMatrices<Scalar> spin_operators(int two_s) {
  if (two_s != 1 && two_s != 2) {
    throw InvalidArgument("spin_operators: only s = 1/2 and s = 1 are supported");
  }
  using C = std::complex<Scalar>;
  const int dim = two_s + 1;
  const Scalar s = Scalar(two_s) / 2;
  OperatorT<Scalar> plus = OperatorT<Scalar>::Zero(dim, dim);
  OperatorT<Scalar> z = OperatorT<Scalar>::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const Scalar m = s - k;
    z(k, k) = C(m);
    if (k > 0) {
      // <m+1| S+ |m>
      plus(k - 1, k) = C(std::sqrt(s * (s + 1) - m * (m + 1)));
    }
  }
  const OperatorT<Scalar> minus = plus.adjoint();
  SpinMatrices<Scalar> out;
  out.x = (plus + minus) * C(Scalar(0.5));
  out.y = (plus - minus) * C(Scalar(0), Scalar(-0.5));
  out.z = z;
  return out;
}

/// Kronecker product of a list of local operators in site order.
template <typename Scalar>
OperatorT<Scalar> kron_all(std::span<const OperatorT<Scalar>> factors) {
  OperatorT<Scalar> out = OperatorT<Scalar>::Identity(1, 1);
  for (const auto& f : factors) {
    OperatorT<Scalar> next = Eigen::kroneckerProduct(out, f).eval();
    out.swap(next);
  }
  return out;
}

/// Places a local operator at one site with identities elsewhere.
Operator embed(const Operator& op, int site_index, const SpinSystem& system);

/// Product of two embedded local operators, op_i at site i and op_j at site j (i != j).
Operator embed_pair(const Operator& op_i, int site_i, const Operator& op_j, int site_j,
                    const SpinSystem& system);

/// Traces out one subsystem of a multipartite operator with local dimensions dims.
Operator partial_trace(const Operator& rho, std::span<const int> dims, int traced_site);

/// Traces out the NV site, leaving the 4x4 two-qubit state.
Operator partial_trace_to_qubits(const Operator& rho, const SpinSystem& system);

/// S_z on a site, embedded.
Operator site_sz(const SpinSystem& system, int site);

/// |+> = (|0> + |1>)/sqrt(2) on every site. The NV levels |0>, |1> sit at local
/// indices 1 and 0 respectively (index 0 is the upper-m level).
Ket initial_plus_state(const SpinSystem& system);

/// Local |0>, |1> indices of the NV qubit.
struct NvLevels {
  int zero;
  int one;
};
NvLevels nv_levels(const SpinSystem& system);

template <typename Derived>
double relative_hermiticity_error(const Eigen::MatrixBase<Derived>& m) {
  const double norm = m.norm();
  const double diff = (m - m.adjoint()).norm();
  return norm > 0 ? diff / norm : diff;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = 1e-12) {
  return relative_hermiticity_error(m) <= tol;
}

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

/// exp(-i h t) for Hermitian h.
Operator unitary_propagator(const Operator& h, double t);

/// Projector |psi><psi|.
inline Operator projector(const Ket& psi) { return psi * psi.adjoint(); }

struct DensityMatrixTolerances {
  double trace = 1e-9;
  double hermiticity = 1e-12;
  double min_eigenvalue = -1e-9;
};

struct DensityMatrixReport {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  bool valid = false;
};

DensityMatrixReport check_density_matrix(const Operator& rho,
                                         const DensityMatrixTolerances& tol = {});

/// Throws InvalidArgument naming the first violated invariant.
void require_density_matrix(const Operator& rho, const char* context,
                            const DensityMatrixTolerances& tol = {});

/// Nearest valid state in the eigenvalue sense: clips negative eigenvalues and
/// renormalises. Returns the clipped weight through `clipped` when given.
Operator project_to_density_matrix(const Operator& rho, double* clipped = nullptr);

/// |<a|b>|^2 for normalised kets.
inline double state_fidelity(const Ket& a, const Ket& b) { return std::norm(a.dot(b)); }

/// <psi| rho |psi>
inline double state_fidelity(const Operator& rho, const Ket& psi) {
  return std::real(psi.dot(rho * psi));
}

}  // namespace nvent
