#include "nvent/quantum_core.hpp"

#include <algorithm>
#include <numeric>

namespace nvent {

SpinSystem::SpinSystem(std::array<SpinSite, 3> sites, double b_field, PhysicalConstants constants)
    : sites_(sites), b_field_(b_field), constants_(constants) {
  if (sites_[kQubit1].label != SiteLabel::Qubit1 || sites_[kNv].label != SiteLabel::NV ||
      sites_[kQubit2].label != SiteLabel::Qubit2) {
    throw InvalidArgument("SpinSystem: sites must be ordered (qubit1, NV, qubit2)");
  }
  for (const auto& s : sites_) {
    if (s.two_s != 1 && s.two_s != 2) {
      throw InvalidArgument("SpinSystem: local dimension must be 2 or 3");
    }
    if (!(s.t2 > 0)) {
      throw InvalidArgument("SpinSystem: T2 must be positive or infinite");
    }
  }
  if (sites_[kQubit1].two_s != 1 || sites_[kQubit2].two_s != 1) {
    throw InvalidArgument("SpinSystem: qubit sites must be spin-1/2");
  }
}

SpinSystem SpinSystem::standard(NvMode mode) {
  const int nv_two_s = mode == NvMode::SpinOne ? 2 : 1;
  return SpinSystem({SpinSite{SiteLabel::Qubit1, 1, 2.0, kInf},
                     SpinSite{SiteLabel::NV, nv_two_s, 2.0, kInf},
                     SpinSite{SiteLabel::Qubit2, 1, 2.0, kInf}});
}

std::array<int, 3> SpinSystem::dims() const {
  return {sites_[0].dim(), sites_[1].dim(), sites_[2].dim()};
}

int SpinSystem::dim() const {
  const auto d = dims();
  return d[0] * d[1] * d[2];
}

double SpinSystem::coupling(int i, int j) const {
  return constants_.dipolar_constant(site(i).magnetic_moment, site(j).magnetic_moment);
}

SpinSystem SpinSystem::with_t2(double t2_qubit1, double t2_nv, double t2_qubit2) const {
  auto sites = sites_;
  sites[kQubit1].t2 = t2_qubit1;
  sites[kNv].t2 = t2_nv;
  sites[kQubit2].t2 = t2_qubit2;
  return SpinSystem(sites, b_field_, constants_);
}

SpinSystem SpinSystem::with_b_field(double b_field) const {
  return SpinSystem(sites_, b_field, constants_);
}

Operator embed(const Operator& op, int site_index, const SpinSystem& system) {
  if (site_index < 0 || site_index > 2) {
    throw InvalidArgument("embed: site index out of range");
  }
  const auto dims = system.dims();
  if (op.rows() != dims[site_index] || op.cols() != dims[site_index]) {
    throw InvalidArgument("embed: operator dimension does not match the local dimension");
  }
  std::array<Operator, 3> factors;
  for (int k = 0; k < 3; ++k) {
    factors[k] = k == site_index ? op : Operator::Identity(dims[k], dims[k]);
  }
  return kron_all<double>(factors);
}

Operator embed_pair(const Operator& op_i, int site_i, const Operator& op_j, int site_j,
                    const SpinSystem& system) {
  if (site_i == site_j) {
    throw InvalidArgument("embed_pair: sites must differ");
  }
  return embed(op_i, site_i, system) * embed(op_j, site_j, system);
}

Operator partial_trace(const Operator& rho, std::span<const int> dims, int traced_site) {
  const int n = static_cast<int>(dims.size());
  if (traced_site < 0 || traced_site >= n) {
    throw InvalidArgument("partial_trace: site out of range");
  }
  const int total = std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
  if (rho.rows() != total || rho.cols() != total) {
    throw InvalidArgument("partial_trace: operator dimension does not match dims");
  }
  int left = 1;
  for (int k = 0; k < traced_site; ++k) left *= dims[k];
  const int mid = dims[traced_site];
  const int right = total / (left * mid);
  const int keep = left * right;
  Operator out = Operator::Zero(keep, keep);
  for (int a = 0; a < left; ++a) {
    for (int b = 0; b < right; ++b) {
      for (int a2 = 0; a2 < left; ++a2) {
        for (int b2 = 0; b2 < right; ++b2) {
          Complex sum = 0.0;
          for (int m = 0; m < mid; ++m) {
            sum += rho((a * mid + m) * right + b, (a2 * mid + m) * right + b2);
          }
          out(a * right + b, a2 * right + b2) = sum;
        }
      }
    }
  }
  return out;
}

Operator partial_trace_to_qubits(const Operator& rho, const SpinSystem& system) {
  const auto dims = system.dims();
  return partial_trace(rho, dims, SpinSystem::kNv);
}

Operator site_sz(const SpinSystem& system, int site) {
  return embed(spin_operators<double>(system.site(site).two_s).z, site, system);
}

NvLevels nv_levels(const SpinSystem& system) {
  // Spin-1: index 0 is m=+1 (|1>), index 1 is m=0 (|0>).
  // Two-level: index 0 is S_z=+1/2 (|1>), index 1 is S_z=-1/2 (|0>).
  (void)system;
  return NvLevels{1, 0};
}

Ket initial_plus_state(const SpinSystem& system) {
  const auto dims = system.dims();
  std::array<Ket, 3> local;
  for (int k = 0; k < 3; ++k) {
    local[k] = Ket::Zero(dims[k]);
  }
  const double r = 1.0 / std::sqrt(2.0);
  local[0](0) = r;
  local[0](1) = r;
  local[2](0) = r;
  local[2](1) = r;
  const auto lv = nv_levels(system);
  local[1](lv.zero) = r;
  local[1](lv.one) = r;
  Ket out = Eigen::kroneckerProduct(Eigen::kroneckerProduct(local[0], local[1]).eval(), local[2]);
  return out;
}

Operator unitary_propagator(const Operator& h, double t) {
  Eigen::SelfAdjointEigenSolver<Operator> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericError("unitary_propagator: eigendecomposition failed");
  }
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    phases(k) = std::exp(-kI * es.eigenvalues()(k) * t);
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DensityMatrixReport check_density_matrix(const Operator& rho, const DensityMatrixTolerances& tol) {
  DensityMatrixReport report;
  report.trace_error = std::abs(rho.trace() - Complex(1.0));
  report.hermiticity_error = (rho - rho.adjoint()).norm() / std::max(rho.norm(), 1e-300);
  const Operator herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(herm, Eigen::EigenvaluesOnly);
  report.min_eigenvalue = es.eigenvalues().minCoeff();
  report.valid = report.trace_error <= tol.trace && report.hermiticity_error <= tol.hermiticity &&
                 report.min_eigenvalue >= tol.min_eigenvalue;
  return report;
}

void require_density_matrix(const Operator& rho, const char* context,
                            const DensityMatrixTolerances& tol) {
  if (rho.rows() != rho.cols()) {
    throw InvalidArgument(std::string(context) + ": density matrix must be square");
  }
  const auto r = check_density_matrix(rho, tol);
  if (r.trace_error > tol.trace) {
    throw InvalidArgument(std::string(context) + ": trace deviates from 1 by " +
                          std::to_string(r.trace_error));
  }
  if (r.hermiticity_error > tol.hermiticity) {
    throw InvalidArgument(std::string(context) + ": matrix is not Hermitian");
  }
  if (r.min_eigenvalue < tol.min_eigenvalue) {
    throw InvalidArgument(std::string(context) + ": negative eigenvalue " +
                          std::to_string(r.min_eigenvalue));
  }
}

Operator project_to_density_matrix(const Operator& rho, double* clipped) {
  const Operator herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(herm);
  Eigen::VectorXd ev = es.eigenvalues();
  double removed = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (ev(k) < 0) {
      removed -= ev(k);
      ev(k) = 0.0;
    }
  }
  const double total = ev.sum();
  if (!(total > 0)) {
    throw NumericError("project_to_density_matrix: no positive weight left");
  }
  ev /= total;
  if (clipped) *clipped = removed;
  return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace nvent
