#include "nldd/subdomain.hpp"

#include "nldd/errors.hpp"

#include <cmath>
#include <string>

namespace nldd {

Eigen::MatrixXd interface_mass_matrix(const TriMesh& mesh, const Decomposition& dec) {
  const auto n = static_cast<Eigen::Index>(dec.num_interface());
  std::vector<int> index(mesh.num_nodes(), -1);
  for (std::size_t k = 0; k < dec.interface_nodes.size(); ++k) {
    index[static_cast<std::size_t>(dec.interface_nodes[k])] = static_cast<int>(k);
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : dec.interface_edges) {
    const Point& pa = mesh.nodes()[static_cast<std::size_t>(a)];
    const Point& pb = mesh.nodes()[static_cast<std::size_t>(b)];
    const double len = std::hypot(pb.x - pa.x, pb.y - pa.y);
    const int ia = index[static_cast<std::size_t>(a)];
    const int ib = index[static_cast<std::size_t>(b)];
    if (ia >= 0) m(ia, ia) += len / 3.0;
    if (ib >= 0) m(ib, ib) += len / 3.0;
    if (ia >= 0 && ib >= 0) {
      m(ia, ib) += len / 6.0;
      m(ib, ia) += len / 6.0;
    }
  }
  return m;
}

namespace {

const DofMap& checked_side(const Decomposition& dec, int side) {
  if (side != 1 && side != 2) throw Error(ErrorCode::InvalidArgument, "side must be 1 or 2");
  return dec.side(side);
}

}  // namespace

SubdomainWorkspace::SubdomainWorkspace(const TriMesh& mesh, const Decomposition& dec,
                                       const SemilinearProblem& problem, int side, SolverOptions options)
    : side_(side),
      options_(options),
      assembler_(mesh, checked_side(dec, side), problem, options.quad_degree),
      n_interior_(dec.side(side).num_interior),
      n_interface_(dec.side(side).num_interface) {}

void SubdomainWorkspace::reset() {
  interior_solver_.reset();
  full_solver_.reset();
  tangent_solver_.reset();
  dirichlet_warm_.reset();
  neumann_warm_.reset();
  homogeneous_warm_.reset();
  robin_warm_.reset();
  tangent_point_.reset();
  last_stats_ = {};
}

void SubdomainWorkspace::check_size(Eigen::Index n, const char* what) const {
  if (n != n_interface_) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": interface vector has size " + std::to_string(n) +
                                                ", expected " + std::to_string(n_interface_));
  }
}

Trace SubdomainWorkspace::trace(const FieldVector& u) const {
  if (u.size() != n_interior_ + n_interface_) throw Error(ErrorCode::InvalidArgument, "trace: field size mismatch");
  return Trace(u.tail(n_interface_));
}

Flux SubdomainWorkspace::interface_residual(const FieldVector& u) const {
  return Flux(assembler_.residual(u).tail(n_interface_));
}

FieldVector SubdomainWorkspace::dirichlet_solve(const Trace& eta) {
  check_size(eta.size(), "dirichlet_solve");
  FieldVector u(n_interior_ + n_interface_);
  if (dirichlet_warm_) {
    u.head(n_interior_) = dirichlet_warm_->head(n_interior_);
  } else {
    u.head(n_interior_).setZero();
  }
  u.tail(n_interface_) = eta.values();
  if (n_interior_ == 0) {
    last_stats_ = {};
    return u;
  }

  NonlinearSystem system;
  system.residual = [&](const Vector& xi) {
    u.head(n_interior_) = xi;
    return Vector(assembler_.residual(u).head(n_interior_));
  };
  system.jacobian = [&](const Vector& xi) {
    u.head(n_interior_) = xi;
    return SparseMatrix(assembler_.jacobian(u).topLeftCorner(n_interior_, n_interior_));
  };

  const double scale = system.residual(Vector::Zero(n_interior_)).norm();
  Vector xi = u.head(n_interior_);
  if (dirichlet_warm_) xi = dirichlet_warm_->head(n_interior_);
  last_stats_ = newton_solve(system, xi, interior_solver_, options_.newton, scale);
  u.head(n_interior_) = xi;
  dirichlet_warm_ = u;
  return u;
}

void SubdomainWorkspace::linearize_at(const Trace& nu) {
  check_size(nu.size(), "linearize");
  if (tangent_point_ && *tangent_point_ == nu) return;
  const FieldVector u = dirichlet_solve(nu);
  const SparseMatrix j = assembler_.jacobian(u);
  const Eigen::Index ni = n_interior_;
  const Eigen::Index ng = n_interface_;
  if (ni > 0) tangent_solver_.factorize(SparseMatrix(j.topLeftCorner(ni, ni)));
  j_ig_ = j.block(0, ni, ni, ng);
  j_gi_ = j.block(ni, 0, ng, ni);
  j_gg_ = j.bottomRightCorner(ng, ng);
  tangent_point_ = nu;
}

FieldVector SubdomainWorkspace::dirichlet_tangent_solve(const Trace& nu, const Trace& eta) {
  check_size(eta.size(), "dirichlet_tangent_solve");
  linearize_at(nu);
  FieldVector u(n_interior_ + n_interface_);
  if (n_interior_ > 0) u.head(n_interior_) = -tangent_solver_.solve(Vector(j_ig_ * eta.values()));
  u.tail(n_interface_) = eta.values();
  return u;
}

Flux SubdomainWorkspace::apply_steklov_poincare(const Trace& eta) {
  return interface_residual(dirichlet_solve(eta));
}

Flux SubdomainWorkspace::apply_sp_derivative(const Trace& nu, const Trace& eta) {
  const FieldVector u = dirichlet_tangent_solve(nu, eta);
  return Flux(j_gi_ * u.head(n_interior_) + j_gg_ * eta.values());
}

Eigen::MatrixXd SubdomainWorkspace::sp_derivative_matrix(const Trace& nu) {
  linearize_at(nu);
  Eigen::MatrixXd s = Eigen::MatrixXd(j_gg_);
  if (n_interior_ > 0) {
    const Eigen::MatrixXd x = tangent_solver_.solve(Eigen::MatrixXd(j_ig_));
    s -= j_gi_ * x;
  }
  return s;
}

FieldVector SubdomainWorkspace::coupled_solve(const Vector& interface_data, bool homogeneous,
                                              std::optional<SparseMatrix> robin, std::optional<FieldVector>& warm) {
  const Eigen::Index n = n_interior_ + n_interface_;
  NonlinearSystem system;
  system.residual = [&](const Vector& x) {
    Vector r = assembler_.residual(x, !homogeneous);
    r.tail(n_interface_) -= interface_data;
    if (robin) r += *robin * x;
    return r;
  };
  system.jacobian = [&](const Vector& x) {
    SparseMatrix j = assembler_.jacobian(x);
    if (robin) j += *robin;
    return j;
  };
  const double scale = system.residual(Vector::Zero(n)).norm();
  Vector x = warm ? *warm : Vector::Zero(n);
  last_stats_ = newton_solve(system, x, full_solver_, options_.newton, scale);
  warm = x;
  return x;
}

FieldVector SubdomainWorkspace::neumann_solve(const Flux& psi, bool homogeneous) {
  check_size(psi.size(), "neumann_solve");
  return coupled_solve(psi.values(), homogeneous, std::nullopt, homogeneous ? homogeneous_warm_ : neumann_warm_);
}

FieldVector SubdomainWorkspace::robin_solve(const Flux& g, double s, const Eigen::MatrixXd& interface_mass) {
  check_size(g.size(), "robin_solve");
  if (interface_mass.rows() != n_interface_ || interface_mass.cols() != n_interface_) {
    throw Error(ErrorCode::InvalidArgument, "robin_solve: interface mass matrix size mismatch");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index a = 0; a < n_interface_; ++a) {
    for (Eigen::Index b = 0; b < n_interface_; ++b) {
      if (interface_mass(a, b) != 0.0) {
        triplets.emplace_back(n_interior_ + a, n_interior_ + b, s * interface_mass(a, b));
      }
    }
  }
  const Eigen::Index n = n_interior_ + n_interface_;
  SparseMatrix robin(n, n);
  robin.setFromTriplets(triplets.begin(), triplets.end());
  return coupled_solve(g.values(), false, std::move(robin), robin_warm_);
}

}  // namespace nldd
