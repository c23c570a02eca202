#pragma once

// Ground truth for the decomposition solvers: the monolithic full-domain
// solve (with an on-disk cache), a dense brute-force assembler for tiny
// meshes, and a finite-difference derivative checker.

#include "nldd/assembly.hpp"
#include "nldd/newton.hpp"
#include "nldd/subdomain.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace nldd {

struct MonolithicSolution {
  DofMap dofs;          // global numbering (all non-boundary nodes)
  FieldVector u;
  NewtonStats stats;
  bool from_cache = false;

  /// Nodal values of u in another DofMap's numbering (e.g. u_i^h).
  [[nodiscard]] FieldVector restrict_to(const DofMap& local) const;
  /// Interface trace T_i u^h (identical for both sides).
  [[nodiscard]] Trace interface_trace(const Decomposition& dec) const;
};

/// Full-domain Newton solve. For the p-Laplace variant the linear problem
/// with alpha = 1 is solved first and used as the initial guess.
[[nodiscard]] MonolithicSolution solve_monolithic(const SemilinearProblem& problem, const TriMesh& mesh,
                                                  const SolverOptions& options = {});

/// 64-bit FNV-1a content hash of everything that determines the monolithic
/// solution. Only meaningful for named problems.
[[nodiscard]] std::uint64_t reference_key(const SemilinearProblem& problem, const TriMesh& mesh,
                                          const SolverOptions& options);

/// Cache file layout (little-endian): magic "NLDDREF1", u64 key, u32 nx,
/// u32 ny, f64 width, f64 height, f64 h, u64 count, count x f64.
void write_reference_file(const std::filesystem::path& path, std::uint64_t key, const TriMesh& mesh,
                          const FieldVector& u);
[[nodiscard]] std::optional<FieldVector> read_reference_file(const std::filesystem::path& path, std::uint64_t key,
                                                             const TriMesh& mesh);

/// solve_monolithic with a disk cache under `cache_dir`. Unnamed problems
/// bypass the cache. Writes go to a temporary file that is then renamed.
[[nodiscard]] MonolithicSolution solve_monolithic_cached(const SemilinearProblem& problem, const TriMesh& mesh,
                                                         const SolverOptions& options,
                                                         const std::filesystem::path& cache_dir);

/// Dense objects assembled independently of the sparse path (own shape
/// functions, own collapsed Gauss-Legendre product rule exact to degree 6).
struct DenseObjects {
  Vector residual;
  Eigen::MatrixXd jacobian;
  /// J_GG - J_GI J_II^{-1} J_IG at the evaluation point.
  Eigen::MatrixXd schur;
  /// r_G(0) - J_GI J_II^{-1} r_I(0) at u = 0: the constant term of S_i for
  /// linear problems.
  Vector schur_offset;
};

inline constexpr std::size_t kDenseNodeLimit = 60;

/// Throws Error(TooLarge) for meshes with more than kDenseNodeLimit nodes.
[[nodiscard]] DenseObjects dense_brute_force(const SemilinearProblem& problem, const TriMesh& mesh,
                                             const DofMap& dofs, const FieldVector& u);

struct FdResult {
  std::vector<double> deltas;
  std::vector<double> remainders;  // |G(x + d e) - G(x) - d G'(x) e|
  double slope = 0.0;              // least-squares slope of log remainder vs log delta
};

using VectorMap = std::function<Vector(const Vector&)>;
using DirectionalDerivative = std::function<Vector(const Vector& x, const Vector& direction)>;

[[nodiscard]] FdResult fd_check(const VectorMap& op, const DirectionalDerivative& derivative, const Vector& point,
                                const Vector& direction, std::span<const double> deltas);

}  // namespace nldd
