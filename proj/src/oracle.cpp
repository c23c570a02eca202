#include "nldd/oracle.hpp"

#include "nldd/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <system_error>

namespace nldd {

FieldVector MonolithicSolution::restrict_to(const DofMap& local) const {
  FieldVector out(local.size());
  for (std::size_t k = 0; k < local.local_to_global.size(); ++k) {
    const int g = dofs.global_to_local.at(static_cast<std::size_t>(local.local_to_global[k]));
    if (g < 0) throw Error(ErrorCode::MeshMismatch, "restrict_to: node is not a global degree of freedom");
    out[static_cast<Eigen::Index>(k)] = u[g];
  }
  return out;
}

Trace MonolithicSolution::interface_trace(const Decomposition& dec) const {
  Vector t(static_cast<Eigen::Index>(dec.num_interface()));
  for (std::size_t k = 0; k < dec.interface_nodes.size(); ++k) {
    t[static_cast<Eigen::Index>(k)] = u[dofs.global_to_local.at(static_cast<std::size_t>(dec.interface_nodes[k]))];
  }
  return Trace(std::move(t));
}

namespace {

NewtonStats monolithic_newton(const Assembler& assembler, FieldVector& u, const NewtonOptions& options) {
  NonlinearSystem system;
  system.residual = [&](const Vector& x) { return assembler.residual(x); };
  system.jacobian = [&](const Vector& x) { return assembler.jacobian(x); };
  SparseDirectSolver solver;
  const double scale = assembler.residual(Vector::Zero(assembler.size())).norm();
  return newton_solve(system, u, solver, options, scale);
}

}  // namespace

MonolithicSolution solve_monolithic(const SemilinearProblem& problem, const TriMesh& mesh,
                                    const SolverOptions& options) {
  MonolithicSolution sol;
  sol.dofs = global_dof_map(mesh);
  sol.u = FieldVector::Zero(sol.dofs.size());
  if (problem.kind == ProblemKind::PLaplace) {
    const Assembler linear(mesh, sol.dofs, linear_problem(1.0, 1.0, problem.source), options.quad_degree);
    (void)monolithic_newton(linear, sol.u, options.newton);
  }
  const Assembler assembler(mesh, sol.dofs, problem, options.quad_degree);
  sol.stats = monolithic_newton(assembler, sol.u, options.newton);
  return sol;
}

std::uint64_t reference_key(const SemilinearProblem& problem, const TriMesh& mesh, const SolverOptions& options) {
  std::ostringstream os;
  os << std::hexfloat << problem.name << '|' << static_cast<int>(problem.kind) << '|' << problem.regularization
     << '|' << mesh.nx() << '|' << mesh.ny() << '|' << mesh.width() << '|' << mesh.height() << '|' << mesh.h()
     << '|' << options.quad_degree << '|' << options.newton.rtol << '|' << options.newton.atol;
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

namespace {

constexpr std::array<char, 8> kMagic = {'N', 'L', 'D', 'D', 'R', 'E', 'F', '1'};

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  bool has(std::size_t n) const { return pos + n <= buf.size(); }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace

void write_reference_file(const std::filesystem::path& path, std::uint64_t key, const TriMesh& mesh,
                          const FieldVector& u) {
  std::string buf(kMagic.begin(), kMagic.end());
  put_u64(buf, key);
  put_u32(buf, static_cast<std::uint32_t>(mesh.nx()));
  put_u32(buf, static_cast<std::uint32_t>(mesh.ny()));
  put_f64(buf, mesh.width());
  put_f64(buf, mesh.height());
  put_f64(buf, mesh.h());
  put_u64(buf, static_cast<std::uint64_t>(u.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i) put_f64(buf, u[i]);

  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::string>{}(path.string() + std::to_string(key)) & 0xffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename cache file to " + path.string());
  }
}

std::optional<FieldVector> read_reference_file(const std::filesystem::path& path, std::uint64_t key,
                                               const TriMesh& mesh) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r{buf};
  if (!r.has(8 + 8 + 4 + 4 + 24 + 8) || !std::equal(kMagic.begin(), kMagic.end(), buf.begin())) return std::nullopt;
  r.pos = 8;
  if (r.u64() != key) return std::nullopt;
  if (r.u32() != static_cast<std::uint32_t>(mesh.nx()) || r.u32() != static_cast<std::uint32_t>(mesh.ny())) {
    return std::nullopt;
  }
  if (r.f64() != mesh.width() || r.f64() != mesh.height() || r.f64() != mesh.h()) return std::nullopt;
  const std::uint64_t count = r.u64();
  if (!r.has(count * 8)) return std::nullopt;
  FieldVector u(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = r.f64();
  return u;
}

MonolithicSolution solve_monolithic_cached(const SemilinearProblem& problem, const TriMesh& mesh,
                                           const SolverOptions& options, const std::filesystem::path& cache_dir) {
  if (problem.name.empty() || cache_dir.empty()) return solve_monolithic(problem, mesh, options);
  const std::uint64_t key = reference_key(problem, mesh, options);
  char name[40];
  std::snprintf(name, sizeof name, "ref_%016llx.bin", static_cast<unsigned long long>(key));
  const std::filesystem::path file = cache_dir / name;

  if (auto cached = read_reference_file(file, key, mesh)) {
    MonolithicSolution sol;
    sol.dofs = global_dof_map(mesh);
    if (cached->size() == sol.dofs.size()) {
      sol.u = std::move(*cached);
      sol.from_cache = true;
      return sol;
    }
  }
  MonolithicSolution sol = solve_monolithic(problem, mesh, options);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  write_reference_file(file, key, mesh, sol.u);
  return sol;
}

namespace {

// Collapsed (Duffy) product of 4-point Gauss-Legendre rules on the reference
// triangle; exact up to total degree 6.
struct DenseRule {
  std::vector<std::array<double, 3>> nodes;  // xi, eta, weight
};

DenseRule collapsed_gauss_rule() {
  const std::array<double, 4> t = {-0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480,
                                   0.86113631159405257522};
  const std::array<double, 4> w = {0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263,
                                   0.34785484513745385737};
  DenseRule rule;
  for (int i = 0; i < 4; ++i) {
    const double u = 0.5 * (1.0 + t[i]);
    for (int j = 0; j < 4; ++j) {
      const double v = 0.5 * (1.0 + t[j]);
      rule.nodes.push_back({u, v * (1.0 - u), 0.25 * w[i] * w[j] * (1.0 - u)});
    }
  }
  return rule;
}

}  // namespace

DenseObjects dense_brute_force(const SemilinearProblem& problem, const TriMesh& mesh, const DofMap& dofs,
                               const FieldVector& u) {
  if (mesh.num_nodes() > kDenseNodeLimit) {
    throw Error(ErrorCode::TooLarge, "dense oracle limited to " + std::to_string(kDenseNodeLimit) + " nodes");
  }
  const Eigen::Index n = dofs.size();
  if (u.size() != n) throw Error(ErrorCode::InvalidArgument, "dense_brute_force: vector size mismatch");
  const DenseRule rule = collapsed_gauss_rule();

  auto evaluate = [&](const FieldVector& x, Vector& res, Eigen::MatrixXd& jac) {
    res = Vector::Zero(n);
    jac = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t t : dofs.triangles) {
      const Triangle& tri = mesh.triangles()[t];
      Eigen::Matrix3d vand;
      for (int a = 0; a < 3; ++a) {
        const Point& p = mesh.nodes()[static_cast<std::size_t>(tri[a])];
        vand.row(a) << 1.0, p.x, p.y;
      }
      // Column a of coef holds (c0, cx, cy) with phi_a = c0 + cx x + cy y.
      const Eigen::Matrix3d coef = vand.inverse();
      const double jdet = std::abs(vand.determinant());
      std::array<int, 3> dof{};
      std::array<double, 3> xl{};
      for (int a = 0; a < 3; ++a) {
        dof[a] = dofs.global_to_local[static_cast<std::size_t>(tri[a])];
        xl[a] = dof[a] >= 0 ? x[dof[a]] : 0.0;
      }
      Eigen::Vector2d gx = Eigen::Vector2d::Zero();
      for (int a = 0; a < 3; ++a) gx += xl[a] * Eigen::Vector2d(coef(1, a), coef(2, a));

      const Point& p0 = mesh.nodes()[static_cast<std::size_t>(tri[0])];
      const Point& p1 = mesh.nodes()[static_cast<std::size_t>(tri[1])];
      const Point& p2 = mesh.nodes()[static_cast<std::size_t>(tri[2])];
      for (const auto& [xi, eta, wref] : rule.nodes) {
        const Point q{p0.x + xi * (p1.x - p0.x) + eta * (p2.x - p0.x), p0.y + xi * (p1.y - p0.y) + eta * (p2.y - p0.y)};
        const double w = wref * jdet;
        std::array<double, 3> phi{};
        std::array<Eigen::Vector2d, 3> grad;
        double xq = 0.0;
        for (int a = 0; a < 3; ++a) {
          phi[a] = coef(0, a) + coef(1, a) * q.x + coef(2, a) * q.y;
          grad[a] = Eigen::Vector2d(coef(1, a), coef(2, a));
          xq += xl[a] * phi[a];
        }
        double kappa = problem.alpha(q);
        double kappa_prime = 0.0;  // coefficient of the rank-one flux term
        if (problem.kind == ProblemKind::PLaplace) {
          const double mag = std::sqrt(gx.squaredNorm() + problem.regularization * problem.regularization);
          kappa_prime = kappa / mag;
          kappa *= mag;
        }
        const double b = problem.beta(q, xq);
        const double by = problem.beta_y(q, xq);
        const double f = problem.source(q);
        for (int a = 0; a < 3; ++a) {
          if (dof[a] < 0) continue;
          res[dof[a]] += w * (kappa * gx.dot(grad[a]) + (b - f) * phi[a]);
          for (int c = 0; c < 3; ++c) {
            if (dof[c] < 0) continue;
            jac(dof[a], dof[c]) += w * (kappa * grad[a].dot(grad[c]) +
                                        kappa_prime * gx.dot(grad[a]) * gx.dot(grad[c]) + by * phi[a] * phi[c]);
          }
        }
      }
    }
  };

  DenseObjects out;
  evaluate(u, out.residual, out.jacobian);
  const Eigen::Index ni = dofs.num_interior;
  const Eigen::Index ng = dofs.num_interface;
  auto schur_of = [&](const Eigen::MatrixXd& j) {
    Eigen::MatrixXd s = j.bottomRightCorner(ng, ng);
    if (ni > 0) s -= j.block(ni, 0, ng, ni) * j.topLeftCorner(ni, ni).fullPivLu().solve(j.block(0, ni, ni, ng));
    return s;
  };
  out.schur = schur_of(out.jacobian);

  Vector r0;
  Eigen::MatrixXd j0;
  evaluate(FieldVector::Zero(n), r0, j0);
  out.schur_offset = r0.tail(ng);
  if (ni > 0) {
    out.schur_offset -= j0.block(ni, 0, ng, ni) * j0.topLeftCorner(ni, ni).fullPivLu().solve(Vector(r0.head(ni)));
  }
  return out;
}

FdResult fd_check(const VectorMap& op, const DirectionalDerivative& derivative, const Vector& point,
                  const Vector& direction, std::span<const double> deltas) {
  FdResult out;
  const Vector g0 = op(point);
  const Vector dg = derivative(point, direction);
  for (double d : deltas) {
    const Vector gd = op(point + d * direction);
    out.deltas.push_back(d);
    out.remainders.push_back((gd - g0 - d * dg).norm());
  }
  const auto m = static_cast<double>(deltas.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double x = std::log(out.deltas[i]);
    const double y = std::log(out.remainders[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope = deltas.size() >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : std::nan("");
  return out;
}

}  // namespace nldd
