#include "vmsns/assembly.hpp"

#include "vmsns/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace vmsns {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

struct CellFrame {
  QuadratureRule rule;
  ShapeTable table;

  CellFrame(const FeSpace& space, int order)
      : rule(QuadratureRule::simplex(space.dim(), order)), table(space.dim(), space.degree(), rule) {}
};

// Advection value and divergence at point q of a cell.
void advection_at(const FeSpace& space, const Eigen::VectorXd& a, int cell, const ShapeTable& table, int q,
                  Vec3& value, double& divergence) {
  const auto dofs = space.cell_dofs(cell);
  const auto& g = space.mesh().geometry(cell);
  value = {0.0, 0.0, 0.0};
  divergence = 0.0;
  for (int i = 0; i < table.n_shapes(); ++i) {
    if (dofs[i] < 0) continue;
    const double phi = table.value(q, i);
    const auto grad = table.gradient(q, i, g);
    for (int c = 0; c < space.components(); ++c) {
      const double coeff = a[space.global_dof(dofs[i], c)];
      value[c] += coeff * phi;
      divergence += coeff * grad[c];
    }
  }
}

}  // namespace

double symmetry_defect(const SparseMatrix& a) {
  const SparseMatrix diff = SparseMatrix(a.transpose()) - a;
  double max_entry = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) max_entry = std::max(max_entry, std::abs(it.value()));
  double max_diff = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) max_diff = std::max(max_diff, std::abs(it.value()));
  return max_entry > 0.0 ? max_diff / max_entry : max_diff;
}

SparseMatrix assemble_mass(const FeSpace& space) {
  const CellFrame f(space, assembly_quadrature_order(space.degree()));
  const Mesh& m = space.mesh();
  const int ns = f.table.n_shapes();
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(m.n_cells()) * ns * ns * space.components());
  std::vector<double> local(static_cast<size_t>(ns) * ns);
  for (int c = 0; c < m.n_cells(); ++c) {
    std::fill(local.begin(), local.end(), 0.0);
    const double vol = m.geometry(c).volume;
    for (int q = 0; q < f.rule.size(); ++q) {
      const double w = f.rule.weights[q] * vol;
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) local[i * ns + j] += w * f.table.value(q, i) * f.table.value(q, j);
    }
    const auto dofs = space.cell_dofs(c);
    for (int i = 0; i < ns; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < ns; ++j) {
        if (dofs[j] < 0) continue;
        for (int comp = 0; comp < space.components(); ++comp)
          t.emplace_back(space.global_dof(dofs[i], comp), space.global_dof(dofs[j], comp), local[i * ns + j]);
      }
    }
  }
  return from_triplets(space.n_dofs(), space.n_dofs(), t);
}

SparseMatrix assemble_stiffness(const FeSpace& space) {
  const CellFrame f(space, assembly_quadrature_order(space.degree()));
  const Mesh& m = space.mesh();
  const int ns = f.table.n_shapes();
  const int dim = m.dim();
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(m.n_cells()) * ns * ns * space.components());
  std::vector<double> local(static_cast<size_t>(ns) * ns);
  std::vector<Vec3> grads(ns);
  for (int c = 0; c < m.n_cells(); ++c) {
    std::fill(local.begin(), local.end(), 0.0);
    const auto& g = m.geometry(c);
    for (int q = 0; q < f.rule.size(); ++q) {
      const double w = f.rule.weights[q] * g.volume;
      for (int i = 0; i < ns; ++i) grads[i] = f.table.gradient(q, i, g);
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) {
          double dot = 0.0;
          for (int d = 0; d < dim; ++d) dot += grads[i][d] * grads[j][d];
          local[i * ns + j] += w * dot;
        }
    }
    const auto dofs = space.cell_dofs(c);
    for (int i = 0; i < ns; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < ns; ++j) {
        if (dofs[j] < 0) continue;
        for (int comp = 0; comp < space.components(); ++comp)
          t.emplace_back(space.global_dof(dofs[i], comp), space.global_dof(dofs[j], comp), local[i * ns + j]);
      }
    }
  }
  return from_triplets(space.n_dofs(), space.n_dofs(), t);
}

SparseMatrix assemble_gradient_coupling(const FeSpace& velocity, const FeSpace& pressure) {
  if (velocity.mesh_ptr() != pressure.mesh_ptr()) throw DimensionError("velocity and pressure live on different meshes");
  if (velocity.components() != velocity.dim()) throw DimensionError("gradient coupling needs a vector velocity space");
  if (pressure.components() != 1) throw DimensionError("gradient coupling needs a scalar pressure space");

  const Mesh& m = velocity.mesh();
  const int dim = m.dim();
  const auto rule = QuadratureRule::simplex(dim, assembly_quadrature_order(std::max(velocity.degree(), pressure.degree())));
  const ShapeTable vt(dim, velocity.degree(), rule);
  const ShapeTable pt(dim, pressure.degree(), rule);
  std::vector<Triplet> t;
  for (int c = 0; c < m.n_cells(); ++c) {
    const auto& g = m.geometry(c);
    const auto vd = velocity.cell_dofs(c);
    const auto pd = pressure.cell_dofs(c);
    for (int q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * g.volume;
      for (int j = 0; j < pt.n_shapes(); ++j) {
        if (pd[j] < 0) continue;
        const auto grad = pt.gradient(q, j, g);
        for (int i = 0; i < vt.n_shapes(); ++i) {
          if (vd[i] < 0) continue;
          const double phi = vt.value(q, i);
          for (int comp = 0; comp < dim; ++comp)
            t.emplace_back(velocity.global_dof(vd[i], comp), pd[j], w * phi * grad[comp]);
        }
      }
    }
  }
  return from_triplets(velocity.n_dofs(), pressure.n_dofs(), t);
}

SparseMatrix assemble_convection(const FeSpace& space, const Eigen::VectorXd& advection) {
  if (space.components() != space.dim()) throw DimensionError("convection needs a vector space");
  if (advection.size() != space.n_dofs()) throw DimensionError("advection coefficients do not match the space");
  const CellFrame f(space, assembly_quadrature_order(space.degree()));
  const Mesh& m = space.mesh();
  const int ns = f.table.n_shapes();
  const int dim = m.dim();
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(m.n_cells()) * ns * ns * dim);
  std::vector<double> local(static_cast<size_t>(ns) * ns);
  for (int c = 0; c < m.n_cells(); ++c) {
    std::fill(local.begin(), local.end(), 0.0);
    const auto& g = m.geometry(c);
    for (int q = 0; q < f.rule.size(); ++q) {
      const double w = f.rule.weights[q] * g.volume;
      Vec3 a;
      double div;
      advection_at(space, advection, c, f.table, q, a, div);
      for (int j = 0; j < ns; ++j) {
        const auto grad = f.table.gradient(q, j, g);
        double adv = 0.5 * div * f.table.value(q, j);
        for (int d = 0; d < dim; ++d) adv += a[d] * grad[d];
        for (int i = 0; i < ns; ++i) local[i * ns + j] += w * adv * f.table.value(q, i);
      }
    }
    const auto dofs = space.cell_dofs(c);
    for (int i = 0; i < ns; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < ns; ++j) {
        if (dofs[j] < 0) continue;
        for (int comp = 0; comp < dim; ++comp)
          t.emplace_back(space.global_dof(dofs[i], comp), space.global_dof(dofs[j], comp), local[i * ns + j]);
      }
    }
  }
  return from_triplets(space.n_dofs(), space.n_dofs(), t);
}

Eigen::VectorXd assemble_load(const FeSpace& space, const VectorField& f) {
  const CellFrame fr(space, assembly_quadrature_order(space.degree()));
  const Mesh& m = space.mesh();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(space.n_dofs());
  for (int c = 0; c < m.n_cells(); ++c) {
    const double vol = m.geometry(c).volume;
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < fr.rule.size(); ++q) {
      const Vec3 value = f(cell_point(m, c, fr.rule.points[q]));
      const double w = fr.rule.weights[q] * vol;
      for (int i = 0; i < fr.table.n_shapes(); ++i) {
        if (dofs[i] < 0) continue;
        const double phi = fr.table.value(q, i);
        for (int comp = 0; comp < space.components(); ++comp)
          load[space.global_dof(dofs[i], comp)] += w * value[comp] * phi;
      }
    }
  }
  return load;
}

Eigen::VectorXd assemble_load(const FeSpace& space, const Eigen::VectorXd& coefficients) {
  if (coefficients.size() != space.n_dofs()) throw DimensionError("coefficients do not match the space");
  return assemble_mass(space) * coefficients;
}

Eigen::VectorXd l2_project(const VectorField& f, const FeSpace& space) {
  const SparseMatrix mass = assemble_mass(space);
  Eigen::SimplicialLDLT<SparseMatrix> solver(mass);
  if (solver.info() != Eigen::Success) throw SolverError("mass matrix factorization failed");
  Eigen::VectorXd c = solver.solve(assemble_load(space, f));
  if (solver.info() != Eigen::Success) throw SolverError("mass matrix solve failed");
  return c;
}

Vec3 evaluate(const FeSpace& space, const Eigen::VectorXd& coefficients, int cell,
              const std::array<double, 4>& lambda) {
  std::array<double, 10> phi{};
  shape_values(space.dim(), space.degree(), lambda, phi);
  const auto dofs = space.cell_dofs(cell);
  Vec3 out{0.0, 0.0, 0.0};
  for (int i = 0; i < space.nodes_per_cell(); ++i) {
    if (dofs[i] < 0) continue;
    for (int c = 0; c < space.components(); ++c) out[c] += phi[i] * coefficients[space.global_dof(dofs[i], c)];
  }
  return out;
}

std::array<Vec3, 3> evaluate_gradient(const FeSpace& space, const Eigen::VectorXd& coefficients, int cell,
                                      const std::array<double, 4>& lambda) {
  const int dim = space.dim();
  const int nv = dim + 1;
  std::array<double, 40> dl{};
  shape_barycentric_derivatives(dim, space.degree(), lambda, dl);
  const auto& g = space.mesh().geometry(cell);
  const auto dofs = space.cell_dofs(cell);
  std::array<Vec3, 3> out{};
  for (int i = 0; i < space.nodes_per_cell(); ++i) {
    if (dofs[i] < 0) continue;
    Vec3 grad{0.0, 0.0, 0.0};
    for (int j = 0; j < nv; ++j)
      for (int d = 0; d < dim; ++d) grad[d] += dl[i * nv + j] * g.grad_lambda[j][d];
    for (int c = 0; c < space.components(); ++c) {
      const double coeff = coefficients[space.global_dof(dofs[i], c)];
      for (int d = 0; d < dim; ++d) out[c][d] += coeff * grad[d];
    }
  }
  return out;
}

double linf_norm(const FeSpace& space, const Eigen::VectorXd& coefficients) {
  const int comps = space.components();
  double best = 0.0;
  if (space.degree() == 1) {
    for (int k = 0; k < space.n_scalar_dofs(); ++k) {
      double s = 0.0;
      for (int c = 0; c < comps; ++c) s += coefficients[space.global_dof(k, c)] * coefficients[space.global_dof(k, c)];
      best = std::max(best, std::sqrt(s));
    }
    return best;
  }
  constexpr int kLattice = 6;
  const int dim = space.dim();
  for (int cell = 0; cell < space.mesh().n_cells(); ++cell) {
    for (int i = 0; i <= kLattice; ++i)
      for (int j = 0; i + j <= kLattice; ++j)
        for (int k = 0; i + j + k <= (dim == 3 ? kLattice : 0); ++k) {
          std::array<double, 4> l{};
          l[1] = double(i) / kLattice;
          l[2] = double(j) / kLattice;
          if (dim == 3) l[3] = double(k) / kLattice;
          l[0] = 1.0 - l[1] - l[2] - l[3];
          const Vec3 v = evaluate(space, coefficients, cell, l);
          best = std::max(best, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
        }
  }
  return best;
}

QuadratureSpace::QuadratureSpace(std::shared_ptr<const Mesh> mesh, QuadratureRule rule)
    : mesh_(std::move(mesh)), rule_(std::move(rule)) {
  weights_.resize(n_points());
  points_.resize(n_points());
  for (int c = 0; c < n_cells(); ++c) {
    const double vol = mesh_->geometry(c).volume;
    for (int q = 0; q < points_per_cell(); ++q) {
      weights_[point_index(c, q)] = rule_.weights[q] * vol;
      points_[point_index(c, q)] = cell_point(*mesh_, c, rule_.points[q]);
    }
  }
}

Eigen::VectorXd QuadratureSpace::field_weights(int components) const {
  Eigen::VectorXd w(static_cast<Eigen::Index>(n_points()) * components);
  for (int p = 0; p < n_points(); ++p)
    for (int c = 0; c < components; ++c) w[p * components + c] = weights_[p];
  return w;
}

double QuadratureSpace::inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int components) const {
  double s = 0.0;
  for (int p = 0; p < n_points(); ++p) {
    double dot = 0.0;
    for (int c = 0; c < components; ++c) dot += a[p * components + c] * b[p * components + c];
    s += weights_[p] * dot;
  }
  return s;
}

Eigen::VectorXd QuadratureSpace::sample(const VectorField& f, int components) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(n_points()) * components);
  for (int p = 0; p < n_points(); ++p) {
    const Vec3 v = f(points_[p]);
    for (int c = 0; c < components; ++c) out[p * components + c] = v[c];
  }
  return out;
}

SparseMatrix evaluation_operator(const FeSpace& space, const QuadratureSpace& qs) {
  const ShapeTable table(space.dim(), space.degree(), qs.rule());
  const int comps = space.components();
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(qs.n_points()) * table.n_shapes() * comps);
  for (int c = 0; c < qs.n_cells(); ++c) {
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < qs.points_per_cell(); ++q) {
      const int p = qs.point_index(c, q);
      for (int i = 0; i < table.n_shapes(); ++i) {
        if (dofs[i] < 0) continue;
        for (int comp = 0; comp < comps; ++comp)
          t.emplace_back(p * comps + comp, space.global_dof(dofs[i], comp), table.value(q, i));
      }
    }
  }
  return from_triplets(qs.n_points() * comps, space.n_dofs(), t);
}

SparseMatrix gradient_operator(const FeSpace& scalar_space, const QuadratureSpace& qs) {
  if (scalar_space.components() != 1) throw DimensionError("gradient_operator expects a scalar space");
  const int dim = scalar_space.dim();
  const ShapeTable table(dim, scalar_space.degree(), qs.rule());
  std::vector<Triplet> t;
  for (int c = 0; c < qs.n_cells(); ++c) {
    const auto dofs = scalar_space.cell_dofs(c);
    const auto& g = qs.mesh().geometry(c);
    for (int q = 0; q < qs.points_per_cell(); ++q) {
      const int p = qs.point_index(c, q);
      for (int i = 0; i < table.n_shapes(); ++i) {
        if (dofs[i] < 0) continue;
        const auto grad = table.gradient(q, i, g);
        for (int d = 0; d < dim; ++d) t.emplace_back(p * dim + d, dofs[i], grad[d]);
      }
    }
  }
  return from_triplets(qs.n_points() * dim, scalar_space.n_dofs(), t);
}

SparseMatrix convection_operator(const FeSpace& space, const QuadratureSpace& qs, const Eigen::VectorXd& advection) {
  if (space.components() != space.dim()) throw DimensionError("convection needs a vector space");
  const int dim = space.dim();
  const ShapeTable table(dim, space.degree(), qs.rule());
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(qs.n_points()) * table.n_shapes() * dim);
  for (int c = 0; c < qs.n_cells(); ++c) {
    const auto dofs = space.cell_dofs(c);
    const auto& g = qs.mesh().geometry(c);
    for (int q = 0; q < qs.points_per_cell(); ++q) {
      const int p = qs.point_index(c, q);
      Vec3 a;
      double div;
      advection_at(space, advection, c, table, q, a, div);
      for (int j = 0; j < table.n_shapes(); ++j) {
        if (dofs[j] < 0) continue;
        const auto grad = table.gradient(q, j, g);
        double adv = 0.5 * div * table.value(q, j);
        for (int d = 0; d < dim; ++d) adv += a[d] * grad[d];
        if (adv == 0.0) continue;
        for (int comp = 0; comp < dim; ++comp) t.emplace_back(p * dim + comp, space.global_dof(dofs[j], comp), adv);
      }
    }
  }
  return from_triplets(qs.n_points() * dim, space.n_dofs(), t);
}

}  // namespace vmsns
