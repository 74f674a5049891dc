#include "gse/backends.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "gse/quadrature.hpp"

namespace gse {
namespace {

// ---------------------------------------------------------------------------
// Vertex dof numbering with Dirichlet elimination (x and y component per
// free vertex, interleaved).

struct VertexDofs {
  std::vector<int> x, y;
  int count = 0;
};

VertexDofs vertex_dofs(const Mesh& m) {
  VertexDofs vd;
  vd.x.assign(m.num_vertices(), -1);
  vd.y.assign(m.num_vertices(), -1);
  for (int v = 0; v < m.num_vertices(); ++v)
    if (!m.vertex_on_dirichlet(v)) {
      vd.x[v] = vd.count++;
      vd.y[v] = vd.count++;
    }
  return vd;
}

void push(Row& r, int dof, double c) {
  if (dof >= 0 && c != 0.0) r.emplace_back(dof, c);
}

void axpy(std::map<int, double>& acc, double c, const Row& r) {
  if (c == 0.0) return;
  for (const auto& [d, v] : r) acc[d] += c * v;
}

Row to_row(const std::map<int, double>& acc) {
  Row r;
  r.reserve(acc.size());
  for (const auto& [d, v] : acc)
    if (v != 0.0) r.emplace_back(d, v);
  return r;
}

// ---------------------------------------------------------------------------
// Local bases.

struct Basis {
  int n = 0;
  std::array<double, 4> val{};
  std::array<Eigen::Vector2d, 4> grad{};
  double detJ = 0.0;
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
};

Basis p1_basis(const Mesh& m, int c, const Eigen::Vector2d& x) {
  const auto& cell = m.cells[c];
  const Eigen::Vector2d a = m.vertices[cell[0]];
  Eigen::Matrix2d J;
  J.col(0) = m.vertices[cell[1]] - a;
  J.col(1) = m.vertices[cell[2]] - a;
  const Eigen::Matrix2d Jinv = J.inverse();
  const Eigen::Vector2d ref = Jinv * (x - a);
  Basis out;
  out.n = 3;
  out.val = {1.0 - ref.x() - ref.y(), ref.x(), ref.y(), 0.0};
  const Eigen::Vector2d g1 = Jinv.row(0), g2 = Jinv.row(1);
  out.grad = {-(g1 + g2), g1, g2, Eigen::Vector2d::Zero()};
  out.detJ = J.determinant();
  out.x = x;
  return out;
}

constexpr std::array<std::array<double, 2>, 4> kQ1Corner = {
    {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}};

Basis q1_basis_ref(const Mesh& m, int c, double xi, double eta) {
  Basis out;
  out.n = 4;
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  std::array<Eigen::Vector2d, 4> gref;
  for (int k = 0; k < 4; ++k) {
    const double xk = kQ1Corner[k][0], yk = kQ1Corner[k][1];
    out.val[k] = 0.25 * (1.0 + xi * xk) * (1.0 + eta * yk);
    gref[k] = {0.25 * xk * (1.0 + eta * yk), 0.25 * yk * (1.0 + xi * xk)};
    const Eigen::Vector2d v = m.vertices[m.cells[c][k]];
    J += v * gref[k].transpose();
    out.x += out.val[k] * v;
  }
  out.detJ = J.determinant();
  const Eigen::Matrix2d JinvT = J.inverse().transpose();
  for (int k = 0; k < 4; ++k) out.grad[k] = JinvT * gref[k];
  return out;
}

// Newton inversion of the bilinear map (exact in one step for parallelograms).
Eigen::Vector2d q1_invert(const Mesh& m, int c, const Eigen::Vector2d& x) {
  Eigen::Vector2d ref = Eigen::Vector2d::Zero();
  for (int it = 0; it < 50; ++it) {
    Eigen::Vector2d f = -x;
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    for (int k = 0; k < 4; ++k) {
      const double xk = kQ1Corner[k][0], yk = kQ1Corner[k][1];
      const Eigen::Vector2d v = m.vertices[m.cells[c][k]];
      f += 0.25 * (1.0 + ref.x() * xk) * (1.0 + ref.y() * yk) * v;
      J += v * Eigen::Vector2d(0.25 * xk * (1.0 + ref.y() * yk),
                               0.25 * yk * (1.0 + ref.x() * xk))
               .transpose();
    }
    const Eigen::Vector2d step = J.partialPivLu().solve(f);
    ref -= step;
    if (step.norm() < 1e-14) break;
  }
  return ref;
}

Basis cell_basis_at(const Mesh& m, int c, const Eigen::Vector2d& x) {
  if (m.kind == CellKind::Tri) return p1_basis(m, c, x);
  const Eigen::Vector2d ref = q1_invert(m, c, x);
  Basis out = q1_basis_ref(m, c, ref.x(), ref.y());
  out.x = x;
  return out;
}

// ---------------------------------------------------------------------------
// Shared pieces of the vertex-based (conforming / nodal / Hu-Washizu) schemes.

void append_vertex_trace(GradientDiscretisation& gd, const VertexDofs& vd) {
  const Mesh& m = *gd.mesh;
  for (int e = 0; e < static_cast<int>(m.boundary_edges.size()); ++e) {
    const auto& be = m.boundary_edges[e];
    if (be.tag != BoundaryTag::Neumann) continue;
    const Eigen::Vector2d a = m.vertices[be.v0], b = m.vertices[be.v1];
    const double len = (b - a).norm();
    for (const auto& gp : gauss3()) {
      const double sa = 0.5 * (1.0 - gp.t), sb = 0.5 * (1.0 + gp.t);
      gd.neu_qp.push_back({sa * a + sb * b, 0.5 * len * gp.w, e});
      std::array<Row, 2> tr;
      push(tr[0], vd.x[be.v0], sa);
      push(tr[0], vd.x[be.v1], sb);
      push(tr[1], vd.y[be.v0], sa);
      push(tr[1], vd.y[be.v1], sb);
      gd.Trace.push_back(std::move(tr));
    }
  }
}

void emit_conforming_qp(GradientDiscretisation& gd, const VertexDofs& vd, int c, double w,
                        const Basis& bs) {
  gd.vol_qp.push_back({bs.x, w, c});
  std::array<Row, 2> pi;
  std::array<Row, 4> gr;
  const auto& cell = gd.mesh->cells[c];
  for (int k = 0; k < bs.n; ++k) {
    const int v = cell[k];
    push(pi[0], vd.x[v], bs.val[k]);
    push(pi[1], vd.y[v], bs.val[k]);
    push(gr[0], vd.x[v], bs.grad[k].x());
    push(gr[1], vd.x[v], bs.grad[k].y());
    push(gr[2], vd.y[v], bs.grad[k].x());
    push(gr[3], vd.y[v], bs.grad[k].y());
  }
  gd.Pi.push_back(std::move(pi));
  gd.Grad.push_back(std::move(gr));
}

}  // namespace

// ---------------------------------------------------------------------------
// Conforming P1 / Q1.

GradientDiscretisation build_conforming(std::shared_ptr<const Mesh> mesh, ConformingOrder order) {
  const bool want_tri = order == ConformingOrder::P1Tri;
  if (want_tri != (mesh->kind == CellKind::Tri))
    throw std::invalid_argument(want_tri ? "p1 requires a triangular mesh"
                                         : "q1 requires a quadrilateral mesh");
  GradientDiscretisation gd;
  gd.mesh = mesh;
  gd.descriptor = want_tri ? "p1" : "q1";
  const VertexDofs vd = vertex_dofs(*mesh);
  gd.dof_count = vd.count;

  for (int c = 0; c < mesh->num_cells(); ++c) {
    if (want_tri) {
      const double area = mesh->cell_area(c);
      const auto& cell = mesh->cells[c];
      for (const auto& tp : tri_rule_deg4()) {
        const Eigen::Vector2d x = tp.l0 * mesh->vertices[cell[0]] +
                                  tp.l1 * mesh->vertices[cell[1]] +
                                  tp.l2 * mesh->vertices[cell[2]];
        emit_conforming_qp(gd, vd, c, tp.w * area, p1_basis(*mesh, c, x));
      }
    } else {
      for (const auto& qp : quad_rule_3x3()) {
        const Basis bs = q1_basis_ref(*mesh, c, qp.xi, qp.eta);
        emit_conforming_qp(gd, vd, c, qp.w * bs.detJ, bs);
      }
    }
  }
  append_vertex_trace(gd, vd);
  return gd;
}

// ---------------------------------------------------------------------------
// Crouzeix-Raviart.

GradientDiscretisation build_crouzeix_raviart(std::shared_ptr<const Mesh> mesh,
                                              bool allow_mixed_boundary) {
  if (mesh->kind != CellKind::Tri)
    throw std::invalid_argument("crouzeix-raviart requires a triangular mesh");
  bool mixed = false;
  for (const auto& be : mesh->boundary_edges)
    if (be.tag == BoundaryTag::Neumann) mixed = true;
  if (mixed && !allow_mixed_boundary)
    throw std::runtime_error(
        "crouzeix-raviart: Gamma_D is not the whole boundary; no discrete Korn "
        "inequality is available for this nonconforming space with a Neumann part "
        "(K_D may blow up under refinement); set allow_mixed_boundary to proceed");

  GradientDiscretisation gd;
  gd.mesh = mesh;
  gd.descriptor = "cr";

  // Edge dof numbering: Dirichlet edges are eliminated; free edges receive an
  // (x, y) dof pair in first-traversal order.
  std::map<std::pair<int, int>, int> edge_dof;  // key -> x dof, -2 = eliminated
  auto key = [](int a, int b) { return std::pair<int, int>(std::min(a, b), std::max(a, b)); };
  for (const auto& be : mesh->boundary_edges)
    if (be.tag == BoundaryTag::Dirichlet) edge_dof[key(be.v0, be.v1)] = -2;
  int count = 0;
  std::map<std::pair<int, int>, std::array<int, 2>> edge_cells;  // adjacency
  for (int c = 0; c < mesh->num_cells(); ++c) {
    const auto& cell = mesh->cells[c];
    for (int k = 0; k < 3; ++k) {
      const auto kk = key(cell[k], cell[(k + 1) % 3]);
      if (!edge_dof.count(kk)) {
        edge_dof[kk] = count;
        count += 2;
      }
      auto [it, fresh] = edge_cells.try_emplace(kk, std::array<int, 2>{c, -1});
      if (!fresh) it->second[1] = c;
    }
  }
  gd.dof_count = count;

  for (int c = 0; c < mesh->num_cells(); ++c) {
    const auto& cell = mesh->cells[c];
    const double area = mesh->cell_area(c);
    const Basis lin = p1_basis(*mesh, c, mesh->cell_centroid(c));  // grads are constant
    // local edge opposite vertex k
    std::array<int, 3> exdof;
    for (int k = 0; k < 3; ++k) exdof[k] = edge_dof.at(key(cell[(k + 1) % 3], cell[(k + 2) % 3]));
    for (const auto& tp : tri_rule_deg4()) {
      const std::array<double, 3> lam = {tp.l0, tp.l1, tp.l2};
      const Eigen::Vector2d x = lam[0] * mesh->vertices[cell[0]] +
                                lam[1] * mesh->vertices[cell[1]] +
                                lam[2] * mesh->vertices[cell[2]];
      gd.vol_qp.push_back({x, tp.w * area, c});
      std::array<Row, 2> pi;
      std::array<Row, 4> gr;
      for (int k = 0; k < 3; ++k) {
        const int dx = exdof[k] >= 0 ? exdof[k] : -1;
        const int dy = exdof[k] >= 0 ? exdof[k] + 1 : -1;
        const double phi = 1.0 - 2.0 * lam[k];
        const Eigen::Vector2d gphi = -2.0 * lin.grad[k];
        push(pi[0], dx, phi);
        push(pi[1], dy, phi);
        push(gr[0], dx, gphi.x());
        push(gr[1], dx, gphi.y());
        push(gr[2], dy, gphi.x());
        push(gr[3], dy, gphi.y());
      }
      gd.Pi.push_back(std::move(pi));
      gd.Grad.push_back(std::move(gr));
    }
  }

  // Jump stabilisation restoring the discrete Korn inequality: the plain
  // broken gradient leaves elementwise near-rotations uncontrolled (K_D grows
  // like 1/h and the symmetric-gradient scheme stops converging), so the
  // discrete gradient carries an extra penalty contribution
  // |e|^{-1/2} [v] (x) ox n_e at the two Gauss points of every interior and
  // Dirichlet edge. The carrier weight |e|^6 is chosen far below the cell
  // measure so that these points are invisible (O(h^2)) in consistency and
  // error norms while Sum w |row|^2 = |e|^{-1} int_e |[v]|^2 exactly
  // ([v] is linear along each edge, so two Gauss points integrate |[v]|^2).
  for (const auto& [kk, cells2] : edge_cells) {
    const bool interior = cells2[1] >= 0;
    if (!interior && edge_dof.at(kk) >= 0) continue;  // Neumann edge: no jump term
    const Eigen::Vector2d a = mesh->vertices[kk.first], b = mesh->vertices[kk.second];
    const double len = (b - a).norm();
    const Eigen::Vector2d t = (b - a) / len;
    const Eigen::Vector2d nrm(t.y(), -t.x());
    const double w = 0.5 * std::pow(len, 6);       // per-Gauss-point carrier weight
    const double kappa = 1.0 / (len * len * len);  // w * kappa^2 * |e| = 1
    const int nadj = interior ? 2 : 1;
    for (int g = 0; g < 2; ++g) {
      const double s = (g == 0 ? -1.0 : 1.0) / std::sqrt(3.0);
      const Eigen::Vector2d x = 0.5 * (a + b) + 0.5 * s * (b - a);
      gd.vol_qp.push_back({x, w, cells2[0]});
      std::array<Row, 2> pi;
      std::array<Row, 4> gr;
      for (int side = 0; side < nadj; ++side) {
        const int c = cells2[side];
        const double sign = side == 0 ? 1.0 : -1.0;
        const auto& cell = mesh->cells[c];
        const Basis lin = p1_basis(*mesh, c, x);
        for (int k = 0; k < 3; ++k) {
          const int dx = edge_dof.at(key(cell[(k + 1) % 3], cell[(k + 2) % 3]));
          if (dx < 0) continue;
          const double phi = 1.0 - 2.0 * lin.val[k];
          push(pi[0], dx, phi / nadj);
          push(pi[1], dx + 1, phi / nadj);
          const double c0 = kappa * sign * phi;
          push(gr[0], dx, c0 * nrm.x());
          push(gr[1], dx, c0 * nrm.y());
          push(gr[2], dx + 1, c0 * nrm.x());
          push(gr[3], dx + 1, c0 * nrm.y());
        }
      }
      gd.Pi.push_back(std::move(pi));
      gd.Grad.push_back(std::move(gr));
    }
  }

  // Edge-midpoint Neumann trace (constant along each edge).
  for (int e = 0; e < static_cast<int>(mesh->boundary_edges.size()); ++e) {
    const auto& be = mesh->boundary_edges[e];
    if (be.tag != BoundaryTag::Neumann) continue;
    const int dx = edge_dof.at(key(be.v0, be.v1));
    const Eigen::Vector2d a = mesh->vertices[be.v0], b = mesh->vertices[be.v1];
    const double len = (b - a).norm();
    for (const auto& gp : gauss3()) {
      gd.neu_qp.push_back({0.5 * (1.0 - gp.t) * a + 0.5 * (1.0 + gp.t) * b, 0.5 * len * gp.w, e});
      std::array<Row, 2> tr;
      push(tr[0], dx, 1.0);
      push(tr[1], dx + 1, 1.0);
      gd.Trace.push_back(std::move(tr));
    }
  }
  return gd;
}

// ---------------------------------------------------------------------------
// Nodal strain.

namespace {

/// Fragment quadrature and base-element tables shared by the gradient
/// discretisation and the reference assembly.
struct NodalBase {
  VertexDofs vd;
  DualMesh dual;
  std::vector<QuadPoint> qps;
  std::vector<int> qp_vertex;              // owning dual volume
  std::vector<std::array<Row, 2>> Pi;      // base FE reconstruction
  std::vector<std::array<Row, 4>> Grad;    // base FE gradient
  std::vector<std::array<Row, 4>> avg;     // per vertex: dual-volume average gradient
};

NodalBase nodal_base(const Mesh& m) {
  NodalBase nb;
  nb.vd = vertex_dofs(m);
  nb.dual = build_dual(m);
  std::vector<std::array<std::map<int, double>, 4>> acc(m.num_vertices());

  for (const auto& f : nb.dual.fragments) {
    static constexpr std::array<std::array<int, 3>, 2> tris = {{{0, 1, 2}, {0, 2, 3}}};
    for (const auto& t : tris) {
      const Eigen::Vector2d p0 = f.quad[t[0]], p1 = f.quad[t[1]], p2 = f.quad[t[2]];
      const double area = polygon_area({p0, p1, p2});
      for (const auto& tp : tri_rule_deg4()) {
        const Eigen::Vector2d x = tp.l0 * p0 + tp.l1 * p1 + tp.l2 * p2;
        const double w = tp.w * area;
        const Basis bs = cell_basis_at(m, f.cell, x);
        nb.qps.push_back({x, w, f.cell});
        nb.qp_vertex.push_back(f.vertex);
        std::array<Row, 2> pi;
        std::array<Row, 4> gr;
        for (int k = 0; k < bs.n; ++k) {
          const int v = m.cells[f.cell][k];
          push(pi[0], nb.vd.x[v], bs.val[k]);
          push(pi[1], nb.vd.y[v], bs.val[k]);
          push(gr[0], nb.vd.x[v], bs.grad[k].x());
          push(gr[1], nb.vd.x[v], bs.grad[k].y());
          push(gr[2], nb.vd.y[v], bs.grad[k].x());
          push(gr[3], nb.vd.y[v], bs.grad[k].y());
        }
        for (int l = 0; l < 4; ++l) axpy(acc[f.vertex][l], w, gr[l]);
        nb.Pi.push_back(std::move(pi));
        nb.Grad.push_back(std::move(gr));
      }
    }
  }

  nb.avg.resize(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v)
    for (int l = 0; l < 4; ++l) {
      for (auto& [d, c] : acc[v][l]) c /= nb.dual.volume_area[v];
      nb.avg[v][l] = to_row(acc[v][l]);
    }
  return nb;
}

/// 4x4 matrix of the map C^{-1/2} D^{1/2} acting on 2x2 gradients in the
/// component order (g11, g12, g21, g22).
Eigen::Matrix4d stabilisation_map(const GeneralTensor4& C, const GeneralTensor4& D) {
  const GeneralTensor4 R = C.sqrt().inverse().compose(D.sqrt());
  Eigen::Matrix4d T;
  for (int l = 0; l < 4; ++l) {
    Eigen::Matrix2d E = Eigen::Matrix2d::Zero();
    E(l / 2, l % 2) = 1.0;
    const Eigen::Matrix2d out = R.apply_general(E);
    T.col(l) << out(0, 0), out(0, 1), out(1, 0), out(1, 1);
  }
  return T;
}

void check_nodal_params(const Mesh& m, const NodalStrainParams& p) {
  const auto nv = static_cast<size_t>(m.num_vertices());
  if (!p.C_field.empty() && p.C_field.size() != nv)
    throw std::invalid_argument("nodal strain: C_field size must equal the vertex count");
  if (!p.D_field.empty() && p.D_field.size() != nv)
    throw std::invalid_argument("nodal strain: D_field size must equal the vertex count");
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!p.c_at(v).spd()) throw std::invalid_argument("nodal strain: C must be SPD");
    if (!p.d_at(v).spd()) throw std::invalid_argument("nodal strain: D must be SPD");
  }
}

/// Voigt strain rows (e11, e22, sqrt2 e12) from gradient rows.
std::array<std::map<int, double>, 3> strain_maps(const std::array<Row, 4>& gr) {
  std::array<std::map<int, double>, 3> s;
  axpy(s[0], 1.0, gr[0]);
  axpy(s[1], 1.0, gr[3]);
  axpy(s[2], 1.0 / std::numbers::sqrt2, gr[1]);
  axpy(s[2], 1.0 / std::numbers::sqrt2, gr[2]);
  return s;
}

}  // namespace

GradientDiscretisation build_nodal_strain(std::shared_ptr<const Mesh> mesh,
                                          const NodalStrainParams& params) {
  check_nodal_params(*mesh, params);
  NodalBase nb = nodal_base(*mesh);

  GradientDiscretisation gd;
  gd.mesh = mesh;
  gd.descriptor = "nodal";
  gd.dof_count = nb.vd.count;
  gd.vol_qp = std::move(nb.qps);
  gd.qp_region = nb.qp_vertex;
  gd.Pi = std::move(nb.Pi);

  std::vector<Eigen::Matrix4d> T(mesh->num_vertices());
  for (int v = 0; v < mesh->num_vertices(); ++v)
    T[v] = stabilisation_map(params.c_at(v), params.d_at(v));

  gd.Grad.resize(gd.vol_qp.size());
  for (size_t q = 0; q < gd.vol_qp.size(); ++q) {
    const int v = gd.qp_region[q];
    for (int k = 0; k < 4; ++k) {
      std::map<int, double> acc;
      axpy(acc, 1.0, nb.avg[v][k]);
      for (int l = 0; l < 4; ++l) {
        axpy(acc, T[v](k, l), nb.Grad[q][l]);
        axpy(acc, -T[v](k, l), nb.avg[v][l]);
      }
      gd.Grad[q][k] = to_row(acc);
    }
  }
  append_vertex_trace(gd, nb.vd);
  return gd;
}

SpMat assemble_nodal_strain_reference(std::shared_ptr<const Mesh> mesh,
                                      const NodalStrainParams& params) {
  check_nodal_params(*mesh, params);
  const NodalBase nb = nodal_base(*mesh);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nb.vd.count, nb.vd.count);

  auto add_form = [&K](const std::array<std::map<int, double>, 3>& rows,
                       const Eigen::Matrix3d& V, double w) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double cab = w * V(a, b);
        if (cab == 0.0) continue;
        for (const auto& [d1, c1] : rows[a])
          for (const auto& [d2, c2] : rows[b]) K(d1, d2) += cab * c1 * c2;
      }
  };

  // projection term: |V| C Pi* eps : Pi* eps per dual volume
  for (int v = 0; v < mesh->num_vertices(); ++v)
    add_form(strain_maps(nb.avg[v]), params.c_at(v).V, nb.dual.volume_area[v]);

  // stabilisation term: int D (eps - Pi* eps):(eps - Pi* eps) over fragments
  for (size_t q = 0; q < nb.qps.size(); ++q) {
    const int v = nb.qp_vertex[q];
    auto diff = strain_maps(nb.Grad[q]);
    const auto avg = strain_maps(nb.avg[v]);
    for (int a = 0; a < 3; ++a)
      for (const auto& [d, c] : avg[a]) diff[a][d] -= c;
    add_form(diff, params.d_at(v).V, nb.qps[q].w);
  }
  return K.sparseView();
}

std::function<Eigen::Matrix3d(int)> nodal_qp_stiffness(const GradientDiscretisation& gd,
                                                       const NodalStrainParams& params) {
  const GradientDiscretisation* g = &gd;
  return [g, params](int q) {
    const int region = g->qp_region.empty() ? g->vol_qp[q].cell : g->qp_region[q];
    return params.c_at(region).V;
  };
}

// ---------------------------------------------------------------------------
// Hu-Washizu.

double sbox_inner(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Vector3d w(4.0, 4.0 / 3.0, 4.0 / 3.0);
  double s = 0.0;
  for (int m = 0; m < 3; ++m)
    s += w[m] * (a(0, m) * b(0, m) + a(1, m) * b(1, m) + 2.0 * a(2, m) * b(2, m));
  return s;
}

SBoxDecomposition decompose_Sh(int space_choice, double lambda, double mu) {
  if (space_choice < 1 || space_choice > 3)
    throw std::invalid_argument("hu-washizu: space_choice must be 1, 2 or 3");
  if (!IsoTensor4::from_lame(lambda, mu).positive_definite())
    throw std::invalid_argument("hu-washizu: Lame parameters must give an SPD stiffness");
  auto elem = [](int comp, int mono) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m(comp, mono) = 1.0;
    return m;
  };
  SBoxDecomposition d;
  if (space_choice == 3) {
    d.c_basis = {elem(0, 0), elem(1, 0), elem(2, 0), elem(2, 1), elem(2, 2)};
  } else {
    d.c_basis = {elem(0, 0), elem(1, 0), elem(2, 0)};
    if (space_choice == 2) {
      d.c_basis.push_back(elem(2, 1));
      d.c_basis.push_back(elem(2, 2));
    }
    d.t_basis = {elem(0, 2), elem(1, 1)};
  }
  for (auto* set : {&d.c_basis, &d.t_basis})
    for (auto& b : *set) b /= std::sqrt(sbox_inner(b, b));
  d.skew_basis = {Eigen::Vector3d(1.0, 0.0, 0.0)};
  if (space_choice >= 2) {
    d.skew_basis.emplace_back(0.0, 1.0, 0.0);
    d.skew_basis.emplace_back(0.0, 0.0, 1.0);
  }
  return d;
}

namespace {

/// Apply an isotropic tensor to symmetric coefficient matrices (acts
/// monomial-by-monomial since the coefficients are constant).
Eigen::Matrix3d iso_apply_coeffs(const IsoTensor4& c, const Eigen::Matrix3d& s) {
  Eigen::Matrix3d out;
  for (int m = 0; m < 3; ++m) {
    const double tr = s(0, m) + s(1, m);
    out(0, m) = c.a * tr + c.b * s(0, m);
    out(1, m) = c.a * tr + c.b * s(1, m);
    out(2, m) = c.b * s(2, m);
  }
  return out;
}

Eigen::Matrix3d project(const Eigen::Matrix3d& s, const std::vector<Eigen::Matrix3d>& basis) {
  Eigen::Matrix3d out = Eigen::Matrix3d::Zero();
  for (const auto& b : basis) out += sbox_inner(s, b) * b;
  return out;
}

struct HWCell {
  Eigen::Matrix2d J;
  double detJ = 0.0;
  Eigen::Vector2d center;
  // per local dof (k, comp) flattened as 2*k + comp: symmetric coefficient
  // matrix of the full strain and its projections
  std::array<Eigen::Matrix3d, 8> eps, eps_c, eps_t;
  std::array<Eigen::Vector3d, 8> skew;  // skew scalar coefficients of grad
};

HWCell hw_cell(const Mesh& m, int c, const SBoxDecomposition& dec) {
  HWCell hc;
  const auto& cell = m.cells[c];
  hc.J.col(0) = 0.5 * (m.vertices[cell[1]] - m.vertices[cell[0]]);
  hc.J.col(1) = 0.5 * (m.vertices[cell[3]] - m.vertices[cell[0]]);
  hc.detJ = hc.J.determinant();
  hc.center = 0.25 * (m.vertices[cell[0]] + m.vertices[cell[1]] + m.vertices[cell[2]] +
                      m.vertices[cell[3]]);
  const Eigen::Matrix2d JinvT = hc.J.inverse().transpose();
  for (int k = 0; k < 4; ++k) {
    const double xk = kQ1Corner[k][0], yk = kQ1Corner[k][1];
    // reference derivatives of N_k as coefficients over (1, xi, eta)
    const Eigen::Vector3d dxi(0.25 * xk, 0.0, 0.25 * xk * yk);
    const Eigen::Vector3d deta(0.25 * yk, 0.25 * xk * yk, 0.0);
    const Eigen::Vector3d gx = JinvT(0, 0) * dxi + JinvT(0, 1) * deta;
    const Eigen::Vector3d gy = JinvT(1, 0) * dxi + JinvT(1, 1) * deta;
    for (int comp = 0; comp < 2; ++comp) {
      const int ld = 2 * k + comp;
      Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
      if (comp == 0) {
        s.row(0) = gx.transpose();
        s.row(2) = 0.5 * gy.transpose();
        hc.skew[ld] = 0.5 * gy;  // (0,1) entry of the skew part
      } else {
        s.row(1) = gy.transpose();
        s.row(2) = 0.5 * gx.transpose();
        hc.skew[ld] = -0.5 * gx;
      }
      hc.eps[ld] = s;
      hc.eps_c[ld] = project(s, dec.c_basis);
      hc.eps_t[ld] = project(s, dec.t_basis);
    }
  }
  return hc;
}

void check_hw(const Mesh& m, const HuWashizuParams& p) {
  if (m.kind != CellKind::Quad)
    throw std::invalid_argument("hu-washizu requires a quadrilateral mesh");
  if (!m.all_parallelograms())
    throw std::invalid_argument("hu-washizu requires parallelogram cells");
  if (!(p.theta > 0.0)) throw std::invalid_argument("hu-washizu: theta must be positive");
}

}  // namespace

GradientDiscretisation build_huwashizu(std::shared_ptr<const Mesh> mesh,
                                       const HuWashizuParams& params) {
  check_hw(*mesh, params);
  const SBoxDecomposition dec = decompose_Sh(params.space_choice, params.lambda, params.mu);
  const IsoTensor4 C = IsoTensor4::from_lame(params.lambda, params.mu);
  const IsoTensor4 Cinvsqrt = C.sqrt().inverse();
  const double st = std::sqrt(params.theta);

  GradientDiscretisation gd;
  gd.mesh = mesh;
  gd.descriptor = "huw-S" + std::to_string(params.space_choice);
  const VertexDofs vd = vertex_dofs(*mesh);
  gd.dof_count = vd.count;

  for (int c = 0; c < mesh->num_cells(); ++c) {
    const HWCell hc = hw_cell(*mesh, c, dec);
    std::array<Eigen::Matrix3d, 8> sym;
    std::array<Eigen::Vector3d, 8> skw;
    for (int ld = 0; ld < 8; ++ld) {
      sym[ld] = hc.eps_c[ld] + st * iso_apply_coeffs(Cinvsqrt, hc.eps_t[ld]);
      skw[ld] = hc.skew[ld];
      if (params.space_choice == 1) skw[ld].tail<2>().setZero();  // skew space is constants only
    }
    for (const auto& qp : quad_rule_3x3()) {
      const Eigen::Vector3d mono(1.0, qp.xi, qp.eta);
      gd.vol_qp.push_back(
          {hc.center + hc.J * Eigen::Vector2d(qp.xi, qp.eta), qp.w * hc.detJ, c});
      std::array<Row, 2> pi;
      std::array<Row, 4> gr;
      for (int k = 0; k < 4; ++k) {
        const double xk = kQ1Corner[k][0], yk = kQ1Corner[k][1];
        const double val = 0.25 * (1.0 + qp.xi * xk) * (1.0 + qp.eta * yk);
        push(pi[0], vd.x[mesh->cells[c][k]], val);
        push(pi[1], vd.y[mesh->cells[c][k]], val);
        for (int comp = 0; comp < 2; ++comp) {
          const int dof = comp == 0 ? vd.x[mesh->cells[c][k]] : vd.y[mesh->cells[c][k]];
          const int ld = 2 * k + comp;
          const Eigen::Vector3d sv = sym[ld] * mono;  // (s11, s22, s12)
          const double w = skw[ld].dot(mono);
          push(gr[0], dof, sv[0]);
          push(gr[1], dof, sv[2] + w);
          push(gr[2], dof, sv[2] - w);
          push(gr[3], dof, sv[1]);
        }
      }
      gd.Pi.push_back(std::move(pi));
      gd.Grad.push_back(std::move(gr));
    }
  }
  append_vertex_trace(gd, vd);
  return gd;
}

SpMat assemble_huwashizu_reference(std::shared_ptr<const Mesh> mesh,
                                   const HuWashizuParams& params) {
  check_hw(*mesh, params);
  const SBoxDecomposition dec = decompose_Sh(params.space_choice, params.lambda, params.mu);
  const IsoTensor4 C = IsoTensor4::from_lame(params.lambda, params.mu);
  const VertexDofs vd = vertex_dofs(*mesh);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(vd.count, vd.count);

  for (int c = 0; c < mesh->num_cells(); ++c) {
    const HWCell hc = hw_cell(*mesh, c, dec);
    std::array<int, 8> dofs;
    for (int k = 0; k < 4; ++k) {
      dofs[2 * k] = vd.x[mesh->cells[c][k]];
      dofs[2 * k + 1] = vd.y[mesh->cells[c][k]];
    }
    for (int i = 0; i < 8; ++i) {
      if (dofs[i] < 0) continue;
      const Eigen::Matrix3d Ri = hc.eps_c[i] + hc.eps_t[i];  // P_S eps(v_i)
      for (int j = 0; j < 8; ++j) {
        if (dofs[j] < 0) continue;
        const Eigen::Matrix3d Lj =
            iso_apply_coeffs(C, hc.eps_c[j]) + params.theta * hc.eps_t[j];  // C_h P_S eps(u_j)
        K(dofs[i], dofs[j]) += hc.detJ * sbox_inner(Lj, Ri);
      }
    }
  }
  return K.sparseView();
}

}  // namespace gse
