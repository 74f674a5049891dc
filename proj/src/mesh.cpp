#include "gse/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gse {

double polygon_area(const std::vector<Eigen::Vector2d>& pts) {
  double a = 0.0;
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& p = pts[i];
    const auto& q = pts[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double Mesh::cell_area(int c) const {
  std::vector<Eigen::Vector2d> pts;
  for (int k = 0; k < cell_size(); ++k) pts.push_back(vertices[cells[c][k]]);
  return polygon_area(pts);
}

Eigen::Vector2d Mesh::cell_centroid(int c) const {
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  for (int k = 0; k < cell_size(); ++k) s += vertices[cells[c][k]];
  return s / cell_size();
}

double Mesh::domain_area() const {
  double a = 0.0;
  for (int c = 0; c < num_cells(); ++c) a += cell_area(c);
  return a;
}

double Mesh::mesh_size() const {
  double h = 0.0;
  for (int c = 0; c < num_cells(); ++c)
    for (int k = 0; k < cell_size(); ++k) {
      const auto& p = vertices[cells[c][k]];
      const auto& q = vertices[cells[c][(k + 1) % cell_size()]];
      h = std::max(h, (p - q).norm());
    }
  return h;
}

bool Mesh::vertex_on_dirichlet(int v) const {
  for (const auto& e : boundary_edges)
    if (e.tag == BoundaryTag::Dirichlet && (e.v0 == v || e.v1 == v)) return true;
  return false;
}

Eigen::Vector2d Mesh::edge_outward_normal(int e) const {
  const auto& be = boundary_edges[e];
  const Eigen::Vector2d a = vertices[be.v0], b = vertices[be.v1];
  const Eigen::Vector2d t = (b - a).normalized();
  Eigen::Vector2d n(t.y(), -t.x());
  // orient away from the adjacent cell
  for (int c = 0; c < num_cells(); ++c) {
    bool has0 = false, has1 = false;
    for (int k = 0; k < cell_size(); ++k) {
      if (cells[c][k] == be.v0) has0 = true;
      if (cells[c][k] == be.v1) has1 = true;
    }
    if (has0 && has1) {
      if (n.dot(cell_centroid(c) - 0.5 * (a + b)) > 0.0) n = -n;
      return n;
    }
  }
  throw std::runtime_error("edge_outward_normal: boundary edge not attached to any cell");
}

bool Mesh::all_parallelograms(double tol) const {
  if (kind != CellKind::Quad) return false;
  for (const auto& c : cells) {
    const Eigen::Vector2d e01 = vertices[c[1]] - vertices[c[0]];
    const Eigen::Vector2d e32 = vertices[c[2]] - vertices[c[3]];
    if ((e01 - e32).norm() > tol) return false;
  }
  return true;
}

void Mesh::validate() const {
  const int nv = num_vertices();
  for (int c = 0; c < num_cells(); ++c) {
    for (int k = 0; k < cell_size(); ++k) {
      const int v = cells[c][k];
      if (v < 0 || v >= nv)
        throw std::runtime_error("mesh: cell " + std::to_string(c) + " has invalid vertex id");
    }
    if (cell_area(c) <= 0.0)
      throw std::runtime_error("mesh: cell " + std::to_string(c) + " has negative area");
  }

  // boundary edges must cover the topological boundary exactly once
  std::map<std::pair<int, int>, int> edge_count;
  for (int c = 0; c < num_cells(); ++c)
    for (int k = 0; k < cell_size(); ++k) {
      int a = cells[c][k], b = cells[c][(k + 1) % cell_size()];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  std::set<std::pair<int, int>> boundary;
  for (const auto& [e, cnt] : edge_count)
    if (cnt == 1) boundary.insert(e);

  std::set<std::pair<int, int>> tagged;
  bool has_dirichlet = false;
  for (const auto& be : boundary_edges) {
    auto key = std::minmax(be.v0, be.v1);
    if (!boundary.count({key.first, key.second}))
      throw std::runtime_error("mesh: tagged edge (" + std::to_string(be.v0) + "," +
                               std::to_string(be.v1) + ") is not a boundary edge");
    if (!tagged.insert({key.first, key.second}).second)
      throw std::runtime_error("mesh: boundary edge tagged twice");
    if (be.tag == BoundaryTag::Dirichlet) has_dirichlet = true;
  }
  if (tagged.size() != boundary.size())
    throw std::runtime_error("mesh: " + std::to_string(boundary.size() - tagged.size()) +
                             " boundary edge(s) left untagged");
  if (!has_dirichlet) throw std::runtime_error("mesh: Dirichlet boundary part is empty");
}

Mesh generate_unit_square(int n, CellKind kind, const TagRule& tag) {
  if (n < 1) throw std::invalid_argument("generate_unit_square: n must be >= 1");
  Mesh m;
  m.kind = kind;
  const double h = 1.0 / n;
  auto vid = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.emplace_back(i * h, j * h);

  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      if (kind == CellKind::Quad) {
        m.cells.push_back({a, b, c, d});
      } else {
        m.cells.push_back({a, b, c, -1});
        m.cells.push_back({a, c, d, -1});
      }
    }

  auto add_edge = [&](int a, int b) {
    const Eigen::Vector2d mid = 0.5 * (m.vertices[a] + m.vertices[b]);
    m.boundary_edges.push_back({a, b, tag(mid)});
  };
  for (int i = 0; i < n; ++i) add_edge(vid(i, 0), vid(i + 1, 0));          // bottom
  for (int j = 0; j < n; ++j) add_edge(vid(n, j), vid(n, j + 1));          // right
  for (int i = n; i > 0; --i) add_edge(vid(i, n), vid(i - 1, n));          // top
  for (int j = n; j > 0; --j) add_edge(vid(0, j), vid(0, j - 1));          // left

  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Text IO.  Format: line 1 "nv nc nb kind"; nv lines "x y"; nc lines of 3 or 4
// zero-based vertex ids; nb lines "v0 v1 tag" with tag in {D, N}.

namespace {

struct LineReader {
  std::istream& in;
  int lineno = 0;
  bool next(std::string& out) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++lineno;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      std::istringstream probe(raw);
      std::string tok;
      if (probe >> tok) {
        out = raw;
        return true;
      }
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("mesh parse error at line " + std::to_string(lineno) + ": " + msg);
  }
};

}  // namespace

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  LineReader r{in};
  std::string line;

  if (!r.next(line)) r.fail("missing header");
  std::istringstream hdr(line);
  int nv = 0, nc = 0, nb = 0;
  std::string kind;
  if (!(hdr >> nv >> nc >> nb >> kind)) r.fail("expected 'nv nc nb kind'");
  Mesh m;
  if (kind == "tri")
    m.kind = CellKind::Tri;
  else if (kind == "quad")
    m.kind = CellKind::Quad;
  else
    r.fail("unknown cell kind '" + kind + "'");

  for (int i = 0; i < nv; ++i) {
    if (!r.next(line)) r.fail("unexpected end of file in vertex list");
    std::istringstream s(line);
    double x, y;
    if (!(s >> x >> y)) r.fail("expected 'x y'");
    m.vertices.emplace_back(x, y);
  }
  const int cs = m.cell_size();
  for (int i = 0; i < nc; ++i) {
    if (!r.next(line)) r.fail("unexpected end of file in cell list");
    std::istringstream s(line);
    std::array<int, 4> c{-1, -1, -1, -1};
    for (int k = 0; k < cs; ++k)
      if (!(s >> c[k])) r.fail("expected " + std::to_string(cs) + " vertex ids");
    m.cells.push_back(c);
  }
  for (int i = 0; i < nb; ++i) {
    if (!r.next(line)) r.fail("unexpected end of file in boundary list");
    std::istringstream s(line);
    int a, b;
    std::string t;
    if (!(s >> a >> b >> t)) r.fail("expected 'v0 v1 tag'");
    BoundaryTag tag;
    if (t == "D")
      tag = BoundaryTag::Dirichlet;
    else if (t == "N")
      tag = BoundaryTag::Neumann;
    else
      r.fail("unknown boundary tag '" + t + "'");
    m.boundary_edges.push_back({a, b, tag});
  }
  m.validate();
  return m;
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open mesh file for writing: " + path);
  out.precision(17);
  out << mesh.num_vertices() << ' ' << mesh.num_cells() << ' ' << mesh.boundary_edges.size()
      << ' ' << (mesh.kind == CellKind::Tri ? "tri" : "quad") << '\n';
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << '\n';
  for (const auto& c : mesh.cells) {
    for (int k = 0; k < mesh.cell_size(); ++k) out << (k ? " " : "") << c[k];
    out << '\n';
  }
  for (const auto& e : mesh.boundary_edges)
    out << e.v0 << ' ' << e.v1 << ' ' << (e.tag == BoundaryTag::Dirichlet ? 'D' : 'N') << '\n';
}

// ---------------------------------------------------------------------------

DualMesh build_dual(const Mesh& mesh) {
  DualMesh dm;
  dm.volume_area.assign(mesh.num_vertices(), 0.0);
  dm.fragments_of_vertex.resize(mesh.num_vertices());

  const int cs = mesh.cell_size();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::Vector2d bary = mesh.cell_centroid(c);
    for (int k = 0; k < cs; ++k) {
      const int v = mesh.cells[c][k];
      const int vn = mesh.cells[c][(k + 1) % cs];
      const int vp = mesh.cells[c][(k + cs - 1) % cs];
      DualMesh::Fragment f;
      f.cell = c;
      f.vertex = v;
      f.quad = {mesh.vertices[v], 0.5 * (mesh.vertices[v] + mesh.vertices[vn]), bary,
                0.5 * (mesh.vertices[v] + mesh.vertices[vp])};
      f.area = polygon_area({f.quad.begin(), f.quad.end()});
      dm.volume_area[v] += f.area;
      dm.fragments_of_vertex[v].push_back(static_cast<int>(dm.fragments.size()));
      dm.fragments.push_back(f);
    }
  }
  return dm;
}

}  // namespace gse
