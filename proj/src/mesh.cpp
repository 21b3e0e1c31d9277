#include "hip/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace hip::mesh {

namespace {

Eigen::Vector2d centroid(const Mesh& m, const Element& e) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int i = 0; i < e.nv; ++i) c += m.vertex(e.v[static_cast<size_t>(i)]);
  return c / e.nv;
}

double polygon_area(const Mesh& m, const Element& e) {
  double a = 0.0;
  for (int i = 0; i < e.nv; ++i) {
    const Eigen::Vector2d& p = m.vertex(e.v[static_cast<size_t>(i)]);
    const Eigen::Vector2d& q = m.vertex(e.v[static_cast<size_t>((i + 1) % e.nv)]);
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

double polygon_diameter(const Mesh& m, const Element& e) {
  double d = 0.0;
  for (int i = 0; i < e.nv; ++i)
    for (int j = i + 1; j < e.nv; ++j)
      d = std::max(d, (m.vertex(e.v[static_cast<size_t>(i)]) -
                       m.vertex(e.v[static_cast<size_t>(j)]))
                          .norm());
  return d;
}

}  // namespace

Mesh generate(ElementKind kind, int n) {
  if (n < 1) throw std::invalid_argument("mesh::generate: n must be >= 1");

  Mesh m;
  m.kind = kind;
  m.n = n;

  const int nv = n + 1;
  m.vertices.reserve(static_cast<size_t>(nv) * nv);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nv; ++i)
      m.vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  auto vid = [nv](int i, int j) { return j * nv + i; };

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      if (kind == ElementKind::triangle) {
        // Cell diagonal runs from the lower-left to the upper-right corner.
        Element lo;
        lo.nv = 3;
        lo.v = {v00, v10, v11, -1};
        m.elements.push_back(lo);
        Element hi;
        hi.nv = 3;
        hi.v = {v00, v11, v01, -1};
        m.elements.push_back(hi);
      } else {
        Element q;
        q.nv = 4;
        q.v = {v00, v10, v11, v01};
        m.elements.push_back(q);
      }
    }
  }

  // Collect faces; the map keys are sorted endpoint pairs, so each interior
  // face is found twice and recorded once.
  std::map<std::pair<int, int>, int> index;
  for (int e = 0; e < static_cast<int>(m.elements.size()); ++e) {
    Element& el = m.elements[static_cast<size_t>(e)];
    for (int s = 0; s < el.nv; ++s) {
      const int a = el.v[static_cast<size_t>(s)];
      const int b = el.v[static_cast<size_t>((s + 1) % el.nv)];
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto it = index.find(key);
      if (it == index.end()) {
        Face f;
        f.v = {key.first, key.second};
        f.elem = {e, -1};
        f.length = (m.vertex(key.second) - m.vertex(key.first)).norm();
        const int id = static_cast<int>(m.faces.size());
        index.emplace(key, id);
        m.faces.push_back(f);
        el.faces[static_cast<size_t>(s)] = id;
      } else {
        Face& f = m.faces[static_cast<size_t>(it->second)];
        f.elem[1] = e;  // second visitor has the larger element id
        el.faces[static_cast<size_t>(s)] = it->second;
      }
    }
  }

  for (auto& f : m.faces) {
    f.boundary = (f.elem[1] < 0);
    const Eigen::Vector2d t = m.vertex(f.v[1]) - m.vertex(f.v[0]);
    Eigen::Vector2d nrm(t.y(), -t.x());
    nrm.normalize();
    const Eigen::Vector2d mid = 0.5 * (m.vertex(f.v[0]) + m.vertex(f.v[1]));
    const Eigen::Vector2d c0 = centroid(m, m.elements[static_cast<size_t>(f.elem[0])]);
    // Orient from the lower-id element towards the higher-id one (outward on
    // the boundary).
    if (nrm.dot(mid - c0) < 0) nrm = -nrm;
    f.normal = nrm;
    if (!f.boundary) ++m.n_interior_faces;
  }

  for (auto& el : m.elements) {
    el.area = polygon_area(m, el);
    el.diameter = polygon_diameter(m, el);
    el.cell_size = (el.nv == 3) ? std::sqrt(2.0 * el.area) : std::sqrt(el.area);
  }

  return m;
}

double Mesh::max_diameter() const {
  double d = 0.0;
  for (const auto& e : elements) d = std::max(d, e.diameter);
  return d;
}

double Mesh::normal_sign(int e, int f) const {
  const Face& fc = faces[static_cast<size_t>(f)];
  if (fc.elem[0] == e) return 1.0;
  if (fc.elem[1] == e) return -1.0;
  throw std::invalid_argument("mesh::normal_sign: face does not belong to element");
}

int Mesh::local_face_index(int e, int f) const {
  const Element& el = elements[static_cast<size_t>(e)];
  for (int s = 0; s < el.nv; ++s)
    if (el.faces[static_cast<size_t>(s)] == f) return s;
  throw std::invalid_argument("mesh::local_face_index: face does not belong to element");
}

void dump(const Mesh& m, std::ostream& os) {
  os << (m.kind == ElementKind::triangle ? "tri" : "quad") << ' ' << m.n << '\n';
  for (const auto& v : m.vertices) os << "v " << v.x() << ' ' << v.y() << '\n';
  for (const auto& e : m.elements) {
    os << 'e';
    for (int i = 0; i < e.nv; ++i) os << ' ' << e.v[static_cast<size_t>(i)];
    os << '\n';
  }
}

}  // namespace hip::mesh
