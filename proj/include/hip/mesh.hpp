#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

// Structured conforming meshes of the unit square, either 2n^2 right
// triangles (each grid cell split along the lower-left -> upper-right
// diagonal) or n^2 axis-aligned squares.  Faces are stored once, with a
// globally fixed orientation so that trace unknowns living on them have an
// unambiguous parametrization.

namespace hip::mesh {

enum class ElementKind { triangle, quad };

struct Element {
  std::array<int, 4> v{-1, -1, -1, -1};  // vertex ids, counterclockwise
  int nv = 0;
  std::array<int, 4> faces{-1, -1, -1, -1};  // face ids, faces[i] joins v[i] -> v[(i+1)%nv]
  double diameter = 0.0;
  double area = 0.0;
  // Area-based length scale: sqrt(2*area) for triangles, sqrt(area) for
  // quads.  On these structured meshes both equal the grid spacing 1/n.
  // The penalty uses this scale rather than the diameter; see README.
  double cell_size = 0.0;
};

struct Face {
  // Endpoint vertex ids with v[0] < v[1]; the face parametrization t in [0,1]
  // runs from v[0] to v[1].
  std::array<int, 2> v{-1, -1};
  // Adjacent element ids, elem[0] < elem[1]; interior faces have two,
  // boundary faces keep elem[1] = -1.
  std::array<int, 2> elem{-1, -1};
  bool boundary = false;
  double length = 0.0;
  // Unit normal pointing from elem[0] into elem[1] (outward for boundary
  // faces).
  Eigen::Vector2d normal = Eigen::Vector2d::Zero();
};

struct Mesh {
  ElementKind kind = ElementKind::triangle;
  int n = 0;
  std::vector<Eigen::Vector2d> vertices;
  std::vector<Element> elements;
  std::vector<Face> faces;

  int n_interior_faces = 0;

  const Eigen::Vector2d& vertex(int i) const { return vertices[static_cast<size_t>(i)]; }
  double max_diameter() const;

  // Sign s such that s * faces[f].normal is the outward normal of element e.
  double normal_sign(int e, int f) const;
  // Local index of face f within element e; throws if f is not a face of e.
  int local_face_index(int e, int f) const;
};

// Uniform mesh of (0,1)^2 with n subdivisions per side; n >= 1.
Mesh generate(ElementKind kind, int n);

// Plain-text dump: one "v x y" line per vertex and one
// "e v0 v1 v2[ v3]" line per element, preceded by a "kind n" header.
void dump(const Mesh& m, std::ostream& os);

}  // namespace hip::mesh
