#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "hip/mesh.hpp"

// Writes the plain-text mesh description ("kind n", vertex and element
// lines) for a structured mesh of the unit square.

int main(int argc, char** argv) {
  if (argc < 3 || argc > 4) {
    std::cerr << "usage: mesh_dump {tri|quad} n [out.txt]\n";
    return 2;
  }
  const std::string kind = argv[1];
  if (kind != "tri" && kind != "quad") {
    std::cerr << "error: kind must be tri or quad\n";
    return 2;
  }
  int n = 0;
  try {
    n = std::stoi(argv[2]);
  } catch (const std::exception&) {
    std::cerr << "error: n must be an integer\n";
    return 2;
  }

  try {
    const hip::mesh::Mesh m = hip::mesh::generate(
        kind == "tri" ? hip::mesh::ElementKind::triangle : hip::mesh::ElementKind::quad, n);
    if (argc == 4) {
      std::ofstream out(argv[3]);
      if (!out) {
        std::cerr << "error: cannot open '" << argv[3] << "'\n";
        return 2;
      }
      hip::mesh::dump(m, out);
    } else {
      hip::mesh::dump(m, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
