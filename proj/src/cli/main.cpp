#include "hip/cli.hpp"

int main(int argc, char** argv) { return hip::cli::run_main(argc, argv); }
