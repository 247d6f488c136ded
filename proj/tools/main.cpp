#include "cli.hpp"

int main(int argc, char** argv) { return ocsmm::cli::run(argc, argv); }
