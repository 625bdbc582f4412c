#include "cli.hpp"

int main(int argc, char** argv) { return cellforge::cli::run(argc, argv); }
