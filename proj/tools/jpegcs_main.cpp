#include "jpegcs/cli.hpp"

int main(int argc, char** argv) { return jpegcs::cli::run(argc, argv); }
