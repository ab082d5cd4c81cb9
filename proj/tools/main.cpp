#include "cgbp/cli.hpp"

int main(int argc, char** argv) { return cgbp::run_cli(argc, argv); }
