#include "cli.hpp"

int main(int argc, char** argv) { return sgm::cli_dispatch(argc, argv); }
