#include "vlnforge/cli.hpp"

int main(int argc, char** argv) { return vlnforge::cli_main(argc, argv); }
