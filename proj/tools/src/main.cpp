#include "purgelab/cli.hpp"

int main(int argc, char** argv) { return purgelab::run_cli(argc, argv); }
