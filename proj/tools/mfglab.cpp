#include "mfglab/cli.hpp"

int main(int argc, char** argv) { return mfglab::run_cli(argc, argv); }
