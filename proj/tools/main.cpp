#include "skilllab/cli.hpp"

int main(int argc, char** argv) { return skilllab::cli_main(argc, argv); }
