#include "radsing/cli.hpp"

int main(int argc, char** argv) { return radsing::run_cli(argc, argv); }
