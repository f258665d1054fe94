#include "tds/cli.hpp"

int main(int argc, char** argv) { return tds::run_cli(argc, argv); }
