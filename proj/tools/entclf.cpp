#include "entclf/cli.hpp"

int main(int argc, char** argv) { return entclf::run_cli(argc, argv); }
