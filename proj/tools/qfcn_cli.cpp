#include "qfcn/cli.hpp"

int main(int argc, char** argv) { return qfcn::run_command(argc, argv); }
