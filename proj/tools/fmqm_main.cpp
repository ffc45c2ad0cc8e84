#include "fmqm/cli.hpp"

int main(int argc, char** argv) { return fmqm::cli::run(argc, argv); }
