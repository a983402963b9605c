#include "esqpt/cli.hpp"

int main(int argc, char** argv) { return esqpt::run(argc, argv); }
