#include "ordbayes/cli.hpp"

int main(int argc, char** argv) { return ordbayes::run(argc, argv); }
