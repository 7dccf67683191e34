#include "squadforge/cli.hpp"

int main(int argc, char** argv) { return squadforge::run(argc, argv); }
