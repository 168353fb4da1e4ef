#include "gaborcs/harness.hpp"

int main(int argc, char** argv) { return gaborcs::cli_main(argc, argv); }
