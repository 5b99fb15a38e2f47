#include "strapsim/cli/app.hpp"

int main(int argc, char** argv) { return strapsim::cli::run(argc, argv); }
