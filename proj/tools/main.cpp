#include "commands.hpp"

int main(int argc, char** argv) { return axsq::cli::main_entry(argc, argv); }
